#include "clarity/config.hpp"

#include <cmath>

namespace clarity {

std::vector<double> InferenceConfig::tau_grid() const {
  std::vector<double> grid;
  // Integer stepping avoids drift from repeated float addition.
  long long lo = std::llround(tau_grid_min * 1000.0);
  long long hi = std::llround(tau_grid_max * 1000.0);
  long long step = std::llround(tau_grid_step * 1000.0);
  if (step <= 0 || hi < lo) throw UsageError("inference: invalid tau grid");
  for (long long v = lo; v <= hi; v += step)
    grid.push_back(static_cast<double>(v) / 1000.0);
  return grid;
}

JudgeOptions InferenceConfig::judge_options(std::size_t max_input_len) const {
  JudgeOptions opts;
  opts.tau = tau;
  opts.evidence = evidence_mode_from_string(evidence);
  opts.max_generate_len = max_generate_len;
  opts.max_input_len = max_input_len;
  opts.norm_token_cap = norm_token_cap;
  return opts;
}

void PipelineConfig::validate() const {
  if (dataset.kind != "moral_stories" && dataset.kind != "ethics")
    throw UsageError("dataset.kind must be 'moral_stories' or 'ethics', got '" +
                     dataset.kind + "'");
  if (client.kind != "stub" && client.kind != "network")
    throw UsageError("client.kind must be 'stub' or 'network', got '" + client.kind +
                     "'");
  evidence_mode_from_string(inference.evidence);  // throws on bad value
  if (inference.tau < 0.0 || inference.tau > 1.0)
    throw UsageError("inference.tau must lie in [0, 1]");
  inference.tau_grid();  // throws on bad grid
  if (seeds.empty()) throw UsageError("seeds must contain at least one value");
  if (model.hidden <= 0) throw UsageError("model.hidden must be positive");
  if (model.max_positions <= 1) throw UsageError("model.max_positions must exceed 1");
  if (train.batch_size <= 0) throw UsageError("train.batch_size must be positive");
  if (train.epochs <= 0) throw UsageError("train.epochs must be positive");
  if (train.max_steps <= 0) throw UsageError("train.max_steps must be positive");
  if (dataset.validation_fraction < 0.0 || dataset.validation_fraction >= 1.0)
    throw UsageError("dataset.validation_fraction must lie in [0, 1)");
  if (!ablation.pretrain && (ablation.finetune || ablation.contrastive))
    throw UsageError("ablation: finetune and contrastive require pretrain");
}

json to_json(const PipelineConfig& c) {
  return json{
      {"dataset",
       {{"kind", c.dataset.kind},
        {"train_path", c.dataset.train_path},
        {"test_path", c.dataset.test_path},
        {"justice_train", c.dataset.justice_train},
        {"justice_test", c.dataset.justice_test},
        {"deontology_train", c.dataset.deontology_train},
        {"deontology_test", c.dataset.deontology_test},
        {"virtue_train", c.dataset.virtue_train},
        {"virtue_test", c.dataset.virtue_test},
        {"norms_file", c.dataset.norms_file},
        {"validation_fraction", c.dataset.validation_fraction},
        {"validation_seed", c.dataset.validation_seed}}},
      {"client",
       {{"kind", c.client.kind},
        {"model", c.client.model},
        {"base_url", c.client.base_url},
        {"api_key_env", c.client.api_key_env}}},
      {"model", {{"hidden", c.model.hidden}, {"max_positions", c.model.max_positions}}},
      {"train",
       {{"lr", c.train.lr},
        {"batch_size", c.train.batch_size},
        {"max_steps", c.train.max_steps},
        {"epochs", c.train.epochs},
        {"lambda_rgen", c.train.lambda_rgen},
        {"lambda_ngen", c.train.lambda_ngen},
        {"lambda_triplet", c.train.lambda_triplet},
        {"margin", c.train.margin},
        {"max_input_len", c.train.max_input_len},
        {"eval_every", c.train.eval_every},
        {"grad_clip", c.train.grad_clip},
        {"max_generate_len", c.train.max_generate_len}}},
      {"inference",
       {{"tau", c.inference.tau},
        {"evidence", c.inference.evidence},
        {"tau_grid_min", c.inference.tau_grid_min},
        {"tau_grid_max", c.inference.tau_grid_max},
        {"tau_grid_step", c.inference.tau_grid_step},
        {"max_generate_len", c.inference.max_generate_len},
        {"norm_token_cap", c.inference.norm_token_cap}}},
      {"curation", {{"max_retries", c.curation.max_retries}}},
      {"ablation",
       {{"pretrain", c.ablation.pretrain},
        {"finetune", c.ablation.finetune},
        {"contrastive", c.ablation.contrastive}}},
      {"cache_dir", c.cache_dir},
      {"checkpoint_dir", c.checkpoint_dir},
      {"output_dir", c.output_dir},
      {"seeds", c.seeds}};
}

namespace {

// Reads j[key] into `out` when present; leaves the default otherwise.
template <typename T>
void read_into(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    read_into(d, "kind", c.dataset.kind);
    read_into(d, "train_path", c.dataset.train_path);
    read_into(d, "test_path", c.dataset.test_path);
    read_into(d, "justice_train", c.dataset.justice_train);
    read_into(d, "justice_test", c.dataset.justice_test);
    read_into(d, "deontology_train", c.dataset.deontology_train);
    read_into(d, "deontology_test", c.dataset.deontology_test);
    read_into(d, "virtue_train", c.dataset.virtue_train);
    read_into(d, "virtue_test", c.dataset.virtue_test);
    read_into(d, "norms_file", c.dataset.norms_file);
    read_into(d, "validation_fraction", c.dataset.validation_fraction);
    read_into(d, "validation_seed", c.dataset.validation_seed);
  }
  if (j.contains("client")) {
    const json& d = j.at("client");
    read_into(d, "kind", c.client.kind);
    read_into(d, "model", c.client.model);
    read_into(d, "base_url", c.client.base_url);
    read_into(d, "api_key_env", c.client.api_key_env);
  }
  if (j.contains("model")) {
    const json& d = j.at("model");
    read_into(d, "hidden", c.model.hidden);
    read_into(d, "max_positions", c.model.max_positions);
  }
  if (j.contains("train")) {
    const json& d = j.at("train");
    read_into(d, "lr", c.train.lr);
    read_into(d, "batch_size", c.train.batch_size);
    read_into(d, "max_steps", c.train.max_steps);
    read_into(d, "epochs", c.train.epochs);
    read_into(d, "lambda_rgen", c.train.lambda_rgen);
    read_into(d, "lambda_ngen", c.train.lambda_ngen);
    read_into(d, "lambda_triplet", c.train.lambda_triplet);
    read_into(d, "margin", c.train.margin);
    read_into(d, "max_input_len", c.train.max_input_len);
    read_into(d, "eval_every", c.train.eval_every);
    read_into(d, "grad_clip", c.train.grad_clip);
    read_into(d, "max_generate_len", c.train.max_generate_len);
  }
  if (j.contains("inference")) {
    const json& d = j.at("inference");
    read_into(d, "tau", c.inference.tau);
    read_into(d, "evidence", c.inference.evidence);
    read_into(d, "tau_grid_min", c.inference.tau_grid_min);
    read_into(d, "tau_grid_max", c.inference.tau_grid_max);
    read_into(d, "tau_grid_step", c.inference.tau_grid_step);
    read_into(d, "max_generate_len", c.inference.max_generate_len);
    read_into(d, "norm_token_cap", c.inference.norm_token_cap);
  }
  if (j.contains("curation"))
    read_into(j.at("curation"), "max_retries", c.curation.max_retries);
  if (j.contains("ablation")) {
    const json& d = j.at("ablation");
    read_into(d, "pretrain", c.ablation.pretrain);
    read_into(d, "finetune", c.ablation.finetune);
    read_into(d, "contrastive", c.ablation.contrastive);
  }
  read_into(j, "cache_dir", c.cache_dir);
  read_into(j, "checkpoint_dir", c.checkpoint_dir);
  read_into(j, "output_dir", c.output_dir);
  read_into(j, "seeds", c.seeds);
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const PipelineConfig& config, const std::filesystem::path& path) {
  atomic_write_file(path, to_json(config).dump(2) + "\n");
}

void apply_override(json& config_json, const std::string& assignment) {
  std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw UsageError("--set expects dotted.key=value, got '" + assignment + "'");
  std::string key = assignment.substr(0, eq);
  std::string raw = assignment.substr(eq + 1);

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;  // unquoted strings pass through as-is
  }

  json* node = &config_json;
  std::size_t start = 0;
  while (true) {
    std::size_t dot = key.find('.', start);
    std::string part = key.substr(start, dot - start);
    if (part.empty()) throw UsageError("--set: empty path segment in '" + key + "'");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    node = &(*node)[part];
    if (!node->is_object() && !node->is_null())
      throw UsageError("--set: '" + part + "' is not a section");
    start = dot + 1;
  }
}

std::shared_ptr<LlmClient> make_client(const ClientConfig& config) {
  if (config.kind == "stub") return std::make_shared<StubLlmClient>();
  HttpLlmOptions opts;
  opts.base_url = config.base_url;
  opts.model = config.model;
  opts.api_key_env = config.api_key_env;
  return std::make_shared<HttpLlmClient>(opts);
}

}  // namespace clarity
