#include "clarity/checkpoint.hpp"

#include <stdexcept>

#include "clarity/util.hpp"

namespace clarity {

void save_model(const TinySeq2Seq& model, const std::filesystem::path& path) {
  json j;
  j["backend"] = kBackendId;
  j["tokenizer"] = Vocab::kTokenizerId;
  j["config"] = {{"hidden", model.config().hidden},
                 {"max_positions", model.config().max_positions},
                 {"seed", model.config().seed}};
  j["vocab"] = model.vocab().words();
  json params = json::object();
  for (auto& [name, p] : model.named_params()) {
    std::vector<double> data(p->value.data(), p->value.data() + p->value.size());
    params[name] = {{"rows", p->value.rows()}, {"cols", p->value.cols()}, {"data", data}};
  }
  j["params"] = std::move(params);
  atomic_write_file(path, j.dump() + "\n");
}

std::unique_ptr<TinySeq2Seq> load_model(const std::filesystem::path& path) {
  json j = json::parse(read_file(path));
  if (j.at("backend").get<std::string>() != kBackendId)
    throw std::runtime_error(path.string() + ": unsupported backend '" +
                             j.at("backend").get<std::string>() + "'");
  if (j.at("tokenizer").get<std::string>() != Vocab::kTokenizerId)
    throw std::runtime_error(path.string() + ": unsupported tokenizer '" +
                             j.at("tokenizer").get<std::string>() + "'");
  TinySeq2Seq::Config cfg;
  cfg.hidden = j.at("config").at("hidden").get<int>();
  cfg.max_positions = j.at("config").at("max_positions").get<int>();
  cfg.seed = j.at("config").at("seed").get<std::uint64_t>();
  Vocab vocab = Vocab::from_words(j.at("vocab").get<std::vector<std::string>>());
  auto model = std::make_unique<TinySeq2Seq>(std::move(vocab), cfg);
  const json& params = j.at("params");
  for (auto& [name, p] : model->named_params()) {
    if (!params.contains(name))
      throw std::runtime_error(path.string() + ": missing parameter '" + name + "'");
    const json& pj = params.at(name);
    auto rows = pj.at("rows").get<Eigen::Index>();
    auto cols = pj.at("cols").get<Eigen::Index>();
    if (rows != p->value.rows() || cols != p->value.cols())
      throw std::runtime_error(path.string() + ": parameter '" + name +
                               "' has shape " + std::to_string(rows) + "x" +
                               std::to_string(cols) + ", expected " +
                               std::to_string(p->value.rows()) + "x" +
                               std::to_string(p->value.cols()));
    std::vector<double> data = pj.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols)
      throw std::runtime_error(path.string() + ": parameter '" + name +
                               "' has wrong element count");
    p->value = Eigen::Map<ag::Mat>(data.data(), rows, cols);
    p->grad.setZero();
  }
  return model;
}

std::filesystem::path Manifest::path_for(ModelKind kind,
                                         const std::filesystem::path& manifest_dir) const {
  auto it = roles.find(to_string(kind));
  if (it == roles.end())
    throw std::runtime_error("manifest has no entry for model '" + to_string(kind) + "'");
  return manifest_dir / it->second;
}

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  json j{{"backend", manifest.backend},
         {"tokenizer", manifest.tokenizer},
         {"hidden_size", manifest.hidden_size},
         {"roles", manifest.roles}};
  atomic_write_file(path, j.dump(2) + "\n");
}

Manifest load_manifest(const std::filesystem::path& path) {
  json j = json::parse(read_file(path));
  Manifest m;
  m.backend = j.at("backend").get<std::string>();
  m.tokenizer = j.at("tokenizer").get<std::string>();
  m.hidden_size = j.at("hidden_size").get<int>();
  m.roles = j.at("roles").get<std::map<std::string, std::string>>();
  return m;
}

std::unique_ptr<TinySeq2Seq> load_role_model(const std::filesystem::path& manifest_path,
                                             ModelKind kind) {
  Manifest m = load_manifest(manifest_path);
  return load_model(m.path_for(kind, manifest_path.parent_path()));
}

}  // namespace clarity
