#include "clarity/pipeline.hpp"

#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "clarity/checkpoint.hpp"
#include "clarity/claritycot.hpp"
#include "clarity/inference.hpp"
#include "clarity/metrics.hpp"
#include "clarity/report.hpp"
#include "clarity/stats.hpp"
#include "clarity/training.hpp"
#include "clarity/util.hpp"

namespace clarity {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int precision) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(precision) << v;
  return out.str();
}

bool process_alive(long pid) {
  if (::kill(static_cast<pid_t>(pid), 0) == 0) return true;
  return errno == EPERM;
}

std::vector<int> labels_as_ints(const std::vector<Judgment>& judgments, bool gold_side) {
  std::vector<int> out;
  out.reserve(judgments.size());
  for (const auto& j : judgments) {
    if (gold_side) {
      if (!j.gold) {
        throw UsageError("judgment for \"" + j.action +
                         "\" has no gold label; evaluation needs labeled inputs");
      }
      out.push_back(static_cast<int>(*j.gold));
    } else {
      out.push_back(static_cast<int>(j.predicted));
    }
  }
  return out;
}

void print_judgment(const Judgment& j) {
  std::cout << "action: " << j.action << "\n"
            << "  verdict: " << to_string(j.predicted)
            << " (path " << to_string(j.path)
            << ", filter confidence " << fixed(j.confidence_action_only, 4) << ")\n";
  if (j.path != DecisionPath::action_only) {
    std::cout << "  moral rationale: " << j.moral_rationale << "\n"
              << "  immoral rationale: " << j.immoral_rationale << "\n";
    if (!j.moral_norm.empty() || !j.immoral_norm.empty()) {
      std::cout << "  moral norm: " << j.moral_norm << "\n"
                << "  immoral norm: " << j.immoral_norm << "\n";
    }
  }
}

}  // namespace

PipelineLock::PipelineLock(const fs::path& dir) {
  fs::create_directories(dir);
  path_ = dir / kFileName;
  if (fs::exists(path_)) {
    long pid = -1;
    try {
      pid = std::stol(trim(read_file(path_)));
    } catch (const std::exception&) {
      pid = -1;
    }
    if (pid > 0 && process_alive(pid)) {
      throw UsageError("another run holds " + path_.string() + " (pid " +
                       std::to_string(pid) + ")");
    }
    log_info("removing stale lock " + path_.string());
    fs::remove(path_);
  }
  atomic_write_file(path_, std::to_string(::getpid()) + "\n");
  held_ = true;
}

PipelineLock::~PipelineLock() {
  if (held_) {
    std::error_code ec;
    fs::remove(path_, ec);
  }
}

Pipeline::Pipeline(PipelineConfig config, fs::path workdir)
    : cfg_(std::move(config)), workdir_(fs::absolute(workdir).lexically_normal()) {
  cfg_.validate();
}

fs::path Pipeline::resolve(const std::string& p) const {
  fs::path path(p);
  return path.is_absolute() ? path : workdir_ / path;
}

fs::path Pipeline::corpus_path() const { return workdir_ / "data" / "corpus.jsonl"; }
fs::path Pipeline::curated_path() const { return workdir_ / "data" / "curated.jsonl"; }

fs::path Pipeline::seed_checkpoint_dir(std::uint64_t seed) const {
  return resolve(cfg_.checkpoint_dir) / ("seed-" + std::to_string(seed));
}

fs::path Pipeline::seed_output_dir(std::uint64_t seed) const {
  return resolve(cfg_.output_dir) / ("seed-" + std::to_string(seed));
}

fs::path Pipeline::manifest_path(std::uint64_t seed) const {
  return seed_checkpoint_dir(seed) / "manifest.json";
}

fs::path Pipeline::judgments_path(std::uint64_t seed) const {
  return seed_output_dir(seed) / "judgments.jsonl";
}

fs::path Pipeline::report_path() const { return resolve(cfg_.output_dir) / "report.json"; }
fs::path Pipeline::ablation_dir() const { return workdir_ / "ablation"; }

Corpus Pipeline::load_dataset() const {
  const auto& d = cfg_.dataset;
  Corpus corpus;
  if (d.kind == "moral_stories") {
    if (d.train_path.empty()) throw UsageError("dataset.train_path is required");
    corpus = load_moral_stories(resolve(d.train_path), Split::train);
    if (!d.test_path.empty()) {
      append(corpus, load_moral_stories(resolve(d.test_path), Split::test));
    }
  } else {
    EthicsNorms norms;
    if (!d.norms_file.empty()) norms = EthicsNorms::from_file(resolve(d.norms_file));
    struct Part {
      const std::string* train;
      const std::string* test;
      EthicsConcept kind;
    };
    const Part parts[] = {
        {&d.justice_train, &d.justice_test, EthicsConcept::justice},
        {&d.deontology_train, &d.deontology_test, EthicsConcept::deontology},
        {&d.virtue_train, &d.virtue_test, EthicsConcept::virtue},
    };
    bool any = false;
    for (const auto& part : parts) {
      if (!part.train->empty()) {
        append(corpus, load_ethics(resolve(*part.train), part.kind, norms, Split::train));
        any = true;
      }
      if (!part.test->empty()) {
        append(corpus, load_ethics(resolve(*part.test), part.kind, norms, Split::test));
        any = true;
      }
    }
    if (!any) throw UsageError("dataset: no ethics files configured");
  }
  if (corpus.count(Split::validation) == 0) {
    carve_validation(corpus, d.validation_fraction, d.validation_seed);
  }
  return corpus;
}

Corpus Pipeline::load_cached_corpus() const {
  if (!fs::exists(corpus_path())) {
    throw UsageError("no corpus at " + corpus_path().string() + "; run curate first");
  }
  return load_corpus(corpus_path());
}

std::vector<CuratedPair> Pipeline::load_curated_or_throw() const {
  if (!fs::exists(curated_path())) {
    throw UsageError("no curated rationales at " + curated_path().string() +
                     "; run curate first");
  }
  return load_curated(curated_path());
}

void Pipeline::curate(bool dry_run) {
  if (dry_run) {
    std::cout << "plan: curate\n"
              << "  dataset: " << cfg_.dataset.kind << "\n"
              << "  client: " << cfg_.client.kind << " (cache " << resolve(cfg_.cache_dir).string()
              << ")\n"
              << "  writes: " << corpus_path().string() << "\n"
              << "  writes: " << curated_path().string() << "\n"
              << "dry-run: no side effects\n";
    return;
  }
  Corpus corpus = load_dataset();
  std::cout << "loaded " << corpus.size() << " pairs (train " << corpus.count(Split::train)
            << ", validation " << corpus.count(Split::validation) << ", test "
            << corpus.count(Split::test) << ")\n";
  auto client = make_client(cfg_.client);
  CachedLlmClient cached(client, resolve(cfg_.cache_dir));
  CurationOptions opts;
  opts.max_retries = cfg_.curation.max_retries;
  CurationResult result = clarity::curate(corpus, cached, opts);
  if (result.curated.empty()) {
    throw std::runtime_error("curation produced no usable rationales");
  }
  fs::create_directories(corpus_path().parent_path());
  save_corpus(corpus, corpus_path());
  save_curated(result.curated, curated_path());
  std::cout << "curated " << result.curated.size() << " pairs, skipped " << result.skipped
            << " (cache hits " << cached.hits() << ", misses " << cached.misses() << ")\n";
}

void Pipeline::pretrain(const std::vector<ModelKind>& kinds, bool dry_run) {
  std::vector<ModelKind> list = kinds;
  if (list.empty()) {
    list = {ModelKind::rationale_generator, ModelKind::norm_generator, ModelKind::classifier};
  }
  if (dry_run) {
    std::cout << "plan: pretrain\n  seeds:";
    for (auto s : cfg_.seeds) std::cout << " " << s;
    std::cout << "\n  heads:";
    for (auto k : list) std::cout << " " << to_string(k);
    std::cout << "\n  reads: " << curated_path().string() << "\n"
              << "  writes: " << resolve(cfg_.checkpoint_dir).string() << "/seed-*/\n"
              << "dry-run: no side effects\n";
    return;
  }
  auto curated = load_curated_or_throw();
  PipelineLock lock(workdir_);
  for (auto seed : cfg_.seeds) {
    fs::path dir = seed_checkpoint_dir(seed);
    fs::create_directories(dir);
    Manifest manifest;
    if (fs::exists(manifest_path(seed))) manifest = load_manifest(manifest_path(seed));
    manifest.backend = kBackendId;
    manifest.tokenizer = Vocab::kTokenizerId;
    manifest.hidden_size = cfg_.model.hidden;
    for (auto kind : list) {
      TinySeq2Seq::Config mc;
      mc.hidden = cfg_.model.hidden;
      mc.max_positions = cfg_.model.max_positions;
      mc.seed = seed;
      TrainConfig tc = cfg_.train;
      tc.seed = seed;
      TrainLog log(dir / ("pretrain_" + to_string(kind) + ".jsonl"));
      PretrainResult res = clarity::pretrain(kind, curated, mc, tc, &log);
      std::string file = to_string(kind) + ".json";
      save_model(*res.model, dir / file);
      manifest.roles[to_string(kind)] = file;
      std::cout << "seed " << seed << " " << to_string(kind) << ": " << res.steps_run
                << " steps, best validation loss " << fixed(res.best_val_loss, 4) << "\n";
    }
    save_manifest(manifest, manifest_path(seed));
  }
}

void Pipeline::finetune(bool contrastive, bool dry_run) {
  if (dry_run) {
    std::cout << "plan: finetune\n  seeds:";
    for (auto s : cfg_.seeds) std::cout << " " << s;
    std::cout << "\n  contrastive: " << (contrastive ? "on" : "off") << "\n"
              << "  reads: " << curated_path().string() << "\n"
              << "  updates: " << resolve(cfg_.checkpoint_dir).string() << "/seed-*/\n"
              << "dry-run: no side effects\n";
    return;
  }
  auto curated = load_curated_or_throw();
  PipelineLock lock(workdir_);
  for (auto seed : cfg_.seeds) {
    if (!fs::exists(manifest_path(seed))) {
      throw UsageError("no checkpoints for seed " + std::to_string(seed) +
                       " at " + manifest_path(seed).string() + "; run pretrain first");
    }
    Manifest manifest = load_manifest(manifest_path(seed));
    fs::path dir = seed_checkpoint_dir(seed);
    auto rgen = load_role_model(manifest_path(seed), ModelKind::rationale_generator);
    auto ngen = load_role_model(manifest_path(seed), ModelKind::norm_generator);
    TrainConfig tc = cfg_.train;
    tc.seed = seed;
    TrainLog log(dir / "finetune.jsonl");
    FinetuneResult res =
        clarity::finetune(*rgen, *ngen, curated, tc, /*supervised=*/true, contrastive, &log);
    save_model(*rgen, manifest.path_for(ModelKind::rationale_generator, dir));
    save_model(*ngen, manifest.path_for(ModelKind::norm_generator, dir));
    json meta = {
        {"contrastive", contrastive},
        {"steps_run", res.steps_run},
        {"best_val_objective", res.best_val_objective},
        {"initial_anchor_positive_distance", res.initial_anchor_positive_distance},
        {"final_anchor_positive_distance", res.final_anchor_positive_distance},
    };
    atomic_write_file(dir / "finetune_meta.json", meta.dump(2) + "\n");
    std::cout << "seed " << seed << " finetune: " << res.steps_run
              << " steps, best validation objective " << fixed(res.best_val_objective, 4)
              << ", anchor-positive distance " << fixed(res.initial_anchor_positive_distance, 4)
              << " -> " << fixed(res.final_anchor_positive_distance, 4) << "\n";
  }
}

void Pipeline::infer(const InferOptions& opts, bool dry_run) {
  if (dry_run) {
    std::cout << "plan: infer\n  seeds:";
    for (auto s : cfg_.seeds) std::cout << " " << s;
    std::cout << "\n  tau: "
              << (opts.select_tau ? std::string("selected on validation")
                                  : fixed(opts.tau.value_or(cfg_.inference.tau), 2))
              << "\n  evidence: " << opts.evidence.value_or(cfg_.inference.evidence) << "\n"
              << "  input: "
              << (opts.input ? opts.input->string() : corpus_path().string() + " (test split)")
              << "\n  writes: " << resolve(cfg_.output_dir).string() << "/seed-*/judgments.jsonl\n"
              << "dry-run: no side effects\n";
    return;
  }
  JudgeOptions base = cfg_.inference.judge_options(cfg_.train.max_input_len);
  base.max_generate_len = cfg_.inference.max_generate_len;
  if (opts.tau) base.tau = *opts.tau;
  if (opts.evidence) base.evidence = evidence_mode_from_string(*opts.evidence);

  std::optional<Corpus> corpus;
  auto ensure_corpus = [&]() -> Corpus& {
    if (!corpus) corpus = load_cached_corpus();
    return *corpus;
  };

  std::vector<ActionRecord> explicit_actions;
  bool have_explicit = false;
  std::vector<bool> explicit_has_gold;
  if (opts.input) {
    have_explicit = true;
    auto rows = read_jsonl(*opts.input);
    for (const auto& row : rows) {
      if (!row.contains("action") || !row.at("action").is_string()) {
        throw UsageError(opts.input->string() + ": every record needs a string \"action\"");
      }
      ActionRecord rec;
      rec.action = row.at("action").get<std::string>();
      bool has_gold = row.contains("gold") && !row.at("gold").is_null();
      if (has_gold) {
        rec.gold_label = row.at("gold").get<std::string>() == "moral" ? Label::moral
                                                                      : Label::immoral;
      }
      if (row.contains("pair_id") && row.at("pair_id").is_string()) {
        rec.pair_id = row.at("pair_id").get<std::string>();
      }
      explicit_actions.push_back(std::move(rec));
      explicit_has_gold.push_back(has_gold);
    }
    if (explicit_actions.empty()) throw UsageError(opts.input->string() + ": no actions");
  }

  for (auto seed : cfg_.seeds) {
    if (!fs::exists(manifest_path(seed))) {
      throw UsageError("no checkpoints for seed " + std::to_string(seed) +
                       " at " + manifest_path(seed).string() + "; run pretrain first");
    }
    auto rgen = load_role_model(manifest_path(seed), ModelKind::rationale_generator);
    auto ngen = load_role_model(manifest_path(seed), ModelKind::norm_generator);
    auto cls = load_role_model(manifest_path(seed), ModelKind::classifier);
    JudgeOptions jo = base;

    fs::create_directories(seed_output_dir(seed));
    if (opts.select_tau) {
      auto val = ensure_corpus().actions(Split::validation);
      if (val.empty()) {
        throw UsageError("tau selection needs validation pairs and the corpus has none");
      }
      TauSelection sel = select_tau(*rgen, *ngen, *cls, val, jo, cfg_.inference.tau_grid());
      for (const auto& [tau, acc] : sel.grid) {
        std::cout << "seed " << seed << " tau=" << fixed(tau, 2)
                  << " validation_accuracy=" << fixed(acc, 4) << "\n";
      }
      std::cout << "seed " << seed << " selected_tau=" << fixed(sel.tau, 2)
                << " validation_accuracy=" << fixed(sel.accuracy, 4) << "\n";
      jo.tau = sel.tau;
      json tj = {{"tau", sel.tau}, {"validation_accuracy", sel.accuracy}};
      tj["grid"] = json::array();
      for (const auto& [tau, acc] : sel.grid) tj["grid"].push_back({tau, acc});
      atomic_write_file(seed_output_dir(seed) / "tau.json", tj.dump(2) + "\n");
    }

    std::vector<Judgment> judgments;
    if (have_explicit) {
      for (std::size_t i = 0; i < explicit_actions.size(); ++i) {
        Judgment j = judge(*rgen, *ngen, *cls, explicit_actions[i].action, jo);
        if (explicit_has_gold[i]) j.gold = explicit_actions[i].gold_label;
        j.pair_id = explicit_actions[i].pair_id;
        judgments.push_back(std::move(j));
      }
    } else {
      judgments = judge_split(*rgen, *ngen, *cls, ensure_corpus(), Split::test, jo);
      if (judgments.empty()) throw UsageError("the corpus has no test pairs to judge");
    }
    save_judgments(judgments, judgments_path(seed));

    std::size_t direct = 0, correct = 0, with_gold = 0;
    for (const auto& j : judgments) {
      if (j.path == DecisionPath::action_only) ++direct;
      if (j.gold) {
        ++with_gold;
        if (*j.gold == j.predicted) ++correct;
      }
      if (opts.explain) print_judgment(j);
    }
    std::cout << "seed " << seed << ": judged " << judgments.size() << " actions (tau "
              << fixed(jo.tau, 2) << ", " << direct << " direct, "
              << judgments.size() - direct << " via paths)";
    if (with_gold > 0) {
      std::cout << ", accuracy "
                << fixed(static_cast<double>(correct) / static_cast<double>(with_gold), 4);
    }
    std::cout << "\n";
  }
}

void Pipeline::evaluate(const EvaluateOptions& opts, bool dry_run) {
  if (dry_run) {
    std::cout << "plan: evaluate\n  reads: " << resolve(cfg_.output_dir).string()
              << "/seed-*/judgments.jsonl\n";
    if (opts.baseline_report) {
      std::cout << "  baseline: " << opts.baseline_report->string() << "\n";
    }
    std::cout << "  writes: " << report_path().string() << "\n"
              << "dry-run: no side effects\n";
    return;
  }
  std::optional<Corpus> corpus;
  if (fs::exists(corpus_path())) corpus = load_corpus(corpus_path());

  EvalReport report;
  report.tag = "clarityethic";
  for (auto seed : cfg_.seeds) {
    if (!fs::exists(judgments_path(seed))) {
      throw UsageError("no judgments for seed " + std::to_string(seed) + " at " +
                       judgments_path(seed).string() + "; run infer first");
    }
    auto judgments = load_judgments(judgments_path(seed));
    if (judgments.empty()) {
      throw UsageError(judgments_path(seed).string() + " is empty");
    }
    MetricSet ms;
    ms.seed = seed;
    ms.accuracy = accuracy(labels_as_ints(judgments, false), labels_as_ints(judgments, true));
    ms.macro_f1 = macro_f1(labels_as_ints(judgments, false), labels_as_ints(judgments, true));

    std::vector<std::string> hyps, refs;
    for (const auto& j : judgments) {
      if (j.path == DecisionPath::action_only) continue;
      std::string hyp = j.path == DecisionPath::moral_path ? j.moral_norm : j.immoral_norm;
      if (hyp.empty()) continue;
      const MoralPair* pair = corpus ? corpus->find(j.pair_id) : nullptr;
      if (!pair || pair->norm.empty()) continue;
      hyps.push_back(hyp);
      refs.push_back(pair->norm);
    }
    if (!hyps.empty()) {
      ms.bleu = corpus_bleu(hyps, refs);
      ms.rouge_l = rouge_l(hyps, refs);
      HashProjectionEmbedder embedder;
      ms.similarity = embedding_similarity(embedder, hyps, refs);
    }
    report.items = judgments.size();
    report.per_seed.push_back(ms);
  }
  aggregate_report(report);

  if (opts.baseline_report) {
    EvalReport baseline = load_report(*opts.baseline_report);
    const char* names[] = {"accuracy", "macro_f1", "bleu", "rouge_l", "similarity"};
    for (const char* name : names) {
      std::vector<double> ours, theirs;
      auto value_of = [&](const MetricSet& ms) -> std::optional<double> {
        for (const auto& [n, v] : ms.present()) {
          if (n == name) return v;
        }
        return std::nullopt;
      };
      std::map<std::uint64_t, double> base_by_seed;
      for (const auto& ms : baseline.per_seed) {
        if (auto v = value_of(ms)) base_by_seed[ms.seed] = *v;
      }
      for (const auto& ms : report.per_seed) {
        auto v = value_of(ms);
        auto it = base_by_seed.find(ms.seed);
        if (v && it != base_by_seed.end()) {
          ours.push_back(*v);
          theirs.push_back(it->second);
        }
      }
      if (ours.size() < 2) continue;
      TTestResult tt = paired_t_test(ours, theirs);
      report.significance.push_back({baseline.tag, name, tt.t, tt.p_value});
    }
    if (report.significance.empty()) {
      log_info("no metric had per-seed values in both reports; significance skipped");
    }
  }

  fs::create_directories(report_path().parent_path());
  save_report(report, report_path());
  save_report_csv(report, resolve(cfg_.output_dir) / "report.csv");
  for (const auto& [name, agg] : report.aggregates) {
    std::cout << name << ": mean " << fixed(agg.mean, 4);
    if (agg.stddev) std::cout << " std " << fixed(*agg.stddev, 4);
    std::cout << "\n";
  }
  for (const auto& sig : report.significance) {
    std::cout << sig.metric << " vs " << sig.baseline_tag << ": t=" << fixed(sig.t, 4)
              << " p=" << fixed(sig.p_value, 6) << "\n";
  }
  std::cout << "report written to " << report_path().string() << "\n";
}

void Pipeline::prompting_baselines(bool dry_run) {
  if (dry_run) {
    std::cout << "plan: claritycot\n"
              << "  client: " << cfg_.client.kind << " (cache " << resolve(cfg_.cache_dir).string()
              << ")\n"
              << "  prompts: claritycot + zero-shot over the test split\n"
              << "  writes: " << resolve(cfg_.output_dir).string()
              << "/{claritycot,zero_shot}_{records.jsonl,report.json}\n"
              << "dry-run: no side effects\n";
    return;
  }
  Corpus corpus = fs::exists(corpus_path()) ? load_corpus(corpus_path()) : load_dataset();
  auto actions = corpus.actions(Split::test);
  if (actions.empty()) throw UsageError("the corpus has no test pairs to judge");
  auto client = make_client(cfg_.client);
  CachedLlmClient cached(client, resolve(cfg_.cache_dir));

  PromptingOptions po;
  po.max_retries = cfg_.curation.max_retries;
  po.tag = "claritycot";
  PromptingRun cot = run_claritycot(actions, cached, po);
  po.tag = "zero_shot";
  PromptingRun zs = run_zero_shot(actions, cached, po);

  fs::path out = resolve(cfg_.output_dir);
  fs::create_directories(out);
  save_prompt_records(cot.records, out / "claritycot_records.jsonl");
  save_report(cot.report, out / "claritycot_report.json");
  save_prompt_records(zs.records, out / "zero_shot_records.jsonl");
  save_report(zs.report, out / "zero_shot_report.json");
  for (const PromptingRun* run : {&cot, &zs}) {
    const auto& ms = run->report.per_seed.front();
    std::cout << run->report.tag << ": accuracy " << fixed(ms.accuracy.value_or(0.0), 4)
              << ", macro F1 " << fixed(ms.macro_f1.value_or(0.0), 4) << " over "
              << run->report.items << " actions (" << run->report.unparseable
              << " unparseable)\n";
  }
}

void Pipeline::ablate(bool dry_run) {
  struct Cell {
    bool pretrain, finetune, contrastive;
  };
  // Every valid switch row: fine-tuning and the contrastive term both
  // presuppose pretrained generators.
  const std::vector<Cell> cells = {
      {false, false, false}, {true, false, false}, {true, true, false},
      {true, false, true},   {true, true, true},
  };
  if (dry_run) {
    std::cout << "plan: ablate\n  cells:\n";
    for (const auto& c : cells) {
      std::cout << "    pretrain=" << c.pretrain << " finetune=" << c.finetune
                << " contrastive=" << c.contrastive << "\n";
    }
    std::cout << "  seeds:";
    for (auto s : cfg_.seeds) std::cout << " " << s;
    std::cout << "\n  writes: " << ablation_dir().string() << "/\n"
              << "dry-run: no side effects\n";
    return;
  }
  auto curated = load_curated_or_throw();
  Corpus corpus = load_cached_corpus();
  PipelineLock lock(workdir_);
  fs::create_directories(ablation_dir());

  std::vector<json> rows;
  for (const auto& cell : cells) {
    std::string name = std::string("cell-") + (cell.pretrain ? "1" : "0") +
                       (cell.finetune ? "1" : "0") + (cell.contrastive ? "1" : "0");
    fs::path cell_dir = ablation_dir() / name;
    fs::path marker = cell_dir / "result.json";
    if (fs::exists(marker)) {
      rows.push_back(json::parse(read_file(marker)));
      std::cout << name << ": complete, skipping\n";
      continue;
    }
    fs::create_directories(cell_dir);
    std::vector<double> accs, f1s;
    for (auto seed : cfg_.seeds) {
      auto [acc, f1] = run_ablation_cell(curated, corpus, seed, cell.pretrain, cell.finetune,
                                         cell.contrastive, cell_dir);
      accs.push_back(acc);
      f1s.push_back(f1);
      std::cout << name << " seed " << seed << ": accuracy " << fixed(acc, 4) << ", macro F1 "
                << fixed(f1, 4) << "\n";
    }
    Aggregate acc_agg = aggregate_seeds(accs);
    Aggregate f1_agg = aggregate_seeds(f1s);
    json row = {{"pretrain", cell.pretrain},
                {"finetune", cell.finetune},
                {"contrastive", cell.contrastive},
                {"accuracy_mean", acc_agg.mean},
                {"accuracy_std", acc_agg.stddev.value_or(0.0)},
                {"macro_f1_mean", f1_agg.mean},
                {"macro_f1_std", f1_agg.stddev.value_or(0.0)},
                {"seeds", cfg_.seeds}};
    atomic_write_file(marker, row.dump(2) + "\n");
    rows.push_back(row);
  }

  std::ostringstream csv;
  csv << "pretrain,finetune,contrastive,accuracy_mean,accuracy_std,macro_f1_mean,macro_f1_std\n";
  for (const auto& row : rows) {
    csv << (row.at("pretrain").get<bool>() ? 1 : 0) << ','
        << (row.at("finetune").get<bool>() ? 1 : 0) << ','
        << (row.at("contrastive").get<bool>() ? 1 : 0) << ','
        << json(row.at("accuracy_mean").get<double>()).dump() << ','
        << json(row.at("accuracy_std").get<double>()).dump() << ','
        << json(row.at("macro_f1_mean").get<double>()).dump() << ','
        << json(row.at("macro_f1_std").get<double>()).dump() << "\n";
  }
  atomic_write_file(ablation_dir() / "results.csv", csv.str());
  std::cout << "ablation table written to " << (ablation_dir() / "results.csv").string() << "\n";
}

std::pair<double, double> Pipeline::run_ablation_cell(const std::vector<CuratedPair>& curated,
                                                      const Corpus& corpus, std::uint64_t seed,
                                                      bool with_pretrain, bool with_finetune,
                                                      bool with_contrastive,
                                                      const fs::path& cell_dir) {
  TinySeq2Seq::Config mc;
  mc.hidden = cfg_.model.hidden;
  mc.max_positions = cfg_.model.max_positions;
  mc.seed = seed;
  TrainConfig tc = cfg_.train;
  tc.seed = seed;

  // The classifier is pretrained in every cell; the switch governs the
  // generator heads.
  auto cls = clarity::pretrain(ModelKind::classifier, curated, mc, tc).model;
  std::unique_ptr<TinySeq2Seq> rgen, ngen;
  if (with_pretrain) {
    rgen = clarity::pretrain(ModelKind::rationale_generator, curated, mc, tc).model;
    ngen = clarity::pretrain(ModelKind::norm_generator, curated, mc, tc).model;
  } else {
    Vocab vocab = build_vocab(curated);
    rgen = std::make_unique<TinySeq2Seq>(vocab, mc);
    ngen = std::make_unique<TinySeq2Seq>(vocab, mc);
  }
  if (with_finetune || with_contrastive) {
    clarity::finetune(*rgen, *ngen, curated, tc, with_finetune, with_contrastive, nullptr);
  }

  JudgeOptions jo = cfg_.inference.judge_options(tc.max_input_len);
  jo.max_generate_len = cfg_.inference.max_generate_len;
  auto val = corpus.actions(Split::validation);
  if (!val.empty()) {
    jo.tau = select_tau(*rgen, *ngen, *cls, val, jo, cfg_.inference.tau_grid()).tau;
  }
  auto judgments = judge_split(*rgen, *ngen, *cls, corpus, Split::test, jo);
  if (judgments.empty()) throw UsageError("the corpus has no test pairs to judge");
  save_judgments(judgments, cell_dir / ("judgments-seed-" + std::to_string(seed) + ".jsonl"));
  double acc = accuracy(labels_as_ints(judgments, false), labels_as_ints(judgments, true));
  double f1 = macro_f1(labels_as_ints(judgments, false), labels_as_ints(judgments, true));
  return {acc, f1};
}

}  // namespace clarity
