#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "clarity/config.hpp"
#include "clarity/corpus.hpp"
#include "clarity/curation.hpp"
#include "clarity/model.hpp"

namespace clarity {

/// Advisory single-writer lock on a directory (pid file). A live holder makes
/// construction fail; a dead holder's file is replaced with a notice.
class PipelineLock {
 public:
  explicit PipelineLock(const std::filesystem::path& dir);
  ~PipelineLock();
  PipelineLock(const PipelineLock&) = delete;
  PipelineLock& operator=(const PipelineLock&) = delete;

  static constexpr const char* kFileName = ".pipeline.lock";

 private:
  std::filesystem::path path_;
  bool held_ = false;
};

struct InferOptions {
  bool select_tau = false;
  std::optional<double> tau;
  std::optional<std::string> evidence;
  bool explain = false;
  std::optional<std::filesystem::path> input;
};

struct EvaluateOptions {
  std::optional<std::filesystem::path> baseline_report;
};

/// Stage orchestration over a working directory. Every artifact path is
/// derived from the configured directory names, resolved under the workdir.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, std::filesystem::path workdir);

  void curate(bool dry_run);
  void pretrain(const std::vector<ModelKind>& kinds, bool dry_run);
  void finetune(bool contrastive, bool dry_run);
  void infer(const InferOptions& opts, bool dry_run);
  void evaluate(const EvaluateOptions& opts, bool dry_run);
  void prompting_baselines(bool dry_run);
  void ablate(bool dry_run);

  std::filesystem::path resolve(const std::string& p) const;
  std::filesystem::path corpus_path() const;
  std::filesystem::path curated_path() const;
  std::filesystem::path seed_checkpoint_dir(std::uint64_t seed) const;
  std::filesystem::path seed_output_dir(std::uint64_t seed) const;
  std::filesystem::path manifest_path(std::uint64_t seed) const;
  std::filesystem::path judgments_path(std::uint64_t seed) const;
  std::filesystem::path report_path() const;
  std::filesystem::path ablation_dir() const;

  const PipelineConfig& config() const { return cfg_; }

 private:
  Corpus load_dataset() const;
  Corpus load_cached_corpus() const;
  std::vector<CuratedPair> load_curated_or_throw() const;
  /// Trains one grid cell for one seed and scores it on the test split.
  /// Returns (accuracy, macro F1).
  std::pair<double, double> run_ablation_cell(const std::vector<CuratedPair>& curated,
                                              const Corpus& corpus, std::uint64_t seed,
                                              bool with_pretrain, bool with_finetune,
                                              bool with_contrastive,
                                              const std::filesystem::path& cell_dir);

  PipelineConfig cfg_;
  std::filesystem::path workdir_;
};

}  // namespace clarity
