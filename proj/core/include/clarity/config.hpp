#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "clarity/inference.hpp"
#include "clarity/llm_client.hpp"
#include "clarity/training.hpp"
#include "clarity/util.hpp"

namespace clarity {

struct DatasetConfig {
  /// "moral_stories" or "ethics".
  std::string kind = "moral_stories";
  /// moral_stories: line-delimited pair files. Records may carry their own
  /// split; otherwise the file's default split applies.
  std::string train_path;
  std::string test_path;
  /// ethics: native concept CSVs.
  std::string justice_train, justice_test;
  std::string deontology_train, deontology_test;
  std::string virtue_train, virtue_test;
  /// Optional override file for the three concept norms.
  std::string norms_file;
  double validation_fraction = 0.05;
  std::uint64_t validation_seed = 12345;
};

struct ClientConfig {
  /// "stub" or "network".
  std::string kind = "stub";
  std::string model = "gpt-3.5-turbo";
  std::string base_url = "https://api.openai.com";
  /// Environment variable NAME holding the key; the key itself never lands
  /// in configuration or on disk.
  std::string api_key_env = "LLM_API_KEY";
};

struct ModelConfig {
  int hidden = 64;
  int max_positions = 1024;
};

struct InferenceConfig {
  double tau = 0.95;
  std::string evidence = "norms";
  double tau_grid_min = 0.90;
  double tau_grid_max = 0.99;
  double tau_grid_step = 0.01;
  std::size_t max_generate_len = 64;
  std::size_t norm_token_cap = 12;

  std::vector<double> tau_grid() const;
  JudgeOptions judge_options(std::size_t max_input_len) const;
};

struct AblationSwitches {
  bool pretrain = true;
  bool finetune = true;
  bool contrastive = true;
};

struct CurationConfig {
  int max_retries = 2;
};

struct PipelineConfig {
  DatasetConfig dataset;
  ClientConfig client;
  ModelConfig model;
  TrainConfig train;
  InferenceConfig inference;
  CurationConfig curation;
  AblationSwitches ablation;
  std::string cache_dir = "cache";
  std::string checkpoint_dir = "checkpoints";
  std::string output_dir = "outputs";
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

  /// Structural checks (enums, at least one seed, grid sanity). Throws
  /// UsageError with the offending key.
  void validate() const;
};

json to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const json& j);
PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const PipelineConfig& config, const std::filesystem::path& path);

/// Applies one `--set dotted.key=value` override onto raw config JSON. The
/// value parses as JSON when it can, else as a string.
void apply_override(json& config_json, const std::string& assignment);

std::shared_ptr<LlmClient> make_client(const ClientConfig& config);

}  // namespace clarity
