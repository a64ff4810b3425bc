#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "clarity/corpus.hpp"
#include "clarity/llm_client.hpp"
#include "clarity/prompts.hpp"
#include "clarity/report.hpp"

namespace clarity {

/// One prompt round-trip during a prompting-only run.
struct PromptRunRecord {
  std::string action;
  PromptKind prompt_kind = PromptKind::claritycot;
  std::string prompt;
  std::string response;
  std::optional<Label> parsed_label;  // absent = unparseable
  std::optional<Label> gold;
  double latency_ms = 0.0;
};

/// What an unparseable response counts as when scoring.
enum class UnparseablePolicy { count_as_wrong, exclude };

struct PromptingRun {
  std::vector<PromptRunRecord> records;
  EvalReport report;
};

struct PromptingOptions {
  UnparseablePolicy policy = UnparseablePolicy::count_as_wrong;
  int max_retries = 2;
  std::string tag;  // report tag; defaults to the prompt kind
};

/// Chained dual-hypothesis judgment prompt per action, parsed with
/// parse_choice and scored with accuracy and macro-F1. Transport failures are
/// logged and the item continues as unparseable.
PromptingRun run_claritycot(const std::vector<ActionRecord>& actions,
                            CachedLlmClient& client, const PromptingOptions& opts = {});

/// Bare yes/no judgment prompt, same plumbing.
PromptingRun run_zero_shot(const std::vector<ActionRecord>& actions,
                           CachedLlmClient& client, const PromptingOptions& opts = {});

void save_prompt_records(const std::vector<PromptRunRecord>& records,
                         const std::filesystem::path& path);
std::vector<PromptRunRecord> load_prompt_records(const std::filesystem::path& path);

}  // namespace clarity
