#pragma once

#include <filesystem>
#include <vector>

#include "clarity/corpus.hpp"
#include "clarity/llm_client.hpp"
#include "clarity/prompts.hpp"

namespace clarity {

/// A MoralPair annotated with assistant-written rationales for both sides.
struct CuratedPair {
  MoralPair pair;
  std::string moral_rationale;
  std::string immoral_rationale;
};

struct CurationOptions {
  /// Extra attempts per pair after an unparseable response; each retry
  /// bypasses the response cache.
  int max_retries = 2;
  std::vector<Split> splits = {Split::train, Split::validation};
};

struct CurationResult {
  std::vector<CuratedPair> curated;
  std::size_t skipped = 0;
};

/// Collects rationales for every pair in the requested splits. Pairs whose
/// responses stay unparseable through all retries are logged and skipped.
CurationResult curate(const Corpus& corpus, CachedLlmClient& client,
                      const CurationOptions& opts = {});

void save_curated(const std::vector<CuratedPair>& curated,
                  const std::filesystem::path& path);
std::vector<CuratedPair> load_curated(const std::filesystem::path& path);

}  // namespace clarity
