#include "clarity/curation.hpp"

#include <algorithm>

#include "clarity/util.hpp"

namespace clarity {

CurationResult curate(const Corpus& corpus, CachedLlmClient& client,
                      const CurationOptions& opts) {
  CurationResult result;
  for (const MoralPair& pair : corpus.pairs) {
    if (std::find(opts.splits.begin(), opts.splits.end(), pair.split) ==
        opts.splits.end())
      continue;
    const std::string prompt =
        prompts::rationale_curation(pair.norm, pair.moral_action, pair.immoral_action);
    const std::string kind = to_string(PromptKind::rationale_two_step);
    std::optional<RationalePair> parsed;
    for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
      if (attempt > 0) client.invalidate(kind, prompt);
      parsed = parse_rationale_response(client.complete(kind, prompt));
      if (parsed) break;
    }
    if (!parsed) {
      log_info("curate: pair '" + pair.pair_id + "' skipped after " +
               std::to_string(opts.max_retries + 1) + " unparseable responses");
      ++result.skipped;
      continue;
    }
    result.curated.push_back({pair, parsed->moral_rationale, parsed->immoral_rationale});
  }
  return result;
}

void save_curated(const std::vector<CuratedPair>& curated,
                  const std::filesystem::path& path) {
  std::vector<json> lines;
  lines.reserve(curated.size());
  for (const CuratedPair& c : curated) {
    lines.push_back(json{{"id", c.pair.pair_id},
                         {"norm", c.pair.norm},
                         {"moral_action", c.pair.moral_action},
                         {"immoral_action", c.pair.immoral_action},
                         {"source", to_string(c.pair.source)},
                         {"split", to_string(c.pair.split)},
                         {"moral_rationale", c.moral_rationale},
                         {"immoral_rationale", c.immoral_rationale}});
  }
  write_jsonl(path, lines);
}

std::vector<CuratedPair> load_curated(const std::filesystem::path& path) {
  std::vector<CuratedPair> out;
  std::size_t line_no = 0;
  for (const json& j : read_jsonl(path)) {
    ++line_no;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    CuratedPair c;
    try {
      c.pair.pair_id = j.at("id").get<std::string>();
      c.pair.norm = j.at("norm").get<std::string>();
      c.pair.moral_action = j.at("moral_action").get<std::string>();
      c.pair.immoral_action = j.at("immoral_action").get<std::string>();
      c.pair.source = source_from_string(j.at("source").get<std::string>());
      c.pair.split = split_from_string(j.at("split").get<std::string>());
      c.moral_rationale = j.at("moral_rationale").get<std::string>();
      c.immoral_rationale = j.at("immoral_rationale").get<std::string>();
    } catch (const json::exception& e) {
      throw std::runtime_error(where + ": malformed record: " + e.what());
    }
    out.push_back(std::move(c));
  }
  if (out.empty()) throw std::runtime_error(path.string() + ": empty corpus");
  return out;
}

}  // namespace clarity
