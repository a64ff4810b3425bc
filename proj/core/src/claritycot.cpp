#include "clarity/claritycot.hpp"

#include <chrono>

#include "clarity/metrics.hpp"
#include "clarity/util.hpp"

namespace clarity {

namespace {

PromptingRun run_judgment_prompts(PromptKind kind,
                                  const std::vector<ActionRecord>& actions,
                                  CachedLlmClient& client,
                                  const PromptingOptions& opts) {
  if (actions.empty()) throw std::invalid_argument("prompting run: no actions");
  PromptingRun run;
  const std::string kind_name = to_string(kind);
  for (const ActionRecord& rec : actions) {
    PromptRunRecord r;
    r.action = rec.action;
    r.prompt_kind = kind;
    r.gold = rec.gold_label;
    r.prompt = kind == PromptKind::claritycot ? prompts::claritycot(rec.action)
                                              : prompts::zero_shot(rec.action);
    const auto t0 = std::chrono::steady_clock::now();
    for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
      if (attempt > 0) client.invalidate(kind_name, r.prompt);
      try {
        r.response = client.complete(kind_name, r.prompt);
      } catch (const TransportError& e) {
        log_info("prompting: transport failure for one item, continuing: " +
                 std::string(e.what()));
        r.response.clear();
        continue;
      }
      if (auto verdict = parse_choice(r.response)) {
        r.parsed_label = *verdict == 1 ? Label::moral : Label::immoral;
        break;
      }
    }
    const auto t1 = std::chrono::steady_clock::now();
    r.latency_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    run.records.push_back(std::move(r));
  }

  std::vector<int> preds, golds;
  std::size_t unparseable = 0;
  for (const PromptRunRecord& r : run.records) {
    if (!r.parsed_label) {
      ++unparseable;
      if (opts.policy == UnparseablePolicy::exclude) continue;
    }
    golds.push_back(static_cast<int>(*r.gold));
    // Unscoreable answers count as the wrong label under the default policy.
    int pred = r.parsed_label ? static_cast<int>(*r.parsed_label)
                              : 1 - static_cast<int>(*r.gold);
    preds.push_back(pred);
  }

  EvalReport& report = run.report;
  report.tag = opts.tag.empty() ? kind_name : opts.tag;
  report.items = run.records.size();
  report.unparseable = unparseable;
  MetricSet m;
  if (!golds.empty()) {
    m.accuracy = accuracy(preds, golds);
    m.macro_f1 = macro_f1(preds, golds);
  } else {
    m.accuracy = 0.0;
    m.macro_f1 = 0.0;
  }
  report.per_seed.push_back(m);
  aggregate_report(report);
  return run;
}

}  // namespace

PromptingRun run_claritycot(const std::vector<ActionRecord>& actions,
                            CachedLlmClient& client, const PromptingOptions& opts) {
  return run_judgment_prompts(PromptKind::claritycot, actions, client, opts);
}

PromptingRun run_zero_shot(const std::vector<ActionRecord>& actions,
                           CachedLlmClient& client, const PromptingOptions& opts) {
  return run_judgment_prompts(PromptKind::zero_shot_judgment, actions, client, opts);
}

void save_prompt_records(const std::vector<PromptRunRecord>& records,
                         const std::filesystem::path& path) {
  std::vector<json> lines;
  lines.reserve(records.size());
  for (const PromptRunRecord& r : records) {
    lines.push_back(
        json{{"action", r.action},
             {"prompt_kind", to_string(r.prompt_kind)},
             {"prompt", r.prompt},
             {"response", r.response},
             {"parsed_label", r.parsed_label ? json(to_string(*r.parsed_label)) : json()},
             {"gold", r.gold ? json(to_string(*r.gold)) : json()},
             {"latency_ms", r.latency_ms}});
  }
  write_jsonl(path, lines);
}

std::vector<PromptRunRecord> load_prompt_records(const std::filesystem::path& path) {
  std::vector<PromptRunRecord> out;
  for (const json& j : read_jsonl(path)) {
    PromptRunRecord r;
    r.action = j.at("action").get<std::string>();
    r.prompt_kind = prompt_kind_from_string(j.at("prompt_kind").get<std::string>());
    r.prompt = j.at("prompt").get<std::string>();
    r.response = j.at("response").get<std::string>();
    if (!j.at("parsed_label").is_null())
      r.parsed_label = j.at("parsed_label").get<std::string>() == "moral"
                           ? Label::moral
                           : Label::immoral;
    if (!j.at("gold").is_null())
      r.gold = j.at("gold").get<std::string>() == "moral" ? Label::moral : Label::immoral;
    r.latency_ms = j.at("latency_ms").get<double>();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace clarity
