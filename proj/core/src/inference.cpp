#include "clarity/inference.hpp"

#include <algorithm>
#include <stdexcept>

#include "clarity/util.hpp"

namespace clarity {

EvidenceMode evidence_mode_from_string(const std::string& s) {
  if (s == "norms") return EvidenceMode::norms;
  if (s == "rationales") return EvidenceMode::rationales;
  throw std::invalid_argument("unknown evidence mode: " + s);
}

std::string to_string(EvidenceMode m) {
  return m == EvidenceMode::norms ? "norms" : "rationales";
}

std::string to_string(DecisionPath p) {
  switch (p) {
    case DecisionPath::action_only: return "action_only";
    case DecisionPath::moral_path: return "moral_path";
    case DecisionPath::immoral_path: return "immoral_path";
  }
  throw std::logic_error("unknown decision path");
}

DecisionPath decision_path_from_string(const std::string& s) {
  if (s == "action_only") return DecisionPath::action_only;
  if (s == "moral_path") return DecisionPath::moral_path;
  if (s == "immoral_path") return DecisionPath::immoral_path;
  throw std::invalid_argument("unknown decision path: " + s);
}

namespace {

Label label_of(const LabelScores& s) {
  return s.p_moral >= s.p_immoral ? Label::moral : Label::immoral;
}

double confidence(const LabelScores& s) { return std::max(s.p_moral, s.p_immoral); }

// Non-empty text for downstream conditioning: empty decodes fall back to the
// text they were decoded from.
std::string generate_nonempty(SeqModel& model, const PrefixedExample& input,
                              std::size_t max_len, const std::string& fallback) {
  std::string out = model.generate(input, max_len);
  return trim(out).empty() ? fallback : out;
}

// Everything judge() can decide from, independent of tau.
struct PathBundle {
  LabelScores action_only;
  bool paths_ran = false;
  LabelScores moral_scores, immoral_scores;
  std::string moral_rationale, immoral_rationale;
  std::string moral_norm, immoral_norm;

  bool moral_path_wins() const {
    return confidence(moral_scores) >= confidence(immoral_scores);
  }
  const LabelScores& chosen_scores() const {
    return moral_path_wins() ? moral_scores : immoral_scores;
  }
};

LabelScores score_from_action_only(SeqModel& classifier, const std::string& action,
                                   const JudgeOptions& opts) {
  return classifier_scores(
      classifier, make_input(Role::cls_action_only, action, "", opts.max_input_len));
}

void run_paths(PathBundle& b, SeqModel& rationale_gen, SeqModel& norm_gen,
               SeqModel& classifier, const std::string& action,
               const JudgeOptions& opts) {
  b.paths_ran = true;
  b.moral_rationale = generate_nonempty(
      rationale_gen, make_input(Role::rgen_moral, action, "", opts.max_input_len),
      opts.max_generate_len, action);
  b.immoral_rationale = generate_nonempty(
      rationale_gen, make_input(Role::rgen_immoral, action, "", opts.max_input_len),
      opts.max_generate_len, action);
  if (opts.evidence == EvidenceMode::norms) {
    b.moral_norm = truncate_words(
        generate_nonempty(norm_gen,
                          make_input(Role::ngen, b.moral_rationale, "", opts.max_input_len),
                          opts.max_generate_len, b.moral_rationale),
        opts.norm_token_cap);
    b.immoral_norm = truncate_words(
        generate_nonempty(norm_gen,
                          make_input(Role::ngen, b.immoral_rationale, "", opts.max_input_len),
                          opts.max_generate_len, b.immoral_rationale),
        opts.norm_token_cap);
    b.moral_scores = classifier_scores(
        classifier,
        make_input(Role::cls_action_norm, action, b.moral_norm, opts.max_input_len));
    b.immoral_scores = classifier_scores(
        classifier,
        make_input(Role::cls_action_norm, action, b.immoral_norm, opts.max_input_len));
  } else {
    b.moral_scores = classifier_scores(
        classifier, make_input(Role::cls_action_rationale, action, b.moral_rationale,
                               opts.max_input_len));
    b.immoral_scores = classifier_scores(
        classifier, make_input(Role::cls_action_rationale, action, b.immoral_rationale,
                               opts.max_input_len));
  }
}

Judgment judgment_at_tau(const PathBundle& b, const std::string& action, double tau) {
  Judgment j;
  j.action = action;
  j.confidence_action_only = confidence(b.action_only);
  j.p_moral_action_only = b.action_only.p_moral;
  if (j.confidence_action_only >= tau) {
    j.path = DecisionPath::action_only;
    j.predicted = label_of(b.action_only);
    j.p_moral_decision = b.action_only.p_moral;
    return j;
  }
  if (!b.paths_ran)
    throw std::logic_error("judgment_at_tau: paths required but not run");
  j.path = b.moral_path_wins() ? DecisionPath::moral_path : DecisionPath::immoral_path;
  const LabelScores& chosen = b.chosen_scores();
  j.predicted = label_of(chosen);
  j.p_moral_decision = chosen.p_moral;
  j.moral_rationale = b.moral_rationale;
  j.immoral_rationale = b.immoral_rationale;
  j.moral_norm = b.moral_norm;
  j.immoral_norm = b.immoral_norm;
  return j;
}

}  // namespace

Judgment judge(SeqModel& rationale_gen, SeqModel& norm_gen, SeqModel& classifier,
               const std::string& action, const JudgeOptions& opts) {
  PathBundle b;
  b.action_only = score_from_action_only(classifier, action, opts);
  if (confidence(b.action_only) < opts.tau)
    run_paths(b, rationale_gen, norm_gen, classifier, action, opts);
  return judgment_at_tau(b, action, opts.tau);
}

std::vector<Judgment> judge_split(SeqModel& rationale_gen, SeqModel& norm_gen,
                                  SeqModel& classifier, const Corpus& corpus, Split split,
                                  const JudgeOptions& opts) {
  std::vector<Judgment> out;
  for (const ActionRecord& rec : corpus.actions(split)) {
    Judgment j = judge(rationale_gen, norm_gen, classifier, rec.action, opts);
    j.pair_id = rec.pair_id;
    j.gold = rec.gold_label;
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<double> default_tau_grid() {
  std::vector<double> grid;
  for (int i = 90; i <= 99; ++i) grid.push_back(static_cast<double>(i) / 100.0);
  return grid;
}

TauSelection select_tau(SeqModel& rationale_gen, SeqModel& norm_gen, SeqModel& classifier,
                        const std::vector<ActionRecord>& actions,
                        const JudgeOptions& opts, const std::vector<double>& grid) {
  if (actions.empty()) throw std::invalid_argument("select_tau: no actions");
  if (grid.empty()) throw std::invalid_argument("select_tau: empty grid");
  const double max_tau = *std::max_element(grid.begin(), grid.end());

  std::vector<PathBundle> bundles;
  bundles.reserve(actions.size());
  for (const ActionRecord& rec : actions) {
    PathBundle b;
    b.action_only = score_from_action_only(classifier, rec.action, opts);
    if (confidence(b.action_only) < max_tau)
      run_paths(b, rationale_gen, norm_gen, classifier, rec.action, opts);
    bundles.push_back(std::move(b));
  }

  TauSelection sel;
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  for (double tau : sorted) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < actions.size(); ++i) {
      Judgment j = judgment_at_tau(bundles[i], actions[i].action, tau);
      if (j.predicted == actions[i].gold_label) ++correct;
    }
    double acc = static_cast<double>(correct) / static_cast<double>(actions.size());
    sel.grid.emplace_back(tau, acc);
    if (sel.grid.size() == 1 || acc >= sel.accuracy) {
      sel.accuracy = acc;
      sel.tau = tau;
    }
  }
  return sel;
}

void save_judgments(const std::vector<Judgment>& judgments,
                    const std::filesystem::path& path) {
  std::vector<json> lines;
  lines.reserve(judgments.size());
  for (const Judgment& j : judgments) {
    json row{{"pair_id", j.pair_id},
             {"action", j.action},
             {"gold", j.gold ? json(to_string(*j.gold)) : json(nullptr)},
             {"predicted", to_string(j.predicted)},
             {"path", to_string(j.path)},
             {"confidence_action_only", j.confidence_action_only},
             {"p_moral_action_only", j.p_moral_action_only},
             {"p_moral_decision", j.p_moral_decision},
             {"moral_rationale", j.moral_rationale},
             {"immoral_rationale", j.immoral_rationale},
             {"moral_norm", j.moral_norm},
             {"immoral_norm", j.immoral_norm}};
    lines.push_back(std::move(row));
  }
  write_jsonl(path, lines);
}

namespace {

Label label_from_string(const std::string& s) {
  if (s == "moral") return Label::moral;
  if (s == "immoral") return Label::immoral;
  throw std::invalid_argument("unknown label: " + s);
}

}  // namespace

std::vector<Judgment> load_judgments(const std::filesystem::path& path) {
  std::vector<Judgment> out;
  for (const json& j : read_jsonl(path)) {
    Judgment x;
    x.pair_id = j.at("pair_id").get<std::string>();
    x.action = j.at("action").get<std::string>();
    if (!j.at("gold").is_null())
      x.gold = label_from_string(j.at("gold").get<std::string>());
    x.predicted = label_from_string(j.at("predicted").get<std::string>());
    x.path = decision_path_from_string(j.at("path").get<std::string>());
    x.confidence_action_only = j.at("confidence_action_only").get<double>();
    x.p_moral_action_only = j.at("p_moral_action_only").get<double>();
    x.p_moral_decision = j.at("p_moral_decision").get<double>();
    x.moral_rationale = j.at("moral_rationale").get<std::string>();
    x.immoral_rationale = j.at("immoral_rationale").get<std::string>();
    x.moral_norm = j.at("moral_norm").get<std::string>();
    x.immoral_norm = j.at("immoral_norm").get<std::string>();
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace clarity
