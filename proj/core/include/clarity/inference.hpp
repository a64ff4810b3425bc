#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "clarity/corpus.hpp"
#include "clarity/model.hpp"

namespace clarity {

/// Which generated text the classifier conditions on for the dual paths.
enum class EvidenceMode { norms, rationales };
EvidenceMode evidence_mode_from_string(const std::string& s);
std::string to_string(EvidenceMode m);

enum class DecisionPath { action_only, moral_path, immoral_path };
std::string to_string(DecisionPath p);
DecisionPath decision_path_from_string(const std::string& s);

struct JudgeOptions {
  double tau = 0.95;
  EvidenceMode evidence = EvidenceMode::norms;
  std::size_t max_generate_len = 64;
  std::size_t max_input_len = 1024;
  /// Word budget for generated norms ("no more than twelve words").
  std::size_t norm_token_cap = 12;
};

struct Judgment {
  std::string pair_id;
  std::string action;
  std::optional<Label> gold;
  Label predicted = Label::moral;
  DecisionPath path = DecisionPath::action_only;
  double confidence_action_only = 0.0;  // max label prob before the filter
  double p_moral_action_only = 0.0;
  double p_moral_decision = 0.0;  // from the scores that decided the verdict
  std::string moral_rationale;    // evidence, empty unless the dual paths ran
  std::string immoral_rationale;
  std::string moral_norm;
  std::string immoral_norm;
};

/// Confidence filter over the classifier: a verdict from the action alone
/// when its confidence reaches tau, otherwise the verdict of the stronger of
/// the two hypothesis paths (tie prefers the moral path). The norm generator
/// is consulted only in norms mode and only when the paths run.
Judgment judge(SeqModel& rationale_gen, SeqModel& norm_gen, SeqModel& classifier,
               const std::string& action, const JudgeOptions& opts);

/// judge() over both actions of every pair in a split, gold labels attached.
std::vector<Judgment> judge_split(SeqModel& rationale_gen, SeqModel& norm_gen,
                                  SeqModel& classifier, const Corpus& corpus, Split split,
                                  const JudgeOptions& opts);

/// The default threshold grid: 0.90 to 0.99 in steps of 0.01.
std::vector<double> default_tau_grid();

struct TauSelection {
  double tau = 0.0;
  double accuracy = 0.0;
  /// (tau, validation accuracy) for every grid point, ascending tau.
  std::vector<std::pair<double, double>> grid;
};

/// Highest-accuracy threshold on the given actions; ties resolve to the
/// larger threshold. Generations run once per action, not once per tau.
TauSelection select_tau(SeqModel& rationale_gen, SeqModel& norm_gen,
                        SeqModel& classifier, const std::vector<ActionRecord>& actions,
                        const JudgeOptions& opts,
                        const std::vector<double>& grid = default_tau_grid());

void save_judgments(const std::vector<Judgment>& judgments,
                    const std::filesystem::path& path);
std::vector<Judgment> load_judgments(const std::filesystem::path& path);

}  // namespace clarity
