#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace clarity {

/// Task prefixes. One physical model serves several roles; the prefix tells
/// it which behavior is being asked for.
enum class Role {
  rgen_moral,
  rgen_immoral,
  ngen,
  cls_action_only,
  cls_action_rationale,
  cls_action_norm,
};

/// The three physical models behind the six roles.
enum class ModelKind { rationale_generator, norm_generator, classifier };

const std::vector<Role>& all_roles();
ModelKind kind_of(Role role);
std::string to_string(Role role);
std::string to_string(ModelKind kind);
Role role_from_string(const std::string& s);
ModelKind model_kind_from_string(const std::string& s);

/// The frozen prefix string for a role.
const std::string& prefix_text(Role role);

/// Verbalizer tokens the classifier scores against.
inline const char* kMoralWord = "moral";
inline const char* kImmoralWord = "immoral";

struct PrefixedExample {
  Role role = Role::cls_action_only;
  std::string body;  // action (plus companion text), possibly truncated
  std::string text;  // prefix + " " + body
};

/// Builds the model input for a role. `extra` carries the companion text and
/// is required exactly for the classifier roles that condition on one
/// (rationale or norm); other roles must not pass it. For the norm generator
/// the rationale itself is the `action` argument. When the whitespace token
/// count of prefix + body exceeds max_input_len, the body loses words from
/// its right edge; the prefix is never cut.
PrefixedExample make_input(Role role, const std::string& action,
                           const std::string& extra = "",
                           std::size_t max_input_len = 1024);

/// Sequence model contract shared by the trainable backend and test stubs.
/// Targets are scored token by token, final end-of-sequence step included.
class SeqModel {
 public:
  virtual ~SeqModel() = default;

  /// Log-probability of each target token (plus the closing end token) given
  /// the input and all preceding target tokens.
  virtual std::vector<double> token_log_probs(const PrefixedExample& input,
                                              const std::string& target) = 0;

  /// Greedy decode, at most max_len tokens.
  virtual std::string generate(const PrefixedExample& input, std::size_t max_len) = 0;

  /// Mean of decoder hidden states while teacher-forcing `target`.
  virtual Eigen::VectorXd pooled_decoder_state(const PrefixedExample& input,
                                               const std::string& target) = 0;
};

/// Mean negative log-likelihood per scored target token.
double prefixlm_loss(SeqModel& model, const PrefixedExample& input,
                     const std::string& target);

struct LabelScores {
  double p_moral = 0.0;
  double p_immoral = 0.0;
};

/// Softmax over the sequence log-probabilities of the two verbalizers;
/// p_moral + p_immoral == 1.
LabelScores classifier_scores(SeqModel& model, const PrefixedExample& input);

/// Norm-space embedding of a rationale: decoder states of the norm generator
/// teacher-forced on `gold_norm`, mean-pooled.
Eigen::VectorXd norm_embedding(SeqModel& norm_generator, const std::string& rationale,
                               const std::string& gold_norm,
                               std::size_t max_input_len = 1024);

}  // namespace clarity
