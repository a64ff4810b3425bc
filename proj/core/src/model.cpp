#include "clarity/model.hpp"

#include <cmath>
#include <stdexcept>

#include "clarity/util.hpp"

namespace clarity {

const std::vector<Role>& all_roles() {
  static const std::vector<Role> roles = {
      Role::rgen_moral,      Role::rgen_immoral,        Role::ngen,
      Role::cls_action_only, Role::cls_action_rationale, Role::cls_action_norm};
  return roles;
}

ModelKind kind_of(Role role) {
  switch (role) {
    case Role::rgen_moral:
    case Role::rgen_immoral: return ModelKind::rationale_generator;
    case Role::ngen: return ModelKind::norm_generator;
    case Role::cls_action_only:
    case Role::cls_action_rationale:
    case Role::cls_action_norm: return ModelKind::classifier;
  }
  throw std::logic_error("unknown role");
}

std::string to_string(Role role) {
  switch (role) {
    case Role::rgen_moral: return "rgen_moral";
    case Role::rgen_immoral: return "rgen_immoral";
    case Role::ngen: return "ngen";
    case Role::cls_action_only: return "cls_action_only";
    case Role::cls_action_rationale: return "cls_action_rationale";
    case Role::cls_action_norm: return "cls_action_norm";
  }
  throw std::logic_error("unknown role");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::rationale_generator: return "rationale_generator";
    case ModelKind::norm_generator: return "norm_generator";
    case ModelKind::classifier: return "classifier";
  }
  throw std::logic_error("unknown model kind");
}

Role role_from_string(const std::string& s) {
  for (Role r : all_roles())
    if (to_string(r) == s) return r;
  throw std::invalid_argument("unknown role: " + s);
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "rationale_generator") return ModelKind::rationale_generator;
  if (s == "norm_generator") return ModelKind::norm_generator;
  if (s == "classifier") return ModelKind::classifier;
  throw std::invalid_argument("unknown model kind: " + s);
}

const std::string& prefix_text(Role role) {
  static const std::string rgen_moral = "Explain why it is moral:";
  static const std::string rgen_immoral = "Explain why it is immoral:";
  static const std::string ngen = "Summarize the rationale as a social norm:";
  static const std::string cls_action_only = "Classify with action only:";
  static const std::string cls_action_rationale = "Classify with action and rationale:";
  static const std::string cls_action_norm = "Classify with action and norm:";
  switch (role) {
    case Role::rgen_moral: return rgen_moral;
    case Role::rgen_immoral: return rgen_immoral;
    case Role::ngen: return ngen;
    case Role::cls_action_only: return cls_action_only;
    case Role::cls_action_rationale: return cls_action_rationale;
    case Role::cls_action_norm: return cls_action_norm;
  }
  throw std::logic_error("unknown role");
}

PrefixedExample make_input(Role role, const std::string& action, const std::string& extra,
                           std::size_t max_input_len) {
  const bool takes_extra =
      role == Role::cls_action_rationale || role == Role::cls_action_norm;
  if (takes_extra && trim(extra).empty())
    throw std::invalid_argument("make_input: role " + to_string(role) +
                                " requires companion text");
  if (!takes_extra && !extra.empty())
    throw std::invalid_argument("make_input: role " + to_string(role) +
                                " does not take companion text");
  if (trim(action).empty())
    throw std::invalid_argument("make_input: empty action text");

  std::string body = takes_extra ? action + " " + extra : action;
  const std::size_t prefix_words = split_words(prefix_text(role)).size();
  if (prefix_words >= max_input_len)
    throw std::invalid_argument("make_input: max_input_len leaves no room for the body");
  body = truncate_words(body, max_input_len - prefix_words);

  PrefixedExample ex;
  ex.role = role;
  ex.body = body;
  ex.text = prefix_text(role) + " " + body;
  return ex;
}

double prefixlm_loss(SeqModel& model, const PrefixedExample& input,
                     const std::string& target) {
  std::vector<double> lp = model.token_log_probs(input, target);
  if (lp.empty()) throw std::invalid_argument("prefixlm_loss: empty target");
  double total = 0.0;
  for (double v : lp) total += v;
  return -total / static_cast<double>(lp.size());
}

namespace {

double sequence_log_prob(SeqModel& model, const PrefixedExample& input,
                         const std::string& target) {
  double total = 0.0;
  for (double v : model.token_log_probs(input, target)) total += v;
  return total;
}

}  // namespace

LabelScores classifier_scores(SeqModel& model, const PrefixedExample& input) {
  double lm = sequence_log_prob(model, input, kMoralWord);
  double li = sequence_log_prob(model, input, kImmoralWord);
  LabelScores s;
  if (std::isinf(lm) && std::isinf(li) && lm < 0 && li < 0) {
    s.p_moral = s.p_immoral = 0.5;  // both verbalizers impossible: undecided
    return s;
  }
  double m = std::max(lm, li);
  double em = std::exp(lm - m);
  double ei = std::exp(li - m);
  s.p_moral = em / (em + ei);
  s.p_immoral = ei / (em + ei);
  return s;
}

Eigen::VectorXd norm_embedding(SeqModel& norm_generator, const std::string& rationale,
                               const std::string& gold_norm, std::size_t max_input_len) {
  PrefixedExample input = make_input(Role::ngen, rationale, "", max_input_len);
  return norm_generator.pooled_decoder_state(input, gold_norm);
}

}  // namespace clarity
