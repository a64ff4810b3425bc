#pragma once

#include <map>
#include <string>
#include <vector>

#include "clarity/model.hpp"

namespace clarity {

/// Scriptable SeqModel for exercising inference and evaluation logic without
/// training. Label probabilities and generations are keyed by (role, body);
/// unkeyed lookups fall back to role-independent entries, then defaults.
class StubSeqModel : public SeqModel {
 public:
  std::vector<double> token_log_probs(const PrefixedExample& input,
                                      const std::string& target) override;
  std::string generate(const PrefixedExample& input, std::size_t max_len) override;
  Eigen::VectorXd pooled_decoder_state(const PrefixedExample& input,
                                       const std::string& target) override;

  /// p(moral) reported for this exact body under `role`; p(immoral) = 1 - p.
  void set_label_probs(Role role, const std::string& body, double p_moral);
  /// Same, for any classifier role.
  void set_label_probs(const std::string& body, double p_moral);
  void set_response(Role role, const std::string& body, std::string response);
  void set_default_response(std::string response);
  void set_embedding(const std::string& body, const std::string& target,
                     Eigen::VectorXd embedding);

  int generate_calls(Role role) const;
  int score_calls(Role role) const;
  int total_generate_calls() const;
  void reset_counters();

 private:
  double lookup_p_moral(const PrefixedExample& input) const;

  std::map<std::pair<Role, std::string>, double> probs_;
  std::map<std::string, double> probs_any_role_;
  std::map<std::pair<Role, std::string>, std::string> responses_;
  std::string default_response_ = "stub response";
  std::map<std::string, Eigen::VectorXd> embeddings_;
  std::map<Role, int> generate_calls_;
  std::map<Role, int> score_calls_;
};

}  // namespace clarity
