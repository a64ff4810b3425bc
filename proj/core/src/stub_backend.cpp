#include "clarity/stub_backend.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "clarity/util.hpp"

namespace clarity {

namespace {

std::size_t scored_length(const std::string& target) {
  return split_words(target).size() + 1;  // + closing end token
}

}  // namespace

double StubSeqModel::lookup_p_moral(const PrefixedExample& input) const {
  if (auto it = probs_.find({input.role, input.body}); it != probs_.end())
    return it->second;
  if (auto it = probs_any_role_.find(input.body); it != probs_any_role_.end())
    return it->second;
  return 0.5;
}

std::vector<double> StubSeqModel::token_log_probs(const PrefixedExample& input,
                                                  const std::string& target) {
  ++score_calls_[input.role];
  const std::size_t n = scored_length(target);
  double total;
  if (target == kMoralWord)
    total = std::log(lookup_p_moral(input));
  else if (target == kImmoralWord)
    total = std::log(1.0 - lookup_p_moral(input));
  else
    total = -std::log(2.0) * static_cast<double>(n);
  return std::vector<double>(n, total / static_cast<double>(n));
}

std::string StubSeqModel::generate(const PrefixedExample& input, std::size_t max_len) {
  (void)max_len;
  ++generate_calls_[input.role];
  if (auto it = responses_.find({input.role, input.body}); it != responses_.end())
    return it->second;
  return default_response_;
}

Eigen::VectorXd StubSeqModel::pooled_decoder_state(const PrefixedExample& input,
                                                   const std::string& target) {
  const std::string key = input.body + '\x1f' + target;
  if (auto it = embeddings_.find(key); it != embeddings_.end()) return it->second;
  // Deterministic filler for callers that only need stability, not values.
  std::seed_seq seq(key.begin(), key.end());
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd e(8);
  for (int i = 0; i < e.size(); ++i) e(i) = dist(rng);
  return e;
}

void StubSeqModel::set_label_probs(Role role, const std::string& body, double p_moral) {
  if (p_moral < 0.0 || p_moral > 1.0)
    throw std::invalid_argument("set_label_probs: p_moral outside [0, 1]");
  probs_[{role, body}] = p_moral;
}

void StubSeqModel::set_label_probs(const std::string& body, double p_moral) {
  if (p_moral < 0.0 || p_moral > 1.0)
    throw std::invalid_argument("set_label_probs: p_moral outside [0, 1]");
  probs_any_role_[body] = p_moral;
}

void StubSeqModel::set_response(Role role, const std::string& body, std::string response) {
  responses_[{role, body}] = std::move(response);
}

void StubSeqModel::set_default_response(std::string response) {
  default_response_ = std::move(response);
}

void StubSeqModel::set_embedding(const std::string& body, const std::string& target,
                                 Eigen::VectorXd embedding) {
  embeddings_[body + '\x1f' + target] = std::move(embedding);
}

int StubSeqModel::generate_calls(Role role) const {
  auto it = generate_calls_.find(role);
  return it == generate_calls_.end() ? 0 : it->second;
}

int StubSeqModel::score_calls(Role role) const {
  auto it = score_calls_.find(role);
  return it == score_calls_.end() ? 0 : it->second;
}

int StubSeqModel::total_generate_calls() const {
  int total = 0;
  for (auto& [role, n] : generate_calls_) total += n;
  return total;
}

void StubSeqModel::reset_counters() {
  generate_calls_.clear();
  score_calls_.clear();
}

}  // namespace clarity
