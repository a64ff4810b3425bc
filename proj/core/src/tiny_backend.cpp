#include "clarity/tiny_backend.hpp"

#include <cmath>
#include <stdexcept>

namespace clarity {

namespace {
constexpr double kMaskValue = -1e30;
}

TinySeq2Seq::TinySeq2Seq(Vocab vocab, Config cfg)
    : vocab_(std::move(vocab)), cfg_(cfg) {
  if (cfg_.hidden <= 0) throw std::invalid_argument("TinySeq2Seq: hidden must be > 0");
  if (cfg_.max_positions <= 1)
    throw std::invalid_argument("TinySeq2Seq: max_positions must be > 1");
  const auto d = static_cast<Eigen::Index>(cfg_.hidden);
  const auto v = static_cast<Eigen::Index>(vocab_.size());
  const auto l = static_cast<Eigen::Index>(cfg_.max_positions);
  std::mt19937_64 rng(cfg_.seed);
  embed_ = ag::Param(ag::glorot(v, d, rng));
  pos_enc_ = ag::Param(ag::glorot(l, d, rng));
  pos_dec_ = ag::Param(ag::glorot(l, d, rng));
  w_e_ = ag::Param(ag::glorot(d, d, rng));
  b_e_ = ag::Param(ag::Mat::Zero(1, d));
  w_q_ = ag::Param(ag::glorot(d, d, rng));
  u_q_ = ag::Param(ag::glorot(d, d, rng));
  w_x_ = ag::Param(ag::glorot(d, d, rng));
  w_h_ = ag::Param(ag::glorot(d, d, rng));
  w_c_ = ag::Param(ag::glorot(d, d, rng));
  b_s_ = ag::Param(ag::Mat::Zero(1, d));
  s0_ = ag::Param(ag::Mat::Zero(1, d));
  w_o_ = ag::Param(ag::glorot(d, v, rng));
  b_o_ = ag::Param(ag::Mat::Zero(1, v));
}

TokenSeq TinySeq2Seq::encode_input(const PrefixedExample& input) const {
  return vocab_.encode(input.text);
}

TokenSeq TinySeq2Seq::encode_target(const std::string& target) const {
  TokenSeq ids = vocab_.encode(target);
  ids.push_back(Vocab::kEos);
  return ids;
}

std::pair<ag::Var, ag::Var> TinySeq2Seq::encode_graph(ag::Tape& tape,
                                                      const TokenSeq& input_ids) {
  if (input_ids.empty()) throw std::invalid_argument("encode_graph: empty input");
  if (input_ids.size() > static_cast<std::size_t>(cfg_.max_positions))
    throw std::invalid_argument("encode_graph: input longer than max_positions");
  std::vector<int> tok(input_ids.begin(), input_ids.end());
  std::vector<int> pos(input_ids.size());
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = static_cast<int>(i);

  ag::Var emb = tape.gather_rows(tape.param(embed_), tok);
  ag::Var pe = tape.gather_rows(tape.param(pos_enc_), pos);
  ag::Var x = tape.add(emb, pe);
  ag::Var enc = tape.tanh(tape.add_row(tape.matmul(x, tape.param(w_e_)), tape.param(b_e_)));

  ag::Mat mask(1, static_cast<Eigen::Index>(input_ids.size()));
  for (std::size_t i = 0; i < input_ids.size(); ++i)
    mask(0, static_cast<Eigen::Index>(i)) = input_ids[i] == Vocab::kPad ? kMaskValue : 0.0;
  return {enc, tape.constant(std::move(mask))};
}

std::pair<TinySeq2Seq::StepState, ag::Var> TinySeq2Seq::decoder_step(
    ag::Tape& tape, ag::Var enc, ag::Var mask, const StepState& prev, TokenId prev_token,
    int t) {
  if (t >= cfg_.max_positions)
    throw std::invalid_argument("decoder_step: target longer than max_positions");
  ag::Var x = tape.add(tape.gather_rows(tape.param(embed_), {prev_token}),
                       tape.gather_rows(tape.param(pos_dec_), {t}));
  ag::Var q = tape.add(tape.matmul(x, tape.param(w_q_)),
                       tape.matmul(prev.s, tape.param(u_q_)));
  ag::Var scores = tape.scale(tape.matmul_nt(q, enc),
                              1.0 / std::sqrt(static_cast<double>(cfg_.hidden)));
  ag::Var attn = tape.softmax_rows(tape.add(scores, mask));
  ag::Var ctx = tape.matmul(attn, enc);
  ag::Var pre = tape.add(
      tape.add(tape.matmul(x, tape.param(w_x_)), tape.matmul(prev.s, tape.param(w_h_))),
      tape.add_row(tape.matmul(ctx, tape.param(w_c_)), tape.param(b_s_)));
  StepState next{tape.tanh(pre)};
  ag::Var logits = tape.add_row(tape.matmul(next.s, tape.param(w_o_)), tape.param(b_o_));
  return {next, logits};
}

TinySeq2Seq::Pass TinySeq2Seq::teacher_force(ag::Tape& tape, const TokenSeq& input_ids,
                                             const TokenSeq& target_ids) {
  if (target_ids.empty() || target_ids.back() != Vocab::kEos)
    throw std::invalid_argument("teacher_force: target_ids must end with <eos>");
  auto [enc, mask] = encode_graph(tape, input_ids);
  Pass pass;
  StepState state{tape.param(s0_)};
  TokenId prev = Vocab::kBos;
  for (std::size_t t = 0; t < target_ids.size(); ++t) {
    auto [next, logits] = decoder_step(tape, enc, mask, state, prev, static_cast<int>(t));
    pass.step_nlls.push_back(tape.nll(logits, target_ids[t]));
    pass.states.push_back(next.s);
    state = next;
    prev = target_ids[t];
  }
  return pass;
}

ag::Var TinySeq2Seq::build_loss(ag::Tape& tape, const TokenSeq& input_ids,
                                const TokenSeq& target_ids) {
  Pass pass = teacher_force(tape, input_ids, target_ids);
  ag::Var total = pass.step_nlls[0];
  for (std::size_t i = 1; i < pass.step_nlls.size(); ++i)
    total = tape.add(total, pass.step_nlls[i]);
  return tape.scale(total, 1.0 / static_cast<double>(pass.step_nlls.size()));
}

ag::Var TinySeq2Seq::build_pooled_state(ag::Tape& tape, const TokenSeq& input_ids,
                                        const TokenSeq& target_ids) {
  Pass pass = teacher_force(tape, input_ids, target_ids);
  ag::Var total = pass.states[0];
  for (std::size_t i = 1; i < pass.states.size(); ++i)
    total = tape.add(total, pass.states[i]);
  return tape.scale(total, 1.0 / static_cast<double>(pass.states.size()));
}

std::vector<double> TinySeq2Seq::token_log_probs_ids(const TokenSeq& input_ids,
                                                     const TokenSeq& target_ids) {
  ag::Tape tape;
  Pass pass = teacher_force(tape, input_ids, target_ids);
  std::vector<double> out;
  out.reserve(pass.step_nlls.size());
  for (ag::Var v : pass.step_nlls) out.push_back(-tape.val(v)(0, 0));
  return out;
}

std::vector<double> TinySeq2Seq::token_log_probs(const PrefixedExample& input,
                                                 const std::string& target) {
  return token_log_probs_ids(encode_input(input), encode_target(target));
}

std::string TinySeq2Seq::generate(const PrefixedExample& input, std::size_t max_len) {
  ag::Tape tape;
  auto [enc, mask] = encode_graph(tape, encode_input(input));
  StepState state{tape.param(s0_)};
  TokenId prev = Vocab::kBos;
  TokenSeq out;
  std::size_t cap = std::min<std::size_t>(max_len, static_cast<std::size_t>(cfg_.max_positions));
  for (std::size_t t = 0; t < cap; ++t) {
    auto [next, logits] = decoder_step(tape, enc, mask, state, prev, static_cast<int>(t));
    Eigen::Index best = 0;
    tape.val(logits).row(0).maxCoeff(&best);
    TokenId id = static_cast<TokenId>(best);
    if (id == Vocab::kEos) break;
    out.push_back(id);
    state = next;
    prev = id;
  }
  return vocab_.decode(out);
}

Eigen::VectorXd TinySeq2Seq::pooled_decoder_state(const PrefixedExample& input,
                                                  const std::string& target) {
  ag::Tape tape;
  ag::Var pooled = build_pooled_state(tape, encode_input(input), encode_target(target));
  return tape.val(pooled).row(0).transpose();
}

std::vector<ag::Param*> TinySeq2Seq::params() {
  std::vector<ag::Param*> out;
  for (auto& [name, p] : named_params()) out.push_back(p);
  return out;
}

std::vector<std::pair<std::string, ag::Param*>> TinySeq2Seq::named_params() {
  return {{"embed", &embed_}, {"pos_enc", &pos_enc_}, {"pos_dec", &pos_dec_},
          {"w_e", &w_e_},     {"b_e", &b_e_},         {"w_q", &w_q_},
          {"u_q", &u_q_},     {"w_x", &w_x_},         {"w_h", &w_h_},
          {"w_c", &w_c_},     {"b_s", &b_s_},         {"s0", &s0_},
          {"w_o", &w_o_},     {"b_o", &b_o_}};
}

std::vector<std::pair<std::string, const ag::Param*>> TinySeq2Seq::named_params() const {
  std::vector<std::pair<std::string, const ag::Param*>> out;
  for (auto& [name, p] : const_cast<TinySeq2Seq*>(this)->named_params())
    out.emplace_back(name, p);
  return out;
}

}  // namespace clarity
