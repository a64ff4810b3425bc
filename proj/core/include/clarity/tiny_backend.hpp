#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "clarity/autograd.hpp"
#include "clarity/model.hpp"
#include "clarity/tokenizer.hpp"

namespace clarity {

/// Attention seq2seq small enough to train on CPU. Encoder states are
/// per-position projections of token + position embeddings; the decoder is a
/// single recurrent cell with dot-product attention over them. Padding in the
/// input is masked out of attention, so trailing pads never change a result.
class TinySeq2Seq : public SeqModel {
 public:
  struct Config {
    int hidden = 64;
    int max_positions = 1024;
    std::uint64_t seed = 0;
  };

  TinySeq2Seq(Vocab vocab, Config cfg);

  std::vector<double> token_log_probs(const PrefixedExample& input,
                                      const std::string& target) override;
  std::string generate(const PrefixedExample& input, std::size_t max_len) override;
  Eigen::VectorXd pooled_decoder_state(const PrefixedExample& input,
                                       const std::string& target) override;

  /// Ids-level scoring; input may carry trailing <pad>. target_ids must end
  /// with <eos>.
  std::vector<double> token_log_probs_ids(const TokenSeq& input_ids,
                                          const TokenSeq& target_ids);

  /// Mean per-token NLL of target_ids as a differentiable node.
  ag::Var build_loss(ag::Tape& tape, const TokenSeq& input_ids,
                     const TokenSeq& target_ids);
  /// Mean of decoder states under teacher forcing, as a 1 x hidden node.
  ag::Var build_pooled_state(ag::Tape& tape, const TokenSeq& input_ids,
                             const TokenSeq& target_ids);

  TokenSeq encode_input(const PrefixedExample& input) const;
  /// Token ids of `target` with <eos> appended.
  TokenSeq encode_target(const std::string& target) const;

  std::vector<ag::Param*> params();
  /// Stable (name, param) listing for serialization.
  std::vector<std::pair<std::string, ag::Param*>> named_params();
  std::vector<std::pair<std::string, const ag::Param*>> named_params() const;

  const Vocab& vocab() const { return vocab_; }
  const Config& config() const { return cfg_; }

 private:
  struct StepState {
    ag::Var s;  // 1 x hidden
  };

  /// Encoder matrix (Lx x hidden) plus the attention mask row for pads.
  std::pair<ag::Var, ag::Var> encode_graph(ag::Tape& tape, const TokenSeq& input_ids);

  /// One decoder step; returns the new state and the logits row.
  std::pair<StepState, ag::Var> decoder_step(ag::Tape& tape, ag::Var enc, ag::Var mask,
                                             const StepState& prev, TokenId prev_token,
                                             int t);

  struct Pass {
    std::vector<ag::Var> step_nlls;
    std::vector<ag::Var> states;
  };
  Pass teacher_force(ag::Tape& tape, const TokenSeq& input_ids,
                     const TokenSeq& target_ids);

  Vocab vocab_;
  Config cfg_;

  ag::Param embed_, pos_enc_, pos_dec_;
  ag::Param w_e_, b_e_;
  ag::Param w_q_, u_q_;
  ag::Param w_x_, w_h_, w_c_, b_s_, s0_;
  ag::Param w_o_, b_o_;
};

}  // namespace clarity
