#include <doctest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "clarity/tiny_backend.hpp"
#include "clarity/util.hpp"

using namespace clarity;
using Mat = ag::Mat;
using Row = Eigen::RowVectorXd;

namespace {

Vocab test_vocab() {
  return Vocab::build({"the cat sat on the mat", "a dog ran over the hill",
                       "norms separate moral actions from immoral ones"});
}

TinySeq2Seq::Config small_config(std::uint64_t seed = 7) {
  TinySeq2Seq::Config cfg;
  cfg.hidden = 8;
  cfg.max_positions = 32;
  cfg.seed = seed;
  return cfg;
}

/// Snapshot of the model's matrices, keyed by their serialization names. The
/// oracle below recomputes the forward pass from these alone.
std::map<std::string, Mat> snapshot(const TinySeq2Seq& model) {
  std::map<std::string, Mat> out;
  for (const auto& [name, param] : model.named_params()) out[name] = param->value;
  return out;
}

double log_sum_exp(const Row& x) {
  double m = x.maxCoeff();
  return m + std::log((x.array() - m).exp().sum());
}

struct OracleStep {
  Row state;
  Row logits;
};

/// Independent single-step decoder: embeddings in, next state and logits out.
OracleStep oracle_step(const std::map<std::string, Mat>& p, const Mat& enc,
                       const Row& mask, const Row& prev_state, int prev_token, int t) {
  const double inv = 1.0 / std::sqrt(static_cast<double>(prev_state.cols()));
  Row x = p.at("embed").row(prev_token) + p.at("pos_dec").row(t);
  Row q = x * p.at("w_q") + prev_state * p.at("u_q");
  Row scores = (q * enc.transpose()) * inv + mask;
  Row attn = (scores.array() - scores.maxCoeff()).exp();
  attn /= attn.sum();
  Row ctx = attn * enc;
  Row pre = x * p.at("w_x") + prev_state * p.at("w_h") + ctx * p.at("w_c") + p.at("b_s");
  OracleStep step;
  step.state = pre.array().tanh();
  step.logits = step.state * p.at("w_o") + p.at("b_o");
  return step;
}

struct OracleEncoding {
  Mat enc;
  Row mask;
};

OracleEncoding oracle_encode(const std::map<std::string, Mat>& p,
                             const TokenSeq& input_ids) {
  Mat x(static_cast<Eigen::Index>(input_ids.size()), p.at("embed").cols());
  Row mask(static_cast<Eigen::Index>(input_ids.size()));
  for (std::size_t i = 0; i < input_ids.size(); ++i) {
    auto r = static_cast<Eigen::Index>(i);
    x.row(r) = p.at("embed").row(input_ids[i]) + p.at("pos_enc").row(r);
    mask(r) = input_ids[i] == Vocab::kPad ? -1e30 : 0.0;
  }
  OracleEncoding out;
  out.enc = ((x * p.at("w_e")).rowwise() + p.at("b_e").row(0)).array().tanh();
  out.mask = mask;
  return out;
}

std::vector<double> oracle_log_probs(const std::map<std::string, Mat>& p,
                                     const TokenSeq& input_ids,
                                     const TokenSeq& target_ids) {
  OracleEncoding e = oracle_encode(p, input_ids);
  Row state = p.at("s0").row(0);
  int prev = Vocab::kBos;
  std::vector<double> out;
  for (std::size_t t = 0; t < target_ids.size(); ++t) {
    OracleStep step = oracle_step(p, e.enc, e.mask, state, prev, static_cast<int>(t));
    out.push_back(step.logits(target_ids[t]) - log_sum_exp(step.logits));
    state = step.state;
    prev = target_ids[t];
  }
  return out;
}

}  // namespace

TEST_CASE("token_log_probs matches an independent forward computation") {
  TinySeq2Seq model(test_vocab(), small_config());
  auto params = snapshot(model);

  const std::vector<std::pair<std::string, std::string>> cases = {
      {"the cat sat", "on the mat"},
      {"a dog ran", "over the hill"},
      {"norms separate moral actions", "from immoral ones"},
      {"the cat", "sat"},
  };
  for (const auto& [input_text, target] : cases) {
    CAPTURE(input_text);
    PrefixedExample ex = make_input(Role::ngen, input_text);
    TokenSeq input_ids = model.encode_input(ex);
    TokenSeq target_ids = model.encode_target(target);
    std::vector<double> got = model.token_log_probs(ex, target);
    std::vector<double> want = oracle_log_probs(params, input_ids, target_ids);
    REQUIRE(got.size() == want.size());
    REQUIRE(got.size() == split_words(target).size() + 1);
    for (std::size_t i = 0; i < got.size(); ++i) {
      CAPTURE(i);
      CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-9));
    }
    for (double lp : got) CHECK(lp < 0.0);
  }
}

TEST_CASE("trailing padding never changes a score") {
  TinySeq2Seq model(test_vocab(), small_config());
  PrefixedExample ex = make_input(Role::cls_action_only, "the cat sat on the mat");
  TokenSeq plain = model.encode_input(ex);
  TokenSeq padded = plain;
  for (int i = 0; i < 6; ++i) padded.push_back(Vocab::kPad);
  TokenSeq target = model.encode_target("moral");

  std::vector<double> a = model.token_log_probs_ids(plain, target);
  std::vector<double> b = model.token_log_probs_ids(padded, target);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("generate replays stepwise argmax with first-max ties") {
  TinySeq2Seq model(test_vocab(), small_config(11));
  auto params = snapshot(model);

  for (const std::string& text : {"the cat sat", "a dog ran over the hill"}) {
    CAPTURE(text);
    PrefixedExample ex = make_input(Role::ngen, text);
    OracleEncoding e = oracle_encode(params, model.encode_input(ex));
    Row state = params.at("s0").row(0);
    int prev = Vocab::kBos;
    TokenSeq out;
    for (int t = 0; t < 12; ++t) {
      OracleStep step = oracle_step(params, e.enc, e.mask, state, prev, t);
      Eigen::Index best = 0;
      step.logits.maxCoeff(&best);
      if (static_cast<TokenId>(best) == Vocab::kEos) break;
      out.push_back(static_cast<TokenId>(best));
      state = step.state;
      prev = static_cast<int>(best);
    }
    CHECK(model.generate(ex, 12) == model.vocab().decode(out));
  }

  PrefixedExample ex = make_input(Role::ngen, "the cat sat");
  std::string capped = model.generate(ex, 1);
  CHECK(split_words(capped).size() <= 1);
  CHECK(model.generate(ex, 12) == model.generate(ex, 12));
}

TEST_CASE("pooled state is the mean teacher-forced decoder state") {
  TinySeq2Seq model(test_vocab(), small_config());
  auto params = snapshot(model);

  PrefixedExample ex = make_input(Role::ngen, "the cat sat on the mat");
  std::string target = "a dog ran";
  Eigen::VectorXd pooled = model.pooled_decoder_state(ex, target);
  REQUIRE(pooled.size() == 8);

  OracleEncoding e = oracle_encode(params, model.encode_input(ex));
  TokenSeq target_ids = model.encode_target(target);
  Row state = params.at("s0").row(0);
  int prev = Vocab::kBos;
  Row mean = Row::Zero(8);
  for (std::size_t t = 0; t < target_ids.size(); ++t) {
    OracleStep step = oracle_step(params, e.enc, e.mask, state, prev, static_cast<int>(t));
    mean += step.state;
    state = step.state;
    prev = target_ids[t];
  }
  mean /= static_cast<double>(target_ids.size());
  for (Eigen::Index i = 0; i < 8; ++i)
    CHECK(pooled(i) == doctest::Approx(mean(i)).epsilon(1e-9));

  Eigen::VectorXd again = model.pooled_decoder_state(ex, target);
  CHECK((pooled - again).norm() == 0.0);
}

TEST_CASE("construction is seed-deterministic") {
  TinySeq2Seq a(test_vocab(), small_config(3));
  TinySeq2Seq b(test_vocab(), small_config(3));
  TinySeq2Seq c(test_vocab(), small_config(4));
  auto pa = snapshot(a), pb = snapshot(b), pc = snapshot(c);
  double diff_same = 0.0, diff_other = 0.0;
  for (const auto& [name, value] : pa) {
    diff_same += (value - pb.at(name)).norm();
    diff_other += (value - pc.at(name)).norm();
  }
  CHECK(diff_same == 0.0);
  CHECK(diff_other > 0.0);
}

TEST_CASE("input contract violations are rejected") {
  TinySeq2Seq model(test_vocab(), small_config());
  TokenSeq eos_only{Vocab::kEos};
  CHECK_THROWS_AS(model.token_log_probs_ids({}, eos_only), std::invalid_argument);
  CHECK_THROWS_AS(model.token_log_probs_ids({Vocab::kBos}, {5}), std::invalid_argument);

  TokenSeq too_long(40, 5);
  CHECK_THROWS_AS(model.token_log_probs_ids(too_long, eos_only), std::invalid_argument);

  TinySeq2Seq::Config bad = small_config();
  bad.hidden = 0;
  CHECK_THROWS_AS(TinySeq2Seq(test_vocab(), bad), std::invalid_argument);
}
