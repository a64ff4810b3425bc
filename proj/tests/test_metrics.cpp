#include <doctest.h>

#include <array>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "clarity/metrics.hpp"

using namespace clarity;

namespace {

// Confusion-matrix oracle for accuracy and macro F1, structured differently
// from the implementation on purpose.
struct Confusion {
  std::map<int, long long> tp, fp, fn;
  long long correct = 0, n = 0;
};

Confusion tally(const std::vector<int>& pred, const std::vector<int>& gold) {
  Confusion c;
  c.n = static_cast<long long>(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (pred[i] == gold[i]) {
      ++c.correct;
      ++c.tp[gold[i]];
    } else {
      ++c.fp[pred[i]];
      ++c.fn[gold[i]];
    }
  }
  return c;
}

double oracle_accuracy(const Confusion& c) {
  return static_cast<double>(c.correct) / static_cast<double>(c.n);
}

double oracle_macro_f1(const Confusion& c, const std::vector<int>& gold) {
  std::map<int, bool> gold_classes;
  for (int g : gold) gold_classes[g] = true;
  double sum = 0.0;
  for (const auto& [cls, unused] : gold_classes) {
    auto at = [&](const std::map<int, long long>& m) {
      auto it = m.find(cls);
      return it == m.end() ? 0LL : it->second;
    };
    long long tp = at(c.tp), fp = at(c.fp), fn = at(c.fn);
    double p = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    double r = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    sum += p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
  return sum / static_cast<double>(gold_classes.size());
}

std::string join(const std::vector<std::string>& toks, std::size_t from, std::size_t n) {
  std::string out;
  for (std::size_t i = from; i < from + n; ++i) {
    out += toks[i];
    out += '\x01';
  }
  return out;
}

// Independent corpus BLEU: string-keyed n-gram maps, probabilities kept in
// [0, 1] and scaled at the end.
double oracle_bleu(const std::vector<std::string>& hyps,
                   const std::vector<std::string>& refs) {
  std::array<long long, 4> correct{}, total{};
  long long sys_len = 0, ref_len = 0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    auto h = tokenize_13a(hyps[i]);
    auto r = tokenize_13a(refs[i]);
    sys_len += static_cast<long long>(h.size());
    ref_len += static_cast<long long>(r.size());
    for (std::size_t n = 1; n <= 4; ++n) {
      std::map<std::string, long long> hc, rc;
      if (h.size() >= n)
        for (std::size_t k = 0; k + n <= h.size(); ++k) ++hc[join(h, k, n)];
      if (r.size() >= n)
        for (std::size_t k = 0; k + n <= r.size(); ++k) ++rc[join(r, k, n)];
      for (const auto& [gram, cnt] : hc) {
        auto it = rc.find(gram);
        if (it != rc.end()) correct[n - 1] += std::min(cnt, it->second);
      }
      if (h.size() >= n) total[n - 1] += static_cast<long long>(h.size() - n + 1);
    }
  }
  if (sys_len == 0) return 0.0;
  double smooth = 1.0, log_sum = 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    if (total[n] == 0) return 0.0;
    double p;
    if (correct[n] == 0) {
      smooth *= 2.0;
      p = 1.0 / (smooth * static_cast<double>(total[n]));
    } else {
      p = static_cast<double>(correct[n]) / static_cast<double>(total[n]);
    }
    log_sum += std::log(p);
  }
  double bp = sys_len < ref_len
                  ? std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(sys_len))
                  : 1.0;
  return 100.0 * bp * std::exp(log_sum / 4.0);
}

std::size_t lcs_recursive(const std::vector<std::string>& a,
                          const std::vector<std::string>& b, std::size_t i, std::size_t j,
                          std::vector<std::vector<long long>>& memo) {
  if (i == a.size() || j == b.size()) return 0;
  long long& m = memo[i][j];
  if (m >= 0) return static_cast<std::size_t>(m);
  std::size_t best;
  if (a[i] == b[j])
    best = 1 + lcs_recursive(a, b, i + 1, j + 1, memo);
  else
    best = std::max(lcs_recursive(a, b, i + 1, j, memo),
                    lcs_recursive(a, b, i, j + 1, memo));
  m = static_cast<long long>(best);
  return best;
}

std::vector<std::string> lower_split(const std::string& text) {
  std::vector<std::string> out;
  std::string word;
  for (char c : text + " ") {
    if (c == ' ' || c == '\t' || c == '\n') {
      if (!word.empty()) out.push_back(word);
      word.clear();
    } else {
      word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  return out;
}

double oracle_rouge_l(const std::vector<std::string>& hyps,
                      const std::vector<std::string>& refs) {
  double sum = 0.0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    auto h = lower_split(hyps[i]);
    auto r = lower_split(refs[i]);
    if (h.empty() || r.empty()) continue;
    std::vector<std::vector<long long>> memo(h.size(),
                                             std::vector<long long>(r.size(), -1));
    std::size_t lcs = lcs_recursive(h, r, 0, 0, memo);
    if (lcs == 0) continue;
    double p = static_cast<double>(lcs) / static_cast<double>(h.size());
    double rr = static_cast<double>(lcs) / static_cast<double>(r.size());
    sum += 2.0 * p * rr / (p + rr);
  }
  return sum / static_cast<double>(hyps.size());
}

const std::vector<std::string> kWords = {"the", "cat", "dog", "ran",  "sat",
                                         "on",  "mat", "hill", "fast", "slow"};

std::string random_sentence(std::mt19937_64& rng, int min_len, int max_len) {
  std::uniform_int_distribution<int> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, kWords.size() - 1);
  int n = len(rng);
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (!out.empty()) out += ' ';
    out += kWords[pick(rng)];
  }
  return out;
}

// A hypothesis correlated with its reference: word dropout plus substitution.
std::string mutate(const std::string& ref, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, kWords.size() - 1);
  std::string out;
  std::string word;
  for (char c : ref + " ") {
    if (c != ' ') {
      word += c;
      continue;
    }
    if (word.empty()) continue;
    double roll = coin(rng);
    if (roll < 0.15) {
      word.clear();
      continue;  // drop
    }
    if (roll < 0.35) word = kWords[pick(rng)];  // substitute
    if (!out.empty()) out += ' ';
    out += word;
    word.clear();
  }
  return out.empty() ? kWords[pick(rng)] : out;
}

}  // namespace

TEST_CASE("accuracy and macro_f1 match a confusion-matrix oracle on 120 draws") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(1, 30);
  std::uniform_int_distribution<int> cls(0, 3);
  for (int trial = 0; trial < 120; ++trial) {
    CAPTURE(trial);
    int n = size(rng);
    std::vector<int> pred(n), gold(n);
    for (int i = 0; i < n; ++i) {
      pred[i] = cls(rng);
      gold[i] = cls(rng);
    }
    Confusion c = tally(pred, gold);
    CHECK(accuracy(pred, gold) == oracle_accuracy(c));
    CHECK(macro_f1(pred, gold) ==
          doctest::Approx(oracle_macro_f1(c, gold)).epsilon(1e-12));
  }
}

TEST_CASE("macro_f1 hand cases pin the gold-classes-only rule") {
  CHECK(macro_f1({0, 0, 1, 1}, {0, 0, 1, 1}) == 1.0);
  // All-zero predictions: class 0 gets f1 2/3, class 1 gets 0.
  CHECK(macro_f1({0, 0}, {0, 1}) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  // A predicted class missing from the golds is ignored entirely.
  CHECK(macro_f1({0, 1}, {1, 1}) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK_THROWS_AS(macro_f1({1}, {1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(macro_f1({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(accuracy({}, {}), std::invalid_argument);
}

TEST_CASE("tokenize_13a handles punctuation and digit contexts") {
  CHECK(tokenize_13a("Hello, world!") ==
        std::vector<std::string>{"Hello", ",", "world", "!"});
  CHECK(tokenize_13a("3.5 points") == std::vector<std::string>{"3.5", "points"});
  CHECK(tokenize_13a("1,000 cats") == std::vector<std::string>{"1,000", "cats"});
  CHECK(tokenize_13a("the end.") == std::vector<std::string>{"the", "end", "."});
  CHECK(tokenize_13a("well-known fact") ==
        std::vector<std::string>{"well-known", "fact"});
  CHECK(tokenize_13a("9-5 job") == std::vector<std::string>{"9", "-", "5", "job"});
  CHECK(tokenize_13a("it's fine") == std::vector<std::string>{"it", "'", "s", "fine"});
  CHECK(tokenize_13a("(x)") == std::vector<std::string>{"(", "x", ")"});
  CHECK(tokenize_13a("a&amp;b") == std::vector<std::string>{"a", "&", "b"});
  CHECK(tokenize_13a("a<skipped>b") == std::vector<std::string>{"ab"});
  CHECK(tokenize_13a("").empty());
}

TEST_CASE("corpus_bleu endpoints behave") {
  std::vector<std::string> refs = {"the cat sat on the mat", "the dog ran up the hill"};
  CHECK(corpus_bleu(refs, refs) == doctest::Approx(100.0).epsilon(1e-12));
  // No shared tokens at all: zero.
  CHECK(corpus_bleu({"fast slow fast slow"}, {"the cat sat on the mat"}) == 0.0);
  // Hypotheses too short for any 4-gram: zero by the missing-statistics rule.
  CHECK(corpus_bleu({"the cat"}, {"the cat"}) == 0.0);
  CHECK_THROWS_AS(corpus_bleu({"a"}, {"a", "b"}), std::invalid_argument);
  CHECK_THROWS_AS(corpus_bleu({}, {}), std::invalid_argument);

  // The brevity penalty bites exactly when the system side is shorter.
  double short_hyp = corpus_bleu({"the cat sat on the"}, {"the cat sat on the mat"});
  CHECK(short_hyp == doctest::Approx(oracle_bleu({"the cat sat on the"},
                                                 {"the cat sat on the mat"}))
                         .epsilon(1e-9));
  CHECK(short_hyp < 100.0);
}

TEST_CASE("corpus_bleu matches an independent implementation on 60 corpora") {
  std::mt19937_64 rng(7117);
  std::uniform_int_distribution<int> segs(1, 6);
  for (int trial = 0; trial < 60; ++trial) {
    CAPTURE(trial);
    int n = segs(rng);
    std::vector<std::string> refs, hyps;
    for (int i = 0; i < n; ++i) {
      refs.push_back(random_sentence(rng, 1, 12));
      hyps.push_back(mutate(refs.back(), rng));
    }
    double got = corpus_bleu(hyps, refs);
    double want = oracle_bleu(hyps, refs);
    CAPTURE(got);
    CAPTURE(want);
    CHECK(std::abs(got - want) <= 1e-6 * std::max(1.0, want));
  }
}

TEST_CASE("rouge_l matches a recursive lcs oracle on 80 corpora") {
  std::mt19937_64 rng(515);
  std::uniform_int_distribution<int> segs(1, 5);
  for (int trial = 0; trial < 80; ++trial) {
    CAPTURE(trial);
    int n = segs(rng);
    std::vector<std::string> refs, hyps;
    for (int i = 0; i < n; ++i) {
      refs.push_back(random_sentence(rng, 1, 10));
      hyps.push_back(mutate(refs.back(), rng));
    }
    CHECK(rouge_l(hyps, refs) ==
          doctest::Approx(oracle_rouge_l(hyps, refs)).epsilon(1e-12));
  }

  CHECK(rouge_l({"The Cat Sat"}, {"the cat sat"}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rouge_l({"dog"}, {"cat"}) == 0.0);
  // lcs("the cat sat", "the cat on the mat") = 2 -> F = 0.5.
  CHECK(rouge_l({"the cat sat"}, {"the cat on the mat"}) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("embedding similarity is mean cosine with zero-vector guard") {
  HashProjectionEmbedder embedder(64);

  Eigen::VectorXd a = embedder.embed("the cat sat");
  Eigen::VectorXd b = embedder.embed("the cat sat");
  CHECK((a - b).norm() == 0.0);
  CHECK((embedder.embed("The CAT sat") - a).norm() == 0.0);  // lowercased first

  CHECK(embedding_similarity(embedder, {"the cat sat"}, {"the cat sat"}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(embedding_similarity(embedder, {""}, {"the cat"}) == 0.0);

  std::mt19937_64 rng(909);
  std::vector<std::string> hyps, refs;
  for (int i = 0; i < 40; ++i) {
    refs.push_back(random_sentence(rng, 1, 8));
    hyps.push_back(mutate(refs.back(), rng));
  }
  double got = embedding_similarity(embedder, hyps, refs);
  double expect = 0.0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    Eigen::VectorXd h = embedder.embed(hyps[i]);
    Eigen::VectorXd r = embedder.embed(refs[i]);
    if (h.norm() == 0.0 || r.norm() == 0.0) continue;
    expect += h.dot(r) / (h.norm() * r.norm());
  }
  expect /= static_cast<double>(hyps.size());
  CHECK(got == doctest::Approx(expect).epsilon(1e-12));

  CHECK_THROWS_AS(HashProjectionEmbedder(0), std::invalid_argument);
  CHECK_THROWS_AS(embedding_similarity(embedder, {"a"}, {}), std::invalid_argument);
}
