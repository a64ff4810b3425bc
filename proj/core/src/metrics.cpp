#include "clarity/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <regex>
#include <set>
#include <stdexcept>

#include "clarity/util.hpp"

namespace clarity {

namespace {

void check_sizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw std::invalid_argument(std::string(what) + ": size mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
  if (a == 0) throw std::invalid_argument(std::string(what) + ": empty input");
}

}  // namespace

double accuracy(const std::vector<int>& predictions, const std::vector<int>& golds) {
  check_sizes(predictions.size(), golds.size(), "accuracy");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < golds.size(); ++i)
    if (predictions[i] == golds[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(golds.size());
}

double macro_f1(const std::vector<int>& predictions, const std::vector<int>& golds) {
  check_sizes(predictions.size(), golds.size(), "macro_f1");
  std::set<int> classes(golds.begin(), golds.end());
  double sum = 0.0;
  for (int c : classes) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < golds.size(); ++i) {
      if (predictions[i] == c && golds[i] == c) ++tp;
      if (predictions[i] == c && golds[i] != c) ++fp;
      if (predictions[i] != c && golds[i] == c) ++fn;
    }
    double p = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    double r = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    sum += p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
  return sum / static_cast<double>(classes.size());
}

std::vector<std::string> tokenize_13a(const std::string& text) {
  std::string line = text;
  auto replace_all = [](std::string& s, const std::string& from, const std::string& to) {
    std::size_t at = 0;
    while ((at = s.find(from, at)) != std::string::npos) {
      s.replace(at, from.size(), to);
      at += to.size();
    }
  };
  replace_all(line, "<skipped>", "");
  replace_all(line, "-\n", "");
  replace_all(line, "\n", " ");
  if (line.find('&') != std::string::npos) {
    replace_all(line, "&quot;", "\"");
    replace_all(line, "&amp;", "&");
    replace_all(line, "&lt;", "<");
    replace_all(line, "&gt;", ">");
  }
  line = " " + line + " ";
  // Punctuation (except period, comma, dash) splits unconditionally; period
  // and comma split unless inside a number; dash splits after a digit.
  static const std::regex punct(R"(([\{-\~\[-\` -\&\(-\+\:-\@\/]))");
  static const std::regex period_before(R"(([^0-9])([\.,]))");
  static const std::regex period_after(R"(([\.,])([^0-9]))");
  static const std::regex digit_dash(R"(([0-9])(-))");
  line = std::regex_replace(line, punct, " $1 ");
  line = std::regex_replace(line, period_before, "$1 $2 ");
  line = std::regex_replace(line, period_after, " $1 $2");
  line = std::regex_replace(line, digit_dash, "$1 $2 ");
  return split_words(line);
}

namespace {

std::map<std::vector<std::string>, int> ngram_counts(const std::vector<std::string>& toks,
                                                     std::size_t n) {
  std::map<std::vector<std::string>, int> counts;
  if (toks.size() < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i)
    ++counts[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
  return counts;
}

}  // namespace

double corpus_bleu(const std::vector<std::string>& hypotheses,
                   const std::vector<std::string>& references) {
  check_sizes(hypotheses.size(), references.size(), "corpus_bleu");
  constexpr std::size_t kOrder = 4;
  std::array<long long, kOrder> correct{}, total{};
  long long sys_len = 0, ref_len = 0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    std::vector<std::string> hyp = tokenize_13a(hypotheses[i]);
    std::vector<std::string> ref = tokenize_13a(references[i]);
    sys_len += static_cast<long long>(hyp.size());
    ref_len += static_cast<long long>(ref.size());
    for (std::size_t n = 1; n <= kOrder; ++n) {
      auto hc = ngram_counts(hyp, n);
      auto rc = ngram_counts(ref, n);
      for (const auto& [gram, count] : hc) {
        auto it = rc.find(gram);
        if (it != rc.end()) correct[n - 1] += std::min(count, it->second);
      }
      if (hyp.size() >= n) total[n - 1] += static_cast<long long>(hyp.size() - n + 1);
    }
  }

  double smooth = 1.0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < kOrder; ++n) {
    double p;
    if (total[n] == 0) {
      p = 0.0;
    } else if (correct[n] == 0) {
      smooth *= 2.0;
      p = 100.0 / (smooth * static_cast<double>(total[n]));
    } else {
      p = 100.0 * static_cast<double>(correct[n]) / static_cast<double>(total[n]);
    }
    if (p == 0.0) return 0.0;
    log_sum += std::log(p);
  }
  double bp = 1.0;
  if (sys_len == 0) return 0.0;
  if (sys_len < ref_len)
    bp = std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(sys_len));
  return bp * std::exp(log_sum / static_cast<double>(kOrder));
}

namespace {

std::vector<std::string> lower_words(const std::string& text) {
  return split_words(to_lower(text));
}

std::size_t lcs_length(const std::vector<std::string>& a,
                       const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1])
        cur[j] = prev[j - 1] + 1;
      else
        cur[j] = std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

double rouge_l(const std::vector<std::string>& hypotheses,
               const std::vector<std::string>& references) {
  check_sizes(hypotheses.size(), references.size(), "rouge_l");
  double sum = 0.0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    std::vector<std::string> hyp = lower_words(hypotheses[i]);
    std::vector<std::string> ref = lower_words(references[i]);
    std::size_t lcs = lcs_length(hyp, ref);
    if (lcs == 0) continue;
    double p = static_cast<double>(lcs) / static_cast<double>(hyp.size());
    double r = static_cast<double>(lcs) / static_cast<double>(ref.size());
    sum += 2.0 * p * r / (p + r);
  }
  return sum / static_cast<double>(hypotheses.size());
}

HashProjectionEmbedder::HashProjectionEmbedder(int dim) : dim_(dim) {
  if (dim <= 0) throw std::invalid_argument("HashProjectionEmbedder: dim must be > 0");
}

Eigen::VectorXd HashProjectionEmbedder::embed(const std::string& text) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
  for (const std::string& w : lower_words(text)) {
    const std::string h = sha256_hex(w);
    // First 8 hex chars pick the slot, the 9th picks the sign.
    std::uint64_t slot = std::stoull(h.substr(0, 8), nullptr, 16);
    int sign = (h[8] % 2 == 0) ? 1 : -1;
    v(static_cast<Eigen::Index>(slot % static_cast<std::uint64_t>(dim_))) += sign;
  }
  return v;
}

double embedding_similarity(Embedder& embedder,
                            const std::vector<std::string>& hypotheses,
                            const std::vector<std::string>& references) {
  check_sizes(hypotheses.size(), references.size(), "embedding_similarity");
  double sum = 0.0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    Eigen::VectorXd a = embedder.embed(hypotheses[i]);
    Eigen::VectorXd b = embedder.embed(references[i]);
    double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) continue;
    sum += a.dot(b) / (na * nb);
  }
  return sum / static_cast<double>(hypotheses.size());
}

}  // namespace clarity
