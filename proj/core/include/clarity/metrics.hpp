#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace clarity {

/// Fraction of positions where predictions match gold labels.
double accuracy(const std::vector<int>& predictions, const std::vector<int>& golds);

/// Unweighted mean F1 over the classes present in the golds. A gold class the
/// predictions never name scores 0; classes absent from the golds are ignored.
double macro_f1(const std::vector<int>& predictions, const std::vector<int>& golds);

/// mteval-v13a reference tokenization (punctuation splitting, digit-aware
/// period/comma/dash handling).
std::vector<std::string> tokenize_13a(const std::string& text);

/// Corpus-level 4-gram BLEU on 13a tokens, exponential smoothing for zero
/// n-gram matches, brevity penalty exp(1 - ref/sys) when the system side is
/// shorter. Result in [0, 100]. One reference per hypothesis.
double corpus_bleu(const std::vector<std::string>& hypotheses,
                   const std::vector<std::string>& references);

/// Mean per-pair longest-common-subsequence F-measure over lowercased
/// whitespace tokens.
double rouge_l(const std::vector<std::string>& hypotheses,
               const std::vector<std::string>& references);

/// Text-to-vector interface for similarity scoring.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual Eigen::VectorXd embed(const std::string& text) = 0;
};

/// Deterministic self-contained embedder: words hash to signed one-hot
/// updates of a fixed-width vector. A placeholder where a sentence encoder
/// would plug in.
class HashProjectionEmbedder : public Embedder {
 public:
  explicit HashProjectionEmbedder(int dim = 64);
  Eigen::VectorXd embed(const std::string& text) override;

 private:
  int dim_;
};

/// Mean cosine similarity of hypothesis/reference embeddings; a zero vector
/// on either side contributes 0.
double embedding_similarity(Embedder& embedder,
                            const std::vector<std::string>& hypotheses,
                            const std::vector<std::string>& references);

}  // namespace clarity
