#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <vector>

#include "clarity/autograd.hpp"
#include "clarity/corpus.hpp"
#include "clarity/curation.hpp"
#include "clarity/tiny_backend.hpp"

namespace clarity {

struct TrainConfig {
  double lr = 5e-5;
  int batch_size = 8;
  int max_steps = 10000;
  int epochs = 5;
  double lambda_rgen = 0.2;
  double lambda_ngen = 1.0;
  double lambda_triplet = 0.3;
  double margin = 0.3;
  std::size_t max_input_len = 1024;
  std::uint64_t seed = 0;
  int eval_every = 50;
  double grad_clip = 0.0;
  /// Cap on greedy-decoded rationale length during fine-tuning.
  std::size_t max_generate_len = 64;
};

struct TrainLogEntry {
  int step = 0;
  double loss_rgen = 0.0;
  double loss_ngen = 0.0;
  double loss_triplet = 0.0;
  double loss_total = 0.0;
  std::string split = "train";
};

/// Append-only JSONL training log, one fixed-schema object per line.
class TrainLog {
 public:
  explicit TrainLog(const std::filesystem::path& path);
  void append(const TrainLogEntry& entry);

 private:
  std::ofstream out_;
};

std::vector<TrainLogEntry> read_train_log(const std::filesystem::path& path);

/// Vocabulary over every string a head will see: prefixes, verbalizers,
/// actions, norms, rationales.
Vocab build_vocab(const std::vector<CuratedPair>& curated);

struct Seq2SeqExample {
  TokenSeq input_ids;
  TokenSeq target_ids;  // ends with <eos>
};

/// Supervised examples for one model kind over one split.
std::vector<Seq2SeqExample> build_examples(ModelKind kind,
                                           const std::vector<CuratedPair>& curated,
                                           const Vocab& vocab, Split split,
                                           std::size_t max_input_len);

struct PretrainResult {
  std::unique_ptr<TinySeq2Seq> model;
  double best_val_loss = 0.0;
  int steps_run = 0;
};

/// Trains one head from scratch on its supervised examples. Keeps the
/// parameters of the step with the lowest validation loss.
PretrainResult pretrain(ModelKind kind, const std::vector<CuratedPair>& curated,
                        const TinySeq2Seq::Config& model_cfg, const TrainConfig& cfg,
                        TrainLog* log = nullptr);

/// Hinge on the embedding-distance gap: max(|a-p| - |a-n| + alpha, 0).
double triplet_loss(const Eigen::VectorXd& anchor, const Eigen::VectorXd& positive,
                    const Eigen::VectorXd& negative, double alpha);
/// Same, as a differentiable 1x1 node over 1 x d row vectors.
ag::Var triplet_loss_node(ag::Tape& tape, ag::Var anchor, ag::Var positive,
                          ag::Var negative, double alpha);

struct FinetuneResult {
  double best_val_objective = 0.0;
  int steps_run = 0;
  /// Mean anchor-positive embedding distance before the first update and
  /// after restoring the best parameters.
  double initial_anchor_positive_distance = 0.0;
  double final_anchor_positive_distance = 0.0;
};

/// Joint fine-tune of the two generators: weighted sum of their supervised
/// losses plus the contrastive triplet term. Either group of terms can be
/// switched off (not both). Rationales feeding the triplet embeddings are
/// greedy-decoded from the current rationale generator; gradients reach only
/// the norm generator through the embeddings.
FinetuneResult finetune(TinySeq2Seq& rationale_gen, TinySeq2Seq& norm_gen,
                        const std::vector<CuratedPair>& curated, const TrainConfig& cfg,
                        bool supervised = true, bool contrastive = true,
                        TrainLog* log = nullptr);

/// Deep copies of all parameter values, in named_params order.
std::vector<ag::Mat> snapshot_params(TinySeq2Seq& model);
void restore_params(TinySeq2Seq& model, const std::vector<ag::Mat>& values);

}  // namespace clarity
