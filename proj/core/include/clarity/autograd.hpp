#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace clarity::ag {

using Mat = Eigen::MatrixXd;

/// A trainable matrix. Gradients accumulate across backward passes until
/// zeroed by the optimizer.
struct Param {
  Mat value;
  Mat grad;

  explicit Param(Mat v) : value(std::move(v)) {
    grad = Mat::Zero(value.rows(), value.cols());
  }
  Param() = default;
};

struct Var {
  int id = -1;
};

/// Reverse-mode tape over dense double matrices. Build one tape per forward
/// pass; ops record closures that pull gradients back to their inputs.
class Tape {
 public:
  Var constant(Mat value);
  Var param(Param& p);

  /// Rows of `table` selected by id, in order. Gradients scatter-add back.
  Var gather_rows(Var table, const std::vector<int>& ids);

  Var matmul(Var a, Var b);
  /// a * b transposed; avoids materializing the transpose.
  Var matmul_nt(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  /// Adds a 1-row matrix to every row of m.
  Var add_row(Var m, Var row);
  Var cmul(Var a, Var b);
  Var scale(Var a, double k);
  Var add_scalar(Var a, double k);
  Var tanh(Var a);
  Var relu(Var a);
  Var softmax_rows(Var a);
  Var sum_all(Var a);
  Var mean_rows(Var a);
  /// Elementwise square root; derivative denominator floored away from zero.
  Var sqrt(Var a);
  /// Stable -log softmax(logits)(0, target) for a single-row logit matrix.
  Var nll(Var logits, int target);

  const Mat& val(Var v) const { return nodes_[v.id].value; }
  const Mat& grad_of(Var v) const { return nodes_[v.id].grad; }

  /// Seeds `loss` (must be 1x1) with gradient 1, sweeps the tape in reverse,
  /// then accumulates leaf gradients into their Params.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    std::function<void(Tape&)> back;
    Param* leaf = nullptr;
  };

  Var push(Mat value, std::function<void(Tape&)> back = {}, Param* leaf = nullptr);
  Mat& g(Var v) { return nodes_[v.id].grad; }

  std::vector<Node> nodes_;
};

/// Adam with optional global-norm gradient clipping.
class Adam {
 public:
  Adam(std::vector<Param*> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  void step();
  void zero_grad();
  void set_lr(double lr) { lr_ = lr; }
  void set_clip_norm(double c) { clip_norm_ = c; }

 private:
  std::vector<Param*> params_;
  std::vector<Mat> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  double clip_norm_ = 0.0;
  std::int64_t t_ = 0;
};

/// Uniform(-limit, limit) with the Glorot limit sqrt(6 / (rows + cols)).
Mat glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);

}  // namespace clarity::ag
