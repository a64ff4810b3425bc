#include "clarity/autograd.hpp"

#include <cmath>
#include <stdexcept>

namespace clarity::ag {

Var Tape::push(Mat value, std::function<void(Tape&)> back, Param* leaf) {
  Node node;
  node.value = std::move(value);
  node.grad = Mat::Zero(node.value.rows(), node.value.cols());
  node.back = std::move(back);
  node.leaf = leaf;
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Mat value) { return push(std::move(value)); }

Var Tape::param(Param& p) { return push(p.value, {}, &p); }

Var Tape::gather_rows(Var table, const std::vector<int>& ids) {
  const Mat& t = val(table);
  Mat out(static_cast<Eigen::Index>(ids.size()), t.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= t.rows())
      throw std::out_of_range("gather_rows: id out of range");
    out.row(static_cast<Eigen::Index>(i)) = t.row(ids[i]);
  }
  Var v = push(std::move(out));
  int id = v.id;
  nodes_[id].back = [table, ids, id](Tape& tp) {
    const Mat& go = tp.nodes_[id].grad;
    Mat& gt = tp.g(table);
    for (std::size_t i = 0; i < ids.size(); ++i)
      gt.row(ids[i]) += go.row(static_cast<Eigen::Index>(i));
  };
  return v;
}

Var Tape::matmul(Var a, Var b) {
  Var v = push(val(a) * val(b));
  int id = v.id;
  nodes_[id].back = [a, b, id](Tape& tp) {
    const Mat& go = tp.nodes_[id].grad;
    tp.g(a) += go * tp.val(b).transpose();
    tp.g(b) += tp.val(a).transpose() * go;
  };
  return v;
}

Var Tape::matmul_nt(Var a, Var b) {
  Var v = push(val(a) * val(b).transpose());
  int id = v.id;
  nodes_[id].back = [a, b, id](Tape& tp) {
    const Mat& go = tp.nodes_[id].grad;
    tp.g(a) += go * tp.val(b);
    tp.g(b) += go.transpose() * tp.val(a);
  };
  return v;
}

Var Tape::add(Var a, Var b) {
  Var v = push(val(a) + val(b));
  int id = v.id;
  nodes_[id].back = [a, b, id](Tape& tp) {
    const Mat& go = tp.nodes_[id].grad;
    tp.g(a) += go;
    tp.g(b) += go;
  };
  return v;
}

Var Tape::sub(Var a, Var b) {
  Var v = push(val(a) - val(b));
  int id = v.id;
  nodes_[id].back = [a, b, id](Tape& tp) {
    const Mat& go = tp.nodes_[id].grad;
    tp.g(a) += go;
    tp.g(b) -= go;
  };
  return v;
}

Var Tape::add_row(Var m, Var row) {
  if (val(row).rows() != 1) throw std::invalid_argument("add_row: row must be 1xN");
  Var v = push(val(m).rowwise() + val(row).row(0));
  int id = v.id;
  nodes_[id].back = [m, row, id](Tape& tp) {
    const Mat& go = tp.nodes_[id].grad;
    tp.g(m) += go;
    tp.g(row) += go.colwise().sum();
  };
  return v;
}

Var Tape::cmul(Var a, Var b) {
  Var v = push(val(a).cwiseProduct(val(b)));
  int id = v.id;
  nodes_[id].back = [a, b, id](Tape& tp) {
    const Mat& go = tp.nodes_[id].grad;
    tp.g(a) += go.cwiseProduct(tp.val(b));
    tp.g(b) += go.cwiseProduct(tp.val(a));
  };
  return v;
}

Var Tape::scale(Var a, double k) {
  Var v = push(val(a) * k);
  int id = v.id;
  nodes_[id].back = [a, k, id](Tape& tp) { tp.g(a) += tp.nodes_[id].grad * k; };
  return v;
}

Var Tape::add_scalar(Var a, double k) {
  Var v = push((val(a).array() + k).matrix());
  int id = v.id;
  nodes_[id].back = [a, id](Tape& tp) { tp.g(a) += tp.nodes_[id].grad; };
  return v;
}

Var Tape::tanh(Var a) {
  Var v = push(val(a).array().tanh().matrix());
  int id = v.id;
  nodes_[id].back = [a, id](Tape& tp) {
    const Mat& y = tp.nodes_[id].value;
    tp.g(a).array() += tp.nodes_[id].grad.array() * (1.0 - y.array().square());
  };
  return v;
}

Var Tape::relu(Var a) {
  Var v = push(val(a).cwiseMax(0.0));
  int id = v.id;
  nodes_[id].back = [a, id](Tape& tp) {
    tp.g(a).array() +=
        tp.nodes_[id].grad.array() * (tp.val(a).array() > 0.0).cast<double>();
  };
  return v;
}

Var Tape::softmax_rows(Var a) {
  const Mat& x = val(a);
  Mat y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double m = x.row(r).maxCoeff();
    Eigen::ArrayXd e = (x.row(r).array() - m).exp();
    y.row(r) = e / e.sum();
  }
  Var v = push(std::move(y));
  int id = v.id;
  nodes_[id].back = [a, id](Tape& tp) {
    const Mat& y2 = tp.nodes_[id].value;
    const Mat& go = tp.nodes_[id].grad;
    Mat& ga = tp.g(a);
    for (Eigen::Index r = 0; r < y2.rows(); ++r) {
      double dot = go.row(r).cwiseProduct(y2.row(r)).sum();
      ga.row(r).array() += (go.row(r).array() - dot) * y2.row(r).array();
    }
  };
  return v;
}

Var Tape::sum_all(Var a) {
  Mat s(1, 1);
  s(0, 0) = val(a).sum();
  Var v = push(std::move(s));
  int id = v.id;
  nodes_[id].back = [a, id](Tape& tp) {
    tp.g(a).array() += tp.nodes_[id].grad(0, 0);
  };
  return v;
}

Var Tape::mean_rows(Var a) {
  const Mat& x = val(a);
  Mat m = x.colwise().mean();
  double inv = 1.0 / static_cast<double>(x.rows());
  Var v = push(std::move(m));
  int id = v.id;
  nodes_[id].back = [a, inv, id](Tape& tp) {
    const Mat& go = tp.nodes_[id].grad;
    tp.g(a).rowwise() += (go.row(0) * inv);
  };
  return v;
}

Var Tape::sqrt(Var a) {
  Var v = push(val(a).cwiseSqrt());
  int id = v.id;
  nodes_[id].back = [a, id](Tape& tp) {
    const Mat& y = tp.nodes_[id].value;
    tp.g(a).array() +=
        tp.nodes_[id].grad.array() / (2.0 * y.array().max(1e-12));
  };
  return v;
}

Var Tape::nll(Var logits, int target) {
  const Mat& x = val(logits);
  if (x.rows() != 1) throw std::invalid_argument("nll: logits must be 1xV");
  if (target < 0 || target >= x.cols()) throw std::out_of_range("nll: target id");
  double m = x.row(0).maxCoeff();
  double lse = m + std::log((x.row(0).array() - m).exp().sum());
  Mat out(1, 1);
  out(0, 0) = lse - x(0, target);
  Var v = push(std::move(out));
  int id = v.id;
  nodes_[id].back = [logits, target, id](Tape& tp) {
    const Mat& x2 = tp.val(logits);
    double m2 = x2.row(0).maxCoeff();
    Eigen::ArrayXd e = (x2.row(0).array() - m2).exp();
    Eigen::ArrayXd p = e / e.sum();
    double go = tp.nodes_[id].grad(0, 0);
    Mat& gl = tp.g(logits);
    gl.row(0).array() += go * p;
    gl(0, target) -= go;
  };
  return v;
}

void Tape::backward(Var loss) {
  Node& last = nodes_.at(loss.id);
  if (last.value.rows() != 1 || last.value.cols() != 1)
    throw std::invalid_argument("backward: loss must be 1x1");
  for (Node& n : nodes_) n.grad.setZero();
  last.grad(0, 0) = 1.0;
  for (int i = loss.id; i >= 0; --i)
    if (nodes_[i].back) nodes_[i].back(*this);
  for (Node& n : nodes_)
    if (n.leaf != nullptr) n.leaf->grad += n.grad;
}

Adam::Adam(std::vector<Param*> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (Param* p : params_) {
    m_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step() {
  ++t_;
  if (clip_norm_ > 0.0) {
    double sq = 0.0;
    for (Param* p : params_) sq += p->grad.squaredNorm();
    double norm = std::sqrt(sq);
    if (norm > clip_norm_) {
      double s = clip_norm_ / norm;
      for (Param* p : params_) p->grad *= s;
    }
  }
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Param* p = params_[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p->grad;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * p->grad.cwiseProduct(p->grad);
    Mat mhat = m_[i] / bc1;
    Mat vhat = v_[i] / bc2;
    p->value.array() -= lr_ * mhat.array() / (vhat.array().sqrt() + eps_);
  }
}

void Adam::zero_grad() {
  for (Param* p : params_) p->grad.setZero();
}

Mat glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
  return m;
}

}  // namespace clarity::ag
