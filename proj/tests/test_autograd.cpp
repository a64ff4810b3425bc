#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "clarity/autograd.hpp"

using namespace clarity;
using ag::Mat;

namespace {

using Forward = std::function<ag::Var(ag::Tape&)>;

Mat filled(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double lo = -1.0,
           double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
  return m;
}

// Distinct per-element weights so a reduction exercises every output cell.
Mat weights(Eigen::Index rows, Eigen::Index cols) {
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = 0.3 + 0.17 * static_cast<double>(r) - 0.07 * static_cast<double>(c);
  return m;
}

double eval_loss(const Forward& forward) {
  ag::Tape tape;
  ag::Var loss = forward(tape);
  return tape.val(loss)(0, 0);
}

// Central finite differences against the tape's analytic gradients.
void check_gradients(std::vector<ag::Param*> params, const Forward& forward,
                     double tol = 1e-6) {
  for (ag::Param* p : params) p->grad.setZero();
  ag::Tape tape;
  tape.backward(forward(tape));
  std::vector<Mat> analytic;
  analytic.reserve(params.size());
  for (ag::Param* p : params) analytic.push_back(p->grad);

  const double h = 1e-5;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Mat& value = params[k]->value;
    for (Eigen::Index r = 0; r < value.rows(); ++r) {
      for (Eigen::Index c = 0; c < value.cols(); ++c) {
        double orig = value(r, c);
        value(r, c) = orig + h;
        double up = eval_loss(forward);
        value(r, c) = orig - h;
        double down = eval_loss(forward);
        value(r, c) = orig;
        double fd = (up - down) / (2.0 * h);
        double got = analytic[k](r, c);
        CAPTURE(k);
        CAPTURE(r);
        CAPTURE(c);
        CAPTURE(fd);
        CAPTURE(got);
        CHECK(std::abs(got - fd) <= tol * std::max({1.0, std::abs(got), std::abs(fd)}));
      }
    }
  }
}

}  // namespace

TEST_CASE("finite differences validate the dense layer chain") {
  ag::Param w(filled(4, 3, 11));
  ag::Param b(filled(1, 3, 12));
  Mat x = filled(2, 4, 13);
  Mat c = weights(2, 3);
  check_gradients({&w, &b}, [&](ag::Tape& t) {
    ag::Var h = t.tanh(t.add_row(t.matmul(t.constant(x), t.param(w)), t.param(b)));
    return t.sum_all(t.cmul(h, t.constant(c)));
  });
}

TEST_CASE("finite differences validate matmul_nt, sub, scale, add_scalar") {
  ag::Param a(filled(3, 5, 21));
  ag::Param b(filled(2, 5, 22));
  Mat c = weights(3, 2);
  check_gradients({&a, &b}, [&](ag::Tape& t) {
    ag::Var prod = t.matmul_nt(t.param(a), t.param(b));
    ag::Var shifted = t.add_scalar(t.scale(prod, 0.7), 0.2);
    ag::Var diff = t.sub(shifted, t.constant(Mat::Ones(3, 2)));
    return t.sum_all(t.cmul(diff, t.constant(c)));
  });
}

TEST_CASE("finite differences validate softmax, mean_rows, sqrt, relu") {
  ag::Param x(filled(3, 4, 31));
  Mat c = weights(3, 4);
  Mat crow = weights(1, 4);
  check_gradients({&x}, [&](ag::Tape& t) {
    return t.sum_all(t.cmul(t.softmax_rows(t.param(x)), t.constant(c)));
  });
  check_gradients({&x}, [&](ag::Tape& t) {
    return t.sum_all(t.cmul(t.mean_rows(t.param(x)), t.constant(crow)));
  });
  check_gradients({&x}, [&](ag::Tape& t) {
    // x^2 + 0.5 keeps sqrt away from its kink at zero.
    ag::Var positive = t.add_scalar(t.cmul(t.param(x), t.param(x)), 0.5);
    return t.sum_all(t.cmul(t.sqrt(positive), t.constant(c)));
  });
  // Keep inputs clear of the relu kink so finite differences stay valid.
  for (Eigen::Index r = 0; r < x.value.rows(); ++r)
    for (Eigen::Index cc = 0; cc < x.value.cols(); ++cc)
      if (std::abs(x.value(r, cc)) < 0.05) x.value(r, cc) = 0.1;
  check_gradients({&x}, [&](ag::Tape& t) {
    return t.sum_all(t.cmul(t.relu(t.param(x)), t.constant(c)));
  });
}

TEST_CASE("gather_rows scatter-adds gradients for repeated ids") {
  ag::Param table(filled(4, 3, 41));
  std::vector<int> ids{2, 0, 2, 1, 2};
  Mat c = weights(5, 3);
  check_gradients({&table}, [&](ag::Tape& t) {
    return t.sum_all(t.cmul(t.gather_rows(t.param(table), ids), t.constant(c)));
  });

  ag::Tape t;
  CHECK_THROWS_AS(t.gather_rows(t.param(table), {4}), std::out_of_range);
  CHECK_THROWS_AS(t.gather_rows(t.param(table), {-1}), std::out_of_range);
}

TEST_CASE("nll matches -log softmax and its gradient") {
  ag::Param logits(filled(1, 7, 51, -2.0, 2.0));
  check_gradients({&logits}, [&](ag::Tape& t) { return t.nll(t.param(logits), 3); });

  ag::Tape t;
  ag::Var loss = t.nll(t.param(logits), 3);
  double lse = 0.0;
  for (Eigen::Index i = 0; i < 7; ++i) lse += std::exp(logits.value(0, i));
  double expect = std::log(lse) - logits.value(0, 3);
  CHECK(t.val(loss)(0, 0) == doctest::Approx(expect).epsilon(1e-12));

  ag::Param uniform(Mat::Zero(1, 7));
  ag::Tape t2;
  CHECK(t2.val(t2.nll(t2.param(uniform), 0))(0, 0) ==
        doctest::Approx(std::log(7.0)).epsilon(1e-12));

  ag::Tape t3;
  CHECK_THROWS_AS(t3.nll(t3.constant(Mat::Zero(2, 4)), 0), std::invalid_argument);
  CHECK_THROWS_AS(t3.nll(t3.constant(Mat::Zero(1, 4)), 4), std::out_of_range);
}

TEST_CASE("two-layer composite with nll head survives finite differences") {
  ag::Param w1(filled(4, 6, 61));
  ag::Param b1(filled(1, 6, 62));
  ag::Param w2(filled(6, 5, 63));
  ag::Param b2(filled(1, 5, 64));
  Mat x = filled(1, 4, 65);
  check_gradients({&w1, &b1, &w2, &b2}, [&](ag::Tape& t) {
    ag::Var h = t.tanh(t.add_row(t.matmul(t.constant(x), t.param(w1)), t.param(b1)));
    ag::Var logits = t.add_row(t.matmul(h, t.param(w2)), t.param(b2));
    return t.nll(logits, 2);
  });
}

TEST_CASE("backward accumulates into params until zeroed") {
  ag::Param p(Mat::Ones(2, 2));
  auto run = [&] {
    ag::Tape t;
    t.backward(t.sum_all(t.cmul(t.param(p), t.param(p))));
  };
  p.grad.setZero();
  run();
  Mat once = p.grad;
  run();
  CHECK((p.grad - 2.0 * once).norm() == doctest::Approx(0.0).epsilon(1e-12));

  ag::Tape t;
  CHECK_THROWS_AS(t.backward(t.constant(Mat::Zero(2, 1))), std::invalid_argument);
  ag::Tape t2;
  CHECK_THROWS_AS(t2.add_row(t2.constant(Mat::Zero(2, 2)), t2.constant(Mat::Zero(2, 2))),
                  std::invalid_argument);
}

TEST_CASE("long chains keep closures valid across node reallocation") {
  ag::Param p(Mat::Ones(1, 1));
  p.grad.setZero();
  ag::Tape t;
  ag::Var x = t.param(p);
  ag::Var acc = x;
  const int reps = 2000;
  for (int i = 0; i < reps; ++i) acc = t.add(acc, x);
  t.backward(t.sum_all(acc));
  CHECK(p.grad(0, 0) == doctest::Approx(static_cast<double>(reps + 1)).epsilon(1e-12));
}

TEST_CASE("adam follows the bias-corrected reference update") {
  ag::Param p(Mat::Zero(1, 2));
  p.value << 1.0, -2.0;
  const double lr = 0.1, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  ag::Adam opt({&p}, lr, beta1, beta2, eps);

  Mat g1(1, 2), g2(1, 2);
  g1 << 0.5, -1.5;
  g2 << -0.25, 0.75;

  // Reference trace computed alongside.
  Mat m = Mat::Zero(1, 2), v = Mat::Zero(1, 2), expect = p.value;
  auto reference_step = [&](const Mat& g, int step) {
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
    Mat mhat = m / (1.0 - std::pow(beta1, step));
    Mat vhat = v / (1.0 - std::pow(beta2, step));
    expect.array() -= lr * mhat.array() / (vhat.array().sqrt() + eps);
  };

  p.grad = g1;
  opt.step();
  reference_step(g1, 1);
  CHECK((p.value - expect).norm() == doctest::Approx(0.0).epsilon(1e-15));

  opt.zero_grad();
  CHECK(p.grad.norm() == 0.0);

  p.grad = g2;
  opt.step();
  reference_step(g2, 2);
  CHECK((p.value - expect).norm() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("adam clips by global norm before updating") {
  ag::Param a(Mat::Zero(1, 1)), b(Mat::Zero(1, 1));
  ag::Adam opt({&a, &b}, 0.1);
  opt.set_clip_norm(1.0);
  a.grad << 3.0;
  b.grad << 4.0;  // global norm 5 -> scaled by 1/5
  opt.step();

  ag::Param a2(Mat::Zero(1, 1)), b2(Mat::Zero(1, 1));
  ag::Adam opt2({&a2, &b2}, 0.1);
  a2.grad << 0.6;
  b2.grad << 0.8;
  opt2.step();
  CHECK(a.value(0, 0) == doctest::Approx(a2.value(0, 0)).epsilon(1e-15));
  CHECK(b.value(0, 0) == doctest::Approx(b2.value(0, 0)).epsilon(1e-15));
}

TEST_CASE("glorot stays inside its limit and is seed-deterministic") {
  std::mt19937_64 rng1(9), rng2(9), rng3(10);
  Mat a = ag::glorot(8, 4, rng1);
  Mat b = ag::glorot(8, 4, rng2);
  Mat c = ag::glorot(8, 4, rng3);
  double limit = std::sqrt(6.0 / 12.0);
  CHECK(a.maxCoeff() <= limit);
  CHECK(a.minCoeff() >= -limit);
  CHECK((a - b).norm() == 0.0);
  CHECK((a - c).norm() != 0.0);
}
