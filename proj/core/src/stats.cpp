#include "clarity/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace clarity {

namespace {

// Lentz continued fraction for the incomplete beta.
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0)
    throw std::invalid_argument("regularized_incomplete_beta: a, b must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log(1.0 - x));
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, int dof) {
  if (dof <= 0) throw std::invalid_argument("student_t_two_sided_p: dof must be > 0");
  if (std::isinf(t)) return 0.0;
  double nu = static_cast<double>(dof);
  double x = nu / (nu + t * t);
  return regularized_incomplete_beta(nu / 2.0, 0.5, x);
}

TTestResult t_test_from_differences(const std::vector<double>& d) {
  if (d.size() < 2)
    throw std::invalid_argument("t_test_from_differences: need at least 2 values");
  const double n = static_cast<double>(d.size());
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  double var = ss / (n - 1.0);

  TTestResult result;
  result.dof = static_cast<int>(d.size()) - 1;
  result.mean_difference = mean;
  if (var == 0.0) {
    // All differences identical: no sampling noise to test against.
    result.t = mean == 0.0 ? 0.0 : std::numeric_limits<double>::infinity() *
                                       (mean > 0.0 ? 1.0 : -1.0);
    result.p_value = mean == 0.0 ? 1.0 : 0.0;
    return result;
  }
  result.t = mean / std::sqrt(var / n);
  result.p_value = student_t_two_sided_p(result.t, result.dof);
  return result;
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("paired_t_test: size mismatch");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return t_test_from_differences(d);
}

Aggregate aggregate_seeds(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("aggregate_seeds: empty input");
  Aggregate agg;
  for (double v : values) agg.mean += v;
  agg.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - agg.mean) * (v - agg.mean);
    agg.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return agg;
}

}  // namespace clarity
