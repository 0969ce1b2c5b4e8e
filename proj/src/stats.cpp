#include "mtrec/stats.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "mtrec/error.hpp"

namespace mtrec {
namespace {

struct Moments {
  double n = 0;
  double mean = 0;
  double variance = 0;  // n - 1 denominator
};

Moments moments(std::span<const double> xs) {
  Moments m;
  m.n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / m.n;
  if (xs.size() > 1) {
    double ss = 0.0;
    double correction = 0.0;
    for (double x : xs) {
      ss += (x - m.mean) * (x - m.mean);
      correction += x - m.mean;
    }
    m.variance = (ss - correction * correction / m.n) / (m.n - 1.0);
    if (m.variance < 0.0) m.variance = 0.0;
  }
  return m;
}

void require_two(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || y.size() < 2) {
    throw InvalidArgument("t-test needs at least two samples per group");
  }
}

// Continued fraction for I_x(a, b), modified Lentz. Converges quickly for
// x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 10000;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
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
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) return h;
  }
  throw Error("incomplete beta continued fraction did not converge");
}

}  // namespace

std::string_view to_string(TTestKind kind) {
  return kind == TTestKind::kWelch ? "welch" : "pooled";
}

TTestKind t_test_kind_from_string(std::string_view name) {
  if (name == "welch") return TTestKind::kWelch;
  if (name == "pooled") return TTestKind::kPooled;
  throw InvalidArgument("unknown t-test '" + std::string(name) + "'");
}

SampleSummary mean_sd(std::span<const double> samples) {
  if (samples.empty()) throw InvalidArgument("mean_sd of an empty sample");
  const Moments m = moments(samples);
  SampleSummary s;
  s.n = samples.size();
  s.mean = m.mean;
  if (s.n >= 2) s.sd = std::sqrt(m.variance);
  return s;
}

double incomplete_beta(double a, double b, double x, double one_minus_x) {
  if (!(a > 0.0 && b > 0.0)) throw InvalidArgument("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (one_minus_x == 0.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log(one_minus_x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, one_minus_x) / b;
}

double incomplete_beta(double a, double b, double x) {
  return incomplete_beta(a, b, x, 1.0 - x);
}

double t_two_tailed_p(double t, double df) {
  if (!(df > 0.0)) throw InvalidArgument("degrees of freedom must be positive");
  if (std::isnan(t)) throw InvalidArgument("t is NaN");
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  const double denom = df + t2;
  return incomplete_beta(df / 2.0, 0.5, df / denom, t2 / denom);
}

double t_cdf(double t, double df) {
  if (!(df > 0.0)) throw InvalidArgument("degrees of freedom must be positive");
  if (std::isnan(t)) throw InvalidArgument("t is NaN");
  if (t == 0.0) return 0.5;
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * t_two_tailed_p(t, df);
  return t > 0.0 ? 1.0 - tail : tail;
}

TTestResult welch_t_test(std::span<const double> x, std::span<const double> y) {
  require_two(x, y);
  const Moments mx = moments(x);
  const Moments my = moments(y);
  const double vx = mx.variance / mx.n;
  const double vy = my.variance / my.n;
  const double se2 = vx + vy;
  TTestResult r;
  if (se2 == 0.0) {
    r.df = mx.n + my.n - 2.0;
    if (mx.mean == my.mean) return TTestResult{0.0, r.df, 1.0};
    r.t = mx.mean > my.mean ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
    r.p_two_tailed = 0.0;
    return r;
  }
  r.t = (mx.mean - my.mean) / std::sqrt(se2);
  r.df = se2 * se2 / (vx * vx / (mx.n - 1.0) + vy * vy / (my.n - 1.0));
  r.p_two_tailed = t_two_tailed_p(r.t, r.df);
  return r;
}

TTestResult pooled_t_test(std::span<const double> x, std::span<const double> y) {
  require_two(x, y);
  const Moments mx = moments(x);
  const Moments my = moments(y);
  TTestResult r;
  r.df = mx.n + my.n - 2.0;
  const double pooled =
      ((mx.n - 1.0) * mx.variance + (my.n - 1.0) * my.variance) / r.df;
  const double se2 = pooled * (1.0 / mx.n + 1.0 / my.n);
  if (se2 == 0.0) {
    if (mx.mean == my.mean) return TTestResult{0.0, r.df, 1.0};
    r.t = mx.mean > my.mean ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
    r.p_two_tailed = 0.0;
    return r;
  }
  r.t = (mx.mean - my.mean) / std::sqrt(se2);
  r.p_two_tailed = t_two_tailed_p(r.t, r.df);
  return r;
}

TTestResult t_test(TTestKind kind, std::span<const double> x, std::span<const double> y) {
  return kind == TTestKind::kWelch ? welch_t_test(x, y) : pooled_t_test(x, y);
}

std::string format_p_value(double p) {
  if (p < 1e-4) return "< 0.0001";
  return fmt::format("{:.4f}", p);
}

}  // namespace mtrec
