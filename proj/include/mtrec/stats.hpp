#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace mtrec {

struct SampleSummary {
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> sd;  // sample SD (n - 1); absent for n = 1
};

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p_two_tailed = 1.0;
};

enum class TTestKind { kWelch, kPooled };

std::string_view to_string(TTestKind kind);
TTestKind t_test_kind_from_string(std::string_view name);

/// Throws InvalidArgument on an empty sample.
SampleSummary mean_sd(std::span<const double> samples);

/// Unequal-variance two-sample t-test with Welch–Satterthwaite df.
/// Two constant groups: equal means give t = 0, p = 1; different means give
/// t = ±inf, p = 0 with df = n_x + n_y - 2. Throws InvalidArgument when a
/// group has fewer than two samples.
TTestResult welch_t_test(std::span<const double> x, std::span<const double> y);

/// Equal-variance two-sample t-test, df = n_x + n_y - 2.
TTestResult pooled_t_test(std::span<const double> x, std::span<const double> y);

TTestResult t_test(TTestKind kind, std::span<const double> x,
                   std::span<const double> y);

/// Regularized incomplete beta I_x(a, b). Continued fraction (modified
/// Lentz), using the reflection I_x(a,b) = 1 - I_{1-x}(b,a) on the slowly
/// converging side. `one_minus_x` lets callers pass 1 - x without
/// cancellation.
double incomplete_beta(double a, double b, double x, double one_minus_x);
double incomplete_beta(double a, double b, double x);

/// Student's t cumulative distribution. Throws InvalidArgument for df <= 0.
double t_cdf(double t, double df);

/// Two-tailed p-value P(|T| >= |t|).
double t_two_tailed_p(double t, double df);

/// "< 0.0001" below 1e-4, otherwise four decimals.
std::string format_p_value(double p);

}  // namespace mtrec
