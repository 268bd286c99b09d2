#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace spillnet::stats {

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // population
  double max = 0.0;
  double min = 0.0;
  double range = 0.0;
  std::size_t count = 0;
};

/// Throws EmptyInput.
Summary summary_stats(std::span<const double> series);

/// 100 * std / mean (population std). Throws ZeroMean, EmptyInput.
double coefficient_of_variation(std::span<const double> series);

/// Type-7 (linear) quantile of an ascending-sorted sample, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Percentile bootstrap of the mean. Throws InsufficientData with fewer than 2 samples.
Interval bootstrap_ci(std::span<const double> samples, double level = 0.95, std::size_t resamples = 10000,
                      std::uint64_t seed = 0);

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-tailed
};

/// Throws LengthMismatch, InsufficientData (n < 2), ZeroVariance.
TTest paired_t_test(std::span<const double> a, std::span<const double> b);

struct WilcoxonResult {
  double w = 0.0;  // min(W+, W-)
  double w_plus = 0.0;
  double w_minus = 0.0;
  std::size_t n_eff = 0;
  double p = 1.0;  // two-sided
  bool exact = false;
};

inline constexpr std::size_t kWilcoxonExactMax = 12;
inline constexpr std::size_t kWilcoxonMinNonzero = 5;

/// Zero differences dropped, midranks for ties; exact null distribution for
/// n_eff <= 12, tie-corrected normal approximation above.
/// Throws LengthMismatch, TooFewNonzero (n_eff < 5).
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

/// Midranks (1-based) of the values.
std::vector<double> midranks(std::span<const double> values);

/// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double df);
double normal_cdf(double z);

}  // namespace spillnet::stats
