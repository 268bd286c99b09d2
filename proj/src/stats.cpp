#include "spillnet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "spillnet/error.hpp"
#include "spillnet/rng.hpp"

namespace spillnet::stats {

namespace {

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

void check_lengths(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " samples");
  }
}

}  // namespace

Summary summary_stats(std::span<const double> series) {
  if (series.empty()) throw Error(ErrorCode::EmptyInput, "summary of an empty series");
  Summary s;
  s.count = series.size();
  s.mean = mean_of(series);
  double ss = 0.0;
  for (double x : series) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(series.size()));
  const auto [lo, hi] = std::ranges::minmax_element(series);
  s.min = *lo;
  s.max = *hi;
  s.range = s.max - s.min;
  return s;
}

double coefficient_of_variation(std::span<const double> series) {
  const Summary s = summary_stats(series);
  if (s.mean == 0.0) throw Error(ErrorCode::ZeroMean, "coefficient of variation with zero mean");
  return 100.0 * s.std / s.mean;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::EmptyInput, "quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Interval bootstrap_ci(std::span<const double> samples, double level, std::size_t resamples, std::uint64_t seed) {
  if (samples.size() < 2) throw Error(ErrorCode::InsufficientData, "bootstrap needs at least 2 samples");
  if (!(level > 0.0 && level < 1.0) || resamples == 0) {
    throw Error(ErrorCode::ConfigError, "bootstrap level must lie in (0, 1) with at least one resample");
  }
  Rng rng(seed);
  const std::size_t n = samples.size();
  std::vector<double> means(resamples);
  for (double& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += samples[rng.below(n)];
    m = s / static_cast<double>(n);
  }
  std::ranges::sort(means);
  const double tail = (1.0 - level) / 2.0;
  return {quantile_sorted(means, tail), quantile_sorted(means, 1.0 - tail)};
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front =
      std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  const double tail = 0.5 * incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
  return t >= 0.0 ? 1.0 - tail : tail;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

TTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b);
  const std::size_t n = a.size();
  if (n < 2) throw Error(ErrorCode::InsufficientData, "paired t-test needs at least 2 pairs");
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double m = mean_of(d);
  double ss = 0.0;
  for (double x : d) ss += (x - m) * (x - m);
  const double var = ss / static_cast<double>(n - 1);
  if (!(var > 0.0)) throw Error(ErrorCode::ZeroVariance, "differences have zero variance");
  TTest r;
  r.df = static_cast<double>(n - 1);
  r.t = m / (std::sqrt(var) / std::sqrt(static_cast<double>(n)));
  r.p = incomplete_beta(r.df / 2.0, 0.5, r.df / (r.df + r.t * r.t));
  return r;
}

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::ranges::stable_sort(idx, {}, [&](std::size_t i) { return values[i]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b);
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i] - b[i];
    if (x != 0.0) d.push_back(x);
  }
  WilcoxonResult r;
  r.n_eff = d.size();
  if (r.n_eff < kWilcoxonMinNonzero) {
    throw Error(ErrorCode::TooFewNonzero, std::to_string(r.n_eff) + " nonzero differences, need " +
                                              std::to_string(kWilcoxonMinNonzero));
  }
  std::vector<double> mag(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) mag[i] = std::abs(d[i]);
  const auto ranks = midranks(mag);
  for (std::size_t i = 0; i < d.size(); ++i) (d[i] > 0.0 ? r.w_plus : r.w_minus) += ranks[i];
  r.w = std::min(r.w_plus, r.w_minus);
  const std::size_t n = r.n_eff;
  if (n <= kWilcoxonExactMax) {
    // Null distribution of the doubled positive-rank sum; midranks are half-integers.
    std::vector<long> doubled(n);
    long total = 0;
    for (std::size_t i = 0; i < n; ++i) total += doubled[i] = std::lround(2.0 * ranks[i]);
    std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
    ways[0] = 1.0;
    for (long v : doubled) {
      for (long s = total; s >= v; --s) ways[static_cast<std::size_t>(s)] += ways[static_cast<std::size_t>(s - v)];
    }
    const long limit = std::lround(2.0 * r.w);
    double count = 0.0;
    for (long s = 0; s <= limit && s <= total; ++s) count += ways[static_cast<std::size_t>(s)];
    r.p = std::min(1.0, 2.0 * count / std::ldexp(1.0, static_cast<int>(n)));
    r.exact = true;
  } else {
    const double nn = static_cast<double>(n);
    double tie = 0.0;
    auto sorted = ranks;
    std::ranges::sort(sorted);
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i + 1);
      tie += t * t * t - t;
      i = j + 1;
    }
    const double mu = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie / 48.0;
    const double z = (r.w - mu) / std::sqrt(var);
    r.p = std::min(1.0, 2.0 * normal_cdf(z));
  }
  return r;
}

}  // namespace spillnet::stats
