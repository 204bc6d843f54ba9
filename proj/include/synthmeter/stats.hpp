// Copyright 2026 The synthmeter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "synthmeter/error.hpp"

namespace synthmeter::stats {

inline constexpr double kSignificanceLevel = 0.05;

struct PairedSample {
  double baseline = 0.0;
  double treated = 0.0;
  std::string unit_id;
};

enum class Alternative { TwoSided, Greater, Less };
enum class TestMethod { Exact, NormalApprox };
/// Auto picks Exact up to kExactCutover non-zero differences.
enum class MethodChoice { Auto, Exact, NormalApprox };

inline constexpr std::size_t kExactCutover = 25;

inline std::string_view alternative_name(Alternative a) {
  switch (a) {
    case Alternative::TwoSided: return "two-sided";
    case Alternative::Greater: return "greater";
    case Alternative::Less: return "less";
  }
  return "?";
}

inline std::string_view method_name(TestMethod m) { return m == TestMethod::Exact ? "exact" : "normal-approx"; }

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  TestMethod method = TestMethod::Exact;
  std::size_t n_effective = 0;
  bool all_zero_differences = false;
};

/// Average ranks (1-based) of `values`; tied values share the mean rank.
inline std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start + 1;
    while (end < order.size() && values[order[end]] == values[order[start]]) ++end;
    const double rank = 0.5 * static_cast<double>(start + 1 + end);  // mean of start+1 .. end
    for (std::size_t t = start; t < end; ++t) ranks[order[t]] = rank;
    start = end;
  }
  return ranks;
}

namespace detail {

// Number of the 2^n sign assignments giving each doubled positive-rank sum.
// Doubled ranks are integers even with half-rank ties.
inline std::vector<std::uint64_t> signed_rank_counts(std::span<const std::uint32_t> doubled_ranks) {
  std::uint64_t total = 0;
  for (auto r : doubled_ranks) total += r;
  std::vector<std::uint64_t> counts(total + 1, 0);
  counts[0] = 1;
  std::uint64_t reach = 0;
  for (auto r : doubled_ranks) {
    for (std::uint64_t s = reach + 1; s-- > 0;) {
      if (counts[s] != 0) counts[s + r] += counts[s];
    }
    reach += r;
  }
  return counts;
}

inline double standard_normal_cdf(double z) { return boost::math::cdf(boost::math::normal_distribution<double>(), z); }

}  // namespace detail

/// Paired Wilcoxon signed-rank test on d = treated - baseline.
///
/// Zero differences are dropped and |d| ties get average ranks. With
/// n_effective <= 25 the p-value is exact over all 2^n sign assignments;
/// above that a tie-corrected normal approximation with continuity
/// correction is used. The statistic is min(W+, W-) for a two-sided test and
/// W+ for one-sided tests. All-zero differences yield p = 1 and a flag.
inline TestResult wilcoxon_signed_rank(std::span<const PairedSample> pairs, Alternative alternative,
                                       MethodChoice choice = MethodChoice::Auto) {
  if (pairs.empty()) throw Error(Errc::EmptySample, "Wilcoxon test needs at least one pair");
  std::vector<double> diffs;
  for (const auto& p : pairs) {
    if (!std::isfinite(p.baseline) || !std::isfinite(p.treated)) {
      throw Error(Errc::InvalidArgument, "non-finite value for unit '" + p.unit_id + "'");
    }
    const double d = p.treated - p.baseline;
    if (d != 0.0) diffs.push_back(d);
  }
  TestResult result;
  result.n_effective = diffs.size();
  if (diffs.empty()) {
    result.all_zero_differences = true;
    result.method = TestMethod::Exact;
    result.p_value = 1.0;
    return result;
  }

  const std::size_t n = diffs.size();
  std::vector<double> magnitudes(n);
  for (std::size_t i = 0; i < n; ++i) magnitudes[i] = std::fabs(diffs[i]);
  const std::vector<double> ranks = average_ranks(magnitudes);
  double w_plus = 0.0;
  double w_minus = 0.0;
  for (std::size_t i = 0; i < n; ++i) (diffs[i] > 0 ? w_plus : w_minus) += ranks[i];
  result.statistic = alternative == Alternative::TwoSided ? std::min(w_plus, w_minus) : w_plus;

  const bool exact = choice == MethodChoice::Exact || (choice == MethodChoice::Auto && n <= kExactCutover);
  if (exact) {
    if (n > 62) throw Error(Errc::InvalidArgument, "exact Wilcoxon enumeration limited to 62 differences");
    result.method = TestMethod::Exact;
    std::vector<std::uint32_t> doubled(n);
    for (std::size_t i = 0; i < n; ++i) doubled[i] = static_cast<std::uint32_t>(std::lround(2.0 * ranks[i]));
    const auto counts = detail::signed_rank_counts(doubled);
    const auto observed = static_cast<std::uint64_t>(std::llround(2.0 * w_plus));
    std::uint64_t at_most = 0;
    std::uint64_t at_least = 0;
    for (std::uint64_t s = 0; s < counts.size(); ++s) {
      if (s <= observed) at_most += counts[s];
      if (s >= observed) at_least += counts[s];
    }
    const double total = std::ldexp(1.0, static_cast<int>(n));
    const double lower = static_cast<double>(at_most) / total;
    const double upper = static_cast<double>(at_least) / total;
    switch (alternative) {
      case Alternative::Greater: result.p_value = upper; break;
      case Alternative::Less: result.p_value = lower; break;
      case Alternative::TwoSided: result.p_value = std::min(1.0, 2.0 * std::min(lower, upper)); break;
    }
    return result;
  }

  result.method = TestMethod::NormalApprox;
  const double nd = static_cast<double>(n);
  const double mean = nd * (nd + 1.0) / 4.0;
  double tie_term = 0.0;
  {
    std::vector<double> sorted = magnitudes;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t start = 0; start < n;) {
      std::size_t end = start + 1;
      while (end < n && sorted[end] == sorted[start]) ++end;
      const double t = static_cast<double>(end - start);
      tie_term += t * t * t - t;
      start = end;
    }
  }
  const double variance = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
  const double sd = std::sqrt(variance);
  switch (alternative) {
    case Alternative::Greater:
      result.p_value = 1.0 - detail::standard_normal_cdf((w_plus - mean - 0.5) / sd);
      break;
    case Alternative::Less:
      result.p_value = detail::standard_normal_cdf((w_plus - mean + 0.5) / sd);
      break;
    case Alternative::TwoSided: {
      const double z = std::max(0.0, std::fabs(w_plus - mean) - 0.5) / sd;
      result.p_value = std::min(1.0, 2.0 * (1.0 - detail::standard_normal_cdf(z)));
      break;
    }
  }
  result.p_value = std::clamp(result.p_value, 0.0, 1.0);
  return result;
}

struct Correlation {
  double r = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// Sample Pearson correlation with a two-sided t-test on n - 2 degrees of
/// freedom.
inline Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
  if (x.size() < 3) throw Error(Errc::InvalidArgument, "Pearson correlation needs at least 3 points");
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw Error(Errc::InvalidArgument, "non-finite value");
  }
  const double nd = static_cast<double>(n);
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / nd;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / nd;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(Errc::ZeroVariance, "a series is constant");
  Correlation c;
  c.n = n;
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (std::fabs(c.r) == 1.0) {
    c.p_value = 0.0;
    return c;
  }
  const double df = nd - 2.0;
  if (df <= 0.0) {
    c.p_value = 1.0;
    return c;
  }
  const double t = c.r * std::sqrt(df / (1.0 - c.r * c.r));
  const boost::math::students_t_distribution<double> dist(df);
  c.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))), 0.0, 1.0);
  return c;
}

/// (v - min) / (max - min). The minimum maps to exactly 0 and the maximum to
/// exactly 1.
inline std::vector<double> minmax_normalize(std::span<const double> values) {
  if (values.size() < 2) throw Error(Errc::InvalidArgument, "min-max normalization needs at least 2 values");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo;
  const double max = *hi;
  if (!(max > min)) throw Error(Errc::DegenerateRange, "all values equal");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - min) / (max - min);
  return out;
}

}  // namespace synthmeter::stats
