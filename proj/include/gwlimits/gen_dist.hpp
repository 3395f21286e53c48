#pragma once

// Exact distribution of Z_n: series composition and DFT inversion.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "gwlimits/error.hpp"
#include "gwlimits/offspring.hpp"
#include "gwlimits/series.hpp"

namespace gwlimits {

enum class PmfMethod { Composition, Dft };

constexpr std::string_view to_string(PmfMethod m) { return m == PmfMethod::Composition ? "compose" : "dft"; }

inline constexpr double kClampTolerance = 1e-12;
inline constexpr std::size_t kMaxDefaultCap = std::size_t{1} << 16;

struct GenerationPmf {
  int n = 0;
  std::vector<double> coeffs;  // P(Z_n = k), k = 0..cap()
  double tail_mass = 0.0;      // 1 - sum(coeffs)
  PmfMethod method = PmfMethod::Composition;
  bool cap_too_small = false;  // tail_mass > 0.5
  double alias_bound = 0.0;    // DFT only: bound on mass folded in from k >= N

  std::size_t cap() const { return coeffs.size() - 1; }
  double operator[](std::size_t k) const { return k < coeffs.size() ? coeffs[k] : 0.0; }
};

/// min(2^16, ceil(8 m^n)).
inline std::size_t default_cap(const OffspringLaw& law, int n) {
  const double target = std::ceil(8.0 * std::pow(law.mean(), n));
  if (!(target < double(kMaxDefaultCap))) return kMaxDefaultCap;
  return std::max<std::size_t>(1, static_cast<std::size_t>(target));
}

namespace detail {

/// Clamps roundoff negatives; anything below -kClampTolerance is a bug.
inline void clamp_negatives(std::vector<double>& c, std::string_view where) {
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c[k] < 0.0) {
      if (c[k] < -kClampTolerance)
        throw Error(Errc::InternalConsistency,
                    std::string(where) + ": coefficient " + std::to_string(k) + " = " + std::to_string(c[k]));
      c[k] = 0.0;
    }
  }
}

inline double total(const std::vector<double>& c) {
  double s = 0.0;
  for (double x : c) s += x;
  return s;
}

}  // namespace detail

/// Coefficients of f(inner(s)) up to degree `cap`. With nonnegative inner
/// coefficients, coefficient k depends only on inner[0..k], so the result
/// is exact through degree `cap`.
inline TruncSeries compose_poly(const OffspringLaw& outer, const TruncSeries& inner, std::size_t cap) {
  for (double c : inner.coeffs)
    if (c < 0.0) throw Error(Errc::InvalidArgument, "compose_poly: inner series has a negative coefficient");
  std::vector<double> trimmed(cap + 1, 0.0);
  for (std::size_t k = 0; k <= cap && k < inner.coeffs.size(); ++k) trimmed[k] = inner.coeffs[k];
  const TruncSeries in(std::move(trimmed));

  const auto p = outer.probs();
  const std::size_t d = outer.degree();
  std::vector<double> init(cap + 1, 0.0);
  init[0] = p[d];
  TruncSeries acc(std::move(init));
  for (std::size_t j = d; j-- > 0;) {
    acc = series_mul(acc, in, cap);
    acc.coeffs[0] += p[j];
  }
  detail::clamp_negatives(acc.coeffs, "compose_poly");
  return acc;
}

inline GenerationPmf finish_pmf(int n, std::vector<double> coeffs, PmfMethod method) {
  GenerationPmf out;
  out.n = n;
  out.method = method;
  const double sum = detail::total(coeffs);
  if (sum > 1.0 + 1e-10) throw Error(Errc::InternalConsistency, "pmf mass " + std::to_string(sum) + " exceeds 1");
  out.coeffs = std::move(coeffs);
  out.tail_mass = std::max(0.0, 1.0 - sum);
  out.cap_too_small = out.tail_mass > 0.5;
  return out;
}

/// P(Z_n = k), k = 0..cap, by n-fold composition from the identity series.
inline GenerationPmf zn_pmf_compose(const OffspringLaw& law, int n, std::size_t cap) {
  if (n < 0) throw Error(Errc::InvalidArgument, "negative generation");
  if (cap < 1) throw Error(Errc::InvalidArgument, "cap must be >= 1");
  TruncSeries series = TruncSeries::identity(cap);
  for (int i = 0; i < n; ++i) series = compose_poly(law, series, cap);
  return finish_pmf(n, std::move(series.coeffs), PmfMethod::Composition);
}

inline GenerationPmf zn_pmf_compose(const OffspringLaw& law, int n) {
  return zn_pmf_compose(law, n, default_cap(law, n));
}

namespace detail {

/// In-place iterative radix-2 DFT, X_k = sum_j x_j exp(-2 pi i jk/N).
inline void radix2_dft(std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / double(len);
    const std::size_t half = len / 2;
    // twiddles computed directly per index to avoid recurrence drift
    std::vector<std::complex<double>> w(half);
    for (std::size_t k = 0; k < half; ++k) w[k] = std::polar(1.0, ang * double(k));
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const std::complex<double> u = x[i + k];
        const std::complex<double> t = w[k] * x[i + k + half];
        x[i + k] = u + t;
        x[i + k + half] = u - t;
      }
    }
  }
}

}  // namespace detail

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// P(Z_n = k), k < N, by evaluating f_n at the N-th roots of unity and
/// inverting. Mass at k >= N wraps onto k mod N; `alias_bound` bounds it.
inline GenerationPmf zn_pmf_dft(const OffspringLaw& law, int n, std::size_t grid) {
  if (!is_power_of_two(grid)) throw Error(Errc::NotPowerOfTwo, "N = " + std::to_string(grid));
  if (n < 0) throw Error(Errc::InvalidArgument, "negative generation");
  std::vector<std::complex<double>> values(grid);
  for (std::size_t k = 0; k < grid; ++k) {
    std::complex<double> s = std::polar(1.0, 2.0 * std::numbers::pi * double(k) / double(grid));
    for (int i = 0; i < n; ++i) s = law.eval(s);
    values[k] = s;
  }
  detail::radix2_dft(values);
  std::vector<double> coeffs(grid);
  for (std::size_t k = 0; k < grid; ++k) coeffs[k] = values[k].real() / double(grid);
  detail::clamp_negatives(coeffs, "zn_pmf_dft");
  // with no wrap-around, Z_n lives on [j0^n, d^n]; outside it only roundoff remains
  const double hi = std::pow(double(law.degree()), n), lo = std::pow(double(law.min_support()), n);
  if (hi < double(grid))
    for (std::size_t k = 0; k < grid; ++k)
      if (double(k) > hi || double(k) < lo) coeffs[k] = 0.0;
  GenerationPmf out = finish_pmf(n, std::move(coeffs), PmfMethod::Dft);

  out.alias_bound = hi < double(grid) ? 0.0 : std::min(1.0, std::pow(law.mean(), n) / double(grid));
  return out;
}

/// Grid size that holds the whole support of Z_n when feasible (up to 2^22),
/// and at least cap+1 points.
inline std::size_t dft_grid_for(const OffspringLaw& law, int n, std::size_t cap) {
  const double support = std::pow(double(law.degree()), n) + 1.0;
  const double want = std::max(double(cap + 1), std::min(support, double(std::size_t{1} << 22)));
  std::size_t grid = 1;
  while (double(grid) < want) grid <<= 1;
  return grid;
}

/// P(Z_n >= v), including the mass beyond the cap.
inline double tail_probability(const GenerationPmf& pmf, std::size_t v) {
  if (v > pmf.cap()) throw Error(Errc::VBeyondCap, "v = " + std::to_string(v) + " > cap " + std::to_string(pmf.cap()));
  double s = pmf.tail_mass;
  for (std::size_t k = pmf.coeffs.size(); k-- > v;) s += pmf.coeffs[k];
  return std::min(1.0, s);
}

/// E(exp(-theta Z_n) | Z_{n-k} >= v) through the identity
/// sum_{j>=v} f_k(e^{-theta})^j P(Z_{n-k} = j) / P(Z_{n-k} >= v).
inline double conditional_laplace(const OffspringLaw& law, int n, int k, std::size_t v, double theta,
                                  std::size_t cap) {
  if (!(n > k && k >= 0)) throw Error(Errc::InvalidArgument, "need n > k >= 0");
  if (!(theta > 0.0)) throw Error(Errc::InvalidArgument, "theta must be positive");
  const GenerationPmf pmf = zn_pmf_compose(law, n - k, cap);
  const double denom = tail_probability(pmf, v);
  if (denom <= 0.0) throw Error(Errc::EmptyConditioningEvent, "P(Z_{n-k} >= v) = 0");
  const double t = pgf_iterate(law, k, std::exp(-theta));
  double num = 0.0;
  double tj = std::pow(t, double(v));
  for (std::size_t j = v; j <= pmf.cap(); ++j) {
    num += tj * pmf.coeffs[j];
    tj *= t;
  }
  return num / denom;
}

inline double conditional_laplace(const OffspringLaw& law, int n, int k, std::size_t v, double theta) {
  return conditional_laplace(law, n, k, v, theta, std::max(default_cap(law, n - k), v));
}

/// Exact pmf of Z_n given Z_{n-k} >= v, truncated at `cap`:
/// sum_{i>=v} P(Z_{n-k} = i) (law of Z_k)^{*i} / P(Z_{n-k} >= v).
inline GenerationPmf conditional_pmf(const OffspringLaw& law, int n, int k, std::size_t v, std::size_t cap) {
  if (!(n >= k && k >= 0)) throw Error(Errc::InvalidArgument, "need n >= k >= 0");
  const std::size_t outer_cap = std::max(default_cap(law, n - k), v);
  const GenerationPmf outer = zn_pmf_compose(law, n - k, outer_cap);
  const double denom = tail_probability(outer, v);
  if (denom <= 0.0) throw Error(Errc::EmptyConditioningEvent, "P(Z_{n-k} >= v) = 0");
  const TruncSeries step(zn_pmf_compose(law, k, cap).coeffs);

  std::vector<double> acc(cap + 1, 0.0);
  std::vector<double> unit(cap + 1, 0.0);
  unit[0] = 1.0;
  TruncSeries power(std::move(unit));
  double remaining = denom;
  for (std::size_t i = 1; i <= outer.cap(); ++i) {
    power = series_mul(power, step, cap);
    if (i < v) continue;
    const double w = outer.coeffs[i];
    if (w > 0.0)
      for (std::size_t j = 0; j <= cap; ++j) acc[j] += w * power.coeffs[j];
    remaining -= w;
    if (remaining < 1e-16 * denom) break;
    if (detail::low_index(power.coeffs) > cap) break;
  }
  for (double& x : acc) x /= denom;
  detail::clamp_negatives(acc, "conditional_pmf");
  return finish_pmf(n, std::move(acc), PmfMethod::Composition);
}

}  // namespace gwlimits
