#pragma once

// Truncated power series with nonnegative-friendly multiplication.

#include <fftw3.h>

#include <algorithm>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "gwlimits/error.hpp"

namespace gwlimits {

/// Coefficients c_0..c_K of a power series truncated at degree K = cap().
struct TruncSeries {
  std::vector<double> coeffs;

  TruncSeries() = default;
  explicit TruncSeries(std::vector<double> c) : coeffs(std::move(c)) {}

  std::size_t cap() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }
  double operator[](std::size_t k) const { return k < coeffs.size() ? coeffs[k] : 0.0; }

  static TruncSeries identity(std::size_t cap) {
    std::vector<double> c(cap + 1, 0.0);
    if (cap >= 1) c[1] = 1.0;
    return TruncSeries(std::move(c));
  }
};

inline constexpr std::size_t kSchoolbookThreshold = 64;

namespace detail {

/// Index of first nonzero coefficient, or size() when none.
inline std::size_t low_index(std::span<const double> a) {
  std::size_t i = 0;
  while (i < a.size() && a[i] == 0.0) ++i;
  return i;
}

inline std::size_t high_index(std::span<const double> a) {
  std::size_t i = a.size();
  while (i > 0 && a[i - 1] == 0.0) --i;
  return i;  // one past the last nonzero
}

inline std::vector<double> schoolbook(std::span<const double> a, std::span<const double> b, std::size_t cap) {
  std::vector<double> out(cap + 1, 0.0);
  for (std::size_t i = 0; i < a.size() && i <= cap; ++i) {
    if (a[i] == 0.0) continue;
    const std::size_t lim = std::min(b.size(), cap - i + 1);
    for (std::size_t j = 0; j < lim; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

// FFTW planning is not thread-safe; execution on distinct buffers is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}

struct FftwDeleter {
  void operator()(double* p) const { fftw_free(p); }
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

inline std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b, std::size_t cap) {
  const std::size_t need = std::min(a.size() + b.size() - 1, cap + 1);
  std::size_t n = 1;
  while (n < a.size() + b.size() - 1) n <<= 1;
  const std::size_t nc = n / 2 + 1;

  std::unique_ptr<double, FftwDeleter> ra(fftw_alloc_real(n)), rb(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwDeleter> ca(fftw_alloc_complex(nc)), cb(fftw_alloc_complex(nc));
  fftw_plan fwd_a, fwd_b, inv;
  {
    std::lock_guard lock(fftw_planner_mutex());
    fwd_a = fftw_plan_dft_r2c_1d(int(n), ra.get(), ca.get(), FFTW_ESTIMATE);
    fwd_b = fftw_plan_dft_r2c_1d(int(n), rb.get(), cb.get(), FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(int(n), ca.get(), ra.get(), FFTW_ESTIMATE);
  }
  std::fill_n(ra.get(), n, 0.0);
  std::fill_n(rb.get(), n, 0.0);
  std::copy(a.begin(), a.end(), ra.get());
  std::copy(b.begin(), b.end(), rb.get());
  fftw_execute(fwd_a);
  fftw_execute(fwd_b);
  for (std::size_t k = 0; k < nc; ++k) {
    const double re = ca.get()[k][0] * cb.get()[k][0] - ca.get()[k][1] * cb.get()[k][1];
    const double im = ca.get()[k][0] * cb.get()[k][1] + ca.get()[k][1] * cb.get()[k][0];
    ca.get()[k][0] = re;
    ca.get()[k][1] = im;
  }
  fftw_execute(inv);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd_a);
    fftw_destroy_plan(fwd_b);
    fftw_destroy_plan(inv);
  }
  std::vector<double> out(cap + 1, 0.0);
  const double scale = 1.0 / double(n);
  for (std::size_t k = 0; k < need; ++k) out[k] = ra.get()[k] * scale;
  return out;
}

}  // namespace detail

enum class MulMethod { Auto, Schoolbook, Fft };

/// Product a*b truncated to degree `cap`. Coefficients outside the exact
/// support window [low(a)+low(b), high(a)+high(b)] are forced to zero so
/// transform noise never appears where the product must vanish.
inline TruncSeries series_mul(const TruncSeries& a, const TruncSeries& b, std::size_t cap,
                              MulMethod method = MulMethod::Auto) {
  const std::span<const double> sa(a.coeffs), sb(b.coeffs);
  const std::size_t la = detail::low_index(sa), lb = detail::low_index(sb);
  if (la == sa.size() || lb == sb.size() || la + lb > cap) return TruncSeries(std::vector<double>(cap + 1, 0.0));
  const std::size_t ha = detail::high_index(sa), hb = detail::high_index(sb);
  // shift out leading zeros, multiply the trimmed windows
  const std::size_t out_cap = cap - (la + lb);
  const auto wa = sa.subspan(la, std::min(ha - la, out_cap + 1));
  const auto wb = sb.subspan(lb, std::min(hb - lb, out_cap + 1));

  bool use_fft = false;
  if (method == MulMethod::Fft) use_fft = true;
  if (method == MulMethod::Auto) use_fft = std::min(wa.size(), wb.size()) > kSchoolbookThreshold;

  std::vector<double> prod = use_fft ? detail::fft_convolve(wa, wb, out_cap) : detail::schoolbook(wa, wb, out_cap);
  std::vector<double> out(cap + 1, 0.0);
  std::copy(prod.begin(), prod.end(), out.begin() + static_cast<std::ptrdiff_t>(la + lb));
  return TruncSeries(std::move(out));
}

}  // namespace gwlimits
