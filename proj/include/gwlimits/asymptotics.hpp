#pragma once

// Schröder function, local-limit scales, W-limit transforms and the
// Böttcher growth function.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "gwlimits/error.hpp"
#include "gwlimits/gen_dist.hpp"
#include "gwlimits/offspring.hpp"

namespace gwlimits {

struct QEvaluation {
  double s = 0.0;
  double value = 0.0;
  int n_used = 0;
  double residual = 0.0;
};

namespace detail {

inline void require_schroeder(const Classification& cls) {
  if (cls.boettcher()) throw Error(Errc::BoettcherLaw, "operation needs gamma > 0");
}

/// Coefficients b_i of f(q + x) - q = sum_{i>=1} b_i x^i.
inline std::vector<double> centered_coefficients(const OffspringLaw& law, double q) {
  const std::size_t d = law.degree();
  std::vector<double> b(d + 1, 0.0);
  for (std::size_t j = 0; j <= d; ++j) {
    const double pj = law.prob(j);
    if (pj == 0.0) continue;
    double binom = 1.0;
    for (std::size_t i = 0; i <= j; ++i) {
      b[i] += pj * binom * std::pow(q, double(j - i));
      binom = binom * double(j - i) / double(i + 1);
    }
  }
  b[0] = 0.0;
  return b;
}

/// Tracks r_n = (f_n(s) - q)/gamma^n without forming the small difference.
class SchroederIterator {
 public:
  SchroederIterator(const OffspringLaw& law, const Classification& cls, double s)
      : b_(centered_coefficients(law, cls.q)), gamma_(cls.gamma), ratio_(s - cls.q), scale_(1.0) {}

  double value() const { return ratio_; }

  void step() {
    const double x = ratio_ * scale_;  // f_n(s) - q
    // (f(q + x) - q)/x / gamma = 1 + (b_2 x + b_3 x^2 + ...)/gamma
    double acc = 0.0;
    for (std::size_t i = b_.size() - 1; i >= 2; --i) acc = acc * x + b_[i];
    acc *= x;
    ratio_ *= (b_[1] + acc) / gamma_;
    scale_ *= gamma_;
  }

 private:
  std::vector<double> b_;
  double gamma_;
  double ratio_;
  double scale_;
};

}  // namespace detail

/// Q_n(s) = (f_n(s) - q)/gamma^n.
inline QEvaluation q_n(const OffspringLaw& law, int n, double s) {
  const Classification cls = classify(law);
  detail::require_schroeder(cls);
  if (!(s < 1.0) || s < 0.0) throw Error(Errc::SAtOrBeyondOne, "s = " + std::to_string(s));
  if (n < 0) throw Error(Errc::InvalidArgument, "negative n");
  detail::SchroederIterator it(law, cls, s);
  double prev = it.value();
  for (int i = 0; i < n; ++i) {
    prev = it.value();
    it.step();
  }
  return {s, it.value(), n, n == 0 ? 0.0 : std::abs(it.value() - prev)};
}

/// Q(s) = lim Q_n(s); stops once successive iterates differ by < tol.
inline QEvaluation q_limit(const OffspringLaw& law, double s, double tol = 1e-12, int n_max = 400) {
  const Classification cls = classify(law);
  detail::require_schroeder(cls);
  if (!(s < 1.0) || s < 0.0) throw Error(Errc::SAtOrBeyondOne, "s = " + std::to_string(s));
  detail::SchroederIterator it(law, cls, s);
  for (int n = 1; n <= n_max; ++n) {
    const double prev = it.value();
    it.step();
    const double residual = std::abs(it.value() - prev);
    if (residual < tol) return {s, it.value(), n, residual};
  }
  const double prev = it.value();
  it.step();
  throw Error(Errc::NoConvergence, "Q(" + std::to_string(s) + "): residual " +
                                       std::to_string(std::abs(it.value() - prev)) + " after " +
                                       std::to_string(n_max) + " iterations");
}

struct QCoefficients {
  std::vector<double> values;  // q_1..q_J
  double change = 0.0;         // max_j |q_j(n) - q_j(n-1)|
};

/// q_j ~ P(Z_n = j)/gamma^n for j = 1..J.
inline QCoefficients q_coefficients(const OffspringLaw& law, std::size_t J, int n) {
  const Classification cls = classify(law);
  detail::require_schroeder(cls);
  if (n < 1 || J < 1) throw Error(Errc::InvalidArgument, "need n >= 1 and J >= 1");
  // truncation at J is exact for the first J+1 coefficients
  TruncSeries series = TruncSeries::identity(J);
  std::vector<double> prev(J, 0.0);
  QCoefficients out;
  out.values.assign(J, 0.0);
  double scale = 1.0;
  for (int i = 1; i <= n; ++i) {
    series = compose_poly(law, series, J);
    scale *= cls.gamma;  // same rounding as p_1^i, so q_1 = 1 exactly when p_0 = 0
    for (std::size_t j = 1; j <= J; ++j) {
      prev[j - 1] = out.values[j - 1];
      out.values[j - 1] = series.coeffs[j] / scale;
    }
  }
  out.change = 0.0;
  if (n >= 2)
    for (std::size_t j = 0; j < J; ++j) out.change = std::max(out.change, std::abs(out.values[j] - prev[j]));
  return out;
}

/// k_n = floor(n - log v / log m + 1), the alpha = 1 factor in A_n.
inline long critical_k(const Classification& cls, int n, double v) {
  return static_cast<long>(std::floor(double(n) - std::log(v) / std::log(cls.m) + 1.0));
}

/// Local-limit scale A_n of P(Z_n = v), gamma standing in for p_1.
inline double a_scale(const Classification& cls, int n, double v) {
  if (!(v >= 1.0)) throw Error(Errc::InvalidArgument, "v must be >= 1");
  if (v > std::pow(cls.m, n) * (1.0 + 1e-9)) throw Error(Errc::VTooLarge, "v exceeds m^n");
  switch (cls.regime) {
    case Regime::SchroederSub: return std::pow(cls.gamma, n) * std::pow(v, cls.alpha - 1.0);
    case Regime::SchroederCritical: return double(critical_k(cls, n, v)) * std::pow(cls.gamma, n);
    case Regime::SchroederSuper:
    case Regime::Boettcher: return std::pow(cls.m, -n);
  }
  return 0.0;
}

/// Scale dividing the uniform sup bound: gamma^n, k_n gamma^n (with
/// k_n = floor(n - log v/log m)), or m^{-n}.
inline double sup_scale(const Classification& cls, int n, double v) {
  switch (cls.regime) {
    case Regime::SchroederSub: return std::pow(cls.gamma, n);
    case Regime::SchroederCritical:
      return std::floor(double(n) - std::log(v) / std::log(cls.m)) * std::pow(cls.gamma, n);
    case Regime::SchroederSuper:
    case Regime::Boettcher: return std::pow(cls.m, -n);
  }
  return 0.0;
}

using ScaleFunction = double (*)(const Classification&, int, double);

inline double local_limit_ratio(const Classification& cls, const GenerationPmf& pmf, std::size_t v,
                                ScaleFunction scale = a_scale) {
  if (v > pmf.cap()) throw Error(Errc::VBeyondCap, "v beyond pmf cap");
  return pmf[v] / scale(cls, pmf.n, double(v));
}

/// P(Z_n = v)/A_n.
inline double local_limit_ratio(const OffspringLaw& law, int n, std::size_t v) {
  const Classification cls = classify(law);
  a_scale(cls, n, double(v));  // validates v before the pmf is built
  const GenerationPmf pmf = zn_pmf_compose(law, n, std::max(default_cap(law, n), v));
  return local_limit_ratio(cls, pmf, v);
}

struct SupResult {
  std::size_t argmax = 0;
  double value = 0.0;
};

/// sup_{v <= j <= cap} w(j) P(Z_n = j) with w(j) = j^{alpha-1} when alpha < 1, else 1.
inline SupResult sup_tail_local(const Classification& cls, const GenerationPmf& pmf, std::size_t v) {
  if (v > pmf.cap()) throw Error(Errc::VBeyondCap, "v beyond pmf cap");
  const bool weighted = cls.regime == Regime::SchroederSub;
  SupResult best{v, -1.0};
  for (std::size_t j = std::max<std::size_t>(v, 1); j <= pmf.cap(); ++j) {
    const double w = weighted ? std::pow(double(j), cls.alpha - 1.0) * pmf.coeffs[j] : pmf.coeffs[j];
    if (w > best.value) best = {j, w};
  }
  if (best.value < 0.0) best = {v, weighted && v > 0 ? std::pow(double(v), cls.alpha - 1.0) * pmf[v] : pmf[v]};
  return best;
}

inline SupResult sup_tail_local(const OffspringLaw& law, int n, std::size_t v) {
  const Classification cls = classify(law);
  return sup_tail_local(cls, zn_pmf_compose(law, n), v);
}

// ---- lattice and v-rules ------------------------------------------------

/// Span of the offspring support: gcd of differences between support points.
inline std::size_t support_span(const OffspringLaw& law) {
  std::size_t g = 0;
  const std::size_t j0 = law.min_support();
  for (std::size_t j = j0 + 1; j <= law.degree(); ++j)
    if (law.prob(j) > 0.0) g = std::gcd(g, j - j0);
  return g == 0 ? 1 : g;
}

/// Nearest v' with P(Z_n = v') possibly positive (Z_n = j_0^n mod span),
/// ties upward.
inline std::size_t lattice_snap(const OffspringLaw& law, int n, std::size_t v) {
  const std::size_t g = support_span(law);
  if (g == 1) return v;
  std::size_t r = 1 % g;
  for (int i = 0; i < n; ++i) r = (r * (law.min_support() % g)) % g;
  const std::size_t below_off = (v % g + g - r) % g;
  const std::size_t up = v + (g - below_off) % g;
  if (below_off == 0) return v;
  if (v >= below_off) {
    const std::size_t down = v - below_off;
    if (v - down < up - v && down >= 1) return down;
  }
  return up;
}

struct VRule {
  enum class Kind { Sqrt, Linear, MPower, Const } kind = Kind::Sqrt;
  double param = 0.0;

  /// Raw v_n before lattice snapping, at least 1.
  std::size_t raw(double m, int n) const {
    double v = 1.0;
    switch (kind) {
      case Kind::Sqrt: v = std::round(std::pow(m, 0.5 * n)); break;
      case Kind::Linear: v = std::round((param > 0.0 ? param : 1.0) * n); break;
      case Kind::MPower: v = std::round(std::pow(m, param * n)); break;
      case Kind::Const: v = std::round(param); break;
    }
    return static_cast<std::size_t>(std::max(1.0, v));
  }
};

/// Parses sqrt | linear[:c] | m-power:r | const:c.
inline VRule parse_v_rule(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  double param = 0.0;
  if (colon != std::string::npos) {
    try {
      param = std::stod(text.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error(Errc::ParseError, "bad v-rule parameter in '" + text + "'");
    }
  }
  if (head == "sqrt") return {VRule::Kind::Sqrt, 0.5};
  if (head == "linear") return {VRule::Kind::Linear, colon == std::string::npos ? 1.0 : param};
  if (head == "m-power" && colon != std::string::npos) return {VRule::Kind::MPower, param};
  if (head == "const" && colon != std::string::npos) return {VRule::Kind::Const, param};
  throw Error(Errc::ParseError, "unknown v-rule '" + text + "'");
}

struct ScaleEntry {
  int n = 0;
  std::size_t v = 0;
  double a = 0.0;
  long k = 0;  // critical_k, meaningful for alpha = 1
};

struct ScaleSequence {
  Regime regime = Regime::SchroederSub;
  std::vector<ScaleEntry> entries;
};

inline ScaleSequence scale_sequence(const OffspringLaw& law, const VRule& rule, int n_lo, int n_hi) {
  const Classification cls = classify(law);
  ScaleSequence seq{cls.regime, {}};
  for (int n = n_lo; n <= n_hi; ++n) {
    const std::size_t v = lattice_snap(law, n, rule.raw(cls.m, n));
    seq.entries.push_back({n, v, a_scale(cls, n, double(v)), critical_k(cls, n, double(v))});
  }
  return seq;
}

// ---- W transforms -------------------------------------------------------

/// E W^2 = f''(1)/(m^2 - m), from W = m^{-1} sum_{i <= Z_1} W^(i).
inline double w_second_moment(const OffspringLaw& law) {
  const double m = law.mean();
  return law.eval_second_derivative(1.0) / (m * m - m);
}

namespace detail {

inline constexpr double kSeedArgument = 1e-6;

inline int levels_for(double u, double m, int min_levels) {
  int n = min_levels;
  while (u * std::pow(m, -n) > kSeedArgument) ++n;
  return n;
}

/// E exp(-u W) at depth n: seed 1 - phi(x) ~ x - x^2 E W^2/2 at x = u m^{-n},
/// then n applications of f, tracked as a complement while near 1.
inline double laplace_at_level(const OffspringLaw& law, double u, int n, double ew2) {
  const double x = u * std::pow(law.mean(), -n);
  double t = x - 0.5 * x * x * ew2;
  int i = 0;
  for (; i < n && t < 0.5; ++i) t = law.complement(t);
  double s = 1.0 - t;
  for (; i < n; ++i) s = law.eval(s);
  return s;
}

}  // namespace detail

/// phi(u) = E exp(-u W).
inline double w_laplace(const OffspringLaw& law, double u, int n_levels = 40) {
  if (!(u >= 0.0)) throw Error(Errc::InvalidArgument, "u must be >= 0");
  if (u == 0.0) return 1.0;
  const double ew2 = w_second_moment(law);
  int n = detail::levels_for(u, law.mean(), n_levels);
  double prev = detail::laplace_at_level(law, u, n - 1, ew2);
  for (int tries = 0; tries < 40; ++tries, ++n) {
    const double cur = detail::laplace_at_level(law, u, n, ew2);
    if (std::abs(cur - prev) < 1e-10) return cur;
    prev = cur;
  }
  throw Error(Errc::NoConvergence, "w_laplace(" + std::to_string(u) + ")");
}

/// Karlin-McGregor diagnostic K(s) = s^alpha Q(phi(s)).
inline double km_function(const OffspringLaw& law, double s) {
  const Classification cls = classify(law);
  detail::require_schroeder(cls);
  if (!(s > 0.0)) throw Error(Errc::InvalidArgument, "s must be positive");
  return std::pow(s, cls.alpha) * q_limit(law, w_laplace(law, s)).value;
}

// ---- Böttcher growth function -------------------------------------------

struct GSeriesEval {
  double s = 0.0;
  double value = 0.0;
  int terms_used = 0;
  double truncation_bound = 0.0;
};

/// g(s) = (1 - p_{j0})^{-1} sum_{j > j0} p_j s^{j - j0}.
inline double boettcher_g(const OffspringLaw& law, double s) {
  const std::size_t j0 = law.min_support();
  const double rest = 1.0 - law.prob(j0);
  if (rest <= 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t j = law.degree(); j > j0; --j) acc = acc * s + law.prob(j);
  return acc * s / rest;
}

/// G(s) = log s + sum_{j>=0} j0^{-(j+1)} [log p_{j0} + log(1 + ((1-p_{j0})/p_{j0}) g(f_j(s)))].
inline GSeriesEval boettcher_G(const OffspringLaw& law, double s, double tol = 1e-12) {
  const Classification cls = classify(law);
  if (!cls.boettcher()) throw Error(Errc::SchroederLaw, "G needs j0 >= 2");
  if (!(s > 0.0 && s <= 1.0)) throw Error(Errc::SOutOfRange, "s = " + std::to_string(s));
  const double j0 = double(cls.j0);
  const double p0 = law.prob(cls.j0);
  const double log_p0 = std::log(p0);
  const double ratio = (1.0 - p0) / p0;

  GSeriesEval out{s, std::log(s), 0, 0.0};
  double x = s;     // f_j(s)
  double w = 1.0 / j0;  // j0^{-(j+1)}
  for (int j = 0; j < 10'000; ++j) {
    out.value += w * (log_p0 + std::log1p(ratio * boettcher_g(law, x)));
    out.terms_used = j + 1;
    // remaining terms are each in [log p_{j0}, 0]
    out.truncation_bound = std::abs(log_p0) * w / (j0 - 1.0);
    if (out.truncation_bound < tol) break;
    x = law.eval(x);
    w /= j0;
  }
  return out;
}

/// j0^{-n} log f_n(s) by log-domain iteration (log-sum-exp of the pgf).
inline double log_pgf_iterate_scaled(const OffspringLaw& law, int n, double s) {
  if (!(s > 0.0 && s <= 1.0)) throw Error(Errc::SOutOfRange, "s = " + std::to_string(s));
  const auto p = law.probs();
  double ell = std::log(s);
  for (int i = 0; i < n; ++i) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < p.size(); ++j)
      if (p[j] > 0.0) top = std::max(top, std::log(p[j]) + double(j) * ell);
    double acc = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j)
      if (p[j] > 0.0) acc += std::exp(std::log(p[j]) + double(j) * ell - top);
    ell = top + std::log(acc);
  }
  return ell / std::pow(double(law.min_support()), n);
}

}  // namespace gwlimits
