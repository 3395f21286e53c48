#pragma once

// Cramér transforms and the conditional large-deviation rate functions.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gwlimits/asymptotics.hpp"
#include "gwlimits/error.hpp"
#include "gwlimits/offspring.hpp"

namespace gwlimits {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Growth { Linear, Sublinear, Superlinear };

constexpr std::string_view to_string(Growth g) {
  switch (g) {
    case Growth::Linear: return "linear";
    case Growth::Sublinear: return "sublinear";
    case Growth::Superlinear: return "superlinear";
  }
  return "unknown";
}

/// Conditioning regime of Z_{n-k} >= v_{n-k}. Always caller-supplied: the
/// limit of v_n/n need not exist, so it is never inferred from data.
struct RateRegime {
  int k = 0;
  Growth growth = Growth::Linear;
  double b = 0.0;            // Schröder linear coefficient
  double B = 0.0;            // -log gamma (alpha <= 1) or log m (alpha > 1)
  double boettcher_b = 0.0;  // lim j0^n / v_n in the Böttcher case
};

/// B = -log gamma when alpha <= 1, log m when 1 < alpha < inf.
inline double regime_constant(const Classification& cls) {
  if (cls.boettcher()) throw Error(Errc::BoettcherLaw, "B is defined for alpha < inf");
  return cls.regime == Regime::SchroederSuper ? std::log(cls.m) : -std::log(cls.gamma);
}

inline RateRegime schroeder_regime(const Classification& cls, int k, Growth growth, double b = 0.0) {
  if (k < 0) throw Error(Errc::InvalidArgument, "k must be >= 0");
  if (!(b >= 0.0)) throw Error(Errc::InvalidArgument, "b must be >= 0");
  return {k, growth, b, regime_constant(cls), 0.0};
}

inline RateRegime boettcher_regime(int k, double b) {
  if (k < 0) throw Error(Errc::InvalidArgument, "k must be >= 0");
  if (!(b >= 0.0)) throw Error(Errc::InvalidArgument, "b must be >= 0");
  return {k, Growth::Linear, 0.0, 0.0, b};
}

// ---- cumulant of Z_1 and its conjugate ----------------------------------

namespace detail {

struct Tilted {
  double log_mgf;
  double mean;
  double var;
};

inline Tilted tilt(const OffspringLaw& law, double theta) {
  const auto p = law.probs();
  double top = -kInf;
  for (std::size_t j = 0; j < p.size(); ++j)
    if (p[j] > 0.0) top = std::max(top, std::log(p[j]) + theta * double(j));
  double z = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] == 0.0) continue;
    const double w = std::exp(std::log(p[j]) + theta * double(j) - top);
    z += w;
    s1 += w * double(j);
    s2 += w * double(j) * double(j);
  }
  const double mean = s1 / z;
  return {top + std::log(z), mean, std::max(0.0, s2 / z - mean * mean)};
}

}  // namespace detail

/// Lambda(theta) = log E exp(theta Z_1).
inline double cumulant(const OffspringLaw& law, double theta) { return detail::tilt(law, theta).log_mgf; }

/// Lambda*(x) = sup_theta [theta x - Lambda(theta)]; +inf outside [j0, d].
inline double legendre(const OffspringLaw& law, double x) {
  const double lo_pt = double(law.min_support());
  const double hi_pt = double(law.degree());
  if (x < lo_pt || x > hi_pt) return kInf;
  if (x == lo_pt) return -std::log(law.prob(law.min_support()));
  if (x == hi_pt) return -std::log(law.prob(law.degree()));

  // bracket the root of Lambda'(theta) = x
  double lo = -1.0, hi = 1.0;
  while (detail::tilt(law, lo).mean > x) lo *= 2.0;
  while (detail::tilt(law, hi).mean < x) hi *= 2.0;
  double theta = 0.0;
  for (int it = 0; it < 200; ++it) {
    const detail::Tilted t = detail::tilt(law, theta);
    const double g = t.mean - x;
    if (std::abs(g) < 1e-12 * std::max(1.0, x)) break;
    (g > 0.0 ? hi : lo) = theta;
    double next = t.var > 0.0 ? theta - g / t.var : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-15 * std::max(1.0, std::abs(theta))) break;
    theta = next;
  }
  return std::max(0.0, theta * x - cumulant(law, theta));
}

// ---- cumulant of W and its conjugate ------------------------------------

inline constexpr double kDivergenceGuard = 1e12;

/// Lambda_W(theta) = log E exp(theta W). theta <= 0 through the Laplace
/// transform; theta > 0 through upward Abel iteration chi(m u) = f(chi(u)).
/// Returns +inf when the iteration passes the divergence guard.
inline double w_cumulant(const OffspringLaw& law, double theta) {
  if (theta == 0.0) return 0.0;
  if (theta < 0.0) {
    const double phi = w_laplace(law, -theta);
    return phi > 0.0 ? std::log(phi) : -kInf;
  }
  const double ew2 = w_second_moment(law);
  const int n = detail::levels_for(theta, law.mean(), 40);
  const double x = theta * std::pow(law.mean(), -n);
  double t = x + 0.5 * x * x * ew2;  // chi - 1
  for (int i = 0; i < n; ++i) {
    t = law.excess(t);
    if (!(t <= kDivergenceGuard)) return kInf;
  }
  return std::log1p(t);
}

namespace detail {

/// Maximizes the concave h over theta in a bracket grown from 0 in `dir`.
template <typename H>
double golden_max(H&& h, double dir) {
  constexpr double kLimit = 1e4;
  double a = 0.0, step = 0.25;
  double ha = h(0.0);
  double b = dir * step;
  double hb = h(b);
  if (!(hb > ha)) {
    // maximum lies in [0, b]
    a = 0.0;
  } else {
    double prev = 0.0;
    while (true) {
      step *= 2.0;
      double c = dir * step;
      if (std::abs(c) > kLimit) c = dir * kLimit;
      const double hc = h(c);
      if (!(hc > hb) || std::abs(c) >= kLimit) {
        a = prev;
        b = c;
        break;
      }
      prev = b;
      b = c;
      hb = hc;
    }
  }
  double lo = std::min(a, b), hi = std::max(a, b);
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - r * (hi - lo), d = lo + r * (hi - lo);
  double hc = h(c), hd = h(d);
  for (int it = 0; it < 200 && hi - lo > 1e-10 * std::max(1.0, std::abs(lo)); ++it) {
    if (hc > hd) {
      hi = d;
      d = c;
      hd = hc;
      c = hi - r * (hi - lo);
      hc = h(c);
    } else {
      lo = c;
      c = d;
      hc = hd;
      d = lo + r * (hi - lo);
      hd = h(d);
    }
  }
  return std::max({h(lo), h(hi), hc, hd, 0.0});
}

}  // namespace detail

/// Lambda_W*(x). Beyond the detected divergence abscissa the supremum is
/// taken over finite Lambda_W only, so values there are lower bounds.
inline double w_legendre(const OffspringLaw& law, double x) {
  if (x < 0.0) return kInf;
  if (x == 0.0) {
    const double q = extinction_probability(law);
    return q > 0.0 ? -std::log(q) : kInf;
  }
  auto h = [&](double theta) {
    const double lw = w_cumulant(law, theta);
    return std::isinf(lw) && lw > 0 ? -kInf : theta * x - lw;
  };
  return detail::golden_max(h, x >= 1.0 ? 1.0 : -1.0);
}

// ---- conditional rates --------------------------------------------------

using InnerRate = std::function<double(double)>;

/// -log f_k(exp(-rate)), accurate when rate is small.
inline double neg_log_fk_exp(const OffspringLaw& law, int k, double rate) {
  if (std::isinf(rate)) {
    const double f0 = pgf_iterate(law, k, 0.0);
    return f0 > 0.0 ? -std::log(f0) : kInf;
  }
  double t = -std::expm1(-rate);  // 1 - e^{-I}
  int i = 0;
  for (; i < k && t < 0.5; ++i) t = law.complement(t);
  if (i == k) return -std::log1p(-t);
  double s = 1.0 - t;
  for (; i < k; ++i) s = law.eval(s);
  return s > 0.0 ? -std::log(s) : kInf;
}

/// Schröder conditional rate: -log f_k(e^{-I(x)}) + bB (linear),
/// -log f_k(e^{-I(x)}) (sublinear), B (superlinear).
inline double rate_conditional(const OffspringLaw& law, const Classification& cls, const RateRegime& regime,
                               const InnerRate& inner_rate, double x) {
  detail::require_schroeder(cls);
  switch (regime.growth) {
    case Growth::Superlinear: return regime.B;
    case Growth::Sublinear: return neg_log_fk_exp(law, regime.k, inner_rate(x));
    case Growth::Linear: return neg_log_fk_exp(law, regime.k, inner_rate(x)) + regime.b * regime.B;
  }
  return kInf;
}

inline double rate_conditional_offspring(const OffspringLaw& law, const Classification& cls,
                                         const RateRegime& regime, double x) {
  return rate_conditional(law, cls, regime, [&](double y) { return legendre(law, y); }, x);
}

inline double rate_conditional_w(const OffspringLaw& law, const Classification& cls, const RateRegime& regime,
                                 double x) {
  return rate_conditional(law, cls, regime, [&](double y) { return w_legendre(law, y); }, x);
}

/// Böttcher rate: -b G(f_k(e^{-I(x)})) for b > 0, -log f_k(e^{-I(x)}) for b = 0.
inline double rate_boettcher(const OffspringLaw& law, const Classification& cls, int k, double b,
                             const InnerRate& inner_rate, double x) {
  if (!cls.boettcher()) throw Error(Errc::SchroederLaw, "rate_boettcher needs j0 >= 2");
  const double inner = inner_rate(x);
  if (b == 0.0) return neg_log_fk_exp(law, k, inner);
  if (std::isinf(inner)) return kInf;
  const double s = pgf_iterate(law, k, std::exp(-inner));
  if (s <= 0.0) return kInf;
  if (s == 1.0) return 0.0;
  return -b * boettcher_G(law, s).value;
}

inline double rate_boettcher_offspring(const OffspringLaw& law, const Classification& cls, int k, double b,
                                       double x) {
  return rate_boettcher(law, cls, k, b, [&](double y) { return legendre(law, y); }, x);
}

// ---- path functional ----------------------------------------------------

struct PathPoint {
  double t = 0.0;
  double y = 0.0;
};

/// Integral over [0,1] of the conditional rate of the path slope, for a
/// piecewise-linear path. +inf when path(0) != 0.
inline double path_rate(const OffspringLaw& law, const Classification& cls, const RateRegime& regime,
                        const std::vector<PathPoint>& path) {
  if (path.size() < 2) throw Error(Errc::InvalidArgument, "path needs at least two breakpoints");
  if (path.front().t != 0.0 || std::abs(path.back().t - 1.0) > 1e-12)
    throw Error(Errc::InvalidArgument, "path must span t in [0, 1]");
  if (path.front().y != 0.0) return kInf;
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const double dt = path[i].t - path[i - 1].t;
    if (!(dt > 0.0)) throw Error(Errc::InvalidArgument, "breakpoint times must increase");
    const double slope = (path[i].y - path[i - 1].y) / dt;
    total += dt * rate_conditional_offspring(law, cls, regime, slope);
  }
  return total;
}

// ---- tables -------------------------------------------------------------

enum class RateKind { Offspring, WLimit, Boettcher, Generic };

constexpr std::string_view to_string(RateKind k) {
  switch (k) {
    case RateKind::Offspring: return "offspring";
    case RateKind::WLimit: return "w";
    case RateKind::Boettcher: return "boettcher";
    case RateKind::Generic: return "generic";
  }
  return "unknown";
}

struct RateTable {
  std::vector<double> xs;
  std::vector<double> inner;
  std::vector<double> rates;
  RateRegime regime;
  RateKind kind = RateKind::Offspring;
};

/// Evaluates inner and total rate on a grid. `generic_inner` is used only
/// for RateKind::Generic.
inline RateTable rate_table(const OffspringLaw& law, RateKind kind, const RateRegime& regime,
                            const std::vector<double>& xs, const InnerRate& generic_inner = {}) {
  const Classification cls = classify(law);
  InnerRate inner;
  switch (kind) {
    case RateKind::Offspring:
    case RateKind::Boettcher: inner = [&](double y) { return legendre(law, y); }; break;
    case RateKind::WLimit: inner = [&](double y) { return w_legendre(law, y); }; break;
    case RateKind::Generic:
      if (!generic_inner) throw Error(Errc::InvalidArgument, "generic table needs an inner rate");
      inner = generic_inner;
      break;
  }
  RateTable table{xs, {}, {}, regime, kind};
  for (double x : xs) {
    const double i = inner(x);
    table.inner.push_back(i);
    const InnerRate fixed = [i](double) { return i; };
    table.rates.push_back(kind == RateKind::Boettcher
                              ? rate_boettcher(law, cls, regime.k, regime.boettcher_b, fixed, x)
                              : rate_conditional(law, cls, regime, fixed, x));
  }
  return table;
}

}  // namespace gwlimits
