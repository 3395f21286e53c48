#pragma once

// Finite-support offspring laws and the scalar constants derived from them.

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gwlimits/error.hpp"

namespace gwlimits {

inline constexpr double kInputMassTolerance = 1e-9;
inline constexpr double kDiscSlack = 1e-12;

/// Offspring distribution {p_j}, j = 0..d, with p_d > 0 and mean > 1.
/// Immutable once built; construct through make_law().
class OffspringLaw {
 public:
  std::span<const double> probs() const { return probs_; }
  double prob(std::size_t j) const { return j < probs_.size() ? probs_[j] : 0.0; }
  /// Maximal support point d.
  std::size_t degree() const { return probs_.size() - 1; }
  /// Minimal support point j_0.
  std::size_t min_support() const { return j0_; }
  double mean() const { return mean_; }

  /// Coefficients c_i = f^{(i)}(1)/i!, so that f(1 + t) = sum_i c_i t^i.
  std::span<const double> factorial_moments() const { return fact_; }

  /// Horner evaluation of f with no domain check.
  template <typename T>
  T eval(T s) const {
    T acc = T(probs_.back());
    for (std::size_t j = probs_.size() - 1; j-- > 0;) acc = acc * s + T(probs_[j]);
    return acc;
  }

  template <typename T>
  T eval_derivative(T s) const {
    const std::size_t d = degree();
    T acc = T(double(d) * probs_[d]);
    for (std::size_t j = d - 1; j >= 1; --j) acc = acc * s + T(double(j) * probs_[j]);
    return acc;
  }

  double eval_second_derivative(double s) const {
    double acc = 0.0;
    for (std::size_t j = degree(); j >= 2; --j) acc = acc * s + double(j) * double(j - 1) * probs_[j];
    return acc;
  }

  /// 1 - f(1 - t), accurate for small t > 0.
  double complement(double t) const {
    if (t * double(degree()) <= 0.5) {
      // alternating factorial-moment series, terms shrink by at least t*d
      double acc = 0.0;
      for (std::size_t i = fact_.size() - 1; i >= 1; --i) {
        const double sign = (i % 2 == 1) ? 1.0 : -1.0;
        acc = acc * t + sign * fact_[i];
      }
      return acc * t;
    }
    return 1.0 - eval(1.0 - t);
  }

  /// f(1 + t) - 1 for t >= 0, no cancellation.
  double excess(double t) const {
    double acc = 0.0;
    for (std::size_t i = fact_.size() - 1; i >= 1; --i) acc = acc * t + fact_[i];
    return acc * t;
  }

 private:
  friend OffspringLaw make_law(std::span<const double> masses);
  std::vector<double> probs_;
  std::vector<double> fact_;
  std::size_t j0_ = 0;
  double mean_ = 0.0;
};

/// Validates, strips trailing zeros and renormalizes.
inline OffspringLaw make_law(std::span<const double> masses) {
  std::size_t last = 0;
  bool any_positive = false;
  double sum = 0.0;
  for (std::size_t j = 0; j < masses.size(); ++j) {
    const double p = masses[j];
    if (!(p >= 0.0)) throw Error(Errc::NegativeMass, "mass at index " + std::to_string(j));
    sum += p;
    if (p > 0.0) {
      last = j;
      any_positive = true;
    }
  }
  if (!any_positive) throw Error(Errc::Degenerate, "no positive mass");
  if (std::abs(sum - 1.0) > kInputMassTolerance)
    throw Error(Errc::MassSumOutOfTolerance, "masses sum to " + std::to_string(sum));
  if (last == 0) throw Error(Errc::Degenerate, "all mass at index 0");

  OffspringLaw law;
  law.probs_.assign(masses.begin(), masses.begin() + static_cast<std::ptrdiff_t>(last + 1));
  for (double& p : law.probs_) p /= sum;

  double mean = 0.0;
  for (std::size_t j = 1; j < law.probs_.size(); ++j) mean += double(j) * law.probs_[j];
  if (!(mean > 1.0)) throw Error(Errc::Subcritical, "mean " + std::to_string(mean) + " <= 1");
  law.mean_ = mean;

  law.j0_ = 0;
  while (law.probs_[law.j0_] == 0.0) ++law.j0_;

  const std::size_t d = law.probs_.size() - 1;
  law.fact_.assign(d + 1, 0.0);
  for (std::size_t j = 0; j <= d; ++j) {
    double binom = 1.0;  // C(j, i)
    for (std::size_t i = 0; i <= j; ++i) {
      law.fact_[i] += law.probs_[j] * binom;
      binom = binom * double(j - i) / double(i + 1);
    }
  }
  return law;
}

inline OffspringLaw make_law(std::initializer_list<double> masses) {
  return make_law(std::span<const double>(masses.begin(), masses.size()));
}

namespace detail {
inline void check_disc(double abs_s) {
  if (!(abs_s <= 1.0 + kDiscSlack)) throw Error(Errc::OutsideUnitDisc, "|s| = " + std::to_string(abs_s));
}
}  // namespace detail

inline double pgf(const OffspringLaw& law, double s) {
  detail::check_disc(std::abs(s));
  return law.eval(s);
}

inline std::complex<double> pgf(const OffspringLaw& law, std::complex<double> s) {
  detail::check_disc(std::abs(s));
  return law.eval(s);
}

inline double pgf_derivative(const OffspringLaw& law, double s) {
  detail::check_disc(std::abs(s));
  return law.eval_derivative(s);
}

inline std::complex<double> pgf_derivative(const OffspringLaw& law, std::complex<double> s) {
  detail::check_disc(std::abs(s));
  return law.eval_derivative(s);
}

/// n-th functional iterate f_n(s), with f_0(s) = s.
template <typename T>
T pgf_iterate(const OffspringLaw& law, int n, T s) {
  detail::check_disc(std::abs(s));
  if (n < 0) throw Error(Errc::InvalidArgument, "negative iterate index");
  for (int i = 0; i < n; ++i) s = law.eval(s);
  return s;
}

/// Smallest fixed point of f in [0, 1).
inline double extinction_probability(const OffspringLaw& law) {
  if (law.prob(0) == 0.0) return 0.0;
  double q = 0.0;
  for (long it = 0; it < 100'000'000; ++it) {
    const double next = law.eval(q);
    const double step = next - q;
    q = next;
    if (step < 1e-14) break;
  }
  // iteration from 0 approaches q from below; Newton from there cannot overshoot past q
  const double slope = law.eval_derivative(q) - 1.0;
  if (slope < 0.0) {
    const double polished = q - (law.eval(q) - q) / slope;
    if (polished >= 0.0 && polished < 1.0) q = polished;
  }
  return q;
}

enum class Regime { SchroederSub, SchroederCritical, SchroederSuper, Boettcher };

constexpr std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::SchroederSub: return "SchroederSub";
    case Regime::SchroederCritical: return "SchroederCritical";
    case Regime::SchroederSuper: return "SchroederSuper";
    case Regime::Boettcher: return "Boettcher";
  }
  return "Unknown";
}

struct Classification {
  double m = 0.0;
  double q = 0.0;
  double gamma = 0.0;
  double alpha = 0.0;  // +inf in the Böttcher case
  std::size_t j0 = 0;
  std::optional<double> beta;
  Regime regime = Regime::SchroederSub;

  bool boettcher() const { return regime == Regime::Boettcher; }
};

/// Tolerance on gamma*m - 1 for calling a law critical (alpha = 1).
inline constexpr double kCriticalTolerance = 1e-12;

inline Classification classify(const OffspringLaw& law) {
  Classification c;
  c.m = law.mean();
  c.j0 = law.min_support();
  if (law.prob(0) == 0.0) {
    c.q = 0.0;
    c.gamma = law.prob(1);
  } else {
    c.q = extinction_probability(law);
    c.gamma = law.eval_derivative(c.q);
  }
  if (c.gamma == 0.0) {
    c.alpha = std::numeric_limits<double>::infinity();
    c.beta = std::log(double(c.j0)) / std::log(c.m);
    c.regime = Regime::Boettcher;
    return c;
  }
  c.alpha = -std::log(c.gamma) / std::log(c.m);
  const double gm = c.gamma * c.m;
  if (std::abs(gm - 1.0) <= kCriticalTolerance)
    c.regime = Regime::SchroederCritical;
  else
    c.regime = gm > 1.0 ? Regime::SchroederSub : Regime::SchroederSuper;
  return c;
}

/// Parses the sparse `index:mass,index:mass` form, e.g. "0:0.25,2:0.75".
inline OffspringLaw parse_law_spec(std::string_view spec) {
  std::vector<double> masses;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const std::size_t comma = std::min(spec.find(',', pos), spec.size());
    const std::string item(spec.substr(pos, comma - pos));
    pos = comma + 1;
    if (item.empty()) {
      if (comma >= spec.size()) break;
      continue;
    }
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos) throw Error(Errc::ParseError, "expected index:mass, got '" + item + "'");
    std::size_t used_idx = 0, used_mass = 0;
    unsigned long idx = 0;
    double mass = 0.0;
    try {
      idx = std::stoul(item.substr(0, colon), &used_idx);
      mass = std::stod(item.substr(colon + 1), &used_mass);
    } catch (const std::exception&) {
      throw Error(Errc::ParseError, "bad pair '" + item + "'");
    }
    if (used_idx != colon || used_mass != item.size() - colon - 1)
      throw Error(Errc::ParseError, "bad pair '" + item + "'");
    if (idx > 10'000'000) throw Error(Errc::ParseError, "index too large in '" + item + "'");
    if (masses.size() <= idx) masses.resize(idx + 1, 0.0);
    masses[idx] += mass;
  }
  if (masses.empty()) throw Error(Errc::ParseError, "empty law specification");
  return make_law(masses);
}

}  // namespace gwlimits
