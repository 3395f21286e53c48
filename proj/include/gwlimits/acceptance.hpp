#pragma once

// Acceptance criteria for the library, shared by the `verify` command and
// the acceptance test binary. Each criterion reports pass/fail, a short
// detail line and its runtime against a fixed budget.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gwlimits/asymptotics.hpp"
#include "gwlimits/gen_dist.hpp"
#include "gwlimits/ldp.hpp"
#include "gwlimits/montecarlo.hpp"
#include "gwlimits/offspring.hpp"
#include "gwlimits/reports.hpp"

namespace gwlimits::acceptance {

struct NamedLaw {
  std::string name;
  OffspringLaw law;
};

inline OffspringLaw l_sub() { return make_law({0.0, 0.6, 0.0, 0.4}); }
inline OffspringLaw l_crit() { return make_law({0.0, 0.5, 0.0, 0.5}); }
inline OffspringLaw l_sup() { return make_law({0.0, 0.5, 0.5}); }
inline OffspringLaw l_bot() { return make_law({0.0, 0.0, 0.5, 0.5}); }
inline OffspringLaw l_q() { return make_law({0.25, 0.0, 0.75}); }

inline std::vector<NamedLaw> all_laws() {
  return {{"L_sub", l_sub()}, {"L_crit", l_crit()}, {"L_sup", l_sup()}, {"L_bot", l_bot()}, {"L_q", l_q()}};
}

struct Options {
  bool fast = false;
  unsigned workers = 1;
  std::uint64_t seed = 20240611;
  /// Local-limit scale under test; replaced only by fault-injection tests.
  ScaleFunction a_scale_fn = a_scale;
};

struct CriterionResult {
  int id = 0;
  std::string key;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

struct Criterion {
  int id;
  std::string key;
  std::string title;
  double budget_seconds;
  std::function<bool(const Options&, std::ostringstream&)> run;
};

namespace detail {

inline bool band_ok(const std::vector<double>& r, double max_ratio, std::ostringstream& log) {
  double lo = r.front(), hi = r.front();
  for (double x : r) lo = std::min(lo, x), hi = std::max(hi, x);
  const bool ok = lo > 0.0 && hi / lo < max_ratio;
  log << "[" << lo << "," << hi << "]" << (ok ? "" : "!") << " ";
  return ok;
}

inline std::size_t replicates(const Options& o, std::size_t full) { return o.fast ? full / 10 : full; }

}  // namespace detail

// 1. scalar constants
inline bool scalar_constants(const Options&, std::ostringstream& log) {
  bool ok = true;
  const Classification cq = classify(l_q());
  ok &= std::abs(cq.q - 1.0 / 3.0) < 1e-12 && std::abs(cq.gamma - 0.5) < 1e-12;
  log << "L_q q=" << cq.q << " gamma=" << cq.gamma << "; ";
  for (const auto& [name, law] : all_laws()) {
    const Classification c = classify(law);
    if (c.boettcher()) continue;
    const double err = std::abs(c.gamma - std::pow(c.m, -c.alpha));
    ok &= err < 1e-12;
    log << name << " |gamma-m^-alpha|=" << err << " ";
  }
  return ok;
}

// 2. composition vs DFT
inline bool pmf_cross_validation(const Options&, std::ostringstream& log) {
  bool ok = true;
  const std::size_t cap = std::size_t{1} << 16;
  for (const auto& [name, law] : all_laws()) {
    double worst = 0.0;
    for (int n : {4, 8, 12}) {
      const GenerationPmf a = zn_pmf_compose(law, n, cap);
      const GenerationPmf b = zn_pmf_dft(law, n, dft_grid_for(law, n, cap));
      for (std::size_t k = 0; k <= cap; ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
    }
    ok &= worst <= 1e-10;
    log << name << " max|diff|=" << worst << " ";
  }
  return ok;
}

// 3. hand-enumerated pmf
inline bool enumerated_pmf(const Options&, std::ostringstream& log) {
  const GenerationPmf p = zn_pmf_compose(l_sup(), 2, 4);
  const double expect[] = {0.0, 0.25, 0.375, 0.25, 0.125};
  double worst = 0.0;
  for (std::size_t k = 0; k < 5; ++k) worst = std::max(worst, std::abs(p[k] - expect[k]));
  log << "max|diff|=" << worst;
  return worst <= 1e-15;
}

// 4. local limit ratios
inline bool local_limit(const Options& opt, std::ostringstream& log) {
  bool ok = true;
  const std::vector<NamedLaw> laws = {
      {"L_sub", l_sub()}, {"L_crit", l_crit()}, {"L_sup", l_sup()}, {"L_bot", l_bot()}};
  for (const auto& [name, law] : laws) {
    const Classification cls = classify(law);
    std::vector<GenerationPmf> pmfs;
    TruncSeries series = TruncSeries::identity(kMaxDefaultCap);
    for (int n = 1; n <= 14; ++n) {
      series = compose_poly(law, series, kMaxDefaultCap);
      if (n >= 8) pmfs.push_back(finish_pmf(n, series.coeffs, PmfMethod::Composition));
    }
    for (double r : {0.5, 0.8}) {
      std::vector<double> ratios;
      for (const auto& pmf : pmfs) {
        const std::size_t v = lattice_snap(law, pmf.n, VRule{VRule::Kind::MPower, r}.raw(cls.m, pmf.n));
        ratios.push_back(pmf[v] / opt.a_scale_fn(cls, pmf.n, double(v)));
      }
      log << name << " m^(" << r << "n) ";
      ok &= detail::band_ok(ratios, 4.0, log);
    }
    if (name == "L_crit") {
      for (int k : {2, 4}) {
        double prev = 0.0, change = 1.0;
        for (const auto& pmf : pmfs) {
          const std::size_t v = lattice_snap(law, pmf.n, std::size_t{1} << (pmf.n - k));
          const double ratio = pmf[v] / opt.a_scale_fn(cls, pmf.n, double(v));
          if (prev > 0.0) change = std::abs(ratio / prev - 1.0);
          prev = ratio;
        }
        const bool conv = change < 0.10;
        ok &= conv;
        log << "L_crit 2^(n-" << k << ") change@14=" << change << (conv ? " " : "! ");
      }
    }
  }
  return ok;
}

// 5. uniform sup bounds
inline bool sup_bounds(const Options&, std::ostringstream& log) {
  bool ok = true;
  for (const auto& [name, law] : all_laws()) {
    const Classification cls = classify(law);
    for (double r : {0.5, 0.8}) {
      std::vector<double> ratios;
      for (int n = 8; n <= 12; ++n) {
        const GenerationPmf pmf = zn_pmf_compose(law, n, kMaxDefaultCap);
        const std::size_t v = lattice_snap(law, n, VRule{VRule::Kind::MPower, r}.raw(cls.m, n));
        ratios.push_back(sup_tail_local(cls, pmf, v).value / sup_scale(cls, n, double(v)));
      }
      log << name << " m^(" << r << "n) ";
      ok &= detail::band_ok(ratios, 4.0, log);
    }
  }
  return ok;
}

// 6. Schröder function
inline bool q_machinery(const Options&, std::ostringstream& log) {
  bool ok = true;
  for (const auto& [name, law] : std::vector<NamedLaw>{{"L_sub", l_sub()}, {"L_sup", l_sup()}, {"L_q", l_q()}}) {
    const Classification cls = classify(law);
    double worst = 0.0;
    for (int i = 0; i <= 95; ++i) {
      const double s = 0.01 * i;
      worst = std::max(worst, std::abs(q_limit(law, law.eval(s)).value - cls.gamma * q_limit(law, s).value));
    }
    ok &= worst < 1e-8;
    log << name << " FE residual=" << worst << " ";
  }
  for (const auto& [name, law] : std::vector<NamedLaw>{{"L_sub", l_sub()}, {"L_crit", l_crit()}, {"L_sup", l_sup()}}) {
    const QCoefficients qc = q_coefficients(law, 60, 40);
    ok &= qc.values[0] == 1.0;
    log << name << " q_1=" << qc.values[0] << " ";
  }
  const QCoefficients qc = q_coefficients(l_sup(), 60, 40);
  double series = 0.0, pw = 1.0;
  for (double qj : qc.values) pw *= 0.5, series += qj * pw;
  const double diff = std::abs(series - q_limit(l_sup(), 0.5).value);
  ok &= diff < 1e-6;
  log << "L_sup |sum q_j 2^-j - Q(0.5)|=" << diff;
  return ok;
}

// 7. W transforms
inline bool w_transforms(const Options&, std::ostringstream& log) {
  bool ok = true;
  for (const auto& [name, law] : all_laws()) {
    double worst = 0.0;
    for (double u : {0.5, 1.0, 2.0})
      worst = std::max(worst, std::abs(w_laplace(law, law.mean() * u) - law.eval(w_laplace(law, u))));
    ok &= worst < 1e-8;
    log << name << " Abel=" << worst << " ";
  }
  const double h = 1e-3;
  const OffspringLaw law = l_sup();
  const double second = (w_cumulant(law, h) - 2.0 * w_cumulant(law, 0.0) + w_cumulant(law, -h)) / (h * h);
  const double m = law.mean();
  const double sigma2 = law.eval_second_derivative(1.0) + m - m * m;
  const double expect = sigma2 / (m * m - m);
  ok &= std::abs(second - expect) < 1e-4;
  log << "L_sup Lambda_W''(0)=" << second << " (expect " << expect << ")";
  return ok;
}

// 8. Böttcher G
inline bool boettcher(const Options&, std::ostringstream& log) {
  bool ok = true;
  const OffspringLaw law = l_bot();
  const double j0 = double(law.min_support());
  for (double s : {0.3, 0.6, 0.9}) {
    const double diff = std::abs(log_pgf_iterate_scaled(law, 20, s) - boettcher_G(law, s).value);
    ok &= diff < 1e-6;
    log << "G(" << s << ") diff=" << diff << " ";
  }
  for (double beta : {0.3, 0.6, 0.9}) {
    // log f_n(beta) - j0^n log beta, compared with its value at n = 3
    auto excess = [&](int n) {
      return log_pgf_iterate_scaled(law, n, beta) * std::pow(j0, n) - std::pow(j0, n) * std::log(beta);
    };
    const double log_c = excess(3);
    bool holds = true;
    for (int n = 4; n <= 10; ++n) holds &= excess(n) <= log_c + 1e-9 * std::abs(log_c);
    ok &= holds;
    log << "decay beta=" << beta << (holds ? " ok " : " violated ");
  }
  return ok;
}

// 9. Legendre transform
inline bool legendre_check(const Options& opt, std::ostringstream& log) {
  bool ok = true;
  std::mt19937_64 rng(opt.seed);
  for (const auto& [name, law] : all_laws()) {
    const double j0 = double(law.min_support()), d = double(law.degree());
    // brute-force oracle: Lambda tabulated once on theta in [-20, 20], step 1e-4
    const int steps = 400000;
    std::vector<double> theta(steps + 1), lam(steps + 1);
    for (int i = 0; i <= steps; ++i) {
      theta[i] = -20.0 + 1e-4 * i;
      lam[i] = cumulant(law, theta[i]);
    }
    std::uniform_real_distribution<double> pick(j0 + 0.02 * (d - j0), d - 0.02 * (d - j0));
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const double x = pick(rng);
      double best = -kInf;
      for (int i = 0; i <= steps; ++i) best = std::max(best, theta[i] * x - lam[i]);
      worst = std::max(worst, std::abs(legendre(law, x) - best));
    }
    const double at_mean = std::abs(legendre(law, law.mean()));
    const bool edges = legendre(law, j0) == -std::log(law.prob(law.min_support())) &&
                       legendre(law, d) == -std::log(law.prob(law.degree()));
    ok &= worst < 1e-6 && at_mean < 1e-10 && edges;
    log << name << " grid=" << worst << " L*(m)=" << at_mean << (edges ? " " : " edges! ");
  }
  return ok;
}

// 10. exact conditional Laplace transform against its limit
inline bool eq133(const Options&, std::ostringstream& log) {
  bool ok = true;
  const int k = 1;
  const double b = 0.5;
  for (const auto& [name, law] : std::vector<NamedLaw>{{"L_sub", l_sub()}, {"L_crit", l_crit()}, {"L_sup", l_sup()}}) {
    const Classification cls = classify(law);
    const double B = regime_constant(cls);
    for (double theta : {0.5, 1.0, 2.0}) {
      const double target = std::log(pgf_iterate(law, k, std::exp(-theta))) - b * B;
      std::vector<double> errs;
      for (int n : {10, 12, 14}) {
        const auto v = static_cast<std::size_t>(std::round(b * n));
        errs.push_back(std::abs(std::log(conditional_laplace(law, n, k, v, theta)) / double(v) - target));
      }
      const bool good = errs[0] > errs[1] && errs[1] > errs[2] && errs[2] < 0.15;
      ok &= good;
      log << name << " th=" << theta << " err=" << errs[0] << "," << errs[1] << "," << errs[2] << (good ? " " : "! ");
    }
  }
  return ok;
}

// 11. Monte Carlo slope of the ratio tail
inline bool rn_slope(const Options& opt, std::ostringstream& log) {
  const OffspringLaw law = l_sup();
  SimConfig cfg;
  cfg.seed = opt.seed;
  cfg.workers = opt.workers;
  cfg.replicates = detail::replicates(opt, 1'000'000);
  std::vector<double> ns, ys;
  bool agree = true;
  for (int n = 1; n <= 12; ++n) {
    cfg.n = n;
    const McEstimate e = estimate_rn_tail(law, n, 1.8, cfg);
    if (n <= 6) {
      const double exact = exact_rn_tail(law, n, 1.8);
      const double z = std::abs(e.value - exact) / e.std_error;
      agree &= z <= 4.0;
      log << "n=" << n << " z=" << z << (z <= 4.0 ? " " : "! ");
    }
    if (n >= 6) {
      ns.push_back(n);
      ys.push_back(-std::log(e.value));
    }
  }
  const double slope = least_squares_slope(ns, ys);
  const double rel = std::abs(slope / std::log(2.0) - 1.0);
  log << "slope=" << slope << " rel=" << rel;
  return agree && rel <= 0.25;
}

// 12. conditional sampling against exact law and rate
inline bool conditional_ldp(const Options& opt, std::ostringstream& log) {
  const OffspringLaw law = l_sup();
  const Classification cls = classify(law);
  SimConfig cfg;
  cfg.seed = opt.seed;
  cfg.workers = opt.workers;
  cfg.replicates = detail::replicates(opt, 1'000'000);

  cfg.n = 8;
  const ConditionalEstimate sampled = estimate_conditional_ldp(law, 8, 2, 4, 1.8, cfg);
  const GenerationPmf exact = conditional_pmf(law, 8, 2, 4, 256);
  const double tv = total_variation(sampled.zn_pmf, exact.coeffs);
  log << "TV=" << tv << (tv < 0.05 ? " " : "! ");

  const int n = 12, k = 2;
  const double b = 0.5;
  const auto v = static_cast<std::uint64_t>(std::round(b * n));
  cfg.n = n;
  const ConditionalEstimate tail = estimate_conditional_ldp(law, n, k, v, 1.8, cfg);
  const double empirical = -std::log(tail.estimate.value) / double(v);
  const double rate = rate_conditional_offspring(law, cls, schroeder_regime(cls, k, Growth::Linear, b), 1.8);
  const double ratio = empirical / rate;
  const bool within = ratio >= 0.5 && ratio <= 2.0;
  log << "-(1/v)log P=" << empirical << " I1=" << rate << " ratio=" << ratio << (within ? "" : "!");
  return tv < 0.05 && within;
}

// 13. determinism across worker counts
inline bool determinism(const Options& opt, std::ostringstream& log) {
  const OffspringLaw law = l_sup();
  bool ok = true;
  for (SimTask task : {SimTask::RnTail, SimTask::CondLdp, SimTask::Ak, SimTask::W, SimTask::Path}) {
    SimulateRequest req;
    req.task = task;
    req.config.seed = opt.seed;
    req.config.n = 8;
    req.config.replicates = task == SimTask::Path ? 20 : detail::replicates(opt, 200'000);
    req.k = 2;
    req.v = 4;
    req.a = 1.8;
    std::string first;
    bool same = true;
    for (unsigned w : {1u, 4u, 8u}) {
      req.config.workers = w;
      const std::string dump = simulate_report(law, req).dump();
      if (first.empty()) first = dump;
      else same &= dump == first;
    }
    ok &= same;
    log << to_string(task) << (same ? " same " : " DIFFERS ");
  }
  return ok;
}

// 14. zeros and monotonicity of the rate functions
inline bool rate_shapes(const Options&, std::ostringstream& log) {
  bool ok = true;
  const int k = 1;
  for (const auto& [name, law] : std::vector<NamedLaw>{{"L_sub", l_sub()}, {"L_crit", l_crit()}, {"L_sup", l_sup()}}) {
    const Classification cls = classify(law);
    const RateRegime regime = schroeder_regime(cls, k, Growth::Linear, 0.0);
    const double zero1 = rate_conditional_offspring(law, cls, regime, cls.m);
    const double zero2 = rate_conditional_w(law, cls, regime, 1.0);
    bool mono1 = true, mono2 = true;
    double prev = zero1;
    for (double x = cls.m; x <= double(law.degree()); x += 0.01) {
      const double r = rate_conditional_offspring(law, cls, regime, x);
      mono1 &= r >= prev - 1e-10;
      prev = r;
    }
    prev = zero2;
    for (double x = 1.0; x <= 3.0; x += 0.05) {
      const double r = rate_conditional_w(law, cls, regime, x);
      mono2 &= r >= prev - 1e-10;
      prev = r;
    }
    const bool good = std::abs(zero1) < 1e-10 && std::abs(zero2) < 1e-10 && mono1 && mono2;
    ok &= good;
    log << name << " I1(m)=" << zero1 << " I2(1)=" << zero2 << (good ? " " : "! ");
  }
  const OffspringLaw law = l_bot();
  const Classification cls = classify(law);
  const double zero3 = rate_boettcher_offspring(law, cls, k, 1.0, cls.m);
  bool mono3 = true;
  double prev = zero3;
  for (double x = cls.m; x <= double(law.degree()); x += 0.01) {
    const double r = rate_boettcher_offspring(law, cls, k, 1.0, x);
    mono3 &= r >= prev - 1e-10;
    prev = r;
  }
  const bool good = std::abs(zero3) < 1e-10 && mono3;
  log << "L_bot I3(m)=" << zero3 << (good ? "" : "!");
  return ok && good;
}

inline std::vector<Criterion> criteria() {
  return {
      {1, "constants", "Scalar constants", 0.001, scalar_constants},
      {2, "pmf-cross", "PMF composition vs DFT", 10.0, pmf_cross_validation},
      {3, "pmf-enum", "Hand-enumerated pmf", 0.001, enumerated_pmf},
      {4, "locallimit", "Local limit ratio bands", 30.0, local_limit},
      {5, "supbound", "Uniform sup bounds", 30.0, sup_bounds},
      {6, "qfun", "Schroeder function machinery", 5.0, q_machinery},
      {7, "wtransform", "W Laplace / cumulant", 1.0, w_transforms},
      {8, "boettcher", "Boettcher G and pgf decay", 1.0, boettcher},
      {9, "legendre", "Legendre transform", 1.0, legendre_check},
      {10, "eq133", "Conditional Laplace limit", 60.0, eq133},
      {11, "rn-slope", "Ratio-tail Monte Carlo slope", 300.0, rn_slope},
      {12, "cond-ldp", "Conditional sampling", 300.0, conditional_ldp},
      {13, "determinism", "Worker-count determinism", 120.0, determinism},
      {14, "rate-shape", "Rate zeros and shape", 1.0, rate_shapes},
  };
}

/// Runs one criterion; the runtime budget is part of the verdict.
inline CriterionResult run_criterion(const Criterion& c, const Options& opt) {
  std::ostringstream log;
  log.precision(6);
  CriterionResult r{c.id, c.key, c.title, false, "", 0.0, c.budget_seconds};
  const auto start = std::chrono::steady_clock::now();
  bool pass = false;
  try {
    pass = c.run(opt, log);
  } catch (const std::exception& e) {
    log << " exception: " << e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (r.seconds > c.budget_seconds) log << " over budget";
  r.pass = pass && r.seconds <= c.budget_seconds;
  r.detail = log.str();
  return r;
}

/// Matches by id ("4"), key ("locallimit") or is empty for all.
inline bool selected(const Criterion& c, const std::vector<std::string>& only) {
  if (only.empty()) return true;
  for (const auto& s : only)
    if (s == c.key || s == std::to_string(c.id)) return true;
  return false;
}

inline std::string format_line(const CriterionResult& r) {
  std::ostringstream out;
  out << (r.pass ? "PASS" : "FAIL") << "  [" << r.id << "] " << r.title << " (" << r.key << ", "
      << std::fixed;
  out.precision(3);
  out << r.seconds << "s / " << r.budget_seconds << "s): " << r.detail;
  return out.str();
}

}  // namespace gwlimits::acceptance
