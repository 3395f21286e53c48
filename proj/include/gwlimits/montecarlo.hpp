#pragma once

// Seeded simulation of Galton-Watson trajectories and the empirical
// estimators built on it.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "gwlimits/error.hpp"
#include "gwlimits/gen_dist.hpp"
#include "gwlimits/offspring.hpp"

namespace gwlimits {

// ---- random streams -----------------------------------------------------

/// SplitMix64 (Steele, Lea, Flood). Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return double((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Independent stream for one replicate; depends only on (seed, replicate).
inline SplitMix64 replicate_stream(std::uint64_t seed, std::uint64_t replicate) {
  SplitMix64 mixer(seed ^ (0xD1B54A32D192ED03ULL * (replicate + 1)));
  return SplitMix64(mixer());
}

/// Walker/Vose alias table over 0..d.
class AliasTable {
 public:
  explicit AliasTable(std::span<const double> probs) : prob_(probs.size()), alias_(probs.size()) {
    const std::size_t n = probs.size();
    std::vector<double> scaled(n);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = probs[i] * double(n);
      (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      const std::size_t s = small.back(), l = large.back();
      small.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (std::size_t i : large) prob_[i] = 1.0, alias_[i] = i;
    for (std::size_t i : small) prob_[i] = 1.0, alias_[i] = i;
  }

  std::size_t sample(SplitMix64& rng) const {
    const double u = rng.uniform() * double(prob_.size());
    const auto i = static_cast<std::size_t>(u);
    return (u - double(i)) < prob_[i] ? i : alias_[i];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

// ---- configuration and results ------------------------------------------

struct SimConfig {
  std::uint64_t seed = 42;
  std::size_t replicates = 1000;
  int n = 8;
  std::uint64_t population_cap = 10'000'000;
  unsigned workers = 1;
};

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::uint64_t replicates = 0;
  std::uint64_t discarded_cap = 0;
  double acceptance = 1.0;
};

inline McEstimate binomial_estimate(std::uint64_t hits, std::uint64_t trials, const SimConfig& cfg) {
  McEstimate e;
  e.hits = hits;
  e.trials = trials;
  e.seed = cfg.seed;
  e.replicates = cfg.replicates;
  if (trials > 0) {
    e.value = double(hits) / double(trials);
    e.std_error = std::sqrt(e.value * (1.0 - e.value) / double(trials));
  }
  return e;
}

// ---- parallel driver ----------------------------------------------------

/// Runs body(replicate) for every replicate and returns results in
/// replicate order. Output does not depend on the worker count.
template <typename Result, typename Body>
std::vector<Result> run_replicates(std::size_t replicates, unsigned workers, Body&& body) {
  std::vector<Result> out(replicates);
  constexpr std::size_t kChunk = 512;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    while (true) {
      const std::size_t start = next.fetch_add(kChunk);
      if (start >= replicates) return;
      const std::size_t stop = std::min(replicates, start + kChunk);
      for (std::size_t r = start; r < stop; ++r) out[r] = body(r);
    }
  };
  const unsigned count = std::max(1u, workers);
  if (count == 1) {
    work();
    return out;
  }
  std::vector<std::jthread> pool;
  pool.reserve(count);
  for (unsigned i = 0; i < count; ++i) pool.emplace_back(work);
  pool.clear();
  return out;
}

// ---- trajectories -------------------------------------------------------

namespace detail {

/// Next generation size, or nullopt when it would exceed the cap.
inline std::optional<std::uint64_t> next_generation(std::uint64_t z, const AliasTable& alias, SplitMix64& rng,
                                                    std::uint64_t cap) {
  std::uint64_t total = 0;
  for (std::uint64_t i = 0; i < z; ++i) {
    total += alias.sample(rng);
    if (total > cap) return std::nullopt;
  }
  return total;
}

/// Advances `z` through `gens` generations; nullopt on cap overflow.
inline std::optional<std::uint64_t> advance(std::uint64_t z, int gens, const AliasTable& alias, SplitMix64& rng,
                                            std::uint64_t cap) {
  for (int g = 0; g < gens && z > 0; ++g) {
    const auto next = next_generation(z, alias, rng, cap);
    if (!next) return std::nullopt;
    z = *next;
  }
  return z;
}

}  // namespace detail

/// Z_0..Z_n of one trajectory. Throws CapExceeded when a generation
/// exceeds `population_cap`.
inline std::vector<std::uint64_t> simulate_trajectory(const OffspringLaw& law, int n, SplitMix64& rng,
                                                      std::uint64_t population_cap = 10'000'000) {
  const AliasTable alias(law.probs());
  std::vector<std::uint64_t> path{1};
  for (int g = 0; g < n; ++g) {
    const auto next = detail::next_generation(path.back(), alias, rng, population_cap);
    if (!next) throw Error(Errc::CapExceeded, "generation " + std::to_string(g + 1) + " exceeds cap");
    path.push_back(*next);
  }
  return path;
}

namespace detail {

struct RnOutcome {
  std::uint8_t status = 0;  // 0 extinct by n, 1 survived, 2 capped
  bool hit = false;
};

inline bool exceeds(std::uint64_t next, std::uint64_t z, double a) { return double(next) > a * double(z); }

}  // namespace detail

/// Fraction of trajectories surviving to n with Z_{n+1}/Z_n > a.
inline McEstimate estimate_rn_tail(const OffspringLaw& law, int n, double a, const SimConfig& cfg) {
  const AliasTable alias(law.probs());
  const auto results = run_replicates<detail::RnOutcome>(cfg.replicates, cfg.workers, [&](std::size_t r) {
    SplitMix64 rng = replicate_stream(cfg.seed, r);
    const auto zn = detail::advance(1, n, alias, rng, cfg.population_cap);
    if (!zn) return detail::RnOutcome{2, false};
    if (*zn == 0) return detail::RnOutcome{0, false};
    const auto next = detail::next_generation(*zn, alias, rng, cfg.population_cap);
    if (!next) return detail::RnOutcome{2, false};
    return detail::RnOutcome{1, detail::exceeds(*next, *zn, a)};
  });
  std::uint64_t hits = 0, trials = 0, capped = 0;
  for (const auto& o : results) {
    if (o.status == 2) ++capped;
    if (o.status == 1) ++trials, hits += o.hit ? 1 : 0;
  }
  if (trials == 0) throw Error(Errc::NoSurvivors, "no surviving trajectories");
  McEstimate e = binomial_estimate(hits, trials, cfg);
  e.discarded_cap = capped;
  return e;
}

/// Exact P(R_n > a | Z_n > 0) = sum_j P(Z_n = j) P(S_j > a j) / P(Z_n > 0),
/// with S_j the j-fold offspring sum built by running convolution.
inline double exact_rn_tail(const OffspringLaw& law, int n, double a, std::size_t max_cap = 4096) {
  const double support = std::pow(double(law.degree()), n);
  const std::size_t cap = support < double(max_cap) ? static_cast<std::size_t>(support) : max_cap;
  const GenerationPmf pmf = zn_pmf_compose(law, n, std::max<std::size_t>(cap, 1));
  if (pmf.tail_mass > 1e-12) throw Error(Errc::CapTooSmall, "Z_n mass beyond cap " + std::to_string(cap));
  const auto p = law.probs();
  const double survive = 1.0 - pmf[0];
  if (survive <= 0.0) throw Error(Errc::NoSurvivors, "P(Z_n > 0) = 0");
  std::vector<double> sum_pmf{1.0};  // law of S_j
  double total = 0.0;
  for (std::size_t j = 1; j <= pmf.cap(); ++j) {
    std::vector<double> next(sum_pmf.size() + p.size() - 1, 0.0);
    for (std::size_t s = 0; s < sum_pmf.size(); ++s) {
      if (sum_pmf[s] == 0.0) continue;
      for (std::size_t i = 0; i < p.size(); ++i) next[s + i] += sum_pmf[s] * p[i];
    }
    sum_pmf = std::move(next);
    if (pmf.coeffs[j] == 0.0) continue;
    double tail = 0.0;
    for (std::size_t s = sum_pmf.size(); s-- > 0;) {
      if (!detail::exceeds(s, j, a)) break;
      tail += sum_pmf[s];
    }
    total += pmf.coeffs[j] * tail;
  }
  return total / survive;
}

// ---- conditional sampling -----------------------------------------------

struct ConditionalEstimate {
  McEstimate estimate;       // P(R_n > a | Z_{n-k} >= v)
  std::vector<double> zn_pmf;  // empirical law of Z_n given Z_{n-k} >= v
  std::uint64_t accepted = 0;
};

/// Rejection sampler for Z_{n-k} >= v: simulate to n-k, keep accepted
/// trajectories, continue to n+1.
inline ConditionalEstimate estimate_conditional_ldp(const OffspringLaw& law, int n, int k, std::uint64_t v, double a,
                                                    const SimConfig& cfg) {
  if (!(n > k && k >= 0)) throw Error(Errc::InvalidArgument, "need n > k >= 0");
  const AliasTable alias(law.probs());
  struct Outcome {
    std::uint8_t status = 0;  // 0 rejected, 1 accepted, 2 capped
    bool hit = false;
    std::uint64_t zn = 0;
  };
  const auto results = run_replicates<Outcome>(cfg.replicates, cfg.workers, [&](std::size_t r) {
    SplitMix64 rng = replicate_stream(cfg.seed, r);
    const auto pre = detail::advance(1, n - k, alias, rng, cfg.population_cap);
    if (!pre) return Outcome{2, false, 0};
    if (*pre < v) return Outcome{0, false, 0};
    const auto zn = detail::advance(*pre, k, alias, rng, cfg.population_cap);
    if (!zn) return Outcome{2, false, 0};
    if (*zn == 0) return Outcome{1, false, 0};
    const auto next = detail::next_generation(*zn, alias, rng, cfg.population_cap);
    if (!next) return Outcome{2, false, 0};
    return Outcome{1, detail::exceeds(*next, *zn, a), *zn};
  });

  ConditionalEstimate out;
  std::uint64_t hits = 0, trials = 0, capped = 0;
  std::uint64_t max_zn = 0;
  for (const auto& o : results)
    if (o.status == 1) max_zn = std::max(max_zn, o.zn);
  std::vector<double> counts(max_zn + 1, 0.0);
  for (const auto& o : results) {
    if (o.status == 2) ++capped;
    if (o.status != 1) continue;
    ++out.accepted;
    counts[o.zn] += 1.0;
    if (o.zn > 0) ++trials, hits += o.hit ? 1 : 0;
  }
  const double acceptance = double(out.accepted) / double(std::max<std::size_t>(cfg.replicates, 1));
  if (acceptance < 1e-4)
    throw Error(Errc::AcceptanceTooLow, "acceptance " + std::to_string(acceptance) + " < 1e-4; lower v");
  out.estimate = binomial_estimate(hits, trials, cfg);
  out.estimate.discarded_cap = capped;
  out.estimate.acceptance = acceptance;
  for (double& c : counts) c /= double(out.accepted);
  out.zn_pmf = std::move(counts);
  return out;
}

// ---- conditional law of Z_n given a large ratio -------------------------

struct Histogram {
  std::vector<double> pmf;  // indexed by value
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
  std::uint64_t discarded_cap = 0;
};

/// Empirical law of Z_n among surviving trajectories with R_n >= a.
inline Histogram empirical_ak(const OffspringLaw& law, int n, double a, const SimConfig& cfg) {
  const AliasTable alias(law.probs());
  struct Outcome {
    std::uint8_t status = 0;
    bool hit = false;
    std::uint64_t zn = 0;
  };
  const auto results = run_replicates<Outcome>(cfg.replicates, cfg.workers, [&](std::size_t r) {
    SplitMix64 rng = replicate_stream(cfg.seed, r);
    const auto zn = detail::advance(1, n, alias, rng, cfg.population_cap);
    if (!zn) return Outcome{2, false, 0};
    if (*zn == 0) return Outcome{0, false, 0};
    const auto next = detail::next_generation(*zn, alias, rng, cfg.population_cap);
    if (!next) return Outcome{2, false, 0};
    return Outcome{1, double(*next) >= a * double(*zn), *zn};
  });
  Histogram h;
  std::uint64_t max_zn = 0;
  for (const auto& o : results) {
    if (o.status == 2) ++h.discarded_cap;
    if (o.status != 1) continue;
    ++h.trials;
    if (o.hit) ++h.hits, max_zn = std::max(max_zn, o.zn);
  }
  if (h.hits == 0) throw Error(Errc::NoHits, "no trajectory with R_n >= a");
  h.pmf.assign(max_zn + 1, 0.0);
  for (const auto& o : results)
    if (o.status == 1 && o.hit) h.pmf[o.zn] += 1.0;
  for (double& c : h.pmf) c /= double(h.hits);
  return h;
}

inline std::size_t pmf_median(std::span<const double> pmf) {
  double acc = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    acc += pmf[k];
    if (acc >= 0.5) return k;
  }
  return pmf.empty() ? 0 : pmf.size() - 1;
}

inline double total_variation(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < std::max(a.size(), b.size()); ++k)
    s += std::abs((k < a.size() ? a[k] : 0.0) - (k < b.size() ? b[k] : 0.0));
  return 0.5 * s;
}

/// Ordinary least-squares slope of ys on xs.
inline double least_squares_slope(std::span<const double> xs, std::span<const double> ys) {
  const double n = double(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

// ---- W_n samples --------------------------------------------------------

struct WSample {
  std::vector<double> values;  // W_n = Z_n / m^n, replicate order, capped runs dropped
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t discarded_cap = 0;
  std::optional<double> left_tail_slope;  // Böttcher only
};

/// Slope of -log P(W_n <= x) against x^{-beta/(1-beta)} over the lower decile.
inline std::optional<double> left_tail_slope(std::vector<double> values, double beta) {
  if (values.size() < 20) return std::nullopt;
  std::sort(values.begin(), values.end());
  const double N = double(values.size());
  const std::size_t decile = values.size() / 10;
  const double expo = -beta / (1.0 - beta);
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < decile; ++i) {
    if (i + 1 < values.size() && values[i + 1] == values[i]) continue;  // last of a tie block
    xs.push_back(std::pow(values[i], expo));
    ys.push_back(-std::log(double(i + 1) / N));
  }
  if (xs.size() < 3) return std::nullopt;
  return least_squares_slope(xs, ys);
}

inline WSample empirical_w(const OffspringLaw& law, int n, const SimConfig& cfg) {
  const AliasTable alias(law.probs());
  const auto results = run_replicates<std::optional<std::uint64_t>>(
      cfg.replicates, cfg.workers, [&](std::size_t r) {
        SplitMix64 rng = replicate_stream(cfg.seed, r);
        return detail::advance(1, n, alias, rng, cfg.population_cap);
      });
  WSample w;
  const double scale = std::pow(law.mean(), -n);
  for (const auto& z : results) {
    if (!z) {
      ++w.discarded_cap;
      continue;
    }
    w.values.push_back(double(*z) * scale);
  }
  if (w.values.empty()) throw Error(Errc::CapExceeded, "every trajectory exceeded the cap");
  double sum = 0.0, sq = 0.0;
  for (double x : w.values) sum += x;
  w.mean = sum / double(w.values.size());
  for (double x : w.values) sq += (x - w.mean) * (x - w.mean);
  w.std_error = std::sqrt(sq / double(std::max<std::size_t>(w.values.size() - 1, 1)) / double(w.values.size()));
  const Classification cls = classify(law);
  if (cls.boettcher()) w.left_tail_slope = left_tail_slope(w.values, *cls.beta);
  return w;
}

// ---- R_n(t) paths -------------------------------------------------------

/// One sample of t -> R_n(t) = Z_n^{-1} sum_{i <= floor(t Z_n)} xi_{n,i} on `grid`.
inline std::vector<std::pair<double, double>> sample_rn_path(const OffspringLaw& law, int n,
                                                             std::span<const double> grid, SplitMix64& rng,
                                                             std::uint64_t population_cap = 10'000'000) {
  for (double t : grid)
    if (!(t >= 0.0 && t <= 1.0)) throw Error(Errc::InvalidArgument, "grid point outside [0, 1]");
  const AliasTable alias(law.probs());
  const auto zn = detail::advance(1, n, alias, rng, population_cap);
  if (!zn) throw Error(Errc::CapExceeded, "population exceeded cap before generation n");
  if (*zn == 0) throw Error(Errc::NoSurvivors, "trajectory extinct by generation n");
  const std::uint64_t z = *zn;

  std::vector<std::size_t> order(grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return grid[x] < grid[y]; });

  std::vector<std::pair<double, double>> out(grid.size());
  std::uint64_t drawn = 0, partial = 0;
  for (std::size_t idx : order) {
    const auto upto = static_cast<std::uint64_t>(std::floor(grid[idx] * double(z)));
    while (drawn < upto) partial += alias.sample(rng), ++drawn;
    out[idx] = {grid[idx], double(partial) / double(z)};
  }
  return out;
}

}  // namespace gwlimits
