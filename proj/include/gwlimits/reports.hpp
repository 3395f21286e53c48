#pragma once

// JSON reports for the Monte Carlo tasks. Output depends only on the law
// and the request, never on the worker count.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwlimits/io.hpp"
#include "gwlimits/montecarlo.hpp"

namespace gwlimits {

enum class SimTask { RnTail, CondLdp, Ak, W, Path };

inline SimTask parse_sim_task(const std::string& s) {
  if (s == "rn-tail") return SimTask::RnTail;
  if (s == "cond-ldp") return SimTask::CondLdp;
  if (s == "ak") return SimTask::Ak;
  if (s == "w") return SimTask::W;
  if (s == "path") return SimTask::Path;
  throw Error(Errc::ParseError, "unknown task '" + s + "'");
}

inline std::string to_string(SimTask t) {
  switch (t) {
    case SimTask::RnTail: return "rn-tail";
    case SimTask::CondLdp: return "cond-ldp";
    case SimTask::Ak: return "ak";
    case SimTask::W: return "w";
    case SimTask::Path: return "path";
  }
  return "unknown";
}

struct SimulateRequest {
  SimTask task = SimTask::RnTail;
  SimConfig config;
  int k = 1;
  std::uint64_t v = 1;
  double a = 1.8;
  int grid_points = 11;
};

inline nlohmann::json estimate_json(const McEstimate& e) {
  return {{"estimate", e.value},   {"stderr", e.std_error},         {"hits", e.hits},
          {"trials", e.trials},    {"acceptance", e.acceptance},    {"discarded_cap", e.discarded_cap},
          {"seed", e.seed},        {"replicates", e.replicates}};
}

inline nlohmann::json simulate_report(const OffspringLaw& law, const SimulateRequest& req) {
  const SimConfig& cfg = req.config;
  nlohmann::json out;
  out["task"] = to_string(req.task);
  out["law"] = law_to_json(law);
  out["config"] = {{"n", cfg.n},
                   {"k", req.k},
                   {"v", req.v},
                   {"a", req.a},
                   {"reps", cfg.replicates},
                   {"seed", cfg.seed},
                   {"population_cap", cfg.population_cap},
                   {"grid_points", req.grid_points}};
  switch (req.task) {
    case SimTask::RnTail: {
      out["result"] = estimate_json(estimate_rn_tail(law, cfg.n, req.a, cfg));
      break;
    }
    case SimTask::CondLdp: {
      const ConditionalEstimate c = estimate_conditional_ldp(law, cfg.n, req.k, req.v, req.a, cfg);
      nlohmann::json r = estimate_json(c.estimate);
      r["accepted"] = c.accepted;
      r["zn_pmf"] = c.zn_pmf;
      out["result"] = r;
      break;
    }
    case SimTask::Ak: {
      const Histogram h = empirical_ak(law, cfg.n, req.a, cfg);
      out["result"] = {{"pmf", h.pmf},
                       {"hits", h.hits},
                       {"trials", h.trials},
                       {"discarded_cap", h.discarded_cap},
                       {"median", pmf_median(h.pmf)}};
      break;
    }
    case SimTask::W: {
      const WSample w = empirical_w(law, cfg.n, cfg);
      nlohmann::json r = {{"mean", w.mean},
                          {"stderr", w.std_error},
                          {"samples", w.values.size()},
                          {"discarded_cap", w.discarded_cap}};
      r["left_tail_slope"] = w.left_tail_slope ? nlohmann::json(*w.left_tail_slope) : nlohmann::json(nullptr);
      out["result"] = r;
      break;
    }
    case SimTask::Path: {
      std::vector<double> grid;
      const int pts = std::max(2, req.grid_points);
      for (int i = 0; i < pts; ++i) grid.push_back(double(i) / double(pts - 1));
      nlohmann::json paths = nlohmann::json::array();
      std::uint64_t extinct = 0, capped = 0;
      // paths are cheap to draw but large to print; sequential by replicate
      for (std::size_t r = 0; r < cfg.replicates; ++r) {
        SplitMix64 rng = replicate_stream(cfg.seed, r);
        try {
          nlohmann::json path = nlohmann::json::array();
          for (const auto& [t, y] : sample_rn_path(law, cfg.n, grid, rng, cfg.population_cap))
            path.push_back({t, y});
          paths.push_back(path);
        } catch (const Error& e) {
          if (e.code() == Errc::NoSurvivors) ++extinct;
          else if (e.code() == Errc::CapExceeded) ++capped;
          else throw;
        }
      }
      out["result"] = {{"paths", paths}, {"extinct", extinct}, {"discarded_cap", capped}};
      break;
    }
  }
  return out;
}

}  // namespace gwlimits
