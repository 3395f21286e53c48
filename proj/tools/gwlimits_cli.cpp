// gwlimits command-line front end.
//
// Every command writes CSV or JSON to --out (default "-" for stdout). File
// outputs are written to a temporary sibling and renamed on success, and a
// <out>.manifest.json records the command line, law, configuration and a
// SHA-256 digest of the output.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "gwlimits/acceptance.hpp"
#include "gwlimits/asymptotics.hpp"
#include "gwlimits/gen_dist.hpp"
#include "gwlimits/io.hpp"
#include "gwlimits/ldp.hpp"
#include "gwlimits/offspring.hpp"
#include "gwlimits/reports.hpp"

namespace {

using namespace gwlimits;
using nlohmann::json;

constexpr const char* kToolVersion = "gwlimits 1.0.0";

enum Exit { kOk = 0, kVerifyFailed = 1, kUsage = 2, kNumerical = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string law_spec;
  std::string law_file;
  std::string out = "-";
  std::string format = "csv";
};

void add_common(CLI::App* cmd, Common& c, bool needs_law = true) {
  if (needs_law) {
    auto* a = cmd->add_option("--law", c.law_spec, "sparse law, e.g. 0:0.25,2:0.75");
    auto* b = cmd->add_option("--law-file", c.law_file, "JSON law file {\"probs\": [...]}");
    a->excludes(b);
  }
  cmd->add_option("--out", c.out, "output path, '-' for stdout");
  cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

OffspringLaw load_law(const Common& c) {
  if (!c.law_file.empty()) return load_law_file(c.law_file);
  if (c.law_spec.empty()) throw UsageError("one of --law or --law-file is required");
  return parse_law_spec(c.law_spec);
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw UsageError("cannot write " + tmp.string());
    f << content;
    f.flush();
    if (!f) {
      std::filesystem::remove(tmp);
      throw UsageError("write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

struct Emitter {
  std::vector<std::string> argv;

  void operator()(const Common& c, const std::string& content, const json& law, const json& config,
                  const std::vector<std::uint64_t>& seeds = {}) const {
    if (c.out == "-") {
      std::cout << content;
      if (!content.empty() && content.back() != '\n') std::cout << '\n';
      return;
    }
    write_atomically(c.out, content);
    json manifest = {{"command_line", argv},
                     {"tool_version", kToolVersion},
                     {"law", law},
                     {"config", config},
                     {"seeds", seeds},
                     {"outputs", {{{"path", c.out}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}}}}};
    write_atomically(c.out + ".manifest.json", manifest.dump(2) + "\n");
  }
};

std::string render(const Common& c, const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows, json meta = json::object()) {
  if (c.format == "csv") return to_csv(header, rows);
  meta["rows"] = rows_to_json(header, rows);
  return meta.dump(2) + "\n";
}

std::vector<double> parse_numbers(const std::string& text, char sep) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad number '" + item + "' in '" + text + "'");
    }
  }
  return out;
}

/// lo:hi:step, inclusive of hi up to rounding.
std::vector<double> parse_grid(const std::string& text) {
  const auto v = parse_numbers(text, ':');
  if (v.size() != 3 || !(v[2] > 0.0) || v[1] < v[0]) throw UsageError("range must be lo:hi:step with step > 0");
  std::vector<double> xs;
  const auto count = static_cast<long>(std::floor((v[1] - v[0]) / v[2] + 1e-9)) + 1;
  for (long i = 0; i < count; ++i) xs.push_back(v[0] + double(i) * v[2]);
  return xs;
}

std::pair<int, int> parse_int_range(const std::string& text) {
  const auto v = parse_numbers(text, ':');
  if (v.size() != 2 || v[0] < 1 || v[1] < v[0]) throw UsageError("n-range must be lo:hi with 1 <= lo <= hi");
  return {int(v[0]), int(v[1])};
}

Growth parse_growth(const std::string& g) {
  if (g == "linear") return Growth::Linear;
  if (g == "sublinear") return Growth::Sublinear;
  if (g == "superlinear") return Growth::Superlinear;
  throw UsageError("unknown growth '" + g + "'");
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("GW_LIMITS_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError("GW_LIMITS_SEED is not an unsigned integer");
    }
  }
  return 42;
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::NegativeMass:
    case Errc::MassSumOutOfTolerance:
    case Errc::Subcritical:
    case Errc::Degenerate:
    case Errc::ParseError:
    case Errc::InvalidArgument:
    case Errc::NotPowerOfTwo:
    case Errc::BoettcherLaw:
    case Errc::SchroederLaw:
    case Errc::SOutOfRange:
    case Errc::SAtOrBeyondOne:
    case Errc::VTooLarge:
    case Errc::VBeyondCap: return kUsage;
    default: return kNumerical;
  }
}

// ---- commands -----------------------------------------------------------

json classification_json(const Classification& c) {
  return {{"m", c.m},
          {"q", c.q},
          {"gamma", c.gamma},
          {"alpha", json_number(c.alpha)},
          {"j0", c.j0},
          {"beta", c.beta ? json(*c.beta) : json(nullptr)},
          {"regime", std::string(to_string(c.regime))}};
}

int cmd_classify(const Common& c, const Emitter& emit) {
  const OffspringLaw law = load_law(c);
  const Classification cls = classify(law);
  const json report = classification_json(cls);
  std::string text;
  if (c.format == "json") {
    text = report.dump(2) + "\n";
  } else {
    std::ostringstream out;
    out << "field,value\n"
        << "m," << format_number(cls.m) << "\nq," << format_number(cls.q) << "\ngamma,"
        << format_number(cls.gamma) << "\nalpha," << format_number(cls.alpha) << "\nj0," << cls.j0
        << "\nbeta," << (cls.beta ? format_number(*cls.beta) : "") << "\nregime," << to_string(cls.regime)
        << "\n";
    text = out.str();
  }
  emit(c, text, law_to_json(law), json::object());
  return kOk;
}

struct PmfArgs {
  int n = 1;
  std::optional<std::size_t> cap;
  std::string method = "compose";
};

int cmd_pmf(const Common& c, const PmfArgs& a, const Emitter& emit) {
  const OffspringLaw law = load_law(c);
  const std::size_t cap = a.cap.value_or(default_cap(law, a.n));
  std::optional<GenerationPmf> comp, dft;
  if (a.method != "dft") comp = zn_pmf_compose(law, a.n, cap);
  if (a.method != "compose") dft = zn_pmf_dft(law, a.n, dft_grid_for(law, a.n, cap));

  std::vector<std::string> header{"k"};
  if (comp && dft) header.insert(header.end(), {"compose", "dft", "abs_diff"});
  else header.push_back("probability");
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k <= cap; ++k) {
    if (comp && dft) rows.push_back({double(k), (*comp)[k], (*dft)[k], std::abs((*comp)[k] - (*dft)[k])});
    else rows.push_back({double(k), comp ? (*comp)[k] : (*dft)[k]});
  }
  const GenerationPmf& any = comp ? *comp : *dft;
  json meta = {{"n", a.n}, {"cap", cap}, {"method", a.method}, {"tail_mass", any.tail_mass},
               {"cap_too_small", any.cap_too_small}};
  if (dft) meta["alias_bound"] = dft->alias_bound;
  emit(c, render(c, header, rows, meta), law_to_json(law), {{"n", a.n}, {"cap", cap}, {"method", a.method}});
  return kOk;
}

struct LocalLimitArgs {
  std::string n_range = "6:14";
  std::string v_rule = "sqrt";
};

int cmd_locallimit(const Common& c, const LocalLimitArgs& a, const Emitter& emit) {
  const OffspringLaw law = load_law(c);
  const Classification cls = classify(law);
  const auto [lo, hi] = parse_int_range(a.n_range);
  const VRule rule = parse_v_rule(a.v_rule);
  std::vector<std::vector<double>> rows;
  for (const ScaleEntry& e : scale_sequence(law, rule, lo, hi).entries) {
    const GenerationPmf pmf = zn_pmf_compose(law, e.n, std::max(default_cap(law, e.n), e.v));
    rows.push_back({double(e.n), double(e.v), e.a, pmf[e.v], pmf[e.v] / e.a});
  }
  json meta = {{"regime", std::string(to_string(cls.regime))}, {"v_rule", a.v_rule}};
  emit(c, render(c, {"n", "v", "A_n", "P", "ratio"}, rows, meta), law_to_json(law),
       {{"n_range", a.n_range}, {"v_rule", a.v_rule}});
  return kOk;
}

struct GridArgs {
  int n = 20;
  std::string s_range = "0:0.95:0.05";
};

int cmd_qfun(const Common& c, const GridArgs& a, const Emitter& emit) {
  const OffspringLaw law = load_law(c);
  const Classification cls = classify(law);
  std::vector<std::vector<double>> rows;
  for (double s : parse_grid(a.s_range)) {
    const double qs = q_limit(law, s).value;
    const double residual = std::abs(q_limit(law, law.eval(s)).value - cls.gamma * qs);
    rows.push_back({s, q_n(law, a.n, s).value, qs, residual});
  }
  emit(c, render(c, {"s", "Q_n", "Q", "residual"}, rows, {{"n", a.n}}), law_to_json(law),
       {{"n", a.n}, {"s_range", a.s_range}});
  return kOk;
}

int cmd_gfun(const Common& c, const GridArgs& a, const Emitter& emit) {
  const OffspringLaw law = load_law(c);
  std::vector<std::vector<double>> rows;
  for (double s : parse_grid(a.s_range)) {
    if (s <= 0.0) continue;  // G has a log singularity at 0
    const double series = boettcher_G(law, s).value;
    const double iterate = log_pgf_iterate_scaled(law, a.n, s);
    rows.push_back({s, series, iterate, std::abs(series - iterate)});
  }
  emit(c, render(c, {"s", "G_series", "G_iterate", "diff"}, rows, {{"n", a.n}}), law_to_json(law),
       {{"n", a.n}, {"s_range", a.s_range}});
  return kOk;
}

struct RateArgs {
  std::string kind = "offspring";
  int k = 1;
  std::string growth = "linear";
  double b = 0.0;
  std::string x_range = "1:3:0.01";
  std::string path;
};

RateRegime regime_for(const OffspringLaw& law, const RateArgs& a) {
  const Classification cls = classify(law);
  if (a.kind == "boettcher") return boettcher_regime(a.k, a.b);
  return schroeder_regime(cls, a.k, parse_growth(a.growth), a.b);
}

json regime_json(const RateArgs& a) {
  return {{"kind", a.kind}, {"k", a.k}, {"growth", a.growth}, {"b", a.b}};
}

int cmd_rate(const Common& c, const RateArgs& a, const Emitter& emit) {
  const OffspringLaw law = load_law(c);
  RateKind kind = RateKind::Offspring;
  if (a.kind == "w") kind = RateKind::WLimit;
  else if (a.kind == "boettcher") kind = RateKind::Boettcher;
  else if (a.kind != "offspring") throw UsageError("unknown rate kind '" + a.kind + "'");
  const RateTable table = rate_table(law, kind, regime_for(law, a), parse_grid(a.x_range));
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < table.xs.size(); ++i) rows.push_back({table.xs[i], table.inner[i], table.rates[i]});
  json config = regime_json(a);
  config["x_range"] = a.x_range;
  emit(c, render(c, {"x", "inner_rate", "total_rate"}, rows, regime_json(a)), law_to_json(law), config);
  return kOk;
}

int cmd_pathrate(const Common& c, const RateArgs& a, const Emitter& emit) {
  const OffspringLaw law = load_law(c);
  if (a.path.empty()) throw UsageError("--path is required");
  std::vector<PathPoint> path;
  std::stringstream ss(a.path);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto tv = parse_numbers(item, ':');
    if (tv.size() != 2) throw UsageError("breakpoint '" + item + "' is not t:y");
    path.push_back({tv[0], tv[1]});
  }
  const Classification cls = classify(law);
  const double rate = path_rate(law, cls, regime_for(law, a), path);
  json config = regime_json(a);
  config["path"] = a.path;
  emit(c, render(c, {"rate"}, {{rate}}, regime_json(a)), law_to_json(law), config);
  return kOk;
}

struct SimArgs {
  std::string task = "rn-tail";
  int n = 12;
  int k = 1;
  std::uint64_t v = 8;
  double a = 1.8;
  std::size_t reps = 1'000'000;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  std::uint64_t population_cap = 10'000'000;
  int grid_points = 11;
};

int cmd_simulate(const Common& c, const SimArgs& s, const Emitter& emit) {
  const OffspringLaw law = load_law(c);
  SimulateRequest req;
  req.task = parse_sim_task(s.task);
  req.config = {s.seed.value_or(default_seed()), s.reps, s.n, s.population_cap, s.workers};
  req.k = s.k;
  req.v = s.v;
  req.a = s.a;
  req.grid_points = s.grid_points;
  const json report = simulate_report(law, req);
  std::string text;
  if (c.format == "json") {
    text = report.dump(2) + "\n";
  } else {
    std::ostringstream out;
    out << "field,value\n";
    for (const auto& [key, value] : report["result"].items())
      if (value.is_primitive()) out << key << ',' << value.dump() << '\n';
    text = out.str();
  }
  emit(c, text, law_to_json(law), report["config"], {req.config.seed});
  return kOk;
}

struct VerifyArgs {
  bool fast = false;
  std::vector<std::string> only;
  unsigned workers = 1;
  std::optional<std::uint64_t> seed;
  bool corrupt_a_scale = false;
};

double corrupted_a_scale(const Classification& cls, int n, double v) { return a_scale(cls, n, v) * std::pow(2.0, n); }

int cmd_verify(const VerifyArgs& a) {
  acceptance::Options opt;
  opt.fast = a.fast;
  opt.workers = a.workers;
  if (a.seed) opt.seed = *a.seed;
  if (a.corrupt_a_scale) opt.a_scale_fn = corrupted_a_scale;
  int run = 0, failed = 0;
  for (const auto& c : acceptance::criteria()) {
    if (!acceptance::selected(c, a.only)) continue;
    const auto r = acceptance::run_criterion(c, opt);
    std::cout << acceptance::format_line(r) << std::endl;
    ++run;
    failed += r.pass ? 0 : 1;
  }
  if (run == 0) throw UsageError("--only matched no criterion");
  std::cout << (run - failed) << "/" << run << " criteria passed" << std::endl;
  return failed == 0 ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Galton-Watson limit laws: exact pmfs, asymptotic functionals, rate functions, simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Common common;
  PmfArgs pmf_args;
  LocalLimitArgs ll_args;
  GridArgs q_args, g_args;
  g_args.s_range = "0.05:0.95:0.05";
  RateArgs rate_args, path_args;
  SimArgs sim_args;
  VerifyArgs verify_args;

  auto* classify_cmd = app.add_subcommand("classify", "extinction probability, alpha, regime");
  add_common(classify_cmd, common);

  auto* pmf_cmd = app.add_subcommand("pmf", "exact law of Z_n");
  add_common(pmf_cmd, common);
  pmf_cmd->add_option("--n", pmf_args.n)->required()->check(CLI::Range(1, 64));
  pmf_cmd->add_option("--cap", pmf_args.cap, "truncation index");
  pmf_cmd->add_option("--method", pmf_args.method)->check(CLI::IsMember({"compose", "dft", "both"}));

  auto* ll_cmd = app.add_subcommand("locallimit", "P(Z_n = v_n) against the local-limit scale");
  add_common(ll_cmd, common);
  ll_cmd->add_option("--n-range", ll_args.n_range, "lo:hi");
  ll_cmd->add_option("--v-rule", ll_args.v_rule, "sqrt | linear[:c] | m-power:r | const:c");

  auto* q_cmd = app.add_subcommand("qfun", "Schroeder function Q_n and Q");
  add_common(q_cmd, common);
  q_cmd->add_option("--n", q_args.n)->check(CLI::Range(1, 10000));
  q_cmd->add_option("--s-range", q_args.s_range, "lo:hi:step");

  auto* g_cmd = app.add_subcommand("gfun", "Boettcher function G, series vs iteration");
  add_common(g_cmd, common);
  g_cmd->add_option("--n", g_args.n)->check(CLI::Range(1, 10000));
  g_cmd->add_option("--s-range", g_args.s_range, "lo:hi:step");

  auto add_rate_flags = [](CLI::App* cmd, RateArgs& r) {
    cmd->add_option("--kind", r.kind, "offspring | w | boettcher");
    cmd->add_option("--k", r.k)->check(CLI::NonNegativeNumber);
    cmd->add_option("--growth", r.growth, "linear | sublinear | superlinear");
    cmd->add_option("--b", r.b)->check(CLI::NonNegativeNumber);
  };
  auto* rate_cmd = app.add_subcommand("rate", "conditional rate function on a grid");
  add_common(rate_cmd, common);
  add_rate_flags(rate_cmd, rate_args);
  rate_cmd->add_option("--x-range", rate_args.x_range, "lo:hi:step");

  auto* path_cmd = app.add_subcommand("pathrate", "rate of a piecewise-linear path");
  add_common(path_cmd, common);
  add_rate_flags(path_cmd, path_args);
  path_cmd->add_option("--path", path_args.path, "breakpoints t:y,t:y,... from t=0 to t=1")->required();

  auto* sim_cmd = app.add_subcommand("simulate", "seeded Monte Carlo");
  add_common(sim_cmd, common);
  sim_cmd->add_option("--task", sim_args.task)->check(CLI::IsMember({"rn-tail", "cond-ldp", "ak", "w", "path"}));
  sim_cmd->add_option("--n", sim_args.n)->check(CLI::Range(1, 200));
  sim_cmd->add_option("--k", sim_args.k)->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--v", sim_args.v);
  sim_cmd->add_option("--a", sim_args.a);
  sim_cmd->add_option("--reps", sim_args.reps)->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim_args.seed, "default: $GW_LIMITS_SEED or 42");
  sim_cmd->add_option("--workers", sim_args.workers)->check(CLI::Range(1u, 1024u));
  sim_cmd->add_option("--population-cap", sim_args.population_cap);
  sim_cmd->add_option("--grid-points", sim_args.grid_points)->check(CLI::Range(2, 100000));

  auto* verify_cmd = app.add_subcommand("verify", "run the acceptance criteria");
  verify_cmd->add_flag("--fast", verify_args.fast, "reduced Monte Carlo replicates");
  verify_cmd->add_option("--only", verify_args.only, "criterion id or key, repeatable");
  verify_cmd->add_option("--workers", verify_args.workers)->check(CLI::Range(1u, 1024u));
  verify_cmd->add_option("--seed", verify_args.seed);
  verify_cmd->add_flag("--corrupt-a-scale", verify_args.corrupt_a_scale)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  const Emitter emit{std::vector<std::string>(argv, argv + argc)};
  try {
    if (*classify_cmd) return cmd_classify(common, emit);
    if (*pmf_cmd) return cmd_pmf(common, pmf_args, emit);
    if (*ll_cmd) return cmd_locallimit(common, ll_args, emit);
    if (*q_cmd) return cmd_qfun(common, q_args, emit);
    if (*g_cmd) return cmd_gfun(common, g_args, emit);
    if (*rate_cmd) return cmd_rate(common, rate_args, emit);
    if (*path_cmd) return cmd_pathrate(common, path_args, emit);
    if (*sim_cmd) {
      if (!sim_args.seed) sim_args.seed = default_seed();
      return cmd_simulate(common, sim_args, emit);
    }
    if (*verify_cmd) return cmd_verify(verify_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}
