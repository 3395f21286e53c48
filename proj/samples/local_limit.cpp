// Prints P(Z_n = v_n) against the local-limit scale A_n for a law given as
// "index:mass,..." (default: p_1 = p_2 = 1/2), with v_n = round(m^{n/2}).

#include <cstdio>

#include "gwlimits/asymptotics.hpp"
#include "gwlimits/gen_dist.hpp"

int main(int argc, char** argv) {
  using namespace gwlimits;
  const OffspringLaw law = parse_law_spec(argc > 1 ? argv[1] : "1:0.5,2:0.5");
  const Classification cls = classify(law);
  std::printf("m=%.6g q=%.6g gamma=%.6g alpha=%.6g regime=%s\n", cls.m, cls.q, cls.gamma, cls.alpha,
              std::string(to_string(cls.regime)).c_str());
  if (cls.boettcher()) return 0;
  std::printf("%4s %8s %14s %14s %10s\n", "n", "v", "P(Z_n=v)", "A_n", "ratio");
  for (int n = 4; n <= 14; ++n) {
    const std::size_t v = lattice_snap(law, n, VRule{}.raw(cls.m, n));
    const GenerationPmf pmf = zn_pmf_compose(law, n, std::max(default_cap(law, n), v));
    const double a = a_scale(cls, n, double(v));
    std::printf("%4d %8zu %14.6e %14.6e %10.4f\n", n, v, pmf[v], a, pmf[v] / a);
  }
}
