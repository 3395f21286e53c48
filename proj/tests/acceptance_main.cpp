// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance [--fast] [--workers N] [id-or-key ...]

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "gwlimits/acceptance.hpp"

int main(int argc, char** argv) {
  using namespace gwlimits::acceptance;
  Options opt;
  std::vector<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--fast") opt.fast = true;
    else if (arg == "--workers" && i + 1 < argc) opt.workers = unsigned(std::stoul(argv[++i]));
    else only.push_back(arg);
  }
  int run = 0, failed = 0;
  for (const auto& c : criteria()) {
    if (!selected(c, only)) continue;
    const CriterionResult r = run_criterion(c, opt);
    std::cout << format_line(r) << std::endl;
    ++run;
    failed += r.pass ? 0 : 1;
  }
  std::cout << (run - failed) << "/" << run << " criteria passed" << std::endl;
  return run > 0 && failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
