// One line per acceptance criterion; exit status 0 iff all pass.

#include <cstdio>

#include "kcmc/acceptance.hpp"

int main() {
  kcmc::AcceptanceSuite suite;
  int failed = 0;
  for (int id = 1; id <= 9; ++id) {
    const kcmc::CriterionResult r = suite.criterion(id);
    std::printf("%s\n", kcmc::format_result(r).c_str());
    std::fflush(stdout);
    if (!r.passed) ++failed;
  }
  std::printf("%d/9 criteria passed\n", 9 - failed);
  return failed == 0 ? 0 : 1;
}
