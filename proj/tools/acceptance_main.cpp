// SPDX-License-Identifier: Apache-2.0
// Runs the acceptance criteria at the default configuration and prints one
// PASS/FAIL line per criterion. Exit status 0 iff every criterion passes.
#include <iostream>

#include "nlsdecay/acceptance.hpp"

int main() {
  nlsdecay::RunConfig cfg;
  bool all = true;
  nlsdecay::run_acceptance(cfg, [&](const nlsdecay::CriterionResult& r) {
    std::cout << nlsdecay::format_criterion(r) << std::endl;
    all = all && r.passed;
  });
  std::cout << (all ? "all criteria passed" : "some criteria failed") << std::endl;
  return all ? 0 : 1;
}
