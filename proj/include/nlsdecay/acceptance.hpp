// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nlsdecay/pipeline.hpp"
#include "nlsdecay/report.hpp"

namespace nlsdecay {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

using CriterionCallback = std::function<void(const CriterionResult&)>;

// Runs the ten acceptance criteria on the configuration's grid (L, N, order,
// mu), sweep lists, rate tolerance and seed. Tolerances are fixed. A
// criterion that throws is reported as failed with the exception text.
std::vector<CriterionResult> run_acceptance(const RunConfig& cfg,
                                            const CriterionCallback& on_result = {});

std::string format_criterion(const CriterionResult& r);
Json acceptance_json(const std::vector<CriterionResult>& results);

}  // namespace nlsdecay
