#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hexid/harness/config.hpp"

namespace hexid::harness {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double cpu_seconds = 0.0;
  double budget_seconds = 0.0;
};

/// "PASS [3] gradient correctness: <detail> (1.2 s of 60 s)"
std::string format_result(const CriterionResult& r);

CriterionResult check_identifiability(const ExperimentConfig& cfg);
CriterionResult check_integrator_order(const ExperimentConfig& cfg);
CriterionResult check_gradients(const ExperimentConfig& cfg);
CriterionResult check_oracle_recovery(const ExperimentConfig& cfg);
/// Criteria 5, 6 and 7 share one training of each estimator.
std::vector<CriterionResult> check_experiments(const ExperimentConfig& cfg);
CriterionResult check_properties(const ExperimentConfig& cfg);

/// Runs the selected criteria (all when `only` is empty), printing one line
/// per criterion to `log` as each finishes.
std::vector<CriterionResult> run_acceptance(const ExperimentConfig& cfg, const std::vector<int>& only,
                                            std::ostream& log);

}  // namespace hexid::harness
