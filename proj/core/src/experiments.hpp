#pragma once

#include "nsplan/harness.hpp"

namespace nsplan::detail {

ExperimentReport run_calibration(const ExperimentConfig& config);
ExperimentReport run_alpha_fit(const ExperimentConfig& config);
ExperimentReport run_convergence(const ExperimentConfig& config);
ExperimentReport run_threshold_sweep(const ExperimentConfig& config);
ExperimentReport run_plan_benchmark(const ExperimentConfig& config);
ExperimentReport run_mrf_check(const ExperimentConfig& config);

}  // namespace nsplan::detail
