#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "nsplan/blocks.hpp"
#include "nsplan/json.hpp"
#include "nsplan/mrf.hpp"
#include "nsplan/perception.hpp"

namespace nsplan {

enum class ExperimentKind { Calibration, AlphaFit, Convergence, ThresholdSweep, PlanBenchmark, MrfCheck };

std::string_view to_string(ExperimentKind kind) noexcept;
/// Accepts calibration, alpha-fit, convergence, threshold-sweep,
/// plan-benchmark and mrf-check.
ExperimentKind parse_experiment_kind(std::string_view name);

enum class ExportFormat { Csv, Json, Both };
ExportFormat parse_export_format(std::string_view name);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Calibration;
  int min_objects = 3;
  int max_objects = 5;
  double stack_bias = 0.5;
  NoiseConfig noise;
  double tau_plan = 0.7;
  int max_retries = 5;
  int trials = 20;
  std::uint64_t seed = 1;
  double alpha = 0.3;          // exact reduction rate, or the info-action gain
  bool refine = true;          // MRF refinement inside the planning loop
  double info_cost = 0.1;
  std::vector<double> taus{0.5, 0.6, 0.7, 0.8, 0.9};
  int samples = 10'000;        // calibration predictions per trial
  double compare_gamma = 2.0;  // miscalibrated stream compared against
  int workers = 1;
  std::string out_dir = ".";
  ExportFormat format = ExportFormat::Both;

  /// Throws DomainError for out-of-range values.
  void validate() const;
};

/// Defaults tuned for each experiment kind.
ExperimentConfig default_config(ExperimentKind kind);

/// Overlays the keys present in `doc` onto `base`. Unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& doc, ExperimentConfig base);
nlohmann::json to_json(const ExperimentConfig& config);

struct ExperimentReport {
  ExperimentKind kind = ExperimentKind::Calibration;
  std::map<std::string, std::string> csv;  // file name -> content
  nlohmann::json summary;
  std::map<std::string, bool> checks;
  std::size_t rows = 0;

  bool pass() const;
};

/// Runs trials on `config.workers` threads. Every trial draws from its own
/// seed and writes to its own slot, so the report does not depend on the
/// worker count.
ExperimentReport run(const ExperimentConfig& config);

/// Writes `<kind>_summary.json` and/or the CSV files into `out_dir`, creating
/// it if needed. Numbers carry 9 significant digits. Throws IoError with the
/// failing path.
std::vector<std::string> export_report(const ExperimentReport& report, const std::string& out_dir,
                                       ExportFormat format = ExportFormat::Both);

/// Rounds every floating-point number in `doc` to 9 significant digits.
nlohmann::json round_numbers(const nlohmann::json& doc);

/// Runs fn(i) for i in [0, count) on up to `workers` threads. The first
/// exception by index is rethrown after all workers finish.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

/// Random MRFs over Clear(n0), Clear(n1), ... with unary confidences in
/// [0.05, 0.95] and edges of every kind.
PredicateMrf random_tree_mrf(std::size_t nodes, std::uint64_t seed);
PredicateMrf random_mrf(std::size_t nodes, double edge_probability, std::uint64_t seed);

/// A random tower On(o1,o2) & ... over 2 or 3 distinct objects.
Goal random_tower_goal(const std::vector<std::string>& objects, std::uint64_t seed);

}  // namespace nsplan
