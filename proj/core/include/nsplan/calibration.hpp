#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nsplan/json.hpp"

namespace nsplan {

struct Prediction {
  double confidence;  // in [0,1]
  int label;          // 0 or 1
};

using PredictionBatch = std::vector<Prediction>;

struct ReliabilityBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double mean_confidence = 0.0;
  double accuracy = 0.0;
};

struct ReliabilityReport {
  std::vector<ReliabilityBin> bins;
  double ece = 0.0;
  double mce = 0.0;
  double brier = 0.0;
};

struct CalibrationVerdict {
  bool pass = false;
  double epsilon_cal = 0.0;  // measured ECE
};

inline constexpr int kDefaultBins = 10;

/// Equal-width bins over [0,1]; bin m covers [(m-1)/M, m/M) and the last bin
/// is closed at 1. Throws DomainError for an empty batch, M < 1, or invalid
/// entries.
std::vector<ReliabilityBin> bin_predictions(const PredictionBatch& batch, int num_bins = kDefaultBins);

/// Σ (|B_m|/n)·|acc - conf|; empty bins contribute nothing.
double ece(const std::vector<ReliabilityBin>& bins);
/// Largest |acc - conf| over non-empty bins.
double mce(const std::vector<ReliabilityBin>& bins);
/// Mean squared error between confidence and label.
double brier(const PredictionBatch& batch);

ReliabilityReport reliability_report(const PredictionBatch& batch, int num_bins = kDefaultBins);

/// Passes iff ece <= ece_max.
CalibrationVerdict calibration_verdict(const ReliabilityReport& report, double ece_max);

/// `confidence,label` rows; a header line with those names is accepted and
/// skipped. Throws DomainError with the offending line number.
PredictionBatch read_predictions_csv(std::istream& in);
void write_predictions_csv(std::ostream& out, const PredictionBatch& batch);

nlohmann::json to_json(const ReliabilityReport& report);

}  // namespace nsplan
