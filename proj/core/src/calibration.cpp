#include "nsplan/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "nsplan/error.hpp"

namespace nsplan {

namespace {

void validate(const PredictionBatch& batch) {
  if (batch.empty()) throw DomainError("prediction batch is empty");
  for (const auto& [p, y] : batch) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError(fmt::format("confidence {} outside [0,1]", p));
    if (y != 0 && y != 1) throw DomainError(fmt::format("label {} is not 0/1", y));
  }
}

}  // namespace

std::vector<ReliabilityBin> bin_predictions(const PredictionBatch& batch, int num_bins) {
  if (num_bins < 1) throw DomainError("bin count must be at least 1");
  validate(batch);
  const auto m = static_cast<std::size_t>(num_bins);
  std::vector<ReliabilityBin> bins(m);
  std::vector<double> conf_sum(m, 0.0);
  std::vector<double> label_sum(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    bins[k].lo = static_cast<double>(k) / num_bins;
    bins[k].hi = static_cast<double>(k + 1) / num_bins;
  }
  for (const auto& [p, y] : batch) {
    const auto k = std::min(static_cast<std::size_t>(p * num_bins), m - 1);
    ++bins[k].count;
    conf_sum[k] += p;
    label_sum[k] += y;
  }
  for (std::size_t k = 0; k < m; ++k) {
    if (bins[k].count == 0) continue;
    const auto n = static_cast<double>(bins[k].count);
    bins[k].mean_confidence = conf_sum[k] / n;
    bins[k].accuracy = label_sum[k] / n;
  }
  return bins;
}

double ece(const std::vector<ReliabilityBin>& bins) {
  std::size_t n = 0;
  for (const auto& b : bins) n += b.count;
  if (n == 0) return 0.0;
  double total = 0.0;
  for (const auto& b : bins) {
    if (b.count == 0) continue;
    total += static_cast<double>(b.count) / static_cast<double>(n) *
             std::abs(b.accuracy - b.mean_confidence);
  }
  return total;
}

double mce(const std::vector<ReliabilityBin>& bins) {
  double worst = 0.0;
  for (const auto& b : bins) {
    if (b.count > 0) worst = std::max(worst, std::abs(b.accuracy - b.mean_confidence));
  }
  return worst;
}

double brier(const PredictionBatch& batch) {
  validate(batch);
  double total = 0.0;
  for (const auto& [p, y] : batch) total += (p - y) * (p - y);
  return total / static_cast<double>(batch.size());
}

ReliabilityReport reliability_report(const PredictionBatch& batch, int num_bins) {
  ReliabilityReport report;
  report.bins = bin_predictions(batch, num_bins);
  report.ece = ece(report.bins);
  report.mce = mce(report.bins);
  report.brier = brier(batch);
  return report;
}

CalibrationVerdict calibration_verdict(const ReliabilityReport& report, double ece_max) {
  return {report.ece <= ece_max, report.ece};
}

PredictionBatch read_predictions_csv(std::istream& in) {
  PredictionBatch batch;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("confidence", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw DomainError(fmt::format("line {}: expected 'confidence,label'", line_no));
    }
    Prediction pred{};
    try {
      std::size_t used = 0;
      pred.confidence = std::stod(line.substr(0, comma), &used);
      pred.label = std::stoi(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw DomainError(fmt::format("line {}: cannot parse '{}'", line_no, line));
    }
    if (!(pred.confidence >= 0.0 && pred.confidence <= 1.0) ||
        (pred.label != 0 && pred.label != 1)) {
      throw DomainError(fmt::format("line {}: value out of range '{}'", line_no, line));
    }
    batch.push_back(pred);
  }
  return batch;
}

void write_predictions_csv(std::ostream& out, const PredictionBatch& batch) {
  out << "confidence,label\n";
  for (const auto& [p, y] : batch) out << fmt::format("{:.9g},{}\n", p, y);
}

nlohmann::json to_json(const ReliabilityReport& report) {
  auto bins = nlohmann::json::array();
  for (const auto& b : report.bins) {
    bins.push_back({{"lo", b.lo},
                    {"hi", b.hi},
                    {"count", b.count},
                    {"conf", b.mean_confidence},
                    {"acc", b.accuracy}});
  }
  return {{"bins", bins},
          {"summary", {{"ece", report.ece}, {"mce", report.mce}, {"brier", report.brier}}}};
}

}  // namespace nsplan
