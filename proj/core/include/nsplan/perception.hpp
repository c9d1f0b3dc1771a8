#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "nsplan/belief.hpp"
#include "nsplan/calibration.hpp"
#include "nsplan/scene.hpp"

namespace nsplan {

enum class InfoAction { LookCloser, PushObstacle };

std::string_view to_string(InfoAction action) noexcept;
/// Accepts "look_closer" and "push_obstacle"; throws DomainError otherwise.
InfoAction parse_info_action(std::string_view name);

/// Parameters of the synthetic perception oracle, plus the per-object viewing
/// state accumulated by information-gathering actions.
struct NoiseConfig {
  double flip_rate = 0.1;       // eta in [0, 0.5)
  double logit_noise_sd = 0.5;  // sigma_n >= 0; doubled for occluded objects
  double miscal_gamma = 1.0;    // 1 = calibrated
  double look_closer_gain = 0.3;
  double push_obstacle_gain = 0.3;

  /// Uncertainty scale per object (absent = 1).
  std::map<std::string, double> focus;
  /// Objects whose occluder has been pushed aside.
  std::set<std::string> revealed;

  double gain(InfoAction action) const;
  /// Smallest focus scale over the predicate's arguments.
  double scale_for(const GroundPredicate& predicate) const;
  /// Throws DomainError for out-of-range fields.
  void validate() const;

  friend bool operator==(const NoiseConfig&, const NoiseConfig&) = default;
};

/// Shrinks the uncertainty scale of `target` by (1 - gain). push_obstacle also
/// removes the target's occlusion. A zero gain leaves the config unchanged
/// (apart from the occlusion flag for push_obstacle on an occluded target).
NoiseConfig apply_info_action(const NoiseConfig& config, InfoAction action, const std::string& target);

struct Observation {
  GroundPredicate predicate;
  int truth;          // ground truth of the scene
  double confidence;  // emitted confidence
  int label;          // calibration label, drawn from the calibrated confidence
};

/// Emits one observation per candidate predicate of the scene.
///
/// Soft truth t~ = t(1-eta) + (1-t)eta is perturbed in logit space by
/// N(0, sigma^2) (sigma doubled for occluded objects) and passed through the
/// miscalibration map p^g / (p^g + (1-p)^g). At uncertainty scale s < 1 the
/// reading's uncertainty becomes s·u and, with probability 1 - s, its side is
/// resolved to the truth. A pure function of its inputs and `seed`.
std::vector<Observation> observe(const Scene& scene, const NoiseConfig& config, std::uint64_t seed);

ProbabilisticState perceive(const Scene& scene, const NoiseConfig& config, std::uint64_t seed);

/// Calibration stream: (confidence, label) of every observation.
PredictionBatch prediction_batch(const std::vector<Observation>& observations);

/// Geometric check of an On(A,B) confidence: z_A - z_B > 0.02 and d_xy < 0.15.
/// One violation halves the confidence, two multiply it by 0.1.
double spatial_validate_on(double height_gap, double planar_distance, double p);
/// Same check with positions taken from `estimate`. Throws DomainError for
/// non-On predicates.
double spatial_validate_on(const Scene& estimate, const GroundPredicate& predicate, double p);

using RelationThresholds = std::map<Relation, double>;

/// On 0.5, LeftOf 0.3, CloseTo 0.3, Clear 0.3, Touching 0.5.
RelationThresholds default_relation_thresholds();

/// Predicates whose confidence reaches their relation's threshold.
std::set<GroundPredicate> apply_relation_thresholds(const ProbabilisticState& state,
                                                    const RelationThresholds& thresholds);

struct ThresholdSearch {
  RelationThresholds thresholds;
  std::map<Relation, double> f1;
  std::vector<Relation> skipped;  // single-class batches
};

std::vector<double> default_threshold_grid();

/// F1 of the rule "positive iff p >= tau".
double f1_at(const PredictionBatch& batch, double tau);

/// Per relation, the grid value maximizing F1 (ties to the smaller value).
/// Relations whose batch holds a single class are reported in `skipped` and
/// keep their default threshold.
ThresholdSearch grid_search_thresholds(const std::map<Relation, PredictionBatch>& batches,
                                       std::vector<double> grid = default_threshold_grid());

}  // namespace nsplan
