#include "nsplan/perception.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nsplan/error.hpp"

namespace nsplan {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

double miscalibrate(double p, double gamma) {
  if (gamma == 1.0) return p;
  const double a = std::pow(p, gamma);
  const double b = std::pow(1.0 - p, gamma);
  return a / (a + b);
}

}  // namespace

std::string_view to_string(InfoAction action) noexcept {
  return action == InfoAction::LookCloser ? "look_closer" : "push_obstacle";
}

InfoAction parse_info_action(std::string_view name) {
  if (name == "look_closer") return InfoAction::LookCloser;
  if (name == "push_obstacle") return InfoAction::PushObstacle;
  throw DomainError("unknown information-gathering action: " + std::string(name));
}

double NoiseConfig::gain(InfoAction action) const {
  return action == InfoAction::LookCloser ? look_closer_gain : push_obstacle_gain;
}

double NoiseConfig::scale_for(const GroundPredicate& predicate) const {
  double s = 1.0;
  for (const auto& a : predicate.args()) {
    if (auto it = focus.find(a); it != focus.end()) s = std::min(s, it->second);
  }
  return s;
}

void NoiseConfig::validate() const {
  if (!(flip_rate >= 0.0 && flip_rate < 0.5)) throw DomainError("flip rate must lie in [0, 0.5)");
  if (!(logit_noise_sd >= 0.0)) throw DomainError("logit noise sd must be non-negative");
  if (!(miscal_gamma > 0.0)) throw DomainError("miscalibration gamma must be positive");
  for (double g : {look_closer_gain, push_obstacle_gain}) {
    if (!(g >= 0.0 && g < 1.0)) throw DomainError("information gain must lie in [0, 1)");
  }
  for (const auto& [id, s] : focus) {
    if (!(s > 0.0 && s <= 1.0)) throw DomainError("focus scale for " + id + " must lie in (0, 1]");
  }
}

NoiseConfig apply_info_action(const NoiseConfig& config, InfoAction action, const std::string& target) {
  if (target.empty()) throw DomainError("information action needs a target object");
  NoiseConfig out = config;
  const double gain = config.gain(action);
  if (gain > 0.0) {
    auto [it, _] = out.focus.try_emplace(target, 1.0);
    it->second *= 1.0 - gain;
  }
  if (action == InfoAction::PushObstacle) out.revealed.insert(target);
  return out;
}

std::vector<Observation> observe(const Scene& scene, const NoiseConfig& config, std::uint64_t seed) {
  config.validate();
  const auto truth = ground_truth_state(scene);
  const auto occluded = occluded_objects(scene);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Observation> out;
  for (auto& pred : all_ground_predicates(scene.ids())) {
    // Fixed draw count per predicate keeps streams aligned across configs.
    const double z = gauss(rng);
    const double u_label = unit(rng);
    const double u_resolve = unit(rng);

    const int t = truth.count(pred) ? 1 : 0;
    const double soft = t ? 1.0 - config.flip_rate : config.flip_rate;
    const bool hidden = std::any_of(pred.args().begin(), pred.args().end(), [&](const auto& a) {
      return occluded.count(a) && !config.revealed.count(a);
    });
    const double sigma = config.logit_noise_sd * (hidden ? 2.0 : 1.0);

    double p_cal = soft;
    if (sigma > 0.0) {
      const double clamped = std::clamp(soft, 1e-6, 1.0 - 1e-6);
      p_cal = logistic(logit(clamped) + sigma * z);
    }
    const int label = u_label < p_cal ? 1 : 0;

    double p = miscalibrate(p_cal, config.miscal_gamma);
    const double scale = config.scale_for(pred);
    if (scale < 1.0) {
      bool side = p >= 0.5;
      if (u_resolve >= scale) side = t == 1;
      const double u = scale * predicate_uncertainty(p);
      p = side ? 1.0 - u : u;
    }
    out.push_back({std::move(pred), t, p, label});
  }
  return out;
}

ProbabilisticState perceive(const Scene& scene, const NoiseConfig& config, std::uint64_t seed) {
  ProbabilisticState state;
  for (const auto& obs : observe(scene, config, seed)) state.set(obs.predicate, obs.confidence);
  return state;
}

PredictionBatch prediction_batch(const std::vector<Observation>& observations) {
  PredictionBatch batch;
  batch.reserve(observations.size());
  for (const auto& o : observations) batch.push_back({o.confidence, o.label});
  return batch;
}

double spatial_validate_on(double height_gap, double planar_distance, double p) {
  const int violations = (height_gap > geometry::kOnMinHeightGap ? 0 : 1) +
                         (planar_distance < geometry::kOnMaxPlanarDist ? 0 : 1);
  switch (violations) {
    case 0: return p;
    case 1: return p * 0.5;
    default: return p * 0.1;
  }
}

double spatial_validate_on(const Scene& estimate, const GroundPredicate& predicate, double p) {
  if (predicate.relation() != Relation::On) {
    throw DomainError("spatial validation applies to On only, got " + predicate.to_string());
  }
  const auto& a = estimate.object(predicate.args()[0]).position;
  const auto& b = estimate.object(predicate.args()[1]).position;
  return spatial_validate_on(a.z - b.z, std::hypot(a.x - b.x, a.y - b.y), p);
}

RelationThresholds default_relation_thresholds() {
  return {{Relation::On, 0.5},
          {Relation::LeftOf, 0.3},
          {Relation::CloseTo, 0.3},
          {Relation::Touching, 0.5},
          {Relation::Clear, 0.3}};
}

std::set<GroundPredicate> apply_relation_thresholds(const ProbabilisticState& state,
                                                    const RelationThresholds& thresholds) {
  std::set<GroundPredicate> out;
  for (const auto& [pred, p] : state.entries()) {
    auto it = thresholds.find(pred.relation());
    if (it == thresholds.end()) {
      throw DomainError("no threshold for relation " + std::string(to_string(pred.relation())));
    }
    if (p >= it->second) out.insert(pred);
  }
  return out;
}

std::vector<double> default_threshold_grid() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
}

double f1_at(const PredictionBatch& batch, double tau) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& [p, y] : batch) {
    const bool predicted = p >= tau;
    if (predicted && y == 1) ++tp;
    if (predicted && y == 0) ++fp;
    if (!predicted && y == 1) ++fn;
  }
  if (tp == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

ThresholdSearch grid_search_thresholds(const std::map<Relation, PredictionBatch>& batches,
                                       std::vector<double> grid) {
  if (grid.empty()) throw DomainError("threshold grid is empty");
  std::sort(grid.begin(), grid.end());
  ThresholdSearch out;
  out.thresholds = default_relation_thresholds();
  for (const auto& [rel, batch] : batches) {
    const auto positives = std::count_if(batch.begin(), batch.end(), [](auto& p) { return p.label == 1; });
    if (positives == 0 || positives == static_cast<std::ptrdiff_t>(batch.size())) {
      out.skipped.push_back(rel);
      continue;
    }
    double best_tau = grid.front();
    double best_f1 = -1.0;
    for (double tau : grid) {
      const double f1 = f1_at(batch, tau);
      if (f1 > best_f1) {
        best_f1 = f1;
        best_tau = tau;
      }
    }
    out.thresholds[rel] = best_tau;
    out.f1[rel] = best_f1;
  }
  return out;
}

}  // namespace nsplan
