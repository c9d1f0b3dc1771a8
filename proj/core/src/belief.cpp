#include "nsplan/belief.hpp"

#include <algorithm>
#include <cmath>

#include "nsplan/error.hpp"

namespace nsplan {

namespace {

void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError(std::string(what) + " must lie in [0,1], got " + std::to_string(p));
  }
}

}  // namespace

void ProbabilisticState::set(const GroundPredicate& predicate, double p) {
  require_probability(p, "confidence");
  entries_[predicate] = p;
}

void ProbabilisticState::mark_known(const GroundPredicate& predicate) {
  if (!contains(predicate)) {
    throw DomainError("cannot mark unknown predicate as known: " + predicate.to_string());
  }
  known_.insert(predicate);
}

std::optional<double> ProbabilisticState::confidence(const GroundPredicate& predicate) const {
  auto it = entries_.find(predicate);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

double predicate_uncertainty(double p) {
  require_probability(p, "confidence");
  return 1.0 - std::max(p, 1.0 - p);
}

double state_uncertainty_independent(const ProbabilisticState& state) {
  double all_correct = 1.0;
  for (const auto& [_, p] : state.entries()) all_correct *= 1.0 - predicate_uncertainty(p);
  return 1.0 - all_correct;
}

CertaintyPartition classify(const ProbabilisticState& state, double tau_plan) {
  if (!(tau_plan > 0.0 && tau_plan < 1.0)) {
    throw DomainError("tau_plan must lie in (0,1), got " + std::to_string(tau_plan));
  }
  CertaintyPartition out;
  for (const auto& [pred, p] : state.entries()) {
    if (p > tau_plan) {
      out.certain_true.insert(pred);
    } else if (p < 1.0 - tau_plan) {
      out.certain_false.insert(pred);
    } else {
      out.uncertain.insert(pred);
    }
  }
  return out;
}

double reduction_law(double initial_uncertainty, double alpha, int steps) {
  require_probability(initial_uncertainty, "initial uncertainty");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("alpha must lie in (0,1), got " + std::to_string(alpha));
  }
  if (steps < 0) throw DomainError("step count must be non-negative");
  return initial_uncertainty * std::pow(1.0 - alpha, steps);
}

ProbabilisticState fuse_observation(const ProbabilisticState& prior,
                                    const ProbabilisticState& observation) {
  ProbabilisticState out = prior;
  for (const auto& [pred, p_obs] : observation.entries()) {
    const auto p_prior = prior.confidence(pred);
    const bool keep_prior =
        p_prior && predicate_uncertainty(*p_prior) < predicate_uncertainty(p_obs);
    out.set(pred, keep_prior ? *p_prior : p_obs);
    out.mark_known(pred);
  }
  return out;
}

nlohmann::json to_json(const ProbabilisticState& state) {
  auto records = nlohmann::json::array();
  for (const auto& [pred, p] : state.entries()) {
    records.push_back({{"relation", std::string(to_string(pred.relation()))},
                       {"args", pred.args()},
                       {"confidence", p},
                       {"known", state.is_known(pred)}});
  }
  return {{"predicates", records}};
}

ProbabilisticState state_from_json(const nlohmann::json& doc) {
  ProbabilisticState state;
  try {
    for (const auto& rec : doc.at("predicates")) {
      const auto name = rec.at("relation").get<std::string>();
      const auto rel = parse_relation(name);
      if (!rel) throw DomainError("unknown relation: " + name);
      GroundPredicate pred(*rel, rec.at("args").get<std::vector<std::string>>());
      state.set(pred, rec.at("confidence").get<double>());
      if (rec.value("known", false)) state.mark_known(pred);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed state document: ") + e.what());
  }
  return state;
}

std::string dump_state(const ProbabilisticState& state) { return to_json(state).dump(2); }

ProbabilisticState parse_state(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("state document is not valid JSON: ") + e.what());
  }
  return state_from_json(doc);
}

}  // namespace nsplan
