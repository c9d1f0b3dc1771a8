#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "nsplan/json.hpp"
#include "nsplan/predicate.hpp"

namespace nsplan {

/// Confidence-weighted symbolic state: each ground predicate maps to the
/// probability that it holds. `known` tracks predicates that were refreshed by
/// a re-observation.
class ProbabilisticState {
 public:
  using Entries = std::map<GroundPredicate, double>;

  /// Throws DomainError unless 0 <= p <= 1.
  void set(const GroundPredicate& predicate, double p);
  /// Throws DomainError if the predicate has no entry.
  void mark_known(const GroundPredicate& predicate);

  std::optional<double> confidence(const GroundPredicate& predicate) const;
  bool contains(const GroundPredicate& predicate) const { return entries_.count(predicate) > 0; }
  bool is_known(const GroundPredicate& predicate) const { return known_.count(predicate) > 0; }

  const Entries& entries() const noexcept { return entries_; }
  const std::set<GroundPredicate>& known() const noexcept { return known_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  friend bool operator==(const ProbabilisticState&, const ProbabilisticState&) = default;

 private:
  Entries entries_;
  std::set<GroundPredicate> known_;
};

struct CertaintyPartition {
  std::set<GroundPredicate> certain_true;
  std::set<GroundPredicate> certain_false;
  std::set<GroundPredicate> uncertain;
};

/// u = 1 - max(p, 1-p); the misclassification probability of one predicate.
double predicate_uncertainty(double p);

/// Probability that at least one predicate is misclassified, assuming
/// independence: 1 - prod(1 - u_i).
double state_uncertainty_independent(const ProbabilisticState& state);

/// p > tau -> certain_true, p < 1 - tau -> certain_false, otherwise uncertain.
/// Values exactly on a threshold are uncertain.
CertaintyPartition classify(const ProbabilisticState& state, double tau_plan);

/// U_k = U0 * (1 - alpha)^k.
double reduction_law(double initial_uncertainty, double alpha, int steps);

/// Belief update after a re-observation. For each predicate in `observation`
/// the more extreme confidence wins (ties keep the observation) and the
/// predicate is marked known; prior-only predicates carry over unchanged.
ProbabilisticState fuse_observation(const ProbabilisticState& prior,
                                    const ProbabilisticState& observation);

nlohmann::json to_json(const ProbabilisticState& state);
ProbabilisticState state_from_json(const nlohmann::json& doc);

std::string dump_state(const ProbabilisticState& state);
ProbabilisticState parse_state(const std::string& text);

}  // namespace nsplan
