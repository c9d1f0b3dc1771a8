#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nsplan/belief.hpp"
#include "nsplan/blocks.hpp"
#include "nsplan/json.hpp"
#include "nsplan/mrf.hpp"
#include "nsplan/perception.hpp"
#include "nsplan/scene.hpp"

namespace nsplan {

/// True iff U·gain > cost. Throws DomainError for negative or non-finite inputs.
bool ig_value(double uncertainty, double gain, double cost);

/// k* = ceil(log((1 - tau + eps_cal) / U0) / log(1 - alpha)), or 0 when U0 is
/// already at or below the target 1 - tau + eps_cal.
int convergence_bound(double tau_plan, double alpha, double initial_uncertainty, double eps_cal);

/// Only On and Clear reach the planning state; the other relations are
/// observed but no action depends on them.
bool planner_relevant(const GroundPredicate& predicate) noexcept;

/// Planner-relevant predicates of `state` that mention a goal object.
ProbabilisticState goal_relevant(const ProbabilisticState& state, const Goal& goal);

struct InfoChoice {
  InfoAction action;
  std::string target;
  friend bool operator==(const InfoChoice&, const InfoChoice&) = default;
};

struct InfoPolicy {
  double look_closer_gain = 0.3;
  double push_obstacle_gain = 0.3;
  double cost = 0.1;
};

/// Picks the object named by the most critical predicates (uncertain,
/// planner-relevant, mentioning a goal object). Ties prefer goal objects, then
/// the smaller id. The object gets push_obstacle while occluded, look_closer
/// otherwise. Returns nothing when no predicate is critical or when
/// ig_value(U, gain, cost) rejects the action, with U the independent state
/// uncertainty of the critical predicates.
std::optional<InfoChoice> choose_info_action(const ProbabilisticState& uncertain, const Goal& goal,
                                             const std::set<std::string>& occluded,
                                             const InfoPolicy& policy = {});

/// Multiplies the uncertainty of every predicate mentioning `target` by
/// (1 - alpha), keeping the side of 0.5 it is on.
ProbabilisticState shrink_uncertainty(const ProbabilisticState& state, const std::string& target,
                                      double alpha);

/// Planning state built from certain-true predicates only: On atoms become
/// support, unsupported objects rest on the table, Clear comes from observed
/// Clear atoms, and the hand is empty. Nothing when the On atoms give an
/// object two supports, put two objects on one, or form a cycle.
std::optional<SymbolicWorldState> planning_world(const std::set<GroundPredicate>& certain_true,
                                                 const std::vector<std::string>& objects);

/// A scene, its perception oracle, and the viewing state that info actions
/// change. Each capture draws from a fresh seed derived from the base seed.
class SimulatedEnvironment {
 public:
  SimulatedEnvironment(Scene scene, NoiseConfig noise, std::uint64_t seed);

  ProbabilisticState capture();
  void execute_info(const InfoChoice& choice);
  /// Runs the plan against the true world.
  ExecutionResult execute_plan(const Plan& plan) const;

  const Scene& scene() const noexcept { return scene_; }
  const NoiseConfig& noise() const noexcept { return noise_; }
  SymbolicWorldState true_world() const { return world_from_scene(scene_); }
  /// Occluded objects whose occluder has not been pushed aside.
  std::set<std::string> occluded() const;
  int captures() const noexcept { return captures_; }

 private:
  Scene scene_;
  NoiseConfig noise_;
  std::uint64_t seed_;
  std::set<std::string> occluded_;
  int captures_ = 0;
};

enum class InfoGainModel {
  Resample,               // re-perceive after every info action and fuse
  ExactMultiplicative,    // perceive once; each action scales u by (1 - alpha)
};

struct PlannerOptions {
  double tau_plan = 0.7;
  int max_retries = 5;  // R
  bool info_gathering = true;
  bool refine = true;  // MRF refinement before classification
  DomainRules rules;
  BpOptions bp;
  InfoGainModel gain_model = InfoGainModel::Resample;
  double exact_alpha = 0.3;
  double info_cost = 0.1;
  std::size_t expansion_cap = kDefaultExpansionCap;

  /// Throws DomainError for out-of-range values.
  void validate() const;
};

/// Deterministic time model, so exported timings do not depend on the host.
namespace timing {
inline constexpr double kPerceptionMs = 2.0;
inline constexpr double kInfoActionMs = 3.0;
inline constexpr double kExpansionMs = 0.002;
}  // namespace timing

struct IterationRecord {
  int iteration = 0;               // 1-based
  ProbabilisticState belief;       // classified belief
  double u_before = 0.0;           // goal-relevant U before this iteration's update
  double u_after = 0.0;            // goal-relevant U after it
  std::size_t certain_true = 0;
  std::size_t certain_false = 0;
  std::size_t uncertain = 0;
  std::size_t critical = 0;
  std::optional<InfoChoice> info;
  bool planned = false;            // a planning state was built and searched
  std::optional<std::vector<std::string>> plan;
  std::optional<bool> goal_reached;
};

struct PlanningEpisode {
  std::string goal;
  std::vector<IterationRecord> iterations;
  int info_actions = 0;  // k
  int manipulation_steps = 0;
  bool success = false;
  std::size_t expansions = 0;
  double modeled_time_ms = 0.0;
  double wall_time_ms = 0.0;  // informational, never exported to CSV

  /// u_after of every iteration: U_0, U_1, ...
  std::vector<double> uncertainty_trace() const;
};

/// The perceive / classify / gather-or-plan loop. Only the critical
/// predicates decide whether to gather more information; planning uses the
/// certain-true predicates alone. An empty plan (goal already holds) is a
/// plan. Success means the executed plan completed and the true world
/// satisfies the goal. Throws DomainError when the goal names unknown objects.
PlanningEpisode plan_under_uncertainty(SimulatedEnvironment& env, const Goal& goal,
                                       const PlannerOptions& options = {});

nlohmann::json to_json(const PlanningEpisode& episode);

/// Rows of `episode_id,step,U,action_kind`; action_kind is the info action
/// taken after the step, `plan` when the step planned, `none` otherwise.
void write_episode_csv(std::ostream& out, const std::vector<PlanningEpisode>& episodes);

}  // namespace nsplan
