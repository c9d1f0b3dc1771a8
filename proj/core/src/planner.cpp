#include "nsplan/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "nsplan/error.hpp"
#include "nsplan/rng.hpp"

namespace nsplan {

bool ig_value(double uncertainty, double gain, double cost) {
  for (double v : {uncertainty, gain, cost}) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("ig_value inputs must be finite and non-negative");
  }
  return uncertainty * gain > cost;
}

int convergence_bound(double tau_plan, double alpha, double initial_uncertainty, double eps_cal) {
  if (!(tau_plan > 0.0 && tau_plan < 1.0)) throw DomainError("tau_plan must lie in (0,1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  if (!(initial_uncertainty > 0.0 && initial_uncertainty < 1.0)) {
    throw DomainError("initial uncertainty must lie in (0,1)");
  }
  if (!(eps_cal >= 0.0) || !std::isfinite(eps_cal)) throw DomainError("eps_cal must be non-negative");
  const double target = 1.0 - tau_plan + eps_cal;
  if (initial_uncertainty <= target) return 0;
  const double k = std::ceil(std::log(target / initial_uncertainty) / std::log(1.0 - alpha));
  return std::max(0, static_cast<int>(k));
}

bool planner_relevant(const GroundPredicate& predicate) noexcept {
  return predicate.relation() == Relation::On || predicate.relation() == Relation::Clear;
}

ProbabilisticState goal_relevant(const ProbabilisticState& state, const Goal& goal) {
  const auto objects = goal.objects();
  ProbabilisticState out;
  for (const auto& [pred, p] : state.entries()) {
    if (!planner_relevant(pred)) continue;
    const bool touches_goal = std::any_of(pred.args().begin(), pred.args().end(),
                                          [&](const auto& a) { return objects.count(a) > 0; });
    if (!touches_goal) continue;
    out.set(pred, p);
    if (state.is_known(pred)) out.mark_known(pred);
  }
  return out;
}

std::optional<InfoChoice> choose_info_action(const ProbabilisticState& uncertain, const Goal& goal,
                                             const std::set<std::string>& occluded,
                                             const InfoPolicy& policy) {
  const auto critical = goal_relevant(uncertain, goal);
  if (critical.empty()) return std::nullopt;

  std::map<std::string, int> counts;
  for (const auto& [pred, _] : critical.entries()) {
    for (const auto& a : pred.args()) ++counts[a];
  }
  const auto goal_objects = goal.objects();
  // map order gives the smaller id on ties
  const std::string* best = nullptr;
  int best_count = -1;
  bool best_in_goal = false;
  for (const auto& [obj, count] : counts) {
    const bool in_goal = goal_objects.count(obj) > 0;
    if (count > best_count || (count == best_count && in_goal && !best_in_goal)) {
      best = &obj;
      best_count = count;
      best_in_goal = in_goal;
    }
  }

  InfoChoice choice{occluded.count(*best) ? InfoAction::PushObstacle : InfoAction::LookCloser, *best};
  const double gain =
      choice.action == InfoAction::PushObstacle ? policy.push_obstacle_gain : policy.look_closer_gain;
  if (!ig_value(state_uncertainty_independent(critical), gain, policy.cost)) return std::nullopt;
  return choice;
}

ProbabilisticState shrink_uncertainty(const ProbabilisticState& state, const std::string& target,
                                      double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in [0,1)");
  ProbabilisticState out;
  for (const auto& [pred, p] : state.entries()) {
    double q = p;
    if (pred.mentions(target)) {
      const double u = (1.0 - alpha) * predicate_uncertainty(p);
      q = p >= 0.5 ? 1.0 - u : u;
    }
    out.set(pred, q);
    if (state.is_known(pred) || pred.mentions(target)) out.mark_known(pred);
  }
  return out;
}

std::optional<SymbolicWorldState> planning_world(const std::set<GroundPredicate>& certain_true,
                                                 const std::vector<std::string>& objects) {
  std::map<std::string, std::string> below;
  std::set<std::string> supporting;
  SymbolicWorldState world;
  world.insert(atoms::hand_empty());
  for (const auto& pred : certain_true) {
    if (pred.relation() == Relation::On) {
      const auto& upper = pred.args()[0];
      const auto& lower = pred.args()[1];
      if (below.count(upper) || !supporting.insert(lower).second) return std::nullopt;
      below[upper] = lower;
      world.insert(atoms::on(upper, lower));
    } else if (pred.relation() == Relation::Clear) {
      world.insert(atoms::clear(pred.args()[0]));
    }
  }
  for (const auto& obj : objects) {
    if (!below.count(obj)) world.insert(atoms::on_table(obj));
  }
  if (!world.is_valid()) return std::nullopt;  // cyclic support
  return world;
}

SimulatedEnvironment::SimulatedEnvironment(Scene scene, NoiseConfig noise, std::uint64_t seed)
    : scene_(std::move(scene)), noise_(std::move(noise)), seed_(seed) {
  validate_scene(scene_);
  noise_.validate();
  occluded_ = occluded_objects(scene_);
}

ProbabilisticState SimulatedEnvironment::capture() {
  return perceive(scene_, noise_, derive_seed(seed_, static_cast<std::uint64_t>(captures_++)));
}

void SimulatedEnvironment::execute_info(const InfoChoice& choice) {
  scene_.object(choice.target);  // throws for unknown ids
  noise_ = apply_info_action(noise_, choice.action, choice.target);
}

ExecutionResult SimulatedEnvironment::execute_plan(const Plan& plan) const {
  return execute_in_world(true_world(), plan);
}

std::set<std::string> SimulatedEnvironment::occluded() const {
  std::set<std::string> out;
  for (const auto& o : occluded_) {
    if (!noise_.revealed.count(o)) out.insert(o);
  }
  return out;
}

void PlannerOptions::validate() const {
  if (!(tau_plan >= 0.5 && tau_plan < 1.0)) throw DomainError("tau_plan must lie in [0.5,1)");
  if (max_retries < 1) throw DomainError("max retries must be at least 1");
  if (!(exact_alpha > 0.0 && exact_alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  if (!(info_cost >= 0.0)) throw DomainError("info cost must be non-negative");
}

std::vector<double> PlanningEpisode::uncertainty_trace() const {
  std::vector<double> out;
  out.reserve(iterations.size());
  for (const auto& it : iterations) out.push_back(it.u_after);
  return out;
}

PlanningEpisode plan_under_uncertainty(SimulatedEnvironment& env, const Goal& goal,
                                       const PlannerOptions& options) {
  options.validate();
  goal.validate();
  const auto objects = env.scene().ids();
  for (const auto& g : goal.objects()) {
    if (std::find(objects.begin(), objects.end(), g) == objects.end()) {
      throw DomainError("goal mentions unknown object " + g);
    }
  }
  const auto started = std::chrono::steady_clock::now();
  const bool exact = options.gain_model == InfoGainModel::ExactMultiplicative;
  InfoPolicy policy;
  policy.cost = options.info_cost;
  policy.look_closer_gain = exact ? options.exact_alpha : env.noise().look_closer_gain;
  policy.push_obstacle_gain = exact ? options.exact_alpha : env.noise().push_obstacle_gain;

  PlanningEpisode ep;
  ep.goal = goal.to_string();
  std::optional<ProbabilisticState> belief;
  std::optional<InfoChoice> last_info;

  auto finish = [&]() {
    ep.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return ep;
  };

  for (int r = 1; r <= options.max_retries; ++r) {
    IterationRecord rec;
    rec.iteration = r;
    ep.modeled_time_ms += timing::kPerceptionMs;

    ProbabilisticState fused;
    if (exact && belief && last_info) {
      fused = shrink_uncertainty(*belief, last_info->target, options.exact_alpha);
    } else {
      auto observation = env.capture();
      fused = belief ? fuse_observation(*belief, observation) : std::move(observation);
    }
    rec.u_before = state_uncertainty_independent(goal_relevant(belief ? *belief : fused, goal));
    rec.u_after = state_uncertainty_independent(goal_relevant(fused, goal));
    belief = fused;
    last_info.reset();

    rec.belief = options.refine ? refine_state(fused, options.rules, options.bp) : fused;
    const auto partition = classify(rec.belief, options.tau_plan);
    rec.certain_true = partition.certain_true.size();
    rec.certain_false = partition.certain_false.size();
    rec.uncertain = partition.uncertain.size();

    ProbabilisticState uncertain;
    for (const auto& pred : partition.uncertain) uncertain.set(pred, *rec.belief.confidence(pred));
    rec.critical = goal_relevant(uncertain, goal).size();

    if (options.info_gathering && rec.critical > 0 && r < options.max_retries) {
      if (auto choice = choose_info_action(uncertain, goal, env.occluded(), policy)) {
        env.execute_info(*choice);
        rec.info = choice;
        last_info = choice;
        ++ep.info_actions;
        ep.modeled_time_ms += timing::kInfoActionMs;
        ep.iterations.push_back(std::move(rec));
        continue;
      }
    }

    const auto world = planning_world(partition.certain_true, objects);
    if (!world) {
      ep.iterations.push_back(std::move(rec));
      continue;
    }
    rec.planned = true;
    const auto search = astar(*world, goal, options.expansion_cap);
    ep.expansions += search.expansions;
    ep.modeled_time_ms += timing::kExpansionMs * static_cast<double>(search.expansions);
    if (!search.plan) {
      ep.iterations.push_back(std::move(rec));
      continue;
    }
    std::vector<std::string> steps;
    for (const auto& a : *search.plan) steps.push_back(a.to_string());
    rec.plan = std::move(steps);
    const auto exec = env.execute_plan(*search.plan);
    ep.manipulation_steps = static_cast<int>(exec.executed);
    ep.success = exec.completed && goal.satisfied_by(exec.final_state);
    rec.goal_reached = ep.success;
    ep.iterations.push_back(std::move(rec));
    return finish();
  }
  return finish();
}

nlohmann::json to_json(const PlanningEpisode& episode) {
  nlohmann::json iters = nlohmann::json::array();
  for (const auto& it : episode.iterations) {
    nlohmann::json j{{"iteration", it.iteration},
                     {"u_before", it.u_before},
                     {"u_after", it.u_after},
                     {"certain_true", it.certain_true},
                     {"certain_false", it.certain_false},
                     {"uncertain", it.uncertain},
                     {"critical", it.critical},
                     {"planned", it.planned},
                     {"belief", to_json(it.belief)}};
    j["info_action"] = it.info ? nlohmann::json{{"kind", to_string(it.info->action)},
                                                {"target", it.info->target}}
                               : nlohmann::json(nullptr);
    j["plan"] = it.plan ? nlohmann::json(*it.plan) : nlohmann::json(nullptr);
    j["goal_reached"] = it.goal_reached ? nlohmann::json(*it.goal_reached) : nlohmann::json(nullptr);
    iters.push_back(std::move(j));
  }
  return {{"goal", episode.goal},
          {"iterations", std::move(iters)},
          {"info_actions", episode.info_actions},
          {"manipulation_steps", episode.manipulation_steps},
          {"success", episode.success},
          {"expansions", episode.expansions},
          {"modeled_time_ms", episode.modeled_time_ms},
          {"uncertainty_trace", episode.uncertainty_trace()}};
}

void write_episode_csv(std::ostream& out, const std::vector<PlanningEpisode>& episodes) {
  out << "episode_id,step,U,action_kind\n";
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const auto& its = episodes[e].iterations;
    for (std::size_t s = 0; s < its.size(); ++s) {
      const std::string_view kind =
          its[s].info ? to_string(its[s].info->action) : (its[s].planned ? "plan" : "none");
      out << fmt::format("{},{},{:.9g},{}\n", e, s, its[s].u_after, kind);
    }
  }
  if (!out) throw IoError("failed writing episode CSV");
}

}  // namespace nsplan
