#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "nsplan/perception.hpp"
#include "nsplan/scene.hpp"

namespace nsplan {

/// Planner-level fluents. OnTable, Holding and HandEmpty exist only here; the
/// perception layer observes On and Clear.
enum class Fluent : std::uint8_t { On, OnTable, Clear, Holding, HandEmpty };

struct Atom {
  Fluent fluent;
  std::string x;  // empty for HandEmpty
  std::string y;  // On only

  std::string to_string() const;
  friend auto operator<=>(const Atom&, const Atom&) = default;
  friend bool operator==(const Atom&, const Atom&) = default;
};

namespace atoms {
Atom on(std::string x, std::string y);
Atom on_table(std::string x);
Atom clear(std::string x);
Atom holding(std::string x);
Atom hand_empty();
}  // namespace atoms

/// Deterministic STRIPS state for the blocks world.
class SymbolicWorldState {
 public:
  SymbolicWorldState() = default;
  explicit SymbolicWorldState(std::set<Atom> atoms) : atoms_(std::move(atoms)) {}

  bool contains(const Atom& a) const { return atoms_.count(a) > 0; }
  const std::set<Atom>& atoms() const noexcept { return atoms_; }
  void insert(Atom a) { atoms_.insert(std::move(a)); }
  void erase(const Atom& a) { atoms_.erase(a); }

  /// Exactly one of HandEmpty / Holding(x); a held object has no support atom;
  /// each object rests on at most one thing; support is acyclic.
  bool is_valid() const;
  std::string to_string() const;

  friend auto operator<=>(const SymbolicWorldState&, const SymbolicWorldState&) = default;
  friend bool operator==(const SymbolicWorldState&, const SymbolicWorldState&) = default;

 private:
  std::set<Atom> atoms_;
};

/// All objects on the table, clear, hand empty.
SymbolicWorldState flat_world(const std::vector<std::string>& objects);
/// Exact world state of a simulated scene.
SymbolicWorldState world_from_scene(const Scene& scene);

/// Conjunction of On / Clear atoms.
struct Goal {
  std::set<Atom> atoms;

  /// Throws DomainError for non-On/Clear atoms or On(A,B) together with Clear(B).
  void validate() const;
  bool satisfied_by(const SymbolicWorldState& state) const;
  std::set<std::string> objects() const;
  std::string to_string() const;
};

/// Parses `On(a,b) & On(b,c) & Clear(a)`.
Goal parse_goal(std::string_view text);

struct GroundAction {
  std::string name;  // pick, place, putdown, look_closer, push_obstacle
  std::vector<std::string> args;
  std::vector<Atom> pre;
  std::vector<Atom> add;
  std::vector<Atom> del;
  std::optional<InfoAction> info;  // set for information-gathering actions only

  bool is_info() const noexcept { return info.has_value(); }
  std::string to_string() const;
  friend bool operator==(const GroundAction& a, const GroundAction& b) {
    return a.name == b.name && a.args == b.args;
  }
};

/// pick(x) from the table, pick(x,y) off y, place(x,y), putdown(x), plus one
/// look_closer and push_obstacle per object; sorted by name then arguments.
/// Throws DomainError for an empty object list.
std::vector<GroundAction> ground_domain(const std::vector<std::string>& objects);
std::vector<GroundAction> manipulation_actions(const std::vector<std::string>& objects);

bool applicable(const SymbolicWorldState& state, const GroundAction& action);
/// (state \ del) ∪ add. Throws InapplicableError on unmet preconditions.
SymbolicWorldState apply(const SymbolicWorldState& state, const GroundAction& action);

/// Unsatisfied goal atoms, not counting Clear(x) while some On(x,·) goal is
/// unsatisfied (placing x achieves both at once). Never exceeds the true cost.
int heuristic_unsat(const SymbolicWorldState& state, const Goal& goal);

using Plan = std::vector<GroundAction>;

struct SearchResult {
  std::optional<Plan> plan;  // nullopt: goal unreachable
  std::size_t expansions = 0;
};

inline constexpr std::size_t kDefaultExpansionCap = 1'000'000;

/// Unit-cost A* with heuristic_unsat. Ties on f are broken by h, then by
/// generation order, which follows the sorted action list. Throws
/// CapacityError when the expansion cap is exceeded.
SearchResult astar(const SymbolicWorldState& init, const Goal& goal,
                   std::size_t max_expansions = kDefaultExpansionCap);

struct ExecutionResult {
  SymbolicWorldState final_state;
  std::size_t executed = 0;
  bool completed = false;
};

/// Runs a plan against the true world. Grasps only need the object to be clear
/// and the hand empty, wherever the object actually rests; placements follow
/// the STRIPS preconditions. Stops at the first action that cannot run.
ExecutionResult execute_in_world(const SymbolicWorldState& truth, const Plan& plan);

}  // namespace nsplan
