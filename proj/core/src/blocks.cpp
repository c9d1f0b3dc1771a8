#include "nsplan/blocks.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <tuple>

#include "nsplan/error.hpp"

namespace nsplan {

namespace atoms {
Atom on(std::string x, std::string y) { return {Fluent::On, std::move(x), std::move(y)}; }
Atom on_table(std::string x) { return {Fluent::OnTable, std::move(x), {}}; }
Atom clear(std::string x) { return {Fluent::Clear, std::move(x), {}}; }
Atom holding(std::string x) { return {Fluent::Holding, std::move(x), {}}; }
Atom hand_empty() { return {Fluent::HandEmpty, {}, {}}; }
}  // namespace atoms

std::string Atom::to_string() const {
  switch (fluent) {
    case Fluent::On: return "On(" + x + "," + y + ")";
    case Fluent::OnTable: return "OnTable(" + x + ")";
    case Fluent::Clear: return "Clear(" + x + ")";
    case Fluent::Holding: return "Holding(" + x + ")";
    case Fluent::HandEmpty: return "HandEmpty";
  }
  return "?";
}

bool SymbolicWorldState::is_valid() const {
  int hand = 0;
  std::map<std::string, int> supports;
  std::map<std::string, std::string> below;
  std::set<std::string> held;
  for (const auto& a : atoms_) {
    switch (a.fluent) {
      case Fluent::HandEmpty: ++hand; break;
      case Fluent::Holding: ++hand; held.insert(a.x); break;
      case Fluent::OnTable: ++supports[a.x]; break;
      case Fluent::On:
        if (a.x == a.y) return false;
        ++supports[a.x];
        below[a.x] = a.y;
        break;
      case Fluent::Clear: break;
    }
  }
  if (hand != 1) return false;
  for (const auto& [obj, count] : supports) {
    if (count > 1 || held.count(obj)) return false;
  }
  for (const auto& [start, _] : below) {
    std::string cur = start;
    for (std::size_t steps = 0; below.count(cur); ++steps) {
      cur = below.at(cur);
      if (cur == start || steps > below.size()) return false;
    }
  }
  return true;
}

std::string SymbolicWorldState::to_string() const {
  std::string out = "{";
  bool first = true;
  for (const auto& a : atoms_) {
    if (!first) out += ", ";
    out += a.to_string();
    first = false;
  }
  return out + "}";
}

SymbolicWorldState flat_world(const std::vector<std::string>& objects) {
  SymbolicWorldState s;
  s.insert(atoms::hand_empty());
  for (const auto& o : objects) {
    s.insert(atoms::on_table(o));
    s.insert(atoms::clear(o));
  }
  return s;
}

SymbolicWorldState world_from_scene(const Scene& scene) {
  SymbolicWorldState s;
  s.insert(atoms::hand_empty());
  std::set<std::string> supported, supporting;
  for (const auto& [upper, lower] : scene.support) {
    s.insert(atoms::on(upper, lower));
    supported.insert(upper);
    supporting.insert(lower);
  }
  for (const auto& o : scene.objects) {
    if (!supported.count(o.id)) s.insert(atoms::on_table(o.id));
    if (!supporting.count(o.id)) s.insert(atoms::clear(o.id));
  }
  return s;
}

void Goal::validate() const {
  for (const auto& a : atoms) {
    if (a.fluent != Fluent::On && a.fluent != Fluent::Clear) {
      throw DomainError("goals may only contain On and Clear atoms, got " + a.to_string());
    }
    if (a.fluent == Fluent::On && atoms.count(atoms::clear(a.y))) {
      throw DomainError("inconsistent goal: " + a.to_string() + " with Clear(" + a.y + ")");
    }
  }
}

bool Goal::satisfied_by(const SymbolicWorldState& state) const {
  return std::all_of(atoms.begin(), atoms.end(), [&](const Atom& a) { return state.contains(a); });
}

std::set<std::string> Goal::objects() const {
  std::set<std::string> out;
  for (const auto& a : atoms) {
    if (!a.x.empty()) out.insert(a.x);
    if (!a.y.empty()) out.insert(a.y);
  }
  return out;
}

std::string Goal::to_string() const {
  std::string out;
  for (const auto& a : atoms) {
    if (!out.empty()) out += " & ";
    out += a.to_string();
  }
  return out;
}

Goal parse_goal(std::string_view text) {
  Goal goal;
  while (!text.empty()) {
    const auto amp = text.find('&');
    const auto token = text.substr(0, amp);
    if (token.find_first_not_of(" \t") != std::string_view::npos) {
      const auto pred = GroundPredicate::parse(token);
      if (pred.relation() == Relation::On) {
        goal.atoms.insert(atoms::on(pred.args()[0], pred.args()[1]));
      } else if (pred.relation() == Relation::Clear) {
        goal.atoms.insert(atoms::clear(pred.args()[0]));
      } else {
        throw DomainError("goals may only use On and Clear, got " + pred.to_string());
      }
    }
    if (amp == std::string_view::npos) break;
    text.remove_prefix(amp + 1);
  }
  if (goal.atoms.empty()) throw DomainError("empty goal");
  goal.validate();
  return goal;
}

std::string GroundAction::to_string() const {
  std::string out = name + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ",";
    out += args[i];
  }
  return out + ")";
}

std::vector<GroundAction> manipulation_actions(const std::vector<std::string>& objects) {
  std::vector<GroundAction> out;
  for (const auto& x : objects) {
    out.push_back({"pick", {x}, {atoms::clear(x), atoms::hand_empty(), atoms::on_table(x)}, {atoms::holding(x)},
                   {atoms::clear(x), atoms::hand_empty(), atoms::on_table(x)}, std::nullopt});
    out.push_back({"putdown", {x}, {atoms::holding(x)}, {atoms::on_table(x), atoms::clear(x), atoms::hand_empty()},
                   {atoms::holding(x)}, std::nullopt});
    for (const auto& y : objects) {
      if (x == y) continue;
      out.push_back({"pick", {x, y}, {atoms::clear(x), atoms::hand_empty(), atoms::on(x, y)}, {atoms::holding(x), atoms::clear(y)},
                     {atoms::clear(x), atoms::hand_empty(), atoms::on(x, y)}, std::nullopt});
      out.push_back({"place", {x, y}, {atoms::holding(x), atoms::clear(y)}, {atoms::on(x, y), atoms::clear(x), atoms::hand_empty()},
                     {atoms::holding(x), atoms::clear(y)}, std::nullopt});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.name, a.args) < std::tie(b.name, b.args);
  });
  return out;
}

std::vector<GroundAction> ground_domain(const std::vector<std::string>& objects) {
  if (objects.empty()) throw DomainError("domain needs at least one object");
  auto out = manipulation_actions(objects);
  for (const auto& x : objects) {
    out.push_back({"look_closer", {x}, {}, {}, {}, InfoAction::LookCloser});
    out.push_back({"push_obstacle", {x}, {}, {}, {}, InfoAction::PushObstacle});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.name, a.args) < std::tie(b.name, b.args);
  });
  return out;
}

bool applicable(const SymbolicWorldState& state, const GroundAction& action) {
  return std::all_of(action.pre.begin(), action.pre.end(),
                     [&](const Atom& a) { return state.contains(a); });
}

SymbolicWorldState apply(const SymbolicWorldState& state, const GroundAction& action) {
  if (!applicable(state, action)) {
    throw InapplicableError(action.to_string() + " is not applicable in " + state.to_string());
  }
  SymbolicWorldState next = state;
  for (const auto& a : action.del) next.erase(a);
  for (const auto& a : action.add) next.insert(a);
  return next;
}

int heuristic_unsat(const SymbolicWorldState& state, const Goal& goal) {
  std::set<std::string> pending_upper;
  int h = 0;
  for (const auto& a : goal.atoms) {
    if (a.fluent == Fluent::On && !state.contains(a)) {
      ++h;
      pending_upper.insert(a.x);
    }
  }
  for (const auto& a : goal.atoms) {
    if (a.fluent != Fluent::On && !state.contains(a) && !pending_upper.count(a.x)) ++h;
  }
  return h;
}

namespace {

std::vector<std::string> objects_of(const SymbolicWorldState& state, const Goal& goal) {
  std::set<std::string> objs = goal.objects();
  for (const auto& a : state.atoms()) {
    if (!a.x.empty()) objs.insert(a.x);
    if (!a.y.empty()) objs.insert(a.y);
  }
  return {objs.begin(), objs.end()};
}

}  // namespace

SearchResult astar(const SymbolicWorldState& init, const Goal& goal, std::size_t max_expansions) {
  if (!init.is_valid()) throw DomainError("initial state violates world invariants: " + init.to_string());
  const auto actions = manipulation_actions(objects_of(init, goal));

  struct Node {
    SymbolicWorldState state;
    int g;
    std::size_t parent;
    std::size_t action;
  };
  constexpr std::size_t kRoot = static_cast<std::size_t>(-1);
  std::vector<Node> nodes;
  std::map<SymbolicWorldState, int> best_g;
  // (f, h, node id): smallest first
  using Entry = std::tuple<int, int, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

  nodes.push_back({init, 0, kRoot, kRoot});
  best_g[init] = 0;
  open.emplace(heuristic_unsat(init, goal), heuristic_unsat(init, goal), 0);

  SearchResult result;
  while (!open.empty()) {
    const auto [f, h, id] = open.top();
    open.pop();
    if (nodes[id].g > best_g[nodes[id].state]) continue;  // stale entry
    if (goal.satisfied_by(nodes[id].state)) {
      Plan plan;
      for (std::size_t cur = id; nodes[cur].parent != kRoot; cur = nodes[cur].parent) {
        plan.push_back(actions[nodes[cur].action]);
      }
      std::reverse(plan.begin(), plan.end());
      result.plan = std::move(plan);
      return result;
    }
    if (++result.expansions > max_expansions) {
      throw CapacityError("A* exceeded " + std::to_string(max_expansions) + " expansions");
    }
    for (std::size_t k = 0; k < actions.size(); ++k) {
      if (!applicable(nodes[id].state, actions[k])) continue;
      SymbolicWorldState next = apply(nodes[id].state, actions[k]);
      const int g = nodes[id].g + 1;
      auto [it, inserted] = best_g.try_emplace(next, g);
      if (!inserted) {
        if (it->second <= g) continue;
        it->second = g;
      }
      const int hn = heuristic_unsat(next, goal);
      nodes.push_back({std::move(next), g, id, k});
      open.emplace(g + hn, hn, nodes.size() - 1);
    }
  }
  return result;
}

ExecutionResult execute_in_world(const SymbolicWorldState& truth, const Plan& plan) {
  ExecutionResult out{truth, 0, false};
  auto& s = out.final_state;
  for (const auto& action : plan) {
    if (action.is_info()) {
      ++out.executed;
      continue;
    }
    if (action.name == "pick") {
      const auto& x = action.args[0];
      if (!s.contains(atoms::clear(x)) || !s.contains(atoms::hand_empty())) return out;
      // grasp x from wherever it actually rests
      std::optional<Atom> support;
      for (const auto& a : s.atoms()) {
        if ((a.fluent == Fluent::On || a.fluent == Fluent::OnTable) && a.x == x) support = a;
      }
      if (!support) return out;
      s.erase(*support);
      if (support->fluent == Fluent::On) s.insert(atoms::clear(support->y));
      s.erase(atoms::clear(x));
      s.erase(atoms::hand_empty());
      s.insert(atoms::holding(x));
    } else {
      if (!applicable(s, action)) return out;
      s = apply(s, action);
    }
    ++out.executed;
  }
  out.completed = true;
  return out;
}

}  // namespace nsplan
