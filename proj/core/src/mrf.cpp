#include "nsplan/mrf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "nsplan/error.hpp"

namespace nsplan {

namespace {

double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

/// Normalized distribution over {false, true} from negative energies.
std::array<double, 2> normalize_log(double log_false, double log_true) {
  const double z = log_sum_exp(log_false, log_true);
  return {std::exp(log_false - z), std::exp(log_true - z)};
}

double entropy_of(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

bool finite_table(std::span<const double> t) {
  return std::all_of(t.begin(), t.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

EdgeKind EdgeKind::correlation(double rho) {
  if (!(std::abs(rho) < 1.0)) {
    throw DomainError("correlation strength must satisfy |rho| < 1, got " + std::to_string(rho));
  }
  return {Type::Correlation, true, rho};
}

std::string_view to_string(EdgeKind::Type type) noexcept {
  switch (type) {
    case EdgeKind::Type::MutualExclusion: return "MutualExclusion";
    case EdgeKind::Type::Implication: return "Implication";
    case EdgeKind::Type::Correlation: return "Correlation";
  }
  return "?";
}

UnaryTable unary_from_confidence(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError("confidence must lie in [0,1], got " + std::to_string(p));
  }
  const double clamped = std::clamp(p, kConfidenceClamp, 1.0 - kConfidenceClamp);
  return {-std::log(1.0 - clamped), -std::log(clamped)};
}

PairTable pairwise_table(const EdgeKind& kind) {
  switch (kind.type) {
    case EdgeKind::Type::MutualExclusion:
      return {0.0, 0.0, 0.0, kConstraintPenalty};
    case EdgeKind::Type::Implication:
      // antecedent true, consequent false
      return kind.first_is_antecedent ? PairTable{0.0, 0.0, kConstraintPenalty, 0.0}
                                      : PairTable{0.0, kConstraintPenalty, 0.0, 0.0};
    case EdgeKind::Type::Correlation: {
      constexpr double kappa = 1.0;
      const double agree = -kind.rho * kappa;
      return {agree, -agree, -agree, agree};
    }
  }
  return {};
}

std::size_t PredicateMrf::add_node(GroundPredicate predicate, double confidence) {
  return add_node(std::move(predicate), unary_from_confidence(confidence));
}

std::size_t PredicateMrf::add_node(GroundPredicate predicate, UnaryTable potential) {
  if (!finite_table(potential)) throw DomainError("unary potential must be finite");
  nodes_.push_back({std::move(predicate), potential});
  incident_.emplace_back();
  return nodes_.size() - 1;
}

std::size_t PredicateMrf::add_edge(std::size_t a, std::size_t b, EdgeKind kind) {
  if (a >= nodes_.size() || b >= nodes_.size()) throw DomainError("edge endpoint out of range");
  if (a == b) throw DomainError("self-loop on node " + std::to_string(a));
  if (a > b) {
    std::swap(a, b);
    kind.first_is_antecedent = !kind.first_is_antecedent;
  }
  for (std::size_t e : incident_[a]) {
    if (edges_[e].j == b) {
      throw DomainError("duplicate edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
    }
  }
  if (kind.type != EdgeKind::Type::Implication) kind.first_is_antecedent = true;
  const PairTable table = pairwise_table(kind);
  if (!finite_table(table)) throw DomainError("pairwise potential must be finite");
  edges_.push_back({a, b, kind, table});
  incident_[a].push_back(edges_.size() - 1);
  incident_[b].push_back(edges_.size() - 1);
  return edges_.size() - 1;
}

std::optional<std::size_t> PredicateMrf::find(const GroundPredicate& predicate) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].predicate == predicate) return i;
  }
  return std::nullopt;
}

PredicateMrf build_mrf(const ProbabilisticState& state, const DomainRules& rules) {
  PredicateMrf mrf;
  std::map<GroundPredicate, std::size_t> index;
  for (const auto& [pred, p] : state.entries()) index[pred] = mrf.add_node(pred, p);

  auto lookup = [&](const GroundPredicate& g) -> std::optional<std::size_t> {
    auto it = index.find(g);
    if (it == index.end()) return std::nullopt;
    return it->second;
  };

  // Rules scan On atoms only; collect first so edge order follows node order.
  std::map<std::pair<std::size_t, std::size_t>, EdgeKind> pending;
  auto propose = [&](std::size_t a, std::size_t b, EdgeKind kind) {
    if (a > b) {
      std::swap(a, b);
      kind.first_is_antecedent = !kind.first_is_antecedent;
    }
    pending.try_emplace({a, b}, kind);
  };

  for (const auto& [pred, idx] : index) {
    if (pred.relation() != Relation::On) continue;
    const auto& upper = pred.args()[0];
    const auto& lower = pred.args()[1];
    if (rules.mutual_exclusion) {
      if (auto c = lookup(clear(lower))) propose(idx, *c, EdgeKind::mutual_exclusion());
    }
    if (rules.implication) {
      if (auto t = lookup(touching(upper, lower))) propose(idx, *t, EdgeKind::implication(true));
    }
    if (rules.correlation) {
      for (const auto& [other, other_idx] : index) {
        if (other.relation() != Relation::On) continue;
        // On(upper, lower) and On(lower, below), sharing the middle object
        if (other.args()[0] == lower && other.args()[1] != upper) {
          propose(idx, other_idx, EdgeKind::correlation(rules.correlation_rho));
        }
      }
    }
  }
  for (const auto& [ij, kind] : pending) mrf.add_edge(ij.first, ij.second, kind);
  return mrf;
}

double energy(const PredicateMrf& mrf, std::span<const int> assignment) {
  if (assignment.size() != mrf.size()) {
    throw DomainError("assignment covers " + std::to_string(assignment.size()) + " of " +
                      std::to_string(mrf.size()) + " nodes");
  }
  double e = 0.0;
  for (std::size_t i = 0; i < mrf.size(); ++i) {
    const int x = assignment[i];
    if (x != 0 && x != 1) throw DomainError("assignment values must be 0 or 1");
    e += mrf.nodes()[i].potential[static_cast<std::size_t>(x)];
  }
  for (const auto& edge : mrf.edges()) e += edge.at(assignment[edge.i], assignment[edge.j]);
  return e;
}

BeliefSet loopy_bp(const PredicateMrf& mrf, const BpOptions& options) {
  if (options.max_iters < 1) throw DomainError("max_iters must be at least 1");
  if (!(options.damping >= 0.0 && options.damping < 1.0)) {
    throw DomainError("damping must lie in [0,1)");
  }
  const auto& nodes = mrf.nodes();
  const auto& edges = mrf.edges();

  // msg[2e] flows i -> j, msg[2e+1] flows j -> i; log domain, normalized.
  std::vector<std::array<double, 2>> msg(2 * edges.size(), {-std::log(2.0), -std::log(2.0)});
  std::vector<std::array<double, 2>> next(msg.size());

  auto incoming_sum = [&](std::size_t node, std::size_t skip_edge, int x) {
    double s = -nodes[node].potential[static_cast<std::size_t>(x)];
    for (std::size_t e : mrf.incident(node)) {
      if (e == skip_edge) continue;
      const bool node_is_j = edges[e].j == node;
      s += msg[2 * e + (node_is_j ? 0 : 1)][static_cast<std::size_t>(x)];
    }
    return s;
  };

  BeliefSet out;
  for (int iter = 1; iter <= options.max_iters; ++iter) {
    double max_change = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto& edge = edges[e];
      for (int dir = 0; dir < 2; ++dir) {
        const std::size_t from = dir == 0 ? edge.i : edge.j;
        std::array<double, 2> computed{};
        for (int xt = 0; xt < 2; ++xt) {
          double acc = -std::numeric_limits<double>::infinity();
          for (int xf = 0; xf < 2; ++xf) {
            const double pair = dir == 0 ? edge.at(xf, xt) : edge.at(xt, xf);
            const double term = incoming_sum(from, e, xf) - pair;
            acc = std::isinf(acc) ? term : log_sum_exp(acc, term);
          }
          computed[static_cast<std::size_t>(xt)] = acc;
        }
        const double z = log_sum_exp(computed[0], computed[1]);
        const auto& old = msg[2 * e + static_cast<std::size_t>(dir)];
        std::array<double, 2> damped{};
        for (std::size_t x = 0; x < 2; ++x) {
          damped[x] = options.damping * old[x] + (1.0 - options.damping) * (computed[x] - z);
        }
        const double z2 = log_sum_exp(damped[0], damped[1]);
        for (std::size_t x = 0; x < 2; ++x) {
          damped[x] -= z2;
          max_change = std::max(max_change, std::abs(damped[x] - old[x]));
        }
        next[2 * e + static_cast<std::size_t>(dir)] = damped;
      }
    }
    msg.swap(next);
    out.iterations = iter;
    if (max_change < options.tol) {
      out.converged = true;
      break;
    }
  }

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  out.node.resize(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out.node[i] = normalize_log(incoming_sum(i, kNone, 0), incoming_sum(i, kNone, 1));
  }
  out.edge.resize(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& edge = edges[e];
    std::array<double, 4> logb{};
    for (int xi = 0; xi < 2; ++xi) {
      for (int xj = 0; xj < 2; ++xj) {
        logb[static_cast<std::size_t>(2 * xi + xj)] =
            incoming_sum(edge.i, e, xi) + incoming_sum(edge.j, e, xj) - edge.at(xi, xj);
      }
    }
    const double m = *std::max_element(logb.begin(), logb.end());
    double z = 0.0;
    for (double v : logb) z += std::exp(v - m);
    for (std::size_t k = 0; k < 4; ++k) out.edge[e][k] = std::exp(logb[k] - m) / z;
  }
  return out;
}

double ExactInference::partition() const { return std::exp(log_partition); }

namespace {

/// Visits every assignment with its unnormalized log-weight -E(x), bit i of
/// `code` giving node i.
template <typename Visit>
void for_each_assignment(const PredicateMrf& mrf, Visit&& visit) {
  const std::size_t n = mrf.size();
  Assignment x(n, 0);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t code = 0; code < total; ++code) {
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<int>((code >> i) & 1U);
    visit(code, x, -energy(mrf, x));
  }
}

void require_enumerable(const PredicateMrf& mrf) {
  if (mrf.size() > kMaxEnumerationNodes) {
    throw CapacityError("exact enumeration supports at most " +
                        std::to_string(kMaxEnumerationNodes) + " nodes, got " +
                        std::to_string(mrf.size()));
  }
}

double log_partition_of(const PredicateMrf& mrf) {
  double max_w = -std::numeric_limits<double>::infinity();
  for_each_assignment(mrf, [&](std::uint64_t, const Assignment&, double w) {
    max_w = std::max(max_w, w);
  });
  double z = 0.0;
  for_each_assignment(mrf, [&](std::uint64_t, const Assignment&, double w) {
    z += std::exp(w - max_w);
  });
  return max_w + std::log(z);
}

}  // namespace

ExactInference enumerate_marginals(const PredicateMrf& mrf) {
  require_enumerable(mrf);
  ExactInference out;
  out.log_partition = log_partition_of(mrf);
  auto& b = out.beliefs;
  b.node.assign(mrf.size(), {0.0, 0.0});
  b.edge.assign(mrf.edges().size(), {0.0, 0.0, 0.0, 0.0});
  for_each_assignment(mrf, [&](std::uint64_t, const Assignment& x, double w) {
    const double p = std::exp(w - out.log_partition);
    for (std::size_t i = 0; i < x.size(); ++i) b.node[i][static_cast<std::size_t>(x[i])] += p;
    for (std::size_t e = 0; e < mrf.edges().size(); ++e) {
      const auto& edge = mrf.edges()[e];
      b.edge[e][static_cast<std::size_t>(2 * x[edge.i] + x[edge.j])] += p;
    }
  });
  b.converged = true;
  b.iterations = 0;
  return out;
}

double binary_entropy(const std::array<double, 2>& b) { return entropy_of(b); }

double marginal_entropy_sum(const BeliefSet& beliefs) {
  double h = 0.0;
  for (const auto& b : beliefs.node) h += binary_entropy(b);
  return h;
}

namespace {

double exact_conditional_uncertainty(const PredicateMrf& mrf) {
  require_enumerable(mrf);
  const std::size_t n = mrf.size();
  // Per node: the node itself followed by its neighbours.
  std::vector<std::vector<std::size_t>> scope(n);
  for (std::size_t i = 0; i < n; ++i) {
    scope[i].push_back(i);
    for (std::size_t e : mrf.incident(i)) {
      const auto& edge = mrf.edges()[e];
      scope[i].push_back(edge.i == i ? edge.j : edge.i);
    }
  }
  std::vector<std::vector<double>> joint(n);
  for (std::size_t i = 0; i < n; ++i) joint[i].assign(std::size_t{1} << scope[i].size(), 0.0);

  const double log_z = log_partition_of(mrf);
  for_each_assignment(mrf, [&](std::uint64_t, const Assignment& x, double w) {
    const double p = std::exp(w - log_z);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t idx = 0;
      for (std::size_t k = 0; k < scope[i].size(); ++k) {
        idx |= static_cast<std::size_t>(x[scope[i][k]]) << k;
      }
      joint[i][idx] += p;
    }
  });

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& table = joint[i];
    // H(X_i | X_N) = H(X_i, X_N) - H(X_N); bit 0 of idx is X_i.
    std::vector<double> neighbours(table.size() / 2, 0.0);
    for (std::size_t idx = 0; idx < table.size(); ++idx) neighbours[idx >> 1] += table[idx];
    total += entropy_of(table) - entropy_of(neighbours);
  }
  return total;
}

double surrogate_conditional_uncertainty(const BeliefSet& beliefs, const PredicateMrf& mrf) {
  double total = 0.0;
  for (std::size_t i = 0; i < mrf.size(); ++i) {
    const auto& inc = mrf.incident(i);
    if (inc.empty()) {
      total += binary_entropy(beliefs.node[i]);
      continue;
    }
    double best_mi = -std::numeric_limits<double>::infinity();
    double best_conditional = 0.0;
    for (std::size_t e : inc) {
      const auto& pair = beliefs.edge[e];
      const bool i_first = mrf.edges()[e].i == i;
      const std::array<double, 2> first{pair[0] + pair[1], pair[2] + pair[3]};
      const std::array<double, 2> second{pair[0] + pair[2], pair[1] + pair[3]};
      const double h_joint = entropy_of(pair);
      const double h_self = binary_entropy(i_first ? first : second);
      const double h_other = binary_entropy(i_first ? second : first);
      const double mi = h_self + h_other - h_joint;
      if (mi > best_mi) {
        best_mi = mi;
        best_conditional = h_joint - h_other;
      }
    }
    total += std::max(0.0, best_conditional);
  }
  return total;
}

}  // namespace

double conditional_uncertainty(const BeliefSet& beliefs, const PredicateMrf& mrf,
                               EntropyMethod method) {
  if (beliefs.node.size() != mrf.size() || beliefs.edge.size() != mrf.edges().size()) {
    throw DomainError("belief set does not match the MRF");
  }
  if (method == EntropyMethod::Auto) {
    method = mrf.size() <= kMaxEnumerationNodes ? EntropyMethod::Exact
                                                : EntropyMethod::PairwiseSurrogate;
  }
  if (method == EntropyMethod::Exact) return exact_conditional_uncertainty(mrf);
  return surrogate_conditional_uncertainty(beliefs, mrf);
}

Assignment map_assignment(const BeliefSet& beliefs) {
  Assignment x;
  x.reserve(beliefs.node.size());
  for (const auto& b : beliefs.node) x.push_back(b[1] > b[0] ? 1 : 0);
  return x;
}

Assignment unary_argmax(const PredicateMrf& mrf) {
  Assignment x;
  x.reserve(mrf.size());
  // lower energy wins; ties toward false
  for (const auto& node : mrf.nodes()) x.push_back(node.potential[1] < node.potential[0] ? 1 : 0);
  return x;
}

ProbabilisticState refine_state(const ProbabilisticState& state, const DomainRules& rules,
                                const BpOptions& options) {
  const PredicateMrf mrf = build_mrf(state, rules);
  const BeliefSet beliefs = loopy_bp(mrf, options);
  ProbabilisticState out;
  for (std::size_t i = 0; i < mrf.size(); ++i) {
    const auto& pred = mrf.nodes()[i].predicate;
    out.set(pred, std::clamp(beliefs.node[i][1], 0.0, 1.0));
    if (state.is_known(pred)) out.mark_known(pred);
  }
  return out;
}

nlohmann::json to_json(const PredicateMrf& mrf) {
  auto nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < mrf.size(); ++i) {
    const auto& n = mrf.nodes()[i];
    nodes.push_back({{"index", i},
                     {"predicate", n.predicate.to_string()},
                     {"psi", {n.potential[0], n.potential[1]}}});
  }
  std::vector<std::size_t> order(mrf.edges().size());
  for (std::size_t e = 0; e < order.size(); ++e) order[e] = e;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ea = mrf.edges()[a];
    const auto& eb = mrf.edges()[b];
    return std::tie(ea.i, ea.j) < std::tie(eb.i, eb.j);
  });
  auto edges = nlohmann::json::array();
  for (std::size_t e : order) {
    const auto& edge = mrf.edges()[e];
    nlohmann::json rec{{"i", edge.i},
                       {"j", edge.j},
                       {"kind", std::string(to_string(edge.kind.type))},
                       {"phi", edge.potential}};
    if (edge.kind.type == EdgeKind::Type::Implication) {
      rec["antecedent"] = edge.kind.first_is_antecedent ? edge.i : edge.j;
    }
    if (edge.kind.type == EdgeKind::Type::Correlation) rec["rho"] = edge.kind.rho;
    edges.push_back(std::move(rec));
  }
  return {{"nodes", nodes}, {"edges", edges}};
}

std::string dump_mrf(const PredicateMrf& mrf) { return to_json(mrf).dump(2); }

}  // namespace nsplan
