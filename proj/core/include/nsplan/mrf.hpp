#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nsplan/belief.hpp"
#include "nsplan/json.hpp"
#include "nsplan/predicate.hpp"

namespace nsplan {

/// Soft penalty standing in for a hard constraint (about e^-20 joint mass).
inline constexpr double kConstraintPenalty = 20.0;
/// Confidences are clamped to [eps, 1-eps] before taking logs.
inline constexpr double kConfidenceClamp = 1e-6;
inline constexpr std::size_t kMaxEnumerationNodes = 20;

struct EdgeKind {
  enum class Type { MutualExclusion, Implication, Correlation };

  Type type = Type::MutualExclusion;
  /// Implication only: true when the edge's first endpoint is the antecedent.
  bool first_is_antecedent = true;
  /// Correlation only: strength in (-1, 1).
  double rho = 0.0;

  static EdgeKind mutual_exclusion() { return {Type::MutualExclusion, true, 0.0}; }
  static EdgeKind implication(bool first_is_antecedent = true) {
    return {Type::Implication, first_is_antecedent, 0.0};
  }
  /// Throws DomainError unless |rho| < 1.
  static EdgeKind correlation(double rho);

  friend bool operator==(const EdgeKind&, const EdgeKind&) = default;
};

std::string_view to_string(EdgeKind::Type type) noexcept;

/// Potentials over {false, true}; index 0 is false.
using UnaryTable = std::array<double, 2>;
/// Pairwise potentials indexed by 2*x_i + x_j.
using PairTable = std::array<double, 4>;

UnaryTable unary_from_confidence(double p);
PairTable pairwise_table(const EdgeKind& kind);

struct MrfNode {
  GroundPredicate predicate;
  UnaryTable potential;
};

struct MrfEdge {
  std::size_t i;  // always i < j
  std::size_t j;
  EdgeKind kind;
  PairTable potential;

  double at(int xi, int xj) const { return potential[static_cast<std::size_t>(2 * xi + xj)]; }
};

/// Pairwise MRF over ground predicates, P(x) ∝ exp(-Σψ_i(x_i) - Σφ_ij(x_i,x_j)).
class PredicateMrf {
 public:
  std::size_t add_node(GroundPredicate predicate, double confidence);
  std::size_t add_node(GroundPredicate predicate, UnaryTable potential);

  /// Edges are stored with i < j; an implication given as (j, i) is flipped so
  /// that its antecedent is preserved. Throws DomainError for self-loops,
  /// duplicate pairs, out-of-range indices, or non-finite tables.
  std::size_t add_edge(std::size_t a, std::size_t b, EdgeKind kind);

  const std::vector<MrfNode>& nodes() const noexcept { return nodes_; }
  const std::vector<MrfEdge>& edges() const noexcept { return edges_; }
  /// Indices into edges() incident to `node`.
  const std::vector<std::size_t>& incident(std::size_t node) const { return incident_.at(node); }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::optional<std::size_t> find(const GroundPredicate& predicate) const;

 private:
  std::vector<MrfNode> nodes_;
  std::vector<MrfEdge> edges_;
  std::vector<std::vector<std::size_t>> incident_;
};

struct DomainRules {
  bool mutual_exclusion = true;  // On(A,B) vs Clear(B)
  bool implication = true;       // On(A,B) -> Touching(A,B)
  bool correlation = true;       // On(A,B) ~ On(B,C)
  double correlation_rho = 0.5;
};

PredicateMrf build_mrf(const ProbabilisticState& state, const DomainRules& rules = {});

/// 0/1 value per node, in node order.
using Assignment = std::vector<int>;

/// E(x) = Σψ_i(x_i) + Σφ_ij(x_i, x_j). Throws DomainError when the assignment
/// does not cover every node with a 0/1 value.
double energy(const PredicateMrf& mrf, std::span<const int> assignment);

struct BeliefSet {
  std::vector<std::array<double, 2>> node;
  std::vector<std::array<double, 4>> edge;  // parallel to PredicateMrf::edges()
  bool converged = false;
  int iterations = 0;
};

struct BpOptions {
  int max_iters = 200;
  double damping = 0.5;
  double tol = 1e-8;
};

/// Synchronous sum-product message passing in log space. Non-convergence is
/// reported through BeliefSet::converged, never thrown.
BeliefSet loopy_bp(const PredicateMrf& mrf, const BpOptions& options = {});

struct ExactInference {
  BeliefSet beliefs;
  double log_partition = 0.0;
  double partition() const;
};

/// Full 2^n enumeration. Throws CapacityError above kMaxEnumerationNodes.
ExactInference enumerate_marginals(const PredicateMrf& mrf);

enum class EntropyMethod {
  Auto,               // exact when the graph is small enough to enumerate
  Exact,              // H(X_i | X_N(i)) from the enumerated joint
  PairwiseSurrogate,  // condition on the single most informative neighbour
};

/// Σ_i H(X_i | X_N(i)) in nats.
double conditional_uncertainty(const BeliefSet& beliefs, const PredicateMrf& mrf,
                               EntropyMethod method = EntropyMethod::Auto);

/// Σ_i H(b_i) in nats.
double marginal_entropy_sum(const BeliefSet& beliefs);

double binary_entropy(const std::array<double, 2>& b);

/// Per-node argmax of the marginals, ties broken toward false.
Assignment map_assignment(const BeliefSet& beliefs);

/// Per-node argmax of the unary potentials alone (ties toward false).
Assignment unary_argmax(const PredicateMrf& mrf);

/// Build the MRF for `state`, run BP and replace each confidence with its
/// refined marginal. `known` flags carry over.
ProbabilisticState refine_state(const ProbabilisticState& state, const DomainRules& rules = {},
                                const BpOptions& options = {});

nlohmann::json to_json(const PredicateMrf& mrf);
std::string dump_mrf(const PredicateMrf& mrf);

}  // namespace nsplan
