#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nsplan {

/// Perception-level spatial relations.
enum class Relation : std::uint8_t { On, LeftOf, CloseTo, Touching, Clear };

inline constexpr Relation kAllRelations[] = {Relation::On, Relation::LeftOf, Relation::CloseTo,
                                             Relation::Touching, Relation::Clear};

constexpr int arity(Relation r) noexcept { return r == Relation::Clear ? 1 : 2; }

/// CloseTo and Touching do not depend on argument order.
constexpr bool is_symmetric(Relation r) noexcept {
  return r == Relation::CloseTo || r == Relation::Touching;
}

std::string_view to_string(Relation r) noexcept;
std::optional<Relation> parse_relation(std::string_view name) noexcept;

/// A relation applied to concrete object identifiers, e.g. On(a,b).
///
/// Symmetric relations are stored with the lexicographically smaller
/// identifier first, so Touching(b,a) and Touching(a,b) compare equal.
class GroundPredicate {
 public:
  /// Throws DomainError on arity mismatch, empty identifiers, or repeated
  /// arguments of a binary relation.
  GroundPredicate(Relation relation, std::vector<std::string> args);

  /// Parses "On(a,b)" / "Clear(a)"; whitespace around tokens is ignored.
  static GroundPredicate parse(std::string_view text);

  Relation relation() const noexcept { return relation_; }
  const std::vector<std::string>& args() const noexcept { return args_; }
  bool mentions(std::string_view object_id) const noexcept;
  std::string to_string() const;

  friend auto operator<=>(const GroundPredicate&, const GroundPredicate&) = default;
  friend bool operator==(const GroundPredicate&, const GroundPredicate&) = default;

 private:
  Relation relation_;
  std::vector<std::string> args_;
};

GroundPredicate on(std::string upper, std::string lower);
GroundPredicate left_of(std::string a, std::string b);
GroundPredicate close_to(std::string a, std::string b);
GroundPredicate touching(std::string a, std::string b);
GroundPredicate clear(std::string a);

/// Every ground predicate over `objects` for every relation, in canonical order.
std::vector<GroundPredicate> all_ground_predicates(const std::vector<std::string>& objects);

}  // namespace nsplan
