#include "nsplan/predicate.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "nsplan/error.hpp"

namespace nsplan {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view to_string(Relation r) noexcept {
  switch (r) {
    case Relation::On: return "On";
    case Relation::LeftOf: return "LeftOf";
    case Relation::CloseTo: return "CloseTo";
    case Relation::Touching: return "Touching";
    case Relation::Clear: return "Clear";
  }
  return "?";
}

std::optional<Relation> parse_relation(std::string_view name) noexcept {
  for (Relation r : kAllRelations) {
    if (to_string(r) == name) return r;
  }
  return std::nullopt;
}

GroundPredicate::GroundPredicate(Relation relation, std::vector<std::string> args)
    : relation_(relation), args_(std::move(args)) {
  if (static_cast<int>(args_.size()) != arity(relation_)) {
    throw DomainError(std::string(nsplan::to_string(relation_)) + " expects " +
                      std::to_string(arity(relation_)) + " argument(s), got " +
                      std::to_string(args_.size()));
  }
  for (const auto& a : args_) {
    if (a.empty()) throw DomainError("empty object identifier");
  }
  if (args_.size() == 2) {
    if (args_[0] == args_[1]) {
      throw DomainError(std::string(nsplan::to_string(relation_)) + " arguments must be distinct: " +
                        args_[0]);
    }
    if (is_symmetric(relation_) && args_[1] < args_[0]) std::swap(args_[0], args_[1]);
  }
}

GroundPredicate GroundPredicate::parse(std::string_view text) {
  text = trim(text);
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') {
    throw DomainError("malformed predicate: " + std::string(text));
  }
  const auto name = trim(text.substr(0, open));
  const auto rel = parse_relation(name);
  if (!rel) throw DomainError("unknown relation: " + std::string(name));

  std::vector<std::string> args;
  auto inner = text.substr(open + 1, text.size() - open - 2);
  while (true) {
    const auto comma = inner.find(',');
    args.emplace_back(trim(inner.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    inner.remove_prefix(comma + 1);
  }
  return GroundPredicate(*rel, std::move(args));
}

bool GroundPredicate::mentions(std::string_view object_id) const noexcept {
  return std::any_of(args_.begin(), args_.end(), [&](const auto& a) { return a == object_id; });
}

std::string GroundPredicate::to_string() const {
  std::string out(nsplan::to_string(relation_));
  out += '(';
  for (std::size_t i = 0; i < args_.size(); ++i) {
    if (i) out += ',';
    out += args_[i];
  }
  out += ')';
  return out;
}

GroundPredicate on(std::string upper, std::string lower) {
  return GroundPredicate(Relation::On, {std::move(upper), std::move(lower)});
}
GroundPredicate left_of(std::string a, std::string b) {
  return GroundPredicate(Relation::LeftOf, {std::move(a), std::move(b)});
}
GroundPredicate close_to(std::string a, std::string b) {
  return GroundPredicate(Relation::CloseTo, {std::move(a), std::move(b)});
}
GroundPredicate touching(std::string a, std::string b) {
  return GroundPredicate(Relation::Touching, {std::move(a), std::move(b)});
}
GroundPredicate clear(std::string a) { return GroundPredicate(Relation::Clear, {std::move(a)}); }

std::vector<GroundPredicate> all_ground_predicates(const std::vector<std::string>& objects) {
  std::set<GroundPredicate> out;
  for (Relation r : kAllRelations) {
    if (arity(r) == 1) {
      for (const auto& a : objects) out.emplace(r, std::vector<std::string>{a});
      continue;
    }
    for (const auto& a : objects) {
      for (const auto& b : objects) {
        if (a == b) continue;
        if (is_symmetric(r) && b < a) continue;
        out.emplace(r, std::vector<std::string>{a, b});
      }
    }
  }
  return {out.begin(), out.end()};
}

}  // namespace nsplan
