#pragma once

#include <cstdint>
#include <variant>

#include "shapecap/errors.hpp"
#include "shapecap/semantics.hpp"
#include "shapecap/world.hpp"

// Brute-force reference evaluator. Kept deliberately separate from the
// compositional path in semantics.hpp: attribute matching, body tests and
// all comparisons are re-spelled here by direct enumeration, so the two
// implementations can check each other.

namespace shapecap::oracle {

namespace detail {

inline bool attr_match(const Entity& e, const std::optional<Shape>& s,
                       const std::optional<Color>& c) {
  if (s.has_value() && e.shape != s.value()) return false;
  if (c.has_value() && e.color != c.value()) return false;
  return true;
}

// Does entity i satisfy the body, by tuple enumeration?
inline bool body_holds(const WorldModel& w, std::size_t i, const Body& body) {
  if (std::holds_alternative<AttributeBody>(body)) {
    const AttributeBody& a = std::get<AttributeBody>(body);
    return attr_match(w.entities[i], a.shape, a.color);
  }
  const RelationBody& r = std::get<RelationBody>(body);
  for (std::size_t j = 0; j < w.entities.size(); ++j) {
    if (!attr_match(w.entities[j], r.landmark.shape, r.landmark.color))
      continue;
    const Entity& a = w.entities[i];
    const Entity& b = w.entities[j];
    bool holds = false;
    switch (r.relation) {
      case Relation::above: holds = a.y > b.y; break;
      case Relation::below: holds = b.y > a.y; break;
      case Relation::left_of: holds = b.x > a.x; break;
      case Relation::right_of: holds = a.x > b.x; break;
    }
    if (holds) return true;
  }
  return false;
}

// lhs_num/lhs_den <cmp> rhs_num/rhs_den with positive denominators.
inline bool frac_compare(Comparison cmp, long long lhs_num, long long lhs_den,
                         long long rhs_num, long long rhs_den) {
  const long long a = lhs_num * rhs_den;
  const long long b = rhs_num * lhs_den;
  switch (cmp) {
    case Comparison::lt: return a < b;
    case Comparison::leq: return a <= b;
    case Comparison::eq: return a == b;
    case Comparison::geq: return a >= b;
    case Comparison::gt: return a > b;
    case Comparison::neq: return a != b;
  }
  return false;
}

inline bool clause_truth(const Clause& clause, const WorldModel& w) {
  const std::size_t n = w.entities.size();

  if (std::holds_alternative<Existential>(clause)) {
    const auto& c = std::get<Existential>(clause);
    for (std::size_t i = 0; i < n; ++i)
      if (attr_match(w.entities[i], c.restrictor.shape, c.restrictor.color) &&
          body_holds(w, i, c.body))
        return true;
    return false;
  }

  if (std::holds_alternative<NegatedExistential>(clause)) {
    const auto& c = std::get<NegatedExistential>(clause);
    bool witness = false;
    for (std::size_t i = 0; i < n; ++i)
      if (attr_match(w.entities[i], c.restrictor.shape, c.restrictor.color) &&
          body_holds(w, i, c.body))
        witness = true;
    return !witness;
  }

  if (std::holds_alternative<Quantified>(clause)) {
    const auto& c = std::get<Quantified>(clause);
    long long in_restrictor = 0;
    long long in_both = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!attr_match(w.entities[i], c.restrictor.shape, c.restrictor.color))
        continue;
      in_restrictor += 1;
      if (body_holds(w, i, c.body)) in_both += 1;
    }
    if (c.qspec.restrictor_count.has_value() &&
        in_restrictor != c.qspec.restrictor_count.value())
      return false;
    if (c.qspec.kind == QuantifierKind::count)
      return frac_compare(c.qspec.comparison, in_both, 1, c.qspec.value.num,
                          c.qspec.value.den);
    if (in_restrictor == 0) return false;
    return frac_compare(c.qspec.comparison, in_both, in_restrictor,
                        c.qspec.value.num, c.qspec.value.den);
  }

  const auto& c = std::get<Comparative>(clause);
  long long count_a = 0;
  long long count_b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (attr_match(w.entities[i], c.restrictor_a.shape, c.restrictor_a.color) &&
        body_holds(w, i, c.body))
      count_a += 1;
    if (attr_match(w.entities[i], c.restrictor_b.shape, c.restrictor_b.color) &&
        body_holds(w, i, c.body))
      count_b += 1;
  }
  if (count_b == 0) return false;
  return frac_compare(c.cspec.comparison, count_a, 1,
                      c.cspec.ratio.num * count_b, c.cspec.ratio.den);
}

}  // namespace detail

inline constexpr std::size_t kMaxOracleEntities = 12;

inline bool brute_force_eval(const CaptionAst& ast, const WorldModel& world) {
  if (world.entities.size() > kMaxOracleEntities)
    throw WorldTooLarge("oracle limited to " +
                        std::to_string(kMaxOracleEntities) + " entities, got " +
                        std::to_string(world.entities.size()));
  if (!detail::clause_truth(ast.head, world)) return false;
  if (ast.conjunct.has_value() && !detail::clause_truth(*ast.conjunct, world))
    return false;
  return true;
}

}  // namespace shapecap::oracle
