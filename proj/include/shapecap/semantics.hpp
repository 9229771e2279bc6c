#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "shapecap/rational.hpp"
#include "shapecap/world.hpp"

namespace shapecap {

// Noun-phrase meaning: conjunction of attribute equality predicates.
// Both fields absent denotes every entity (the generic noun "shape").
struct Restrictor {
  std::optional<Shape> shape;
  std::optional<Color> color;

  bool operator==(const Restrictor&) const = default;

  bool matches(const Entity& e) const {
    return (!shape || e.shape == *shape) && (!color || e.color == *color);
  }
  bool empty() const { return !shape && !color; }
};

enum class Relation : std::uint8_t { above, below, left_of, right_of };

inline Relation opposite(Relation r) {
  switch (r) {
    case Relation::above: return Relation::below;
    case Relation::below: return Relation::above;
    case Relation::left_of: return Relation::right_of;
    case Relation::right_of: return Relation::left_of;
  }
  return r;
}

inline const char* to_string(Relation r) {
  switch (r) {
    case Relation::above: return "above";
    case Relation::below: return "below";
    case Relation::left_of: return "left_of";
    case Relation::right_of: return "right_of";
  }
  return "?";
}

// Predicative use of a restrictor ("is cyan", "are circles"). At least
// one attribute must be present.
struct AttributeBody {
  std::optional<Shape> shape;
  std::optional<Color> color;

  bool operator==(const AttributeBody&) const = default;
};

// Spatial relation to some entity matching the landmark ("is above a
// green ellipse").
struct RelationBody {
  Relation relation = Relation::above;
  Restrictor landmark;

  bool operator==(const RelationBody&) const = default;
};

using Body = std::variant<AttributeBody, RelationBody>;

enum class Comparison : std::uint8_t { lt, leq, eq, geq, gt, neq };

inline Comparison flipped(Comparison c) {
  switch (c) {
    case Comparison::lt: return Comparison::gt;
    case Comparison::gt: return Comparison::lt;
    case Comparison::leq: return Comparison::geq;
    case Comparison::geq: return Comparison::leq;
    case Comparison::eq: return Comparison::neq;
    case Comparison::neq: return Comparison::eq;
  }
  return c;
}

inline const char* to_string(Comparison c) {
  switch (c) {
    case Comparison::lt: return "lt";
    case Comparison::leq: return "leq";
    case Comparison::eq: return "eq";
    case Comparison::geq: return "geq";
    case Comparison::gt: return "gt";
    case Comparison::neq: return "neq";
  }
  return "?";
}

template <typename T>
bool compare(Comparison c, const T& lhs, const T& rhs) {
  switch (c) {
    case Comparison::lt: return lhs < rhs;
    case Comparison::leq: return lhs <= rhs;
    case Comparison::eq: return lhs == rhs;
    case Comparison::geq: return lhs >= rhs;
    case Comparison::gt: return lhs > rhs;
    case Comparison::neq: return lhs != rhs;
  }
  return false;
}

enum class QuantifierKind : std::uint8_t { count, fraction };

// Generalized quantifier: |R cap B| <cmp> value (count kind) or
// |R cap B| / |R| <cmp> value (fraction kind). restrictor_count carries
// the "of the N" presupposition.
struct QSpec {
  QuantifierKind kind = QuantifierKind::count;
  Comparison comparison = Comparison::eq;
  Rational value;  // integer for counts, in [0,1] for fractions
  std::optional<int> restrictor_count;

  bool operator==(const QSpec&) const = default;
};

// |R_a cap B| <cmp> ratio * |R_b cap B|. neq is not part of the
// comparative fragment.
struct CompSpec {
  Rational ratio{1};
  Comparison comparison = Comparison::eq;

  bool operator==(const CompSpec&) const = default;
};

struct Existential {
  Restrictor restrictor;
  Body body;
  bool operator==(const Existential&) const = default;
};

struct NegatedExistential {
  Restrictor restrictor;
  Body body;
  bool operator==(const NegatedExistential&) const = default;
};

struct Quantified {
  QSpec qspec;
  Restrictor restrictor;
  Body body;
  bool operator==(const Quantified&) const = default;
};

struct Comparative {
  CompSpec cspec;
  Restrictor restrictor_a;
  Restrictor restrictor_b;
  Body body;
  bool operator==(const Comparative&) const = default;
};

using Clause =
    std::variant<Existential, NegatedExistential, Quantified, Comparative>;

// A caption is one clause, or a conjunction of exactly two (the
// generated fragment never nests deeper).
struct CaptionAst {
  Clause head;
  std::optional<Clause> conjunct;

  bool operator==(const CaptionAst&) const = default;
};

inline CaptionAst make_caption(Clause c) { return CaptionAst{std::move(c), {}}; }
inline CaptionAst make_conjunction(Clause left, Clause right) {
  return CaptionAst{std::move(left), std::move(right)};
}

// --- evaluation -----------------------------------------------------------

// Indices of entities matching all present attributes; the empty
// restrictor returns every index.
inline std::vector<std::size_t> denotation(const Restrictor& r,
                                           const WorldModel& world) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < world.entities.size(); ++i)
    if (r.matches(world.entities[i])) out.push_back(i);
  return out;
}

namespace detail {

inline bool relation_holds(Relation rel, const Entity& a, const Entity& b) {
  switch (rel) {
    case Relation::above: return a.y > b.y;
    case Relation::below: return a.y < b.y;
    case Relation::left_of: return a.x < b.x;
    case Relation::right_of: return a.x > b.x;
  }
  return false;
}

inline bool satisfies(const Entity& e, const Body& body,
                      const WorldModel& world) {
  if (const auto* attr = std::get_if<AttributeBody>(&body))
    return (!attr->shape || e.shape == *attr->shape) &&
           (!attr->color || e.color == *attr->color);
  const auto& rel = std::get<RelationBody>(body);
  for (const Entity& l : world.entities)
    if (rel.landmark.matches(l) && relation_holds(rel.relation, e, l))
      return true;
  return false;
}

struct BodyCounts {
  long n_rb = 0;  // |R cap B|
  long n_r = 0;   // |R|
};

inline BodyCounts count_body(const Restrictor& r, const Body& body,
                             const WorldModel& world) {
  BodyCounts c;
  for (const Entity& e : world.entities) {
    if (!r.matches(e)) continue;
    ++c.n_r;
    if (satisfies(e, body, world)) ++c.n_rb;
  }
  return c;
}

}  // namespace detail

// Truth of a generalized quantifier given the two counts. Presupposition
// failures ("the five squares" when |R| != 5, fractions over an empty
// restrictor) evaluate to false; the task stays two-class.
inline bool eval_quantifier(const QSpec& q, long n_rb, long n_r) {
  if (q.restrictor_count && n_r != *q.restrictor_count) return false;
  if (q.kind == QuantifierKind::count)
    return compare(q.comparison, Rational(n_rb), q.value);
  if (n_r == 0) return false;
  return compare(q.comparison, Rational(n_rb, n_r), q.value);
}

inline bool evaluate(const Clause& clause, const WorldModel& world) {
  return std::visit(
      [&](const auto& c) -> bool {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Existential>) {
          for (const Entity& e : world.entities)
            if (c.restrictor.matches(e) && detail::satisfies(e, c.body, world))
              return true;
          return false;
        } else if constexpr (std::is_same_v<T, NegatedExistential>) {
          for (const Entity& e : world.entities)
            if (c.restrictor.matches(e) && detail::satisfies(e, c.body, world))
              return false;
          return true;
        } else if constexpr (std::is_same_v<T, Quantified>) {
          const auto counts = detail::count_body(c.restrictor, c.body, world);
          return eval_quantifier(c.qspec, counts.n_rb, counts.n_r);
        } else {
          const auto a = detail::count_body(c.restrictor_a, c.body, world);
          const auto b = detail::count_body(c.restrictor_b, c.body, world);
          if (b.n_rb == 0) return false;  // reference-count presupposition
          return compare(c.cspec.comparison, Rational(a.n_rb),
                         c.cspec.ratio * Rational(b.n_rb));
        }
      },
      clause);
}

// Compositional bottom-up truth of a caption against a world.
inline bool evaluate(const CaptionAst& ast, const WorldModel& world) {
  if (!evaluate(ast.head, world)) return false;
  return !ast.conjunct || evaluate(*ast.conjunct, world);
}

// --- clarity filter -------------------------------------------------------

namespace detail {

inline bool strict(Comparison c) {
  return c == Comparison::lt || c == Comparison::gt;
}

// Every (subject, landmark) pair the evaluator may compare must be
// separated by at least `margin` on the relation's axis. Self-pairs are
// skipped: an entity never visually competes with itself.
inline bool spatial_clear(const Restrictor& subjects, const Body& body,
                          const WorldModel& world, double margin) {
  const auto* rel = std::get_if<RelationBody>(&body);
  if (!rel) return true;
  for (std::size_t i = 0; i < world.entities.size(); ++i) {
    const Entity& e = world.entities[i];
    if (!subjects.matches(e)) continue;
    for (std::size_t j = 0; j < world.entities.size(); ++j) {
      if (i == j) continue;
      const Entity& l = world.entities[j];
      if (!rel->landmark.matches(l)) continue;
      const bool vertical = rel->relation == Relation::above ||
                            rel->relation == Relation::below;
      const double diff = vertical ? e.y - l.y : e.x - l.x;
      if ((diff < 0 ? -diff : diff) < margin) return false;
    }
  }
  return true;
}

inline bool clause_clear(const Clause& clause, const WorldModel& world,
                         double margin) {
  return std::visit(
      [&](const auto& c) -> bool {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Existential> ||
                      std::is_same_v<T, NegatedExistential>) {
          return spatial_clear(c.restrictor, c.body, world, margin);
        } else if constexpr (std::is_same_v<T, Quantified>) {
          if (!spatial_clear(c.restrictor, c.body, world, margin))
            return false;
          if (c.qspec.kind == QuantifierKind::fraction &&
              strict(c.qspec.comparison)) {
            const auto counts = count_body(c.restrictor, c.body, world);
            if (counts.n_r > 0 &&
                Rational(counts.n_rb, counts.n_r) == c.qspec.value)
              return false;  // exactly on a strict threshold
          }
          return true;
        } else {
          if (!spatial_clear(c.restrictor_a, c.body, world, margin) ||
              !spatial_clear(c.restrictor_b, c.body, world, margin))
            return false;
          if (strict(c.cspec.comparison)) {
            const auto a = count_body(c.restrictor_a, c.body, world);
            const auto b = count_body(c.restrictor_b, c.body, world);
            if (b.n_rb > 0 &&
                Rational(a.n_rb) == c.cspec.ratio * Rational(b.n_rb))
              return false;
          }
          return true;
        }
      },
      clause);
}

}  // namespace detail

// Generation-time filter for borderline instances: true iff no spatial
// comparison in the evaluation of `ast` is decided by an axis difference
// below `margin`, and no strict fraction/comparative comparison lands
// exactly on its threshold.
inline bool is_clear(const CaptionAst& ast, const WorldModel& world,
                     double margin) {
  if (!detail::clause_clear(ast.head, world, margin)) return false;
  return !ast.conjunct || detail::clause_clear(*ast.conjunct, world, margin);
}

}  // namespace shapecap
