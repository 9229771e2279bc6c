#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shapecap/errors.hpp"
#include "shapecap/grammar.hpp"
#include "shapecap/rng.hpp"
#include "shapecap/semantics.hpp"
#include "shapecap/world.hpp"

namespace shapecap {

enum class CaptionKind : std::uint8_t {
  existential,
  negated_existential,
  spatial_existential,
  quant_count,
  quant_fraction,
  quant_restricted,
  comparative,
  conjunction,
};

inline constexpr std::array<CaptionKind, 8> kAllCaptionKinds = {
    CaptionKind::existential,    CaptionKind::negated_existential,
    CaptionKind::spatial_existential, CaptionKind::quant_count,
    CaptionKind::quant_fraction, CaptionKind::quant_restricted,
    CaptionKind::comparative,    CaptionKind::conjunction,
};

inline const char* to_string(CaptionKind k) {
  switch (k) {
    case CaptionKind::existential: return "existential";
    case CaptionKind::negated_existential: return "negated_existential";
    case CaptionKind::spatial_existential: return "spatial_existential";
    case CaptionKind::quant_count: return "quant_count";
    case CaptionKind::quant_fraction: return "quant_fraction";
    case CaptionKind::quant_restricted: return "quant_restricted";
    case CaptionKind::comparative: return "comparative";
    case CaptionKind::conjunction: return "conjunction";
  }
  return "?";
}

inline std::optional<CaptionKind> caption_kind_from_string(
    const std::string& s) {
  for (CaptionKind k : kAllCaptionKinds)
    if (s == to_string(k)) return k;
  return std::nullopt;
}

struct GeneratedCaption {
  CaptionAst ast;
  std::string text;
  bool label = false;
};

namespace detail {

// Fractions the lexicon can voice, in increasing order; corruption moves
// to an adjacent value along this chain.
inline const std::vector<Rational>& lexicon_fractions() {
  static const std::vector<Rational> f = {Rational(1, 4), Rational(1, 3),
                                          Rational(1, 2), Rational(2, 3),
                                          Rational(3, 4)};
  return f;
}

inline const std::vector<Rational>& lexicon_ratios() {
  static const std::vector<Rational> r = {Rational(1, 2), Rational(1),
                                          Rational(2), Rational(3)};
  return r;
}

inline bool top_level_kind_matches(const CaptionAst& ast, CaptionKind kind) {
  if (kind == CaptionKind::conjunction) return ast.conjunct.has_value();
  if (ast.conjunct) return false;
  switch (kind) {
    case CaptionKind::existential:
      return std::holds_alternative<Existential>(ast.head) &&
             std::holds_alternative<AttributeBody>(
                 std::get<Existential>(ast.head).body);
    case CaptionKind::spatial_existential:
      return std::holds_alternative<Existential>(ast.head) &&
             std::holds_alternative<RelationBody>(
                 std::get<Existential>(ast.head).body);
    case CaptionKind::negated_existential:
      return std::holds_alternative<NegatedExistential>(ast.head);
    case CaptionKind::quant_count:
      return std::holds_alternative<Quantified>(ast.head) &&
             std::get<Quantified>(ast.head).qspec.kind ==
                 QuantifierKind::count &&
             !std::get<Quantified>(ast.head).qspec.restrictor_count;
    case CaptionKind::quant_fraction:
      return std::holds_alternative<Quantified>(ast.head) &&
             std::get<Quantified>(ast.head).qspec.kind ==
                 QuantifierKind::fraction &&
             !std::get<Quantified>(ast.head).qspec.restrictor_count;
    case CaptionKind::quant_restricted:
      return std::holds_alternative<Quantified>(ast.head) &&
             std::get<Quantified>(ast.head)
                 .qspec.restrictor_count.has_value();
    case CaptionKind::comparative:
      return std::holds_alternative<Comparative>(ast.head);
    default:
      return false;
  }
}

}  // namespace detail

// Samples caption ASTs for a world. Construction is witness-driven for
// true captions; false captions corrupt a true one by a single edit.
// allowed_mentions limits which (shape, color) pairs may co-occur inside
// one noun phrase -- the hook the dataset layer uses to keep held-out
// combinations out of train captions.
class CaptionGenerator {
 public:
  AttributeVocabulary vocabulary;
  std::vector<ShapeColor> allowed_mentions;  // empty = everything allowed
  double clarity_margin = 0.05;
  int retry_budget = 50;

  CaptionGenerator() = default;
  explicit CaptionGenerator(AttributeVocabulary vocab,
                            double margin = 0.05)
      : vocabulary(std::move(vocab)), clarity_margin(margin) {}

  bool mention_allowed(Shape s, Color c) const {
    if (allowed_mentions.empty()) return true;
    return std::find(allowed_mentions.begin(), allowed_mentions.end(),
                     ShapeColor{s, c}) != allowed_mentions.end();
  }

  // --- public operations ---

  CaptionAst generate_true_caption(const WorldModel& world, CaptionKind kind,
                                   std::uint64_t seed) const {
    Rng rng(seed);
    return generate_true(world, kind, rng);
  }

  CaptionAst corrupt_caption(const CaptionAst& ast, const WorldModel& world,
                             std::uint64_t seed) const {
    Rng rng(seed);
    return corrupt(ast, world, rng);
  }

  GeneratedCaption generate_instance_caption(const WorldModel& world,
                                             CaptionKind kind, bool target,
                                             std::uint64_t seed) const {
    Rng rng(seed);
    CaptionAst ast = generate_true(world, kind, rng);
    if (!target) ast = corrupt(ast, world, rng);
    return GeneratedCaption{ast, realize(ast), evaluate(ast, world)};
  }

  // --- rng-threaded variants (used by the dataset layer) ---

  CaptionAst generate_true(const WorldModel& world, CaptionKind kind,
                           Rng& rng) const {
    if (world.entities.empty())
      throw NoValidCaption("cannot caption an empty world");
    for (int attempt = 0; attempt < retry_budget; ++attempt) {
      std::optional<CaptionAst> ast = try_generate(world, kind, rng);
      if (!ast) continue;
      if (evaluate(*ast, world) && is_clear(*ast, world, clarity_margin) &&
          mentions_allowed(*ast))
        return *ast;
    }
    throw NoValidCaption(std::string("no valid '") + to_string(kind) +
                         "' caption for this world within the retry budget");
  }

  CaptionAst corrupt(const CaptionAst& ast, const WorldModel& world,
                     Rng& rng) const {
    std::vector<CaptionAst> candidates = single_edit_neighbors(ast);
    // comparison flips swap the modifier word wholesale, which is the
    // most text-visible edit family; try them only after the
    // label-neutral edits so corrupted captions keep the surface
    // statistics of their sources
    std::stable_partition(candidates.begin(), candidates.end(),
                          [&](const CaptionAst& c) {
                            return !comparison_flipped_from(ast, c);
                          });
    const std::size_t preferred = static_cast<std::size_t>(
        std::count_if(candidates.begin(), candidates.end(),
                      [&](const CaptionAst& c) {
                        return !comparison_flipped_from(ast, c);
                      }));
    int tried = 0;
    std::size_t limit = preferred;
    while (!candidates.empty() && tried < retry_budget) {
      const std::size_t pool = limit > 0 ? limit : candidates.size();
      const std::size_t pick = rng.next_below(pool);
      CaptionAst cand = std::move(candidates[pick]);
      candidates.erase(candidates.begin() +
                       static_cast<std::ptrdiff_t>(pick));
      if (limit > 0) --limit;
      ++tried;
      if (!evaluate(cand, world) && is_clear(cand, world, clarity_margin) &&
          mentions_allowed(cand))
        return cand;
    }
    throw NoValidCorruption(
        "no single edit makes this caption false within the retry budget");
  }

  // Does `edited` differ from `source` in a comparison field?
  static bool comparison_flipped_from(const CaptionAst& source,
                                      const CaptionAst& edited) {
    auto clause_cmp = [](const Clause& c) -> std::pair<Comparison, bool> {
      if (const auto* q = std::get_if<Quantified>(&c))
        return {q->qspec.comparison, true};
      if (const auto* cmp = std::get_if<Comparative>(&c))
        return {cmp->cspec.comparison, true};
      return {Comparison::eq, false};
    };
    const auto [a1, h1] = clause_cmp(source.head);
    const auto [b1, g1] = clause_cmp(edited.head);
    if (h1 && g1 && a1 != b1) return true;
    if (source.conjunct && edited.conjunct) {
      const auto [a2, h2] = clause_cmp(*source.conjunct);
      const auto [b2, g2] = clause_cmp(*edited.conjunct);
      if (h2 && g2 && a2 != b2) return true;
    }
    return false;
  }

  bool mentions_allowed(const CaptionAst& ast) const {
    auto restrictor_ok = [&](const Restrictor& r) {
      return !(r.shape && r.color) || mention_allowed(*r.shape, *r.color);
    };
    auto body_ok = [&](const Body& b) {
      if (const auto* attr = std::get_if<AttributeBody>(&b))
        return !(attr->shape && attr->color) ||
               mention_allowed(*attr->shape, *attr->color);
      return restrictor_ok(std::get<RelationBody>(b).landmark);
    };
    auto clause_ok = [&](const Clause& cl) {
      return std::visit(
          [&](const auto& c) -> bool {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, Comparative>)
              return restrictor_ok(c.restrictor_a) &&
                     restrictor_ok(c.restrictor_b) && body_ok(c.body);
            else
              return restrictor_ok(c.restrictor) && body_ok(c.body);
          },
          cl);
    };
    if (!clause_ok(ast.head)) return false;
    return !ast.conjunct || clause_ok(*ast.conjunct);
  }

  // All ASTs reachable from `ast` by one edit: an attribute swap, a
  // relation flip, a +-1 / adjacent-fraction value change, or a
  // comparison flip.
  std::vector<CaptionAst> single_edit_neighbors(const CaptionAst& ast) const {
    std::vector<CaptionAst> out;
    auto add_head = [&](Clause c) {
      out.push_back(CaptionAst{std::move(c), ast.conjunct});
    };
    clause_neighbors(ast.head, add_head);
    if (ast.conjunct) {
      auto add_conjunct = [&](Clause c) {
        out.push_back(CaptionAst{ast.head, std::move(c)});
      };
      clause_neighbors(*ast.conjunct, add_conjunct);
    }
    return out;
  }

 private:
  // --- corruption edit enumeration ---

  template <typename Emit>
  void restrictor_swaps(const Restrictor& r, const Emit& emit) const {
    if (r.shape)
      for (Shape s : vocabulary.shapes)
        if (s != *r.shape) {
          Restrictor m = r;
          m.shape = s;
          emit(m);
        }
    if (r.color)
      for (Color c : vocabulary.colors)
        if (c != *r.color) {
          Restrictor m = r;
          m.color = c;
          emit(m);
        }
  }

  template <typename Emit>
  void body_neighbors(const Body& body, const Emit& emit) const {
    if (const auto* attr = std::get_if<AttributeBody>(&body)) {
      if (attr->shape)
        for (Shape s : vocabulary.shapes)
          if (s != *attr->shape) emit(Body{AttributeBody{s, attr->color}});
      if (attr->color)
        for (Color c : vocabulary.colors)
          if (c != *attr->color) emit(Body{AttributeBody{attr->shape, c}});
      return;
    }
    const auto& rel = std::get<RelationBody>(body);
    emit(Body{RelationBody{opposite(rel.relation), rel.landmark}});
    restrictor_swaps(rel.landmark, [&](const Restrictor& m) {
      emit(Body{RelationBody{rel.relation, m}});
    });
  }

  std::vector<QSpec> qspec_neighbors(const QSpec& q) const {
    std::vector<QSpec> out;
    if (q.kind == QuantifierKind::count) {
      if (q.value.num > 0) {
        QSpec m = q;
        m.value = Rational(q.value.num - 1);
        out.push_back(m);
      }
      if (q.value.num < 10) {
        QSpec m = q;
        m.value = Rational(q.value.num + 1);
        out.push_back(m);
      }
    } else {
      // proper fractions never carry a number restriction, so value
      // edits touching them are only legal without one
      const auto& chain = detail::lexicon_fractions();
      const auto it = std::find(chain.begin(), chain.end(), q.value);
      if (it != chain.end()) {
        if (it != chain.begin()) {
          QSpec m = q;
          m.value = *(it - 1);
          out.push_back(m);
        }
        if (it + 1 != chain.end()) {
          QSpec m = q;
          m.value = *(it + 1);
          out.push_back(m);
        } else if ((q.comparison == Comparison::eq ||
                    q.comparison == Comparison::neq) &&
                   !q.restrictor_count) {
          QSpec m = q;
          m.value = Rational(1);  // "three quarters" -> "all"
          out.push_back(m);
        }
      } else if (q.value == Rational(1) &&
                 (q.comparison == Comparison::eq ||
                  q.comparison == Comparison::neq) &&
                 !q.restrictor_count) {
        QSpec m = q;
        m.value = chain.back();  // "all" -> "three quarters"
        out.push_back(m);
      }
    }
    {
      QSpec m = q;
      m.comparison = flipped(q.comparison);
      // whole-fraction quantities only voice eq/neq
      if (q.kind != QuantifierKind::fraction || q.value != Rational(1) ||
          m.comparison == Comparison::eq || m.comparison == Comparison::neq)
        out.push_back(m);
    }
    return out;
  }

  template <typename Add>
  void clause_neighbors(const Clause& clause, const Add& add) const {
    std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, Existential> ||
                        std::is_same_v<T, NegatedExistential>) {
            restrictor_swaps(c.restrictor, [&](const Restrictor& m) {
              T n = c;
              n.restrictor = m;
              add(Clause{n});
            });
            body_neighbors(c.body, [&](const Body& b) {
              T n = c;
              n.body = b;
              add(Clause{n});
            });
          } else if constexpr (std::is_same_v<T, Quantified>) {
            restrictor_swaps(c.restrictor, [&](const Restrictor& m) {
              Quantified n = c;
              n.restrictor = m;
              add(Clause{n});
            });
            body_neighbors(c.body, [&](const Body& b) {
              Quantified n = c;
              n.body = b;
              add(Clause{n});
            });
            for (const QSpec& q : qspec_neighbors(c.qspec)) {
              Quantified n = c;
              n.qspec = q;
              add(Clause{n});
            }
          } else {
            restrictor_swaps(c.restrictor_a, [&](const Restrictor& m) {
              Comparative n = c;
              n.restrictor_a = m;
              add(Clause{n});
            });
            restrictor_swaps(c.restrictor_b, [&](const Restrictor& m) {
              Comparative n = c;
              n.restrictor_b = m;
              add(Clause{n});
            });
            body_neighbors(c.body, [&](const Body& b) {
              Comparative n = c;
              n.body = b;
              add(Clause{n});
            });
            const auto& chain = detail::lexicon_ratios();
            const auto it =
                std::find(chain.begin(), chain.end(), c.cspec.ratio);
            if (it != chain.end()) {
              if (it != chain.begin()) {
                Comparative n = c;
                n.cspec.ratio = *(it - 1);
                add(Clause{n});
              }
              if (it + 1 != chain.end()) {
                Comparative n = c;
                n.cspec.ratio = *(it + 1);
                add(Clause{n});
              }
            }
            if (c.cspec.comparison != Comparison::eq) {
              Comparative n = c;
              n.cspec.comparison = flipped(c.cspec.comparison);
              add(Clause{n});
            }
          }
        },
        clause);
  }

  // --- constructive generation ---

  // Random description of a witness entity split across restrictor and
  // body attributes, uniform over the five valid layouts.
  std::optional<CaptionAst> gen_existential(const WorldModel& w,
                                            Rng& rng) const {
    const Entity& e = w.entities[rng.next_below(w.entities.size())];
    Restrictor r;
    AttributeBody b;
    switch (rng.next_below(5)) {
      case 0: b.shape = e.shape; break;
      case 1: b.color = e.color; break;
      case 2: b.shape = e.shape; b.color = e.color; break;
      case 3: r.shape = e.shape; b.color = e.color; break;
      default: r.color = e.color; b.shape = e.shape; break;
    }
    return make_caption(Existential{r, Body{b}});
  }

  Shape random_shape(Rng& rng) const {
    return vocabulary.shapes[rng.next_below(vocabulary.shapes.size())];
  }
  Color random_color(Rng& rng) const {
    return vocabulary.colors[rng.next_below(vocabulary.colors.size())];
  }

  // Restrictor with attribute values drawn from the vocabulary.
  Restrictor random_restrictor(Rng& rng, bool allow_empty) const {
    for (;;) {
      Restrictor r;
      const std::uint64_t layout = rng.next_below(4);
      if (layout == 1 || layout == 3) r.shape = random_shape(rng);
      if (layout == 2 || layout == 3) r.color = random_color(rng);
      if (r.shape && r.color && !mention_allowed(*r.shape, *r.color))
        continue;
      if (!allow_empty && r.empty()) continue;
      return r;
    }
  }

  // Restrictor describing a subset of a concrete entity's attributes.
  Restrictor witness_restrictor(const Entity& e, Rng& rng,
                                bool allow_empty) const {
    switch (rng.next_below(allow_empty ? 4 : 3)) {
      case 0: return Restrictor{e.shape, std::nullopt};
      case 1: return Restrictor{std::nullopt, e.color};
      case 2: return Restrictor{e.shape, e.color};
      default: return Restrictor{};
    }
  }

  Body random_body(const WorldModel& w, Rng& rng) const {
    if (rng.next_below(10) < 3) {  // spatial
      const Entity& l = w.entities[rng.next_below(w.entities.size())];
      const Relation rel = static_cast<Relation>(rng.next_below(4));
      return Body{RelationBody{rel, witness_restrictor(l, rng, false)}};
    }
    AttributeBody b;
    const Entity& e = w.entities[rng.next_below(w.entities.size())];
    switch (rng.next_below(3)) {
      case 0: b.shape = e.shape; break;
      case 1: b.color = e.color; break;
      default: b.shape = e.shape; b.color = e.color; break;
    }
    return Body{b};
  }

  // Body for a quantified clause. Describing the witness itself half the
  // time keeps |R cap B| > 0 common, so upward ("more than", "at least")
  // and downward comparisons stay balanced in the emitted text.
  Body quantifier_body(const WorldModel& w, const Entity& witness,
                       Rng& rng) const {
    if (rng.next_below(2) == 0) {
      AttributeBody b;
      switch (rng.next_below(3)) {
        case 0: b.shape = witness.shape; break;
        case 1: b.color = witness.color; break;
        default: b.shape = witness.shape; b.color = witness.color; break;
      }
      return Body{b};
    }
    return random_body(w, rng);
  }

  std::optional<CaptionAst> gen_negated_existential(const WorldModel&,
                                                    Rng& rng) const {
    // free sampling over the vocabulary; truth is verified by the caller
    Restrictor r = random_restrictor(rng, true);
    Body b;
    if (rng.next_below(10) < 3) {
      const Relation rel = static_cast<Relation>(rng.next_below(4));
      b = Body{RelationBody{rel, random_restrictor(rng, false)}};
    } else {
      AttributeBody attr;
      const std::uint64_t layout = rng.next_below(3);
      if (layout == 0 || layout == 2) attr.shape = random_shape(rng);
      if (layout == 1 || layout == 2) attr.color = random_color(rng);
      if (attr.shape && attr.color &&
          !mention_allowed(*attr.shape, *attr.color))
        return std::nullopt;
      b = Body{attr};
    }
    return make_caption(NegatedExistential{r, b});
  }

  std::optional<CaptionAst> gen_spatial_existential(const WorldModel& w,
                                                    Rng& rng) const {
    if (w.entities.size() < 2)
      throw NoValidCaption("spatial captions need at least two entities");
    const std::size_t i = rng.next_below(w.entities.size());
    std::size_t j = rng.next_below(w.entities.size() - 1);
    if (j >= i) ++j;
    const Entity& subject = w.entities[i];
    const Entity& landmark = w.entities[j];

    const bool vertical = rng.next_below(2) == 0;
    const double diff =
        vertical ? subject.y - landmark.y : subject.x - landmark.x;
    if ((diff < 0 ? -diff : diff) < clarity_margin) return std::nullopt;
    Relation rel;
    if (vertical)
      rel = diff > 0 ? Relation::above : Relation::below;
    else
      rel = diff > 0 ? Relation::right_of : Relation::left_of;

    return make_caption(Existential{
        witness_restrictor(subject, rng, true),
        Body{RelationBody{rel, witness_restrictor(landmark, rng, false)}}});
  }

  struct Counts {
    long n_rb = 0;
    long n_r = 0;
  };

  Counts body_counts(const Restrictor& r, const Body& b,
                     const WorldModel& w) const {
    Counts c;
    for (const Entity& e : w.entities) {
      if (!r.matches(e)) continue;
      ++c.n_r;
      if (shapecap::detail::satisfies(e, b, w)) ++c.n_rb;
    }
    return c;
  }

  // Truthful value range for a count comparison. Values making the
  // statement true in every world of this size (geq zero, leq the
  // universe ceiling) are excluded: tautologies teach nothing and their
  // one-sidedness leaks into the text statistics.
  static std::pair<long, long> count_value_range(Comparison cmp, long n_rb,
                                                 long universe) {
    switch (cmp) {
      case Comparison::lt: return {n_rb + 1, universe};
      case Comparison::leq: return {n_rb, universe - 1};
      case Comparison::eq: return {n_rb, n_rb <= universe ? n_rb : -1};
      case Comparison::geq: return {1, n_rb};
      case Comparison::gt: return {0, n_rb - 1};
      case Comparison::neq: return {0, universe};  // minus n_rb, see below
    }
    return {0, -1};
  }

  static bool count_cmp_feasible(Comparison cmp, long n_rb, long universe) {
    const auto [lo, hi] = count_value_range(cmp, n_rb, universe);
    if (cmp == Comparison::neq) return hi >= 1;  // at least one value != n_rb
    return lo <= hi;
  }

  // Values concentrate geometrically near the decision threshold: tight
  // thresholds make harder instances and keep single-value edits viable
  // as corruptions.
  long pick_count_value(Comparison cmp, long n_rb, long universe,
                        Rng& rng) const {
    long g = 0;
    while (rng.next_below(2) == 0 && g < universe) ++g;
    switch (cmp) {
      case Comparison::lt: return std::min(n_rb + 1 + g, universe);
      case Comparison::leq: return std::min(n_rb + g, universe - 1);
      case Comparison::eq: return n_rb;
      case Comparison::geq: return std::max(n_rb - g, 1L);
      case Comparison::gt: return std::max(n_rb - 1 - g, 0L);
      case Comparison::neq: {
        const long delta = 1 + g;
        const long up = n_rb + delta <= universe ? n_rb + delta : -1;
        const long down = n_rb - delta >= 0 ? n_rb - delta : -1;
        if (up >= 0 && down >= 0)
          return rng.next_below(2) == 0 ? up : down;
        if (up >= 0) return up;
        if (down >= 0) return down;
        return n_rb >= 1 ? n_rb - 1 : n_rb + 1;
      }
    }
    return n_rb;
  }

  std::optional<QSpec> truthful_count_qspec(long n_rb, long universe,
                                            std::optional<int> rc,
                                            Rng& rng) const {
    std::vector<Comparison> feasible;
    for (int ci = 0; ci < 6; ++ci) {
      const auto cmp = static_cast<Comparison>(ci);
      if (count_cmp_feasible(cmp, n_rb, universe)) feasible.push_back(cmp);
    }
    if (feasible.empty()) return std::nullopt;
    const Comparison cmp = feasible[rng.next_below(feasible.size())];
    const long value = pick_count_value(cmp, n_rb, universe, rng);
    return QSpec{QuantifierKind::count, cmp, Rational(value), rc};
  }

  std::optional<CaptionAst> gen_quant_count(const WorldModel& w,
                                            Rng& rng) const {
    const Entity& witness = w.entities[rng.next_below(w.entities.size())];
    const Restrictor r = witness_restrictor(witness, rng, true);
    const Body b = quantifier_body(w, witness, rng);
    const Counts c = body_counts(r, b, w);
    const long universe =
        std::min<long>(10, static_cast<long>(w.entities.size()) + 1);
    const auto qspec = truthful_count_qspec(c.n_rb, universe, std::nullopt, rng);
    if (!qspec) return std::nullopt;
    return make_caption(Quantified{*qspec, r, b});
  }

  std::optional<CaptionAst> gen_quant_fraction(const WorldModel& w,
                                               Rng& rng) const {
    const Entity& witness = w.entities[rng.next_below(w.entities.size())];
    const Restrictor r = witness_restrictor(witness, rng, true);
    const Body b = quantifier_body(w, witness, rng);
    const Counts c = body_counts(r, b, w);
    if (c.n_r == 0) return std::nullopt;
    const Rational actual(c.n_rb, c.n_r);

    // comparison first, uniformly among feasible ones, then a value;
    // weighting by option count would skew the modifier-word statistics
    std::array<std::vector<Rational>, 6> by_cmp;
    for (int ci = 0; ci < 6; ++ci) {
      const auto cmp = static_cast<Comparison>(ci);
      for (const Rational& f : detail::lexicon_fractions()) {
        if (!compare(cmp, actual, f)) continue;
        if (shapecap::detail::strict(cmp) && actual == f) continue;
        by_cmp[static_cast<std::size_t>(ci)].push_back(f);
      }
    }
    if (c.n_rb == c.n_r)
      by_cmp[static_cast<std::size_t>(Comparison::eq)].push_back(Rational(1));
    else
      by_cmp[static_cast<std::size_t>(Comparison::neq)].push_back(Rational(1));

    std::vector<std::size_t> feasible;
    for (std::size_t ci = 0; ci < 6; ++ci)
      if (!by_cmp[ci].empty()) feasible.push_back(ci);
    if (feasible.empty()) return std::nullopt;
    const std::size_t ci = feasible[rng.next_below(feasible.size())];
    const Rational value = by_cmp[ci][rng.next_below(by_cmp[ci].size())];
    return make_caption(Quantified{
        QSpec{QuantifierKind::fraction, static_cast<Comparison>(ci), value,
              std::nullopt},
        r, b});
  }

  std::optional<CaptionAst> gen_quant_restricted(const WorldModel& w,
                                                 Rng& rng) const {
    const Entity& witness = w.entities[rng.next_below(w.entities.size())];
    const Restrictor r = witness_restrictor(witness, rng, true);
    const Body b = quantifier_body(w, witness, rng);
    const Counts c = body_counts(r, b, w);
    if (c.n_r < 2 || c.n_r > 10) return std::nullopt;

    // "all the five ..." when everything qualifies, else a counted form
    if (c.n_rb == c.n_r && rng.next_below(4) == 0)
      return make_caption(Quantified{
          QSpec{QuantifierKind::fraction, Comparison::eq, Rational(1),
                static_cast<int>(c.n_r)},
          r, b});
    const auto qspec =
        truthful_count_qspec(c.n_rb, 10, static_cast<int>(c.n_r), rng);
    if (!qspec) return std::nullopt;
    return make_caption(Quantified{*qspec, r, b});
  }

  std::optional<CaptionAst> gen_comparative(const WorldModel& w,
                                            Rng& rng) const {
    // the witness anchors the reference side so its count is nonzero;
    // when possible the subject side is anchored on a second body
    // satisfier, keeping both counts positive and comparisons balanced
    const Entity& witness = w.entities[rng.next_below(w.entities.size())];
    const bool by_color = rng.next_below(2) == 0;
    Restrictor ra, rb;
    Body b;
    if (by_color) {
      rb.color = witness.color;
      b = rng.next_below(5) == 0
              ? random_body(w, rng)
              : Body{AttributeBody{witness.shape, std::nullopt}};
    } else {
      rb.shape = witness.shape;
      b = rng.next_below(5) == 0
              ? random_body(w, rng)
              : Body{AttributeBody{std::nullopt, witness.color}};
    }

    std::vector<Color> other_colors;
    std::vector<Shape> other_shapes;
    if (rng.next_below(2) == 0) {
      // prefer subjects that actually satisfy the body
      for (const Entity& e : w.entities) {
        if (!shapecap::detail::satisfies(e, b, w)) continue;
        if (by_color && e.color != witness.color)
          other_colors.push_back(e.color);
        if (!by_color && e.shape != witness.shape)
          other_shapes.push_back(e.shape);
      }
    }
    if (by_color) {
      ra.color = other_colors.empty()
                     ? random_color(rng)
                     : other_colors[rng.next_below(other_colors.size())];
      if (ra.color == rb.color) return std::nullopt;
    } else {
      ra.shape = other_shapes.empty()
                     ? random_shape(rng)
                     : other_shapes[rng.next_below(other_shapes.size())];
      if (ra.shape == rb.shape) return std::nullopt;
    }

    const Counts ca = body_counts(ra, b, w);
    const Counts cb = body_counts(rb, b, w);
    if (cb.n_rb == 0) return std::nullopt;

    // comparison first, uniformly among feasible ones, then a ratio
    constexpr std::array<Comparison, 5> cmps = {Comparison::eq,
                                                Comparison::gt, Comparison::lt,
                                                Comparison::geq,
                                                Comparison::leq};
    std::array<std::vector<Rational>, 5> by_cmp;
    for (std::size_t ci = 0; ci < cmps.size(); ++ci)
      for (const Rational& ratio : detail::lexicon_ratios()) {
        const Rational rhs = ratio * Rational(cb.n_rb);
        if (!compare(cmps[ci], Rational(ca.n_rb), rhs)) continue;
        if (shapecap::detail::strict(cmps[ci]) && Rational(ca.n_rb) == rhs)
          continue;
        by_cmp[ci].push_back(ratio);
      }
    std::vector<std::size_t> feasible;
    for (std::size_t ci = 0; ci < cmps.size(); ++ci)
      if (!by_cmp[ci].empty()) feasible.push_back(ci);
    if (feasible.empty()) return std::nullopt;
    const std::size_t ci = feasible[rng.next_below(feasible.size())];
    const Rational ratio = by_cmp[ci][rng.next_below(by_cmp[ci].size())];
    return make_caption(
        Comparative{CompSpec{ratio, cmps[ci]}, ra, rb, b});
  }

  std::optional<CaptionAst> try_generate(const WorldModel& w, CaptionKind kind,
                                         Rng& rng) const {
    switch (kind) {
      case CaptionKind::existential: return gen_existential(w, rng);
      case CaptionKind::negated_existential:
        return gen_negated_existential(w, rng);
      case CaptionKind::spatial_existential:
        return gen_spatial_existential(w, rng);
      case CaptionKind::quant_count: return gen_quant_count(w, rng);
      case CaptionKind::quant_fraction: return gen_quant_fraction(w, rng);
      case CaptionKind::quant_restricted: return gen_quant_restricted(w, rng);
      case CaptionKind::comparative: return gen_comparative(w, rng);
      case CaptionKind::conjunction: {
        // two distinct-draw clauses of any non-conjunction kind
        const auto pick_kind = [&] {
          return kAllCaptionKinds[rng.next_below(7)];  // excludes conjunction
        };
        std::optional<CaptionAst> left, right;
        try {
          left = try_generate(w, pick_kind(), rng);
          right = try_generate(w, pick_kind(), rng);
        } catch (const NoValidCaption&) {
          return std::nullopt;  // e.g. spatial sub-kind on a 1-entity world
        }
        if (!left || !right) return std::nullopt;
        return make_conjunction(left->head, right->head);
      }
    }
    return std::nullopt;
  }
};

}  // namespace shapecap
