#pragma once

// Shared fixtures and independent oracles for the test suites. Anything
// here that re-implements library behavior (the PPM reader, the convex
// polygon test, the AST sampler) is deliberately written from scratch so
// tests do not validate the implementation against itself.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapecap/captiongen.hpp"
#include "shapecap/render.hpp"
#include "shapecap/rng.hpp"
#include "shapecap/semantics.hpp"
#include "shapecap/world.hpp"

namespace testutil {

using namespace shapecap;

inline Entity entity(Shape s, Color c, double x, double y, double ext = 0.1,
                     double rotation = 0.0, double shade = 0.0) {
  Entity e;
  e.shape = s;
  e.color = c;
  e.x = x;
  e.y = y;
  e.sx = ext;
  e.sy = ext;
  e.rotation = rotation;
  e.shade = shade;
  return e;
}

inline WorldModel world(std::vector<Entity> entities) {
  WorldModel w;
  w.entities = std::move(entities);
  return w;
}

// Figure-style witness world: gray pentagon over a green ellipse with a
// red square off to the side.
inline WorldModel fig1_world() {
  return world({entity(Shape::pentagon, Color::gray, 0.3, 0.8),
                entity(Shape::ellipse, Color::green, 0.5, 0.3),
                entity(Shape::square, Color::red, 0.7, 0.5)});
}

inline CaptionAst fig1_ast() {
  return make_conjunction(
      Existential{Restrictor{Shape::pentagon, std::nullopt},
                  Body{RelationBody{Relation::above,
                                    Restrictor{Shape::ellipse, Color::green}}}},
      NegatedExistential{Restrictor{std::nullopt, Color::blue},
                         Body{AttributeBody{Shape::ellipse, std::nullopt}}});
}

// --- independent PPM reader -------------------------------------------------

struct DecodedPpm {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

inline DecodedPpm decode_ppm(const std::vector<std::uint8_t>& bytes) {
  std::size_t i = 0;
  auto expect = [&](char c) {
    if (i >= bytes.size() || bytes[i] != static_cast<std::uint8_t>(c))
      throw std::runtime_error("ppm: unexpected byte at " + std::to_string(i));
    ++i;
  };
  auto read_int = [&] {
    int v = 0;
    bool any = false;
    while (i < bytes.size() && bytes[i] >= '0' && bytes[i] <= '9') {
      v = v * 10 + (bytes[i] - '0');
      ++i;
      any = true;
    }
    if (!any) throw std::runtime_error("ppm: expected an integer");
    return v;
  };
  expect('P');
  expect('6');
  expect('\n');
  DecodedPpm out;
  out.width = read_int();
  expect(' ');
  out.height = read_int();
  expect('\n');
  if (read_int() != 255) throw std::runtime_error("ppm: maxval must be 255");
  expect('\n');
  const std::size_t need =
      static_cast<std::size_t>(out.width) * out.height * 3;
  if (bytes.size() - i != need)
    throw std::runtime_error("ppm: wrong payload size");
  out.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(i),
                    bytes.end());
  return out;
}

// --- independent geometry oracle ---------------------------------------------

// Point in convex polygon, vertices in counterclockwise order.
inline std::optional<bool> point_in_convex_polygon(
    const std::vector<std::pair<double, double>>& poly, double x, double y) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    const double cross =
        (b.first - a.first) * (y - a.second) - (b.second - a.second) * (x - a.first);
    if (std::abs(cross) < 1e-12) return std::nullopt;  // too close to call
    if (cross < 0.0) return false;
  }
  return true;
}

// Corners of a rotated rectangle, using libm trig (the library path uses
// its own polynomial trig, so agreement is meaningful).
inline std::vector<std::pair<double, double>> rectangle_corners(
    const Entity& e) {
  const double theta = 2.0 * M_PI * e.rotation;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  std::vector<std::pair<double, double>> corners;
  for (auto [ux, uy] : {std::pair{1.0, 1.0}, std::pair{-1.0, 1.0},
                        std::pair{-1.0, -1.0}, std::pair{1.0, -1.0}}) {
    const double lx = ux * e.sx;
    const double ly = uy * e.sy;
    corners.emplace_back(e.x + c * lx - s * ly, e.y + s * lx + c * ly);
  }
  return corners;
}

// --- fragment-wide AST sampler ------------------------------------------------

// Free sampler over everything realize() supports, independent of
// CaptionGenerator's witness-driven construction.
class AstSampler {
 public:
  explicit AstSampler(std::uint64_t seed) : rng_(seed) {}

  Restrictor restrictor() {
    Restrictor r;
    if (rng_.next_below(2)) r.shape = random_shape();
    if (rng_.next_below(2)) r.color = random_color();
    return r;
  }

  Body body() {
    if (rng_.next_below(2)) {
      AttributeBody b;
      switch (rng_.next_below(3)) {
        case 0: b.shape = random_shape(); break;
        case 1: b.color = random_color(); break;
        default:
          b.shape = random_shape();
          b.color = random_color();
      }
      return Body{b};
    }
    return Body{RelationBody{static_cast<Relation>(rng_.next_below(4)),
                             restrictor()}};
  }

  QSpec qspec() {
    QSpec q;
    if (rng_.next_below(2)) {
      q.kind = QuantifierKind::count;
      q.comparison = static_cast<Comparison>(rng_.next_below(6));
      q.value = Rational(static_cast<std::int64_t>(rng_.next_below(11)));
      if (rng_.next_below(4) == 0)
        q.restrictor_count = static_cast<int>(rng_.next_below(11));
    } else {
      q.kind = QuantifierKind::fraction;
      if (rng_.next_below(5) == 0) {
        q.value = Rational(1);
        q.comparison =
            rng_.next_below(2) ? Comparison::eq : Comparison::neq;
        if (rng_.next_below(3) == 0)
          q.restrictor_count = static_cast<int>(rng_.next_below(11));
      } else {
        const auto& chain = shapecap::detail::lexicon_fractions();
        q.value = chain[rng_.next_below(chain.size())];
        q.comparison = static_cast<Comparison>(rng_.next_below(6));
      }
    }
    return q;
  }

  Clause clause() {
    switch (rng_.next_below(4)) {
      case 0: return Existential{restrictor(), body()};
      case 1: return NegatedExistential{restrictor(), body()};
      case 2: return Quantified{qspec(), restrictor(), body()};
      default: {
        const auto& ratios = shapecap::detail::lexicon_ratios();
        constexpr Comparison comps[] = {Comparison::eq, Comparison::gt,
                                        Comparison::lt, Comparison::geq,
                                        Comparison::leq};
        return Comparative{
            CompSpec{ratios[rng_.next_below(ratios.size())],
                     comps[rng_.next_below(5)]},
            restrictor(), restrictor(), body()};
      }
    }
  }

  CaptionAst ast() {
    if (rng_.next_below(4) == 0) return make_conjunction(clause(), clause());
    return make_caption(clause());
  }

  // Unconstrained world: attributes and positions are free, which is all
  // the evaluator and oracle care about.
  WorldModel world(std::size_t max_entities = 12) {
    WorldModel w;
    const std::size_t n = rng_.next_below(max_entities + 1);
    for (std::size_t i = 0; i < n; ++i) {
      Entity e;
      e.shape = random_shape();
      e.color = random_color();
      e.x = rng_.next_unit();
      e.y = rng_.next_unit();
      e.rotation = rng_.next_unit();
      e.sx = rng_.next_range(0.02, 0.3);
      e.sy = rng_.next_range(0.02, 0.3);
      e.shade = rng_.next_range(-0.5, 0.5);
      w.entities.push_back(e);
    }
    return w;
  }

  Rng& rng() { return rng_; }

 private:
  Shape random_shape() {
    return kAllShapes[rng_.next_below(kAllShapes.size())];
  }
  Color random_color() {
    return kEntityColors[rng_.next_below(kEntityColors.size())];
  }

  Rng rng_;
};

// --- misc ----------------------------------------------------------------------

inline std::uint64_t fnv1a(const std::vector<std::uint8_t>& bytes,
                           std::uint64_t h = 0xCBF29CE484222325ULL) {
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace testutil
