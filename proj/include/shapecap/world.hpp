#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shapecap/errors.hpp"
#include "shapecap/rng.hpp"

namespace shapecap {

enum class Shape : std::uint8_t {
  square,
  rectangle,
  triangle,
  pentagon,
  cross,
  circle,
  semicircle,
  ellipse,
};

enum class Color : std::uint8_t {
  red,
  green,
  blue,
  yellow,
  cyan,
  magenta,
  gray,
  black,  // background only; never sampled for entities
};

inline constexpr std::array<Shape, 8> kAllShapes = {
    Shape::square,  Shape::rectangle, Shape::triangle,   Shape::pentagon,
    Shape::cross,   Shape::circle,    Shape::semicircle, Shape::ellipse};

inline constexpr std::array<Color, 7> kEntityColors = {
    Color::red,  Color::green,   Color::blue, Color::yellow,
    Color::cyan, Color::magenta, Color::gray};

inline const char* to_string(Shape s) {
  switch (s) {
    case Shape::square: return "square";
    case Shape::rectangle: return "rectangle";
    case Shape::triangle: return "triangle";
    case Shape::pentagon: return "pentagon";
    case Shape::cross: return "cross";
    case Shape::circle: return "circle";
    case Shape::semicircle: return "semicircle";
    case Shape::ellipse: return "ellipse";
  }
  return "?";
}

inline const char* to_string(Color c) {
  switch (c) {
    case Color::red: return "red";
    case Color::green: return "green";
    case Color::blue: return "blue";
    case Color::yellow: return "yellow";
    case Color::cyan: return "cyan";
    case Color::magenta: return "magenta";
    case Color::gray: return "gray";
    case Color::black: return "black";
  }
  return "?";
}

inline std::optional<Shape> shape_from_string(const std::string& s) {
  for (Shape k : kAllShapes)
    if (s == to_string(k)) return k;
  return std::nullopt;
}

inline std::optional<Color> color_from_string(const std::string& s) {
  for (Color k : kEntityColors)
    if (s == to_string(k)) return k;
  if (s == "black") return Color::black;
  return std::nullopt;
}

using ShapeColor = std::pair<Shape, Color>;

// Ordered attribute axes available to the sampler. Order is part of the
// determinism contract: sampling indexes into these lists.
struct AttributeVocabulary {
  std::vector<Shape> shapes{kAllShapes.begin(), kAllShapes.end()};
  std::vector<Color> colors{kEntityColors.begin(), kEntityColors.end()};

  bool operator==(const AttributeVocabulary&) const = default;

  bool valid() const {
    if (shapes.empty() || colors.empty()) return false;
    auto unique_all = [](auto v) {
      std::sort(v.begin(), v.end());
      return std::adjacent_find(v.begin(), v.end()) == v.end();
    };
    return unique_all(shapes) && unique_all(colors);
  }
};

// One attributed shape. Coordinates live in the unit square with the
// origin at the bottom-left corner and y increasing upward, so "above"
// is a plain y comparison. rotation is a fraction of a full turn,
// counterclockwise. extents are half-width / half-height before rotation.
// shade in [-0.5, 0.5] mixes the base color toward black (negative) or
// white (positive).
struct Entity {
  Shape shape = Shape::square;
  Color color = Color::red;
  double x = 0.5;
  double y = 0.5;
  double rotation = 0.0;
  double sx = 0.1;
  double sy = 0.1;
  double shade = 0.0;

  bool operator==(const Entity&) const = default;
};

struct WorldModel {
  std::vector<Entity> entities;  // order = sampling order = draw order
  Color background = Color::black;
  std::uint64_t seed_trace = 0;

  bool operator==(const WorldModel&) const = default;
};

// Sampling constraints. forced combinations are placed first, one entity
// each; excluded combinations never appear.
struct WorldSpec {
  AttributeVocabulary vocabulary;
  int min_entities = 3;
  int max_entities = 8;
  double min_extent = 0.06;
  double max_extent = 0.15;
  double min_separation = 0.1;
  std::vector<ShapeColor> excluded_combinations;
  std::vector<ShapeColor> forced_combinations;

  bool operator==(const WorldSpec&) const = default;

  // All (shape, color) pairs the sampler may assign.
  std::vector<ShapeColor> allowed_combinations() const {
    std::vector<ShapeColor> out;
    for (Shape s : vocabulary.shapes)
      for (Color c : vocabulary.colors) {
        ShapeColor sc{s, c};
        if (std::find(excluded_combinations.begin(),
                      excluded_combinations.end(),
                      sc) == excluded_combinations.end())
          out.push_back(sc);
      }
    return out;
  }

  std::vector<std::string> validation_errors() const {
    std::vector<std::string> errs;
    if (!vocabulary.valid()) errs.push_back("vocabulary invalid");
    if (!(1 <= min_entities && min_entities <= max_entities))
      errs.push_back("entity count bounds invalid");
    if (!(0.0 < min_extent && min_extent <= max_extent && max_extent <= 0.5))
      errs.push_back("extent range invalid");
    if (min_separation < 0.0) errs.push_back("min_separation negative");
    for (const auto& f : forced_combinations)
      if (std::find(excluded_combinations.begin(), excluded_combinations.end(),
                    f) != excluded_combinations.end())
        errs.push_back("combination both forced and excluded");
    if (static_cast<int>(forced_combinations.size()) > max_entities)
      errs.push_back("forced combinations exceed max entity count");
    if (allowed_combinations().empty())
      errs.push_back("all combinations excluded");
    return errs;
  }
};

namespace detail {

inline constexpr int kPlacementRetries = 100;

inline bool far_enough(const WorldModel& w, double x, double y, double d) {
  for (const Entity& e : w.entities) {
    const double dx = e.x - x;
    const double dy = e.y - y;
    if (dx * dx + dy * dy < d * d) return false;
  }
  return true;
}

}  // namespace detail

// Draws one microworld. Identical (spec, seed) yields an identical world.
// Centers are sampled so the whole shape fits inside the canvas; entities
// off the edge would make caption truth invisible in the image.
inline WorldModel sample_world(const WorldSpec& spec, std::uint64_t seed) {
  if (auto errs = spec.validation_errors(); !errs.empty())
    throw SamplingExhausted("world spec invalid: " + errs.front());

  Rng rng(seed);
  WorldModel world;
  world.seed_trace = seed;

  const auto combos = spec.allowed_combinations();
  int count = spec.min_entities +
              static_cast<int>(rng.next_below(
                  static_cast<std::uint64_t>(spec.max_entities -
                                             spec.min_entities + 1)));
  count = std::max(count, static_cast<int>(spec.forced_combinations.size()));

  world.entities.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Entity e;
    if (i < static_cast<int>(spec.forced_combinations.size())) {
      e.shape = spec.forced_combinations[static_cast<std::size_t>(i)].first;
      e.color = spec.forced_combinations[static_cast<std::size_t>(i)].second;
    } else {
      const auto& sc = combos[rng.next_below(combos.size())];
      e.shape = sc.first;
      e.color = sc.second;
    }

    e.sx = rng.next_range(spec.min_extent, spec.max_extent);
    e.sy = (e.shape == Shape::square || e.shape == Shape::circle)
               ? e.sx
               : rng.next_range(spec.min_extent, spec.max_extent);
    e.rotation = rng.next_unit();
    e.shade = rng.next_range(-0.5, 0.5);

    const double bound = std::max(e.sx, e.sy);
    const double lo = std::min(bound, 0.5);
    const double hi = 1.0 - lo;
    bool placed = false;
    for (int attempt = 0; attempt < detail::kPlacementRetries; ++attempt) {
      const double x = rng.next_range(lo, hi);
      const double y = rng.next_range(lo, hi);
      if (detail::far_enough(world, x, y, spec.min_separation)) {
        e.x = x;
        e.y = y;
        placed = true;
        break;
      }
    }
    if (!placed)
      throw SamplingExhausted(
          "could not place entity " + std::to_string(i) + " of " +
          std::to_string(count) + " after " +
          std::to_string(detail::kPlacementRetries) +
          " attempts (min_separation " + std::to_string(spec.min_separation) +
          ")");
    world.entities.push_back(e);
  }
  return world;
}

// Empty result means every WorldSpec invariant holds for this world.
inline std::vector<std::string> validate_world(const WorldModel& world,
                                               const WorldSpec& spec) {
  std::vector<std::string> violations;
  const int n = static_cast<int>(world.entities.size());

  if (n < spec.min_entities || n > spec.max_entities)
    violations.push_back("entity count " + std::to_string(n) +
                         " outside [" + std::to_string(spec.min_entities) +
                         ", " + std::to_string(spec.max_entities) + "]");

  for (int i = 0; i < n; ++i) {
    const Entity& e = world.entities[static_cast<std::size_t>(i)];
    const std::string who = "entity " + std::to_string(i);
    if (e.x < 0.0 || e.x > 1.0 || e.y < 0.0 || e.y > 1.0)
      violations.push_back(who + ": center outside unit square");
    if (e.rotation < 0.0 || e.rotation >= 1.0)
      violations.push_back(who + ": rotation outside [0,1)");
    if (e.sx < spec.min_extent || e.sx > spec.max_extent ||
        e.sy < spec.min_extent || e.sy > spec.max_extent)
      violations.push_back(who + ": extents outside configured range");
    if ((e.shape == Shape::square || e.shape == Shape::circle) && e.sx != e.sy)
      violations.push_back(who + ": square/circle requires sx = sy");
    if (e.shade < -0.5 || e.shade > 0.5)
      violations.push_back(who + ": shade outside [-0.5, 0.5]");
    if (std::find(spec.excluded_combinations.begin(),
                  spec.excluded_combinations.end(),
                  ShapeColor{e.shape, e.color}) !=
        spec.excluded_combinations.end())
      violations.push_back(who + ": excluded combination " +
                           std::string(to_string(e.color)) + " " +
                           to_string(e.shape));
  }

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Entity& a = world.entities[static_cast<std::size_t>(i)];
      const Entity& b = world.entities[static_cast<std::size_t>(j)];
      const double dx = a.x - b.x;
      const double dy = a.y - b.y;
      if (std::sqrt(dx * dx + dy * dy) < spec.min_separation)
        violations.push_back("entities " + std::to_string(i) + " and " +
                             std::to_string(j) + " closer than min_separation");
    }

  for (const auto& f : spec.forced_combinations) {
    bool found = false;
    for (const Entity& e : world.entities)
      if (e.shape == f.first && e.color == f.second) {
        found = true;
        break;
      }
    if (!found)
      violations.push_back("forced combination " +
                           std::string(to_string(f.second)) + " " +
                           to_string(f.first) + " missing");
  }

  return violations;
}

}  // namespace shapecap
