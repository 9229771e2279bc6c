#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "shapecap/errors.hpp"
#include "shapecap/world.hpp"

namespace shapecap {

// Row-major RGB, 8 bits per channel, top row first.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  bool operator==(const Image&) const = default;

  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) *
                                    static_cast<std::size_t>(width) +
                                static_cast<std::size_t>(x));
  }
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

// Base RGB per color kind. Injective over the kinds it serves.
struct ColorTable {
  std::array<Rgb, 8> table = {{
      {230, 0, 0},      // red
      {0, 160, 0},      // green
      {0, 0, 230},      // blue
      {230, 230, 0},    // yellow
      {0, 230, 230},    // cyan
      {230, 0, 230},    // magenta
      {130, 130, 130},  // gray
      {0, 0, 0},        // black (background)
  }};

  Rgb base(Color c) const { return table[static_cast<std::size_t>(c)]; }

  // Base color mixed toward black (shade < 0) or white (shade > 0).
  Rgb shaded(Color c, double shade) const {
    const Rgb b = base(c);
    const double f = shade < 0 ? -shade : shade;
    const double target = shade >= 0 ? 255.0 : 0.0;
    auto mix = [&](std::uint8_t ch) {
      return static_cast<std::uint8_t>(
          std::llround(ch * (1.0 - f) + target * f));
    };
    return Rgb{mix(b.r), mix(b.g), mix(b.b)};
  }

  bool injective() const {
    for (std::size_t i = 0; i < table.size(); ++i)
      for (std::size_t j = i + 1; j < table.size(); ++j)
        if (table[i] == table[j]) return false;
    return true;
  }
};

namespace detail {

// sin/cos of a full-turn fraction, evaluated with exact quadrant
// reduction and fixed-degree Taylor polynomials. Uses only IEEE
// +,-,*,/ so results do not depend on the platform's libm.
inline std::pair<double, double> sincos_turns(double t) {
  t -= std::floor(t);
  const double u = 4.0 * t;
  const int quadrant = static_cast<int>(u);  // 0..3
  const double f = u - quadrant;
  const double z = f * 1.5707963267948966;  // pi/2
  const double w = z * z;

  // sin(z), odd terms through z^21
  double s = 1.0 / 51090942171709440000.0;
  s = 1.0 / -121645100408832000.0 + w * s;
  s = 1.0 / 355687428096000.0 + w * s;
  s = 1.0 / -1307674368000.0 + w * s;
  s = 1.0 / 6227020800.0 + w * s;
  s = 1.0 / -39916800.0 + w * s;
  s = 1.0 / 362880.0 + w * s;
  s = 1.0 / -5040.0 + w * s;
  s = 1.0 / 120.0 + w * s;
  s = 1.0 / -6.0 + w * s;
  s = z * (1.0 + w * s);

  // cos(z), even terms through z^22
  double c = 1.0 / -1124000727777607680000.0;
  c = 1.0 / 2432902008176640000.0 + w * c;
  c = 1.0 / -6402373705728000.0 + w * c;
  c = 1.0 / 20922789888000.0 + w * c;
  c = 1.0 / -87178291200.0 + w * c;
  c = 1.0 / 479001600.0 + w * c;
  c = 1.0 / -3628800.0 + w * c;
  c = 1.0 / 40320.0 + w * c;
  c = 1.0 / -720.0 + w * c;
  c = 1.0 / 24.0 + w * c;
  c = 1.0 / -2.0 + w * c;
  c = 1.0 + w * c;

  switch (quadrant) {
    case 0: return {s, c};
    case 1: return {c, -s};
    case 2: return {-s, -c};
    default: return {-c, s};
  }
}

// Regular pentagon inscribed in the unit circle, one vertex at (0, 1),
// counterclockwise.
inline constexpr std::array<std::array<double, 2>, 5> kPentagonVertices = {{
    {0.0, 1.0},
    {-0.95105651629515353, 0.30901699437494751},
    {-0.58778525229247325, -0.80901699437494734},
    {0.58778525229247292, -0.80901699437494756},
    {0.95105651629515364, 0.30901699437494717},
}};

inline bool unit_shape_contains(Shape shape, double x, double y) {
  switch (shape) {
    case Shape::circle:
    case Shape::ellipse:
      return x * x + y * y <= 1.0;
    case Shape::square:
    case Shape::rectangle:
      return x >= -1.0 && x <= 1.0 && y >= -1.0 && y <= 1.0;
    case Shape::triangle: {
      // apex (0, 1), base corners (+-1, -1)
      const double ax = x < 0 ? -x : x;
      return y >= -1.0 && 2.0 * ax <= 1.0 - y;
    }
    case Shape::pentagon: {
      for (std::size_t i = 0; i < 5; ++i) {
        const auto& a = kPentagonVertices[i];
        const auto& b = kPentagonVertices[(i + 1) % 5];
        const double cross =
            (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
        if (cross < 0.0) return false;
      }
      return true;
    }
    case Shape::cross: {
      const double ax = x < 0 ? -x : x;
      const double ay = y < 0 ? -y : y;
      const double third = 1.0 / 3.0;
      return (ax <= 1.0 && ay <= third) || (ax <= third && ay <= 1.0);
    }
    case Shape::semicircle:
      return y >= 0.0 && x * x + y * y <= 1.0;
  }
  return false;
}

}  // namespace detail

// Membership test in canvas coordinates: translate to the entity frame,
// undo its rotation, divide by extents, then apply the unit-shape test.
inline bool point_in_shape(const Entity& e, double px, double py) {
  const auto [sn, cs] = detail::sincos_turns(e.rotation);
  const double dx = px - e.x;
  const double dy = py - e.y;
  const double lx = (cs * dx + sn * dy) / e.sx;
  const double ly = (-sn * dx + cs * dy) / e.sy;
  return detail::unit_shape_contains(e.shape, lx, ly);
}

namespace detail {

struct PreparedEntity {
  double cx, cy, cos_r, sin_r, inv_sx, inv_sy, bound_sq;
  Shape shape;
  Rgb color;
};

// Squared circumradius of the scaled shape, for the per-sample precull.
// Round shapes fit the unit disk; cornered ones reach out to (+-1, +-1).
inline double bound_radius_sq(const Entity& e) {
  switch (e.shape) {
    case Shape::circle:
    case Shape::ellipse:
    case Shape::pentagon:
    case Shape::semicircle: {
      const double r = e.sx > e.sy ? e.sx : e.sy;
      return r * r;
    }
    case Shape::cross: {
      const double third = 1.0 / 3.0;
      const double a = e.sx * e.sx + e.sy * third * e.sy * third;
      const double b = e.sx * third * e.sx * third + e.sy * e.sy;
      return a > b ? a : b;
    }
    default:
      return e.sx * e.sx + e.sy * e.sy;
  }
}

inline PreparedEntity prepare(const Entity& e, const ColorTable& colors) {
  const auto [sn, cs] = sincos_turns(e.rotation);
  return PreparedEntity{e.x,        e.y,        cs,
                        sn,         1.0 / e.sx, 1.0 / e.sy,
                        bound_radius_sq(e),     e.shape,
                        colors.shaded(e.color, e.shade)};
}

inline bool hits(const PreparedEntity& p, double px, double py) {
  const double dx = px - p.cx;
  const double dy = py - p.cy;
  if (dx * dx + dy * dy > p.bound_sq) return false;
  const double lx = (p.cos_r * dx + p.sin_r * dy) * p.inv_sx;
  const double ly = (-p.sin_r * dx + p.cos_r * dy) * p.inv_sy;
  return unit_shape_contains(p.shape, lx, ly);
}

}  // namespace detail

// Box-filter supersampled rasterization. Each pixel averages supersample^2
// regularly spaced samples; per sample the topmost covering entity wins
// (entities later in the list draw over earlier ones). Channel sums are
// accumulated in integers and divided once with rounding, so the output
// bytes are platform-independent.
inline Image rasterize(const WorldModel& world, int width, int height,
                       int supersample,
                       const ColorTable& colors = ColorTable{}) {
  if (width < 1 || height < 1)
    throw InvalidDimensions("image dimensions must be at least 1x1");
  if (supersample < 1 || supersample > 8)
    throw InvalidDimensions("supersample must be in [1, 8]");

  std::vector<detail::PreparedEntity> prepared;
  prepared.reserve(world.entities.size());
  for (const Entity& e : world.entities)
    prepared.push_back(detail::prepare(e, colors));

  const Rgb bg = colors.base(world.background);
  const int s = supersample;
  const int samples = s * s;
  const double inv_w = 1.0 / width;
  const double inv_h = 1.0 / height;
  const double inv_s = 1.0 / s;

  Image img;
  img.width = width;
  img.height = height;
  img.pixels.resize(static_cast<std::size_t>(width) *
                    static_cast<std::size_t>(height) * 3);

  std::size_t out = 0;
  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      int acc_r = 0, acc_g = 0, acc_b = 0;
      for (int sy = 0; sy < s; ++sy) {
        // top row first: row 0 holds the highest canvas y
        const double py = (height - row - (sy + 0.5) * inv_s) * inv_h;
        for (int sx = 0; sx < s; ++sx) {
          const double px = (col + (sx + 0.5) * inv_s) * inv_w;
          Rgb c = bg;
          for (auto it = prepared.rbegin(); it != prepared.rend(); ++it) {
            if (detail::hits(*it, px, py)) {
              c = it->color;
              break;
            }
          }
          acc_r += c.r;
          acc_g += c.g;
          acc_b += c.b;
        }
      }
      img.pixels[out++] = static_cast<std::uint8_t>((acc_r + samples / 2) /
                                                    samples);
      img.pixels[out++] = static_cast<std::uint8_t>((acc_g + samples / 2) /
                                                    samples);
      img.pixels[out++] = static_cast<std::uint8_t>((acc_b + samples / 2) /
                                                    samples);
    }
  }
  return img;
}

// Binary PPM (P6), the bit-exactness reference format.
inline std::vector<std::uint8_t> encode_ppm(const Image& img) {
  const std::string header = "P6\n" + std::to_string(img.width) + " " +
                             std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out;
  out.reserve(header.size() + img.pixels.size());
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

}  // namespace shapecap
