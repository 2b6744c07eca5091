#include "hexflood/hexgrid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "hexflood/error.hpp"

namespace hexflood {

namespace {
const double kSqrt3 = std::sqrt(3.0);
}

HexMetrics metrics_from_width(double width_m) {
  if (!std::isfinite(width_m) || width_m <= 0.0) {
    throw InvalidArgument("hex width must be positive and finite, got " + std::to_string(width_m));
  }
  const double size = width_m / kSqrt3;
  return {size, width_m, 1.5 * kSqrt3 * size * size};
}

HexMetrics metrics_from_size(double size_m) {
  if (!std::isfinite(size_m) || size_m <= 0.0) {
    throw InvalidArgument("hex size must be positive and finite, got " + std::to_string(size_m));
  }
  return {size_m, kSqrt3 * size_m, 1.5 * kSqrt3 * size_m * size_m};
}

WorldPoint axial_to_world(FractionalAxial c, const HexMetrics& m) {
  return {m.size * (kSqrt3 * c.q + kSqrt3 / 2.0 * c.r), m.size * (1.5 * c.r)};
}

WorldPoint axial_to_world(AxialCoord c, const HexMetrics& m) {
  return axial_to_world(FractionalAxial{static_cast<double>(c.q), static_cast<double>(c.r)}, m);
}

FractionalAxial world_to_fractional(WorldPoint p, const HexMetrics& m) {
  return {(kSqrt3 / 3.0 * p.x - p.y / 3.0) / m.size, (2.0 / 3.0 * p.y) / m.size};
}

AxialCoord world_to_axial(WorldPoint p, const HexMetrics& m) {
  return axial_round(world_to_fractional(p, m));
}

CubeCoord cube_round(FractionalCube f) {
  if (!std::isfinite(f.x) || !std::isfinite(f.y) || !std::isfinite(f.z)) {
    throw InvalidArgument("cube_round: non-finite component");
  }
  const double scale = std::max({1.0, std::abs(f.x), std::abs(f.y), std::abs(f.z)});
  if (std::abs(f.x + f.y + f.z) > 1e-9 * scale) {
    throw InvalidArgument("cube_round: components must sum to zero");
  }
  double rx = std::round(f.x);
  double ry = std::round(f.y);
  double rz = std::round(f.z);
  const double dx = std::abs(rx - f.x);
  const double dy = std::abs(ry - f.y);
  const double dz = std::abs(rz - f.z);
  if (dx >= dy && dx >= dz) {
    rx = -ry - rz;
  } else if (dy >= dz) {
    ry = -rx - rz;
  } else {
    rz = -rx - ry;
  }
  return {static_cast<int>(rx), static_cast<int>(ry), static_cast<int>(rz)};
}

AxialCoord axial_round(FractionalAxial f) { return to_axial(cube_round(to_cube(f))); }

std::array<AxialCoord, 6> neighbors(AxialCoord c) {
  std::array<AxialCoord, 6> out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c + kNeighborOffsets[i];
  return out;
}

int hex_distance(AxialCoord a, AxialCoord b) {
  const CubeCoord d = to_cube(a - b);
  return (std::abs(d.x) + std::abs(d.y) + std::abs(d.z)) / 2;
}

}  // namespace hexflood
