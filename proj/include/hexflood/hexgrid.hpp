#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>

namespace hexflood {

// Pointy-top hexagons in axial (q, r) coordinates. Cube coordinates map as
// x = q, z = r, y = -q - r. See https://www.redblobgames.com/grids/hexagons/

struct AxialCoord {
  int q = 0;
  int r = 0;

  friend constexpr bool operator==(const AxialCoord&, const AxialCoord&) = default;
  // Row-major ordering: by r, then q. Flood-zone labels and CSV rows use it.
  friend constexpr std::strong_ordering operator<=>(const AxialCoord& a, const AxialCoord& b) {
    if (auto c = a.r <=> b.r; c != 0) return c;
    return a.q <=> b.q;
  }
  constexpr AxialCoord operator+(const AxialCoord& o) const { return {q + o.q, r + o.r}; }
  constexpr AxialCoord operator-(const AxialCoord& o) const { return {q - o.q, r - o.r}; }
};

struct FractionalAxial {
  double q = 0.0;
  double r = 0.0;
};

struct CubeCoord {
  int x = 0;
  int y = 0;
  int z = 0;
  friend constexpr bool operator==(const CubeCoord&, const CubeCoord&) = default;
};

struct FractionalCube {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// Planar model frame, meters east / north of the axial origin.
struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
};

// Physical geometry of one cell. size is the edge length S (= center-to-corner
// radius); width is the flat-to-flat distance, which is also the spacing of
// adjacent cell centers.
struct HexMetrics {
  double size = 0.0;
  double width = 0.0;
  double area = 0.0;
  friend bool operator==(const HexMetrics&, const HexMetrics&) = default;
};

HexMetrics metrics_from_width(double width_m);
HexMetrics metrics_from_size(double size_m);

constexpr CubeCoord to_cube(AxialCoord c) { return {c.q, -c.q - c.r, c.r}; }
constexpr AxialCoord to_axial(CubeCoord c) { return {c.x, c.z}; }
constexpr FractionalCube to_cube(FractionalAxial f) { return {f.q, -f.q - f.r, f.r}; }

WorldPoint axial_to_world(AxialCoord c, const HexMetrics& m);
WorldPoint axial_to_world(FractionalAxial c, const HexMetrics& m);

// Exact inverse of axial_to_world, without rounding.
FractionalAxial world_to_fractional(WorldPoint p, const HexMetrics& m);
AxialCoord world_to_axial(WorldPoint p, const HexMetrics& m);

// Nearest integer cube coordinate. The component with the largest rounding
// delta is recomputed from the other two; equal deltas prefer x, then y, then z.
// Throws InvalidArgument if the components do not sum to zero (within 1e-9,
// scaled by magnitude) or are not finite.
CubeCoord cube_round(FractionalCube f);
AxialCoord axial_round(FractionalAxial f);

// Neighbor offsets in fixed order. With y pointing north (r grows northward)
// these are E, SE, SW, W, NW, NE.
inline constexpr std::array<AxialCoord, 6> kNeighborOffsets{{
    {+1, 0}, {+1, -1}, {0, -1}, {-1, 0}, {-1, +1}, {0, +1}}};

std::array<AxialCoord, 6> neighbors(AxialCoord c);

int hex_distance(AxialCoord a, AxialCoord b);

}  // namespace hexflood

template <>
struct std::hash<hexflood::AxialCoord> {
  std::size_t operator()(const hexflood::AxialCoord& c) const noexcept {
    auto u = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.q)) << 32) |
             static_cast<std::uint32_t>(c.r);
    return std::hash<std::uint64_t>{}(u);
  }
};
