#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hexflood/hexgrid.hpp"
#include "hexflood/hydro.hpp"

namespace hexflood {

// Summary statistics over per-cell depths. `sum` adds depths in meters, so it
// is a depth total rather than a volume; multiply by the cell area for m^3.
struct FloodReport {
  std::size_t count = 0;
  double sum = 0.0;
  double mean = 0.0;
  double sample_std = 0.0;  // n - 1 denominator, 0 when count <= 1
  double min = 0.0;
  double max = 0.0;
};

// Empty input gives an all-zero report. Throws InvalidArgument on NaN.
FloodReport summarize(std::span<const double> depths);

// {"count":..,"sum":..,"mean":..,"sample_std":..,"min":..,"max":..}
std::string to_json(const FloodReport& report);
FloodReport report_from_json(std::string_view text);

inline constexpr double kDefaultRiskThreshold = 2.0;

struct FloodZone {
  int label = 0;                  // 1-based, in order of each zone's first (r, q) cell
  std::vector<AxialCoord> cells;  // sorted by (r, q)
  double max_depth = 0.0;
  double area = 0.0;              // m^2
};

// 6-connected components of cells with depth >= threshold, sorted by
// max_depth descending (ties by label). Throws InvalidArgument when the
// threshold is negative or not finite.
std::vector<FloodZone> flood_zones(const WaterGrid& grid, double threshold);

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct ColorRamp {
  Rgb start{198, 219, 239};
  Rgb end{8, 48, 107};
};

// "blues" or "#rrggbb:#rrggbb".
ColorRamp parse_color_ramp(std::string_view text);

struct RenderOptions {
  double pixels_per_meter = 1.0;
  ColorRamp ramp{};
};

inline constexpr std::size_t kMaxImagePixels = std::size_t{1} << 28;

// Binary PPM (P6), north up. Wet cells are colored along the ramp by
// depth / field max; dry cells are hillshaded gray; pixels outside the grid
// are white. Throws InvalidArgument for an empty grid or an image with no
// pixels, ResourceError for oversized images.
void render_depth_map(const WaterGrid& grid, const RenderOptions& options, std::ostream& out);

// "q,r,elevation_m,depth_m" followed by one row per cell in (r, q) order,
// six decimals. Throws IoError when the stream fails.
void export_depth_csv(const WaterGrid& grid, std::ostream& out);
void export_depth_csv(const HexTerrain& terrain, std::span<const double> depths, std::ostream& out);

// Inverse of export_depth_csv. The rows must cover a full q x r block
// starting at (0, 0). Throws ParseError with the offending line.
WaterGrid import_depth_csv(std::istream& in, const HexMetrics& metrics,
                           Boundary boundary = Boundary::Closed);

}  // namespace hexflood
