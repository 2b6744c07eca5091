#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "hexflood/hexgrid.hpp"

namespace hexflood {

// Spherical earth radius used for geodesics and the local planar frame.
inline constexpr double kEarthRadiusM = 6378137.0;

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct BBox {
  double south = 0.0;
  double west = 0.0;
  double north = 0.0;
  double east = 0.0;
  friend bool operator==(const BBox&, const BBox&) = default;
};

// Node-registered elevation grid. Row 0 is the northern edge, column 0 the
// western edge; bbox spans the outermost node centers. A single row (or
// column) has a degenerate latitude (longitude) span.
struct ElevationRaster {
  BBox bbox;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> heights;  // row-major, rows * cols
  double nodata = -9999.0;

  double at(std::size_t row, std::size_t col) const { return heights[row * cols + col]; }
  GeoPoint node(std::size_t row, std::size_t col) const;
  friend bool operator==(const ElevationRaster&, const ElevationRaster&) = default;
};

// Throws InvalidArgument when dimensions, bbox or heights break the raster
// invariants.
void validate(const ElevationRaster& raster);

enum class RasterFormat { EsriAscii, Csv };

RasterFormat parse_raster_format(std::string_view name);

// Upper bound on rows * cols accepted from any source.
inline constexpr std::size_t kMaxRasterCells = std::size_t{1} << 28;

ElevationRaster load_elevation_raster(std::istream& in, RasterFormat format);
ElevationRaster load_elevation_raster(const std::filesystem::path& path, RasterFormat format);

// CSV raster with a "# bbox=S,W,N,E rows=R cols=C nodata=V" header. Values
// are printed with 17 significant digits, so reading back is bit-exact.
void write_csv_raster(const ElevationRaster& raster, std::ostream& out);

struct HexExtent {
  int q_cells = 0;
  int r_cells = 0;
  friend bool operator==(const HexExtent&, const HexExtent&) = default;
};

// Hex cells q in [0, q_cells), r in [0, r_cells) with axial (0, 0) anchored
// at `origin`. Heights are stored row-major by (r, q).
class HexTerrain {
public:
  HexTerrain() = default;
  HexTerrain(HexMetrics metrics, GeoPoint origin, HexExtent extent, std::vector<double> heights);

  const HexMetrics& metrics() const { return metrics_; }
  const GeoPoint& origin() const { return origin_; }
  const HexExtent& extent() const { return extent_; }
  std::size_t size() const { return heights_.size(); }
  bool empty() const { return heights_.empty(); }

  bool contains(AxialCoord c) const {
    return c.q >= 0 && c.r >= 0 && c.q < extent_.q_cells && c.r < extent_.r_cells;
  }
  std::size_t index(AxialCoord c) const {
    return static_cast<std::size_t>(c.r) * static_cast<std::size_t>(extent_.q_cells) +
           static_cast<std::size_t>(c.q);
  }
  AxialCoord coord(std::size_t index) const {
    const auto nq = static_cast<std::size_t>(extent_.q_cells);
    return {static_cast<int>(index % nq), static_cast<int>(index / nq)};
  }
  double height(AxialCoord c) const { return heights_[index(c)]; }
  std::span<const double> heights() const { return heights_; }

  friend bool operator==(const HexTerrain&, const HexTerrain&) = default;

private:
  HexMetrics metrics_{};
  GeoPoint origin_{};
  HexExtent extent_{};
  std::vector<double> heights_;
};

// Local equirectangular frame around `origin`.
double meters_per_degree_lat();
double meters_per_degree_lon(double lat_deg);
GeoPoint offset_geo(GeoPoint origin, WorldPoint offset_m);
WorldPoint geo_to_local(GeoPoint origin, GeoPoint p);

// Bilinear value at `p`. Throws OutOfBounds outside the bbox and DataGap when
// a surrounding node holds nodata.
double sample_bilinear(const ElevationRaster& raster, GeoPoint p);

HexTerrain sample_to_hex(const ElevationRaster& raster, const HexMetrics& metrics, GeoPoint origin,
                         HexExtent extent);

// Largest parallelogram extent whose cell centers, anchored at `origin`, all
// fall inside the raster bbox. Throws OutOfBounds when not even one fits.
HexExtent fit_extent(const ElevationRaster& raster, const HexMetrics& metrics, GeoPoint origin);

// Haversine great-circle distance on a sphere of radius kEarthRadiusM.
double geodesic_distance(GeoPoint a, GeoPoint b);

struct NormalizedCell {
  AxialCoord coord;
  double x = 0.0;
  double y = 0.0;
  double h = 0.0;
};

// Terrain rescaled so the larger horizontal side of its footprint becomes
// 1.0. Each cell is counted as a width x width box; heights share the scale.
struct NormalizedModel {
  double scale = 1.0;
  std::vector<NormalizedCell> cells;
};

NormalizedModel normalize_extent(const HexTerrain& terrain);

enum class SyntheticKind { Plane, TiltedPlane, Bowl, VValley };

SyntheticKind parse_synthetic_kind(std::string_view name);

// plane: c; tilted-plane: a*x + b*y + c; bowl: k*(x^2 + y^2) + c;
// v-valley: k*|x| + c. x and y are meters from the center cell.
struct SyntheticParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double k = 0.0;
};

AxialCoord center_cell(HexExtent extent);

HexTerrain synthetic_terrain(SyntheticKind kind, const HexMetrics& metrics, HexExtent extent,
                             const SyntheticParams& params, GeoPoint origin = {});

}  // namespace hexflood
