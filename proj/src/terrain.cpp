#include "hexflood/terrain.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "hexflood/error.hpp"

namespace hexflood {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || end != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::size_t> to_size(std::string_view s) {
  s = trim(s);
  std::size_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || end != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

void check_dimensions(std::size_t rows, std::size_t cols, std::size_t line) {
  if (rows == 0 || cols == 0) throw ParseError("raster dimensions must be positive", line);
  if (cols > kMaxRasterCells / rows) {
    throw ResourceError("raster of " + std::to_string(rows) + "x" + std::to_string(cols) +
                        " cells exceeds the supported size");
  }
}

double parse_value(std::string_view tok, double nodata, std::size_t line) {
  auto v = to_double(tok);
  if (!v) throw ParseError("invalid number '" + std::string(trim(tok)) + "'", line);
  if (!std::isfinite(*v) && *v != nodata) throw ParseError("non-finite height", line);
  return *v;
}

ElevationRaster load_esri(std::istream& in) {
  std::optional<std::size_t> ncols, nrows;
  std::optional<double> xll, yll, cellsize;
  bool center_registered = false;
  double nodata = -9999.0;

  ElevationRaster raster;
  std::string line;
  std::size_t lineno = 0;
  bool in_body = false;
  std::size_t row = 0;

  while (std::getline(in, line)) {
    ++lineno;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    const bool is_key = std::isalpha(static_cast<unsigned char>(toks.front().front())) &&
                        !to_double(toks.front());
    if (!in_body && is_key) {
      if (toks.size() != 2) throw ParseError("header line must be '<key> <value>'", lineno);
      const auto key = lower(toks[0]);
      const auto num = to_double(toks[1]);
      if (!num) throw ParseError("invalid value for " + key, lineno);
      if (key == "ncols" || key == "nrows") {
        auto n = to_size(toks[1]);
        if (!n) throw ParseError(key + " must be a non-negative integer", lineno);
        (key == "ncols" ? ncols : nrows) = *n;
      } else if (key == "xllcorner" || key == "xllcenter") {
        xll = *num;
        center_registered = key == "xllcenter";
      } else if (key == "yllcorner" || key == "yllcenter") {
        yll = *num;
      } else if (key == "cellsize") {
        cellsize = *num;
      } else if (key == "nodata_value") {
        nodata = *num;
      } else {
        throw ParseError("unknown header key '" + std::string(toks[0]) + "'", lineno);
      }
      continue;
    }
    if (!in_body) {
      if (!ncols || !nrows || !xll || !yll || !cellsize) {
        throw ParseError("incomplete header: need ncols, nrows, xllcorner, yllcorner, cellsize",
                         lineno);
      }
      if (!(*cellsize > 0.0)) throw ParseError("cellsize must be positive", lineno);
      check_dimensions(*nrows, *ncols, lineno);
      raster.rows = *nrows;
      raster.cols = *ncols;
      raster.nodata = nodata;
      raster.heights.reserve(raster.rows * raster.cols);
      in_body = true;
    }
    if (row >= raster.rows) throw ParseError("more data rows than nrows", lineno);
    if (toks.size() != raster.cols) {
      throw ParseError("expected " + std::to_string(raster.cols) + " values, found " +
                           std::to_string(toks.size()),
                       lineno);
    }
    for (auto tok : toks) raster.heights.push_back(parse_value(tok, nodata, lineno));
    ++row;
  }
  if (!in_body) throw ParseError("no data rows", lineno);
  if (row != raster.rows) {
    throw ParseError("expected " + std::to_string(raster.rows) + " data rows, found " +
                         std::to_string(row),
                     lineno);
  }
  // Nodes sit at cell centers.
  const double half = center_registered ? 0.0 : 0.5 * *cellsize;
  raster.bbox.west = *xll + half;
  raster.bbox.south = *yll + half;
  raster.bbox.east = raster.bbox.west + static_cast<double>(raster.cols - 1) * *cellsize;
  raster.bbox.north = raster.bbox.south + static_cast<double>(raster.rows - 1) * *cellsize;
  return raster;
}

ElevationRaster load_csv(std::istream& in) {
  ElevationRaster raster;
  std::optional<BBox> bbox;
  std::optional<std::size_t> hdr_rows, hdr_cols;
  std::string line;
  std::size_t lineno = 0;
  bool seen_data = false;

  while (std::getline(in, line)) {
    ++lineno;
    const auto text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      if (seen_data) throw ParseError("header after data rows", lineno);
      for (auto tok : split_ws(text.substr(1))) {
        const auto eq = tok.find('=');
        if (eq == std::string_view::npos) throw ParseError("header token without '='", lineno);
        const auto key = tok.substr(0, eq);
        const auto val = tok.substr(eq + 1);
        if (key == "bbox") {
          auto parts = split_on(val, ',');
          if (parts.size() != 4) throw ParseError("bbox needs 4 values S,W,N,E", lineno);
          BBox b;
          double* dst[4] = {&b.south, &b.west, &b.north, &b.east};
          for (std::size_t i = 0; i < 4; ++i) {
            auto v = to_double(parts[i]);
            if (!v) throw ParseError("invalid bbox value", lineno);
            *dst[i] = *v;
          }
          bbox = b;
        } else if (key == "rows" || key == "cols") {
          auto n = to_size(val);
          if (!n) throw ParseError(std::string(key) + " must be a non-negative integer", lineno);
          (key == "rows" ? hdr_rows : hdr_cols) = *n;
        } else if (key == "nodata") {
          auto v = to_double(val);
          if (!v) throw ParseError("invalid nodata value", lineno);
          raster.nodata = *v;
        } else if (key == "fetched_at") {
          // informational
        } else {
          throw ParseError("unknown header key '" + std::string(key) + "'", lineno);
        }
      }
      if (hdr_rows && hdr_cols) check_dimensions(*hdr_rows, *hdr_cols, lineno);
      continue;
    }
    seen_data = true;
    auto fields = split_on(text, ',');
    if (raster.cols == 0) {
      raster.cols = fields.size();
      if (hdr_cols && *hdr_cols != raster.cols) {
        throw ParseError("expected " + std::to_string(*hdr_cols) + " values, found " +
                             std::to_string(fields.size()),
                         lineno);
      }
    } else if (fields.size() != raster.cols) {
      throw ParseError("expected " + std::to_string(raster.cols) + " values, found " +
                           std::to_string(fields.size()),
                       lineno);
    }
    if (raster.rows + 1 > kMaxRasterCells / raster.cols) {
      throw ResourceError("CSV raster exceeds the supported size");
    }
    for (auto f : fields) raster.heights.push_back(parse_value(f, raster.nodata, lineno));
    ++raster.rows;
  }
  if (raster.rows == 0) throw ParseError("no data rows", lineno);
  if (hdr_rows && *hdr_rows != raster.rows) {
    throw ParseError("expected " + std::to_string(*hdr_rows) + " data rows, found " +
                         std::to_string(raster.rows),
                     lineno);
  }
  if (bbox) {
    raster.bbox = *bbox;
  } else {
    // Headerless grids get a unit box (degenerate along single-node axes).
    raster.bbox = {0.0, 0.0, raster.rows > 1 ? 1.0 : 0.0, raster.cols > 1 ? 1.0 : 0.0};
  }
  try {
    validate(raster);
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), 1);
  }
  return raster;
}

void print_g17(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

GeoPoint ElevationRaster::node(std::size_t row, std::size_t col) const {
  const double lat = rows > 1 ? bbox.north - (bbox.north - bbox.south) * static_cast<double>(row) /
                                                 static_cast<double>(rows - 1)
                              : bbox.south;
  const double lon = cols > 1 ? bbox.west + (bbox.east - bbox.west) * static_cast<double>(col) /
                                                static_cast<double>(cols - 1)
                              : bbox.west;
  return {lat, lon};
}

void validate(const ElevationRaster& raster) {
  if (raster.rows == 0 || raster.cols == 0) throw InvalidArgument("raster has no cells");
  if (raster.heights.size() != raster.rows * raster.cols) {
    throw InvalidArgument("raster height count does not match rows*cols");
  }
  const auto& b = raster.bbox;
  for (double v : {b.south, b.west, b.north, b.east}) {
    if (!std::isfinite(v)) throw InvalidArgument("raster bbox is not finite");
  }
  if (raster.rows > 1 ? !(b.north > b.south) : !(b.north >= b.south)) {
    throw InvalidArgument("raster bbox north must exceed south");
  }
  if (raster.cols > 1 ? !(b.east > b.west) : !(b.east >= b.west)) {
    throw InvalidArgument("raster bbox east must exceed west");
  }
  if (b.south < -90.0 || b.north > 90.0 || b.west < -180.0 || b.east > 180.0) {
    throw InvalidArgument("raster bbox outside lat/lon range");
  }
  for (double h : raster.heights) {
    if (!std::isfinite(h) && h != raster.nodata) throw InvalidArgument("raster height not finite");
  }
}

RasterFormat parse_raster_format(std::string_view name) {
  if (name == "esri-ascii") return RasterFormat::EsriAscii;
  if (name == "csv") return RasterFormat::Csv;
  throw InvalidArgument("unknown raster format '" + std::string(name) + "'");
}

ElevationRaster load_elevation_raster(std::istream& in, RasterFormat format) {
  return format == RasterFormat::EsriAscii ? load_esri(in) : load_csv(in);
}

ElevationRaster load_elevation_raster(const std::filesystem::path& path, RasterFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open raster file " + path.string());
  return load_elevation_raster(in, format);
}

void write_csv_raster(const ElevationRaster& raster, std::ostream& out) {
  out << "# bbox=";
  print_g17(out, raster.bbox.south);
  out << ',';
  print_g17(out, raster.bbox.west);
  out << ',';
  print_g17(out, raster.bbox.north);
  out << ',';
  print_g17(out, raster.bbox.east);
  out << " rows=" << raster.rows << " cols=" << raster.cols << " nodata=";
  print_g17(out, raster.nodata);
  out << '\n';
  for (std::size_t i = 0; i < raster.rows; ++i) {
    for (std::size_t j = 0; j < raster.cols; ++j) {
      if (j) out << ',';
      print_g17(out, raster.at(i, j));
    }
    out << '\n';
  }
}

HexTerrain::HexTerrain(HexMetrics metrics, GeoPoint origin, HexExtent extent,
                       std::vector<double> heights)
    : metrics_(metrics), origin_(origin), extent_(extent), heights_(std::move(heights)) {
  if (extent.q_cells < 0 || extent.r_cells < 0) throw InvalidArgument("negative terrain extent");
  if (heights_.size() !=
      static_cast<std::size_t>(extent.q_cells) * static_cast<std::size_t>(extent.r_cells)) {
    throw InvalidArgument("terrain height count does not match extent");
  }
  for (double h : heights_) {
    if (!std::isfinite(h)) throw InvalidArgument("terrain elevation not finite");
  }
}

double meters_per_degree_lat() { return kEarthRadiusM * std::numbers::pi / 180.0; }

double meters_per_degree_lon(double lat_deg) {
  return meters_per_degree_lat() * std::cos(lat_deg * std::numbers::pi / 180.0);
}

GeoPoint offset_geo(GeoPoint origin, WorldPoint offset_m) {
  return {origin.lat + offset_m.y / meters_per_degree_lat(),
          origin.lon + offset_m.x / meters_per_degree_lon(origin.lat)};
}

WorldPoint geo_to_local(GeoPoint origin, GeoPoint p) {
  return {(p.lon - origin.lon) * meters_per_degree_lon(origin.lat),
          (p.lat - origin.lat) * meters_per_degree_lat()};
}

namespace {

// Fractional node index along one axis; nullopt when outside.
std::optional<double> axis_position(double v, double lo, double hi, std::size_t n, bool descending) {
  constexpr double kTol = 1e-9;
  if (n == 1) {
    const double span = std::max(1.0, std::abs(lo));
    if (std::abs(v - lo) > kTol * span) return std::nullopt;
    return 0.0;
  }
  double f = (descending ? (hi - v) : (v - lo)) / (hi - lo) * static_cast<double>(n - 1);
  const double last = static_cast<double>(n - 1);
  if (f < -kTol || f > last + kTol) return std::nullopt;
  return std::clamp(f, 0.0, last);
}

}  // namespace

double sample_bilinear(const ElevationRaster& raster, GeoPoint p) {
  const auto& b = raster.bbox;
  auto fr = axis_position(p.lat, b.south, b.north, raster.rows, true);
  auto fc = axis_position(p.lon, b.west, b.east, raster.cols, false);
  if (!fr || !fc) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "point (%.9f, %.9f) outside raster bbox", p.lat, p.lon);
    throw OutOfBounds(buf);
  }
  const auto r0 = std::min(static_cast<std::size_t>(*fr), raster.rows > 1 ? raster.rows - 2 : 0);
  const auto c0 = std::min(static_cast<std::size_t>(*fc), raster.cols > 1 ? raster.cols - 2 : 0);
  const auto r1 = std::min(r0 + 1, raster.rows - 1);
  const auto c1 = std::min(c0 + 1, raster.cols - 1);
  const double t = *fr - static_cast<double>(r0);
  const double u = *fc - static_cast<double>(c0);

  const double v00 = raster.at(r0, c0), v01 = raster.at(r0, c1);
  const double v10 = raster.at(r1, c0), v11 = raster.at(r1, c1);
  for (double v : {v00, v01, v10, v11}) {
    if (v == raster.nodata || std::isnan(v)) {
      throw DataGap("nodata node next to sample point");
    }
  }
  const double top = v00 + (v01 - v00) * u;
  const double bottom = v10 + (v11 - v10) * u;
  return top + (bottom - top) * t;
}

HexTerrain sample_to_hex(const ElevationRaster& raster, const HexMetrics& metrics, GeoPoint origin,
                         HexExtent extent) {
  validate(raster);
  if (extent.q_cells <= 0 || extent.r_cells <= 0) throw InvalidArgument("extent must be positive");
  const auto n = static_cast<std::size_t>(extent.q_cells) * static_cast<std::size_t>(extent.r_cells);
  if (n > kMaxRasterCells) throw ResourceError("hex extent exceeds the supported size");
  std::vector<double> heights;
  heights.reserve(n);
  for (int r = 0; r < extent.r_cells; ++r) {
    for (int q = 0; q < extent.q_cells; ++q) {
      const GeoPoint p = offset_geo(origin, axial_to_world(AxialCoord{q, r}, metrics));
      try {
        heights.push_back(sample_bilinear(raster, p));
      } catch (const OutOfBounds& e) {
        throw OutOfBounds("hex cell (" + std::to_string(q) + "," + std::to_string(r) +
                          "): " + e.what());
      } catch (const DataGap& e) {
        throw DataGap("hex cell (" + std::to_string(q) + "," + std::to_string(r) + "): " + e.what());
      }
    }
  }
  return HexTerrain(metrics, origin, extent, std::move(heights));
}

HexExtent fit_extent(const ElevationRaster& raster, const HexMetrics& metrics, GeoPoint origin) {
  validate(raster);
  const auto& b = raster.bbox;
  const WorldPoint lo = geo_to_local(origin, {b.south, b.west});
  const WorldPoint hi = geo_to_local(origin, {b.north, b.east});
  constexpr double kSlack = 1e-7;
  if (lo.x > kSlack || lo.y > kSlack || hi.x < -kSlack || hi.y < -kSlack) {
    throw OutOfBounds("terrain origin lies outside the raster bbox");
  }
  const double row_pitch = 1.5 * metrics.size;
  int r_cells = static_cast<int>(std::floor(hi.y / row_pitch + kSlack)) + 1;
  // Row r is shifted east by r/2 cell widths, so tall blocks eat into width.
  const int r_max = static_cast<int>(std::floor(2.0 * hi.x / metrics.width + kSlack)) + 1;
  r_cells = std::min(r_cells, r_max);
  const double usable = hi.x / metrics.width - 0.5 * (r_cells - 1);
  const int q_cells = static_cast<int>(std::floor(usable + kSlack)) + 1;
  if (r_cells <= 0 || q_cells <= 0) throw OutOfBounds("raster too small for one hex cell");
  return {q_cells, r_cells};
}

double geodesic_distance(GeoPoint a, GeoPoint b) {
  const double to_rad = std::numbers::pi / 180.0;
  const double phi1 = a.lat * to_rad;
  const double phi2 = b.lat * to_rad;
  const double dphi = (b.lat - a.lat) * to_rad;
  const double dlambda = (b.lon - a.lon) * to_rad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = std::min(1.0, s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2);
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

NormalizedModel normalize_extent(const HexTerrain& terrain) {
  if (terrain.empty()) throw InvalidArgument("cannot normalize an empty terrain");
  const auto& m = terrain.metrics();
  double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
  double min_y = min_x, max_y = -min_x;
  for (std::size_t i = 0; i < terrain.size(); ++i) {
    const auto p = axial_to_world(terrain.coord(i), m);
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double half = 0.5 * m.width;
  min_x -= half;
  min_y -= half;
  const double span = std::max(max_x + half - min_x, max_y + half - min_y);

  NormalizedModel model;
  model.scale = 1.0 / span;
  model.cells.reserve(terrain.size());
  for (std::size_t i = 0; i < terrain.size(); ++i) {
    const auto c = terrain.coord(i);
    const auto p = axial_to_world(c, m);
    model.cells.push_back({c, (p.x - min_x) * model.scale, (p.y - min_y) * model.scale,
                           terrain.heights()[i] * model.scale});
  }
  return model;
}

SyntheticKind parse_synthetic_kind(std::string_view name) {
  if (name == "plane") return SyntheticKind::Plane;
  if (name == "tilted-plane") return SyntheticKind::TiltedPlane;
  if (name == "bowl") return SyntheticKind::Bowl;
  if (name == "v-valley") return SyntheticKind::VValley;
  throw InvalidArgument("unknown synthetic terrain kind '" + std::string(name) + "'");
}

AxialCoord center_cell(HexExtent extent) {
  return {(extent.q_cells - 1) / 2, (extent.r_cells - 1) / 2};
}

HexTerrain synthetic_terrain(SyntheticKind kind, const HexMetrics& metrics, HexExtent extent,
                             const SyntheticParams& params, GeoPoint origin) {
  if (extent.q_cells <= 0 || extent.r_cells <= 0) throw InvalidArgument("extent must be positive");
  const auto n = static_cast<std::size_t>(extent.q_cells) * static_cast<std::size_t>(extent.r_cells);
  if (n > kMaxRasterCells) throw ResourceError("synthetic extent exceeds the supported size");
  const WorldPoint center = axial_to_world(center_cell(extent), metrics);
  std::vector<double> heights;
  heights.reserve(n);
  for (int r = 0; r < extent.r_cells; ++r) {
    for (int q = 0; q < extent.q_cells; ++q) {
      const WorldPoint p = axial_to_world(AxialCoord{q, r}, metrics);
      const double x = p.x - center.x;
      const double y = p.y - center.y;
      double h = params.c;
      switch (kind) {
        case SyntheticKind::Plane: break;
        case SyntheticKind::TiltedPlane: h += params.a * x + params.b * y; break;
        case SyntheticKind::Bowl: h += params.k * (x * x + y * y); break;
        case SyntheticKind::VValley: h += params.k * std::abs(x); break;
      }
      heights.push_back(h);
    }
  }
  return HexTerrain(metrics, origin, extent, std::move(heights));
}

}  // namespace hexflood
