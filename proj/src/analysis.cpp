#include "hexflood/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <unordered_set>

#include <json.hpp>

#include "hexflood/error.hpp"

namespace hexflood {

FloodReport summarize(std::span<const double> depths) {
  FloodReport rep;
  if (depths.empty()) return rep;
  rep.count = depths.size();
  rep.min = std::numeric_limits<double>::infinity();
  rep.max = -std::numeric_limits<double>::infinity();
  for (double d : depths) {
    if (std::isnan(d)) throw InvalidArgument("depth is NaN");
    rep.sum += d;
    rep.min = std::min(rep.min, d);
    rep.max = std::max(rep.max, d);
  }
  rep.mean = rep.sum / static_cast<double>(rep.count);
  if (rep.count > 1) {
    double ss = 0.0;
    for (double d : depths) ss += (d - rep.mean) * (d - rep.mean);
    rep.sample_std = std::sqrt(ss / static_cast<double>(rep.count - 1));
  }
  return rep;
}

std::string to_json(const FloodReport& r) {
  nlohmann::ordered_json j;
  j["count"] = r.count;
  j["sum"] = r.sum;
  j["mean"] = r.mean;
  j["sample_std"] = r.sample_std;
  j["min"] = r.min;
  j["max"] = r.max;
  return j.dump();
}

FloodReport report_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    FloodReport r;
    r.count = j.at("count").get<std::size_t>();
    r.sum = j.at("sum").get<double>();
    r.mean = j.at("mean").get<double>();
    r.sample_std = j.at("sample_std").get<double>();
    r.min = j.at("min").get<double>();
    r.max = j.at("max").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("flood report: ") + e.what(), 0);
  }
}

std::vector<FloodZone> flood_zones(const WaterGrid& grid, double threshold) {
  if (!std::isfinite(threshold) || threshold < 0.0) {
    throw InvalidArgument("flood threshold must be finite and non-negative");
  }
  const auto& terrain = grid.terrain();
  const double cell_area = terrain.metrics().area;
  std::vector<int> label(grid.size(), 0);
  std::vector<FloodZone> zones;
  std::vector<std::size_t> stack;

  // Index order is (r, q) order, so labels follow each zone's first cell.
  for (std::size_t seed = 0; seed < grid.size(); ++seed) {
    if (label[seed] != 0 || grid.depth(seed) < threshold) continue;
    FloodZone zone;
    zone.label = static_cast<int>(zones.size()) + 1;
    label[seed] = zone.label;
    stack.assign(1, seed);
    std::vector<std::size_t> members;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      members.push_back(i);
      zone.max_depth = std::max(zone.max_depth, grid.depth(i));
      for (const auto nb : grid.adjacency(i)) {
        if (nb == WaterGrid::kNoNeighbor) continue;
        const auto j = static_cast<std::size_t>(nb);
        if (label[j] == 0 && grid.depth(j) >= threshold) {
          label[j] = zone.label;
          stack.push_back(j);
        }
      }
    }
    std::sort(members.begin(), members.end());
    zone.cells.reserve(members.size());
    for (auto i : members) zone.cells.push_back(terrain.coord(i));
    zone.area = static_cast<double>(members.size()) * cell_area;
    zones.push_back(std::move(zone));
  }
  std::stable_sort(zones.begin(), zones.end(), [](const FloodZone& a, const FloodZone& b) {
    return a.max_depth > b.max_depth;
  });
  return zones;
}

namespace {

Rgb parse_hex_color(std::string_view s) {
  if (s.size() != 7 || s[0] != '#') throw InvalidArgument("color must look like #rrggbb");
  unsigned value = 0;
  auto [end, ec] = std::from_chars(s.data() + 1, s.data() + 7, value, 16);
  if (ec != std::errc{} || end != s.data() + 7) throw InvalidArgument("bad hex color");
  return {static_cast<std::uint8_t>(value >> 16), static_cast<std::uint8_t>(value >> 8),
          static_cast<std::uint8_t>(value)};
}

std::uint8_t channel(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

Rgb lerp(const Rgb& a, const Rgb& b, double t) {
  return {channel(a.r + (b.r - a.r) * t), channel(a.g + (b.g - a.g) * t),
          channel(a.b + (b.b - a.b) * t)};
}

// Lambertian shade, light from the north-west at 45 degrees elevation.
std::uint8_t hillshade(const WaterGrid& grid, std::size_t i) {
  const auto& terrain = grid.terrain();
  const auto& m = terrain.metrics();
  const auto h = terrain.heights();
  double gx = 0.0, gy = 0.0;
  for (std::size_t k = 0; k < 6; ++k) {
    const auto nb = grid.adjacency(i)[k];
    if (nb == WaterGrid::kNoNeighbor) continue;
    const auto dir = axial_to_world(kNeighborOffsets[k], m);
    const double dh = h[static_cast<std::size_t>(nb)] - h[i];
    gx += dh * dir.x;
    gy += dh * dir.y;
  }
  // Over a full ring, sum(dir * dir^T) = 3 W^2 I.
  const double norm = 3.0 * m.width * m.width;
  gx /= norm;
  gy /= norm;
  const double len = std::sqrt(gx * gx + gy * gy + 1.0);
  const double c = std::numbers::sqrt2 / 2.0;
  const double lx = -c * c, ly = c * c, lz = c;
  const double illum = std::max(0.0, (-gx * lx - gy * ly + lz) / len);
  return channel(40.0 + 200.0 * illum);
}

}  // namespace

ColorRamp parse_color_ramp(std::string_view text) {
  if (text == "blues") return ColorRamp{};
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw InvalidArgument("color ramp must be 'blues' or '#rrggbb:#rrggbb'");
  }
  return {parse_hex_color(text.substr(0, colon)), parse_hex_color(text.substr(colon + 1))};
}

void render_depth_map(const WaterGrid& grid, const RenderOptions& options, std::ostream& out) {
  if (grid.size() == 0) throw InvalidArgument("cannot render an empty grid");
  const double ppm = options.pixels_per_meter;
  if (!std::isfinite(ppm) || ppm <= 0.0) throw InvalidArgument("pixels_per_meter must be positive");

  const auto& terrain = grid.terrain();
  const auto& m = terrain.metrics();
  double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
  double min_y = min_x, max_y = -min_x;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto p = axial_to_world(terrain.coord(i), m);
    min_x = std::min(min_x, p.x - 0.5 * m.width);
    max_x = std::max(max_x, p.x + 0.5 * m.width);
    min_y = std::min(min_y, p.y - m.size);
    max_y = std::max(max_y, p.y + m.size);
  }
  const double wpx = std::floor((max_x - min_x) * ppm);
  const double hpx = std::floor((max_y - min_y) * ppm);
  if (wpx < 1.0 || hpx < 1.0) throw InvalidArgument("rendered image would have no pixels");
  if (wpx * hpx > static_cast<double>(kMaxImagePixels)) {
    throw ResourceError("rendered image exceeds the supported size");
  }
  const auto width = static_cast<std::size_t>(wpx);
  const auto height = static_cast<std::size_t>(hpx);

  double field_max = 0.0;
  for (double d : grid.depths()) field_max = std::max(field_max, d);
  std::vector<Rgb> palette(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = grid.depth(i);
    if (d > 0.0) {
      palette[i] = lerp(options.ramp.start, options.ramp.end, d / field_max);
    } else {
      const auto g = hillshade(grid, i);
      palette[i] = {g, g, g};
    }
  }

  out << "P6\n" << width << ' ' << height << "\n255\n";
  std::vector<char> row(width * 3);
  for (std::size_t py = 0; py < height; ++py) {
    const double y = max_y - (static_cast<double>(py) + 0.5) / ppm;
    for (std::size_t px = 0; px < width; ++px) {
      const double x = min_x + (static_cast<double>(px) + 0.5) / ppm;
      const auto cell = world_to_axial({x, y}, m);
      Rgb c{255, 255, 255};
      if (terrain.contains(cell)) c = palette[terrain.index(cell)];
      row[3 * px] = static_cast<char>(c.r);
      row[3 * px + 1] = static_cast<char>(c.g);
      row[3 * px + 2] = static_cast<char>(c.b);
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw IoError("failed to write image");
}

namespace {

void print_fixed6(std::ostream& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  // Drop the sign of values that print as zero.
  if (buf[0] == '-' && std::string_view(buf + 1).find_first_not_of("0.") == std::string_view::npos) {
    out << (buf + 1);
  } else {
    out << buf;
  }
}

}  // namespace

void export_depth_csv(const HexTerrain& terrain, std::span<const double> depths, std::ostream& out) {
  if (depths.size() != terrain.size()) throw InvalidArgument("depth count does not match terrain");
  out << "q,r,elevation_m,depth_m\n";
  const auto h = terrain.heights();
  for (std::size_t i = 0; i < terrain.size(); ++i) {
    const auto c = terrain.coord(i);
    out << c.q << ',' << c.r << ',';
    print_fixed6(out, h[i]);
    out << ',';
    print_fixed6(out, depths[i]);
    out << '\n';
  }
  if (!out) throw IoError("failed to write depth CSV");
}

void export_depth_csv(const WaterGrid& grid, std::ostream& out) {
  export_depth_csv(grid.terrain(), grid.depths(), out);
}

namespace {

struct CsvRow {
  AxialCoord c;
  double h = 0.0;
  double d = 0.0;
  std::size_t line = 0;
};

template <typename T>
bool parse_field(std::string_view s, T& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && ec == std::errc{} && end == s.data() + s.size();
}

}  // namespace

WaterGrid import_depth_csv(std::istream& in, const HexMetrics& metrics, Boundary boundary) {
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  std::vector<CsvRow> rows;
  int max_q = -1, max_r = -1;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != "q,r,elevation_m,depth_m") {
        throw ParseError("expected header 'q,r,elevation_m,depth_m'", lineno);
      }
      header = true;
      continue;
    }
    std::string_view rest(line);
    std::array<std::string_view, 4> f;
    for (std::size_t k = 0; k < 4; ++k) {
      const auto comma = rest.find(',');
      if ((k < 3) == (comma == std::string_view::npos)) {
        throw ParseError("expected 4 comma-separated fields", lineno);
      }
      f[k] = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    CsvRow row;
    row.line = lineno;
    if (!parse_field(f[0], row.c.q) || !parse_field(f[1], row.c.r) || !parse_field(f[2], row.h) ||
        !parse_field(f[3], row.d)) {
      throw ParseError("malformed number", lineno);
    }
    if (row.c.q < 0 || row.c.r < 0) throw ParseError("negative cell coordinate", lineno);
    if (!std::isfinite(row.h)) throw ParseError("elevation not finite", lineno);
    if (!std::isfinite(row.d) || row.d < 0.0) throw ParseError("depth must be >= 0", lineno);
    if (rows.size() >= kMaxGridCells) throw ResourceError("depth CSV exceeds the supported size");
    max_q = std::max(max_q, row.c.q);
    max_r = std::max(max_r, row.c.r);
    rows.push_back(row);
  }
  if (!header) throw ParseError("missing header", lineno == 0 ? 1 : lineno);

  const HexExtent extent{max_q + 1, max_r + 1};
  const std::size_t expected =
      static_cast<std::size_t>(extent.q_cells) * static_cast<std::size_t>(extent.r_cells);
  if (rows.size() != expected) {
    throw ParseError("cells do not form a complete " + std::to_string(extent.q_cells) + "x" +
                         std::to_string(extent.r_cells) + " block",
                     lineno);
  }
  std::vector<double> heights(expected, 0.0), depths(expected, 0.0);
  std::vector<char> seen(expected, 0);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto idx = static_cast<std::size_t>(rows[k].c.r) * static_cast<std::size_t>(extent.q_cells) +
                     static_cast<std::size_t>(rows[k].c.q);
    if (seen[idx]) throw ParseError("duplicate cell", rows[k].line);
    seen[idx] = 1;
    heights[idx] = rows[k].h;
    depths[idx] = rows[k].d;
  }
  WaterGrid grid(HexTerrain(metrics, GeoPoint{}, extent, std::move(heights)), boundary);
  grid.set_depths(std::move(depths));
  return grid;
}

}  // namespace hexflood
