#include "hexflood/scenario.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "hexflood/error.hpp"

namespace hexflood {

namespace {

using nlohmann::json;

// Typed accessors that report failures against the full dotted key.
class Fields {
public:
  Fields(const json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {}

  std::string key(std::string_view name) const {
    return prefix_.empty() ? std::string(name) : prefix_ + "." + std::string(name);
  }

  void allow(std::initializer_list<std::string_view> names) const {
    for (const auto& [k, v] : obj_.items()) {
      bool known = false;
      for (auto n : names) known = known || n == k;
      if (!known) throw ConfigError(key(k), "unknown key");
    }
  }

  bool has(std::string_view name) const { return obj_.contains(std::string(name)); }

  const json& require(std::string_view name) const {
    auto it = obj_.find(std::string(name));
    if (it == obj_.end()) throw ConfigError(key(name), "missing required key");
    return *it;
  }

  double number(std::string_view name, double fallback) const {
    if (!has(name)) return fallback;
    return number(name);
  }
  double number(std::string_view name) const {
    const auto& v = require(name);
    if (!v.is_number()) throw ConfigError(key(name), "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(key(name), "must be finite");
    return d;
  }

  std::uint64_t unsigned_int(std::string_view name, std::uint64_t fallback) const {
    if (!has(name)) return fallback;
    return unsigned_int(name);
  }
  std::uint64_t unsigned_int(std::string_view name) const {
    const auto& v = require(name);
    if (!v.is_number_unsigned()) throw ConfigError(key(name), "must be a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(std::string_view name, std::string fallback) const {
    if (!has(name)) return fallback;
    return string(name);
  }
  std::string string(std::string_view name) const {
    const auto& v = require(name);
    if (!v.is_string()) throw ConfigError(key(name), "must be a string");
    return v.get<std::string>();
  }

  Fields object(std::string_view name) const {
    const auto& v = require(name);
    if (!v.is_object()) throw ConfigError(key(name), "must be an object");
    return Fields(v, key(name));
  }

  double positive(std::string_view name, double fallback) const {
    const double v = number(name, fallback);
    if (!(v > 0.0)) throw ConfigError(key(name), "must be positive");
    return v;
  }
  double non_negative(std::string_view name, double fallback) const {
    const double v = number(name, fallback);
    if (v < 0.0) throw ConfigError(key(name), "must be non-negative");
    return v;
  }

private:
  const json& obj_;
  std::string prefix_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

template <typename F>
auto rethrow_as(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    throw ConfigError(key, e.what());
  }
}

}  // namespace

ScenarioConfig parse_scenario_config(std::string_view json_text,
                                     const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("<document>", "scenario must be a JSON object");

  const Fields top(doc, "");
  top.allow({"terrain", "hex_width", "rain_rate", "rain_duration", "equilibrate_duration",
             "step_seconds", "seed", "boundary", "snapshot_every", "output_dir", "flood_threshold",
             "pixels_per_meter", "color_ramp"});

  ScenarioConfig cfg;
  cfg.hex_width = top.positive("hex_width", cfg.hex_width);
  cfg.sim.rain_rate = top.non_negative("rain_rate", kReferenceRainRate);
  cfg.sim.rain_duration = top.non_negative("rain_duration", 0.0);
  cfg.sim.equilibrate_duration = top.non_negative("equilibrate_duration", 0.0);
  cfg.sim.step_seconds = top.positive("step_seconds", kDefaultStepSeconds);
  cfg.sim.seed = top.unsigned_int("seed", 0);
  cfg.sim.boundary = rethrow_as(top.key("boundary"),
                                [&] { return parse_boundary(top.string("boundary", "closed")); });
  cfg.snapshot_every = static_cast<std::size_t>(top.unsigned_int("snapshot_every", 0));
  cfg.output_dir = resolve(base_dir, top.string("output_dir"));
  if (top.string("output_dir").empty()) throw ConfigError("output_dir", "must not be empty");
  cfg.flood_threshold = top.non_negative("flood_threshold", kDefaultRiskThreshold);
  cfg.pixels_per_meter = top.positive("pixels_per_meter", 1.0);
  cfg.color_ramp = rethrow_as(top.key("color_ramp"),
                              [&] { return parse_color_ramp(top.string("color_ramp", "blues")); });

  const Fields t = top.object("terrain");
  const std::string source = t.string("source");

  auto read_origin = [&] {
    if (!t.has("origin")) return;
    const Fields o = t.object("origin");
    o.allow({"lat", "lon"});
    GeoPoint g{o.number("lat"), o.number("lon")};
    if (g.lat < -90.0 || g.lat > 90.0) throw ConfigError(o.key("lat"), "must be in [-90, 90]");
    if (g.lon < -180.0 || g.lon > 180.0) throw ConfigError(o.key("lon"), "must be in [-180, 180]");
    cfg.origin = g;
  };
  auto read_extent = [&](bool required) {
    if (!required && !t.has("extent")) return;
    const Fields e = t.object("extent");
    e.allow({"q", "r"});
    const auto q = e.unsigned_int("q");
    const auto r = e.unsigned_int("r");
    if (q == 0 || q > (1u << 20)) throw ConfigError(e.key("q"), "must be in [1, 2^20]");
    if (r == 0 || r > (1u << 20)) throw ConfigError(e.key("r"), "must be in [1, 2^20]");
    cfg.extent = HexExtent{static_cast<int>(q), static_cast<int>(r)};
  };

  if (source == "file") {
    t.allow({"source", "path", "format", "origin", "extent"});
    FileTerrain f;
    f.path = resolve(base_dir, t.string("path"));
    f.format = rethrow_as(t.key("format"),
                          [&] { return parse_raster_format(t.string("format", "esri-ascii")); });
    cfg.terrain = f;
    read_origin();
    read_extent(false);
  } else if (source == "provider") {
    t.allow({"source", "bbox", "rows", "cols", "base_url", "api_key_env", "batch_size",
             "max_retries", "backoff_ms", "cache_dir", "origin", "extent"});
    ProviderTerrain p;
    const auto& bb = t.require("bbox");
    if (!bb.is_array() || bb.size() != 4) {
      throw ConfigError(t.key("bbox"), "must be [south, west, north, east]");
    }
    for (const auto& v : bb) {
      if (!v.is_number()) throw ConfigError(t.key("bbox"), "must contain numbers");
    }
    p.bbox = {bb[0].get<double>(), bb[1].get<double>(), bb[2].get<double>(), bb[3].get<double>()};
    p.rows = static_cast<std::size_t>(t.unsigned_int("rows"));
    p.cols = static_cast<std::size_t>(t.unsigned_int("cols"));
    if (p.rows < 2) throw ConfigError(t.key("rows"), "must be at least 2");
    if (p.cols < 2) throw ConfigError(t.key("cols"), "must be at least 2");
    rethrow_as(t.key("bbox"), [&] { return lattice_points(p.bbox, 2, 2); });
    p.provider.base_url = t.string("base_url", "");
    p.provider.api_key_env = t.string("api_key_env", "");
    p.provider.batch_size = static_cast<std::size_t>(t.unsigned_int("batch_size", 256));
    if (p.provider.batch_size == 0) throw ConfigError(t.key("batch_size"), "must be at least 1");
    p.provider.max_retries = static_cast<std::size_t>(t.unsigned_int("max_retries", 3));
    p.provider.backoff_ms = static_cast<std::size_t>(t.unsigned_int("backoff_ms", 200));
    if (p.provider.backoff_ms == 0) throw ConfigError(t.key("backoff_ms"), "must be positive");
    p.cache_dir = resolve(base_dir, t.string("cache_dir", ".hexflood-cache"));
    cfg.terrain = p;
    read_origin();
    read_extent(false);
  } else if (source == "synthetic") {
    t.allow({"source", "kind", "extent", "origin", "a", "b", "c", "k"});
    SyntheticTerrain s;
    s.kind = rethrow_as(t.key("kind"), [&] { return parse_synthetic_kind(t.string("kind")); });
    s.params = {t.number("a", 0.0), t.number("b", 0.0), t.number("c", 0.0), t.number("k", 0.0)};
    cfg.terrain = s;
    read_origin();
    read_extent(true);
  } else {
    throw ConfigError(t.key("source"), "must be one of file, provider, synthetic");
  }
  return cfg;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<document>", "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_config(buf.str(), path.parent_path());
}

HexTerrain build_terrain(const ScenarioConfig& cfg) {
  const HexMetrics metrics = metrics_from_width(cfg.hex_width);
  if (const auto* s = std::get_if<SyntheticTerrain>(&cfg.terrain)) {
    return synthetic_terrain(s->kind, metrics, cfg.extent.value(), s->params,
                             cfg.origin.value_or(GeoPoint{}));
  }
  ElevationRaster raster;
  if (const auto* f = std::get_if<FileTerrain>(&cfg.terrain)) {
    raster = load_elevation_raster(f->path, f->format);
  } else {
    const auto& p = std::get<ProviderTerrain>(cfg.terrain);
    std::shared_ptr<ElevationProvider> provider;
    if (!p.provider.base_url.empty()) provider = std::make_shared<HttpElevationProvider>(p.provider);
    ElevationClient client(p.provider, DiskCache(p.cache_dir), provider);
    raster = client.fetch_elevation_grid(p.bbox, p.rows, p.cols);
  }
  const GeoPoint origin = cfg.origin.value_or(GeoPoint{raster.bbox.south, raster.bbox.west});
  const HexExtent extent = cfg.extent ? *cfg.extent : fit_extent(raster, metrics, origin);
  return sample_to_hex(raster, metrics, origin, extent);
}

}  // namespace hexflood
