#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "hexflood/analysis.hpp"
#include "hexflood/elevation_client.hpp"
#include "hexflood/hydro.hpp"
#include "hexflood/terrain.hpp"

namespace hexflood {

// A rejected scenario field. key() is the dotted JSON path, e.g.
// "rain_rate" or "terrain.path".
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

struct FileTerrain {
  std::filesystem::path path;
  RasterFormat format = RasterFormat::EsriAscii;
};

struct ProviderTerrain {
  BBox bbox;
  std::size_t rows = 0;
  std::size_t cols = 0;
  ProviderConfig provider;  // base_url may be empty: cache only
  std::filesystem::path cache_dir;
};

struct SyntheticTerrain {
  SyntheticKind kind = SyntheticKind::Plane;
  SyntheticParams params;
};

struct ScenarioConfig {
  std::variant<FileTerrain, ProviderTerrain, SyntheticTerrain> terrain;
  std::optional<GeoPoint> origin;     // default: south-west raster node
  std::optional<HexExtent> extent;    // default: largest block that fits (required for synthetic)
  double hex_width = 4.0;
  SimulationParams sim;
  std::size_t snapshot_every = 0;
  std::filesystem::path output_dir;
  double flood_threshold = kDefaultRiskThreshold;
  double pixels_per_meter = 1.0;
  ColorRamp color_ramp{};
};

// Parses and validates a scenario JSON document. Relative paths resolve
// against `base_dir`. Unknown keys are errors. Throws ConfigError.
ScenarioConfig parse_scenario_config(std::string_view json_text,
                                     const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

// Builds the hex terrain a scenario describes (file, provider or synthetic).
HexTerrain build_terrain(const ScenarioConfig& config);

}  // namespace hexflood
