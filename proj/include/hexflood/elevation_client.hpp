#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hexflood/terrain.hpp"

namespace hexflood {

struct ProviderConfig {
  std::string base_url;     // e.g. http://localhost:8080/api/v1/lookup
  std::string api_key_env;  // name of the variable holding the key; empty for none
  std::size_t batch_size = 256;
  std::size_t max_retries = 3;
  std::size_t backoff_ms = 200;
};

void validate(const ProviderConfig& config);

struct ElevationRecord {
  double lat = 0.0;
  double lon = 0.0;
  double elevation = 0.0;
};

// Adapter seam for elevation services. lookup() returns one record per
// requested point, in request order. Implementations throw Unavailable for
// transient failures (retried by the client) and ProtocolError for answers
// that cannot be used.
class ElevationProvider {
public:
  virtual ~ElevationProvider() = default;
  virtual std::vector<ElevationRecord> lookup(std::span<const GeoPoint> points) = 0;
};

// JSON over HTTP(S):
//   POST base_url  {"locations":[{"latitude":..,"longitude":..},...]}
//   200            {"results":[{"latitude":..,"longitude":..,"elevation":..},...]}
// When api_key_env names a set variable its value is sent as a bearer token.
class HttpElevationProvider final : public ElevationProvider {
public:
  explicit HttpElevationProvider(ProviderConfig config);
  std::vector<ElevationRecord> lookup(std::span<const GeoPoint> points) override;

private:
  ProviderConfig config_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;
};

// rows x cols lattice spanning bbox, corners included, south-west first:
// point (i, j) sits at index i * cols + j with
// lat = south + i (north - south) / (rows - 1), lon = west + j (east - west) / (cols - 1).
std::vector<GeoPoint> lattice_points(const BBox& bbox, std::size_t rows, std::size_t cols);

// SHA-256 hex digest of the canonical request (bbox, rows, cols).
std::string cache_key(const BBox& bbox, std::size_t rows, std::size_t cols);

struct CacheEntry {
  std::string key;
  ElevationRaster raster;
  std::int64_t fetched_at = 0;  // unix seconds
};

using WarningSink = std::function<void(std::string_view)>;

// One CSV raster per file, named <key>.csv. Writes go through a temporary
// file and a rename. Unreadable or inconsistent files read as misses.
class DiskCache {
public:
  explicit DiskCache(std::filesystem::path dir, WarningSink warn = {});

  std::optional<CacheEntry> get(const std::string& key) const;
  void put(const CacheEntry& entry) const;
  std::filesystem::path path_for(const std::string& key) const;
  const std::filesystem::path& dir() const { return dir_; }

private:
  std::filesystem::path dir_;
  WarningSink warn_;
};

class ElevationClient {
public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  // provider may be null: the client then serves from cache only.
  ElevationClient(ProviderConfig config, DiskCache cache,
                  std::shared_ptr<ElevationProvider> provider, Sleeper sleeper = {});

  // Cache first; otherwise the lattice is requested in batches of
  // batch_size, each retried up to max_retries times with exponential
  // backoff. Throws Unavailable when a batch keeps failing and nothing is
  // cached, ProtocolError on incomplete answers.
  ElevationRaster fetch_elevation_grid(const BBox& bbox, std::size_t rows, std::size_t cols);

  std::size_t provider_calls() const { return provider_calls_; }

private:
  ProviderConfig config_;
  DiskCache cache_;
  std::shared_ptr<ElevationProvider> provider_;
  Sleeper sleeper_;
  std::size_t provider_calls_ = 0;
};

}  // namespace hexflood
