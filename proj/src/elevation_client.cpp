#include "hexflood/elevation_client.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <unistd.h>

#include <httplib.h>
#include <json.hpp>

#include "hexflood/error.hpp"

namespace hexflood {

void validate(const ProviderConfig& c) {
  if (c.base_url.empty()) throw InvalidArgument("base_url must not be empty");
  if (c.batch_size == 0) throw InvalidArgument("batch_size must be at least 1");
  if (c.backoff_ms == 0) throw InvalidArgument("backoff_ms must be positive");
}

namespace {

void split_url(const std::string& url, std::string& origin, std::string& path) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw InvalidArgument("base_url needs a scheme: " + url);
  const auto slash = url.find('/', scheme_end + 3);
  origin = url.substr(0, slash);
  path = slash == std::string::npos ? "/" : url.substr(slash);
}

}  // namespace

HttpElevationProvider::HttpElevationProvider(ProviderConfig config) : config_(std::move(config)) {
  validate(config_);
  split_url(config_.base_url, origin_, path_);
}

std::vector<ElevationRecord> HttpElevationProvider::lookup(std::span<const GeoPoint> points) {
  nlohmann::json body;
  auto& locs = body["locations"] = nlohmann::json::array();
  for (const auto& p : points) locs.push_back({{"latitude", p.lat}, {"longitude", p.lon}});

  httplib::Client client(origin_);
  client.set_connection_timeout(10, 0);
  client.set_read_timeout(30, 0);
  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) throw Unavailable("elevation request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw Unavailable("elevation service returned HTTP " + std::to_string(res->status));
  }

  std::vector<ElevationRecord> out;
  try {
    const auto j = nlohmann::json::parse(res->body);
    const auto& results = j.at("results");
    if (!results.is_array()) throw ProtocolError("'results' is not an array");
    out.reserve(results.size());
    for (const auto& r : results) {
      const auto& e = r.at("elevation");
      if (!e.is_number()) throw ProtocolError("record without numeric elevation");
      out.push_back({r.at("latitude").get<double>(), r.at("longitude").get<double>(),
                     e.get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed elevation response: ") + e.what());
  }
  return out;
}

std::vector<GeoPoint> lattice_points(const BBox& bbox, std::size_t rows, std::size_t cols) {
  if (rows < 2 || cols < 2) throw InvalidArgument("lattice needs at least 2 rows and 2 columns");
  if (!(bbox.north > bbox.south) || !(bbox.east > bbox.west)) {
    throw InvalidArgument("bbox must have north > south and east > west");
  }
  if (bbox.south < -90.0 || bbox.north > 90.0 || bbox.west < -180.0 || bbox.east > 180.0) {
    throw InvalidArgument("bbox outside lat/lon range");
  }
  if (cols > kMaxRasterCells / rows) throw ResourceError("requested lattice is too large");
  std::vector<GeoPoint> pts;
  pts.reserve(rows * cols);
  const double dlat = (bbox.north - bbox.south) / static_cast<double>(rows - 1);
  const double dlon = (bbox.east - bbox.west) / static_cast<double>(cols - 1);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      pts.push_back({bbox.south + static_cast<double>(i) * dlat,
                     bbox.west + static_cast<double>(j) * dlon});
    }
  }
  return pts;
}

std::string cache_key(const BBox& bbox, std::size_t rows, std::size_t cols) {
  char canon[256];
  std::snprintf(canon, sizeof canon, "elevation-grid/v1|%.17g,%.17g,%.17g,%.17g|%zu|%zu",
                bbox.south, bbox.west, bbox.north, bbox.east, rows, cols);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(canon, std::strlen(canon), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  static constexpr char kDigits[] = "0123456789abcdef";
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kDigits[digest[i] >> 4]);
    hex.push_back(kDigits[digest[i] & 0xF]);
  }
  return hex;
}

DiskCache::DiskCache(std::filesystem::path dir, WarningSink warn)
    : dir_(std::move(dir)), warn_(std::move(warn)) {
  if (dir_.empty()) throw InvalidArgument("cache directory must be configured");
  if (!warn_) {
    warn_ = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
  }
}

std::filesystem::path DiskCache::path_for(const std::string& key) const {
  return dir_ / (key + ".csv");
}

std::optional<CacheEntry> DiskCache::get(const std::string& key) const {
  const auto path = path_for(key);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
  try {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    CacheEntry entry;
    entry.key = key;
    if (text.rfind("# fetched_at=", 0) == 0) {
      entry.fetched_at = std::stoll(text.substr(13, text.find('\n') - 13));
    }
    std::istringstream body(text);
    entry.raster = load_elevation_raster(body, RasterFormat::Csv);
    if (cache_key(entry.raster.bbox, entry.raster.rows, entry.raster.cols) != key) {
      throw ParseError("contents do not match the cache key", 0);
    }
    return entry;
  } catch (const std::exception& e) {
    warn_("ignoring unreadable cache file " + path.string() + ": " + e.what());
    return std::nullopt;
  }
}

void DiskCache::put(const CacheEntry& entry) const {
  std::filesystem::create_directories(dir_);
  const auto final_path = path_for(entry.key);
  auto tmp = final_path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write cache file " + tmp.string());
    out << "# fetched_at=" << entry.fetched_at << '\n';
    write_csv_raster(entry.raster, out);
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw IoError("cannot write cache file " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, final_path);
}

ElevationClient::ElevationClient(ProviderConfig config, DiskCache cache,
                                 std::shared_ptr<ElevationProvider> provider, Sleeper sleeper)
    : config_(std::move(config)),
      cache_(std::move(cache)),
      provider_(std::move(provider)),
      sleeper_(std::move(sleeper)) {
  if (config_.batch_size == 0) throw InvalidArgument("batch_size must be at least 1");
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

ElevationRaster ElevationClient::fetch_elevation_grid(const BBox& bbox, std::size_t rows,
                                                      std::size_t cols) {
  const auto points = lattice_points(bbox, rows, cols);
  const auto key = cache_key(bbox, rows, cols);
  if (auto hit = cache_.get(key)) return std::move(hit->raster);
  if (!provider_) throw Unavailable("no elevation provider configured and no cached grid");

  ElevationRaster raster;
  raster.bbox = bbox;
  raster.rows = rows;
  raster.cols = cols;
  raster.heights.assign(rows * cols, 0.0);

  for (std::size_t start = 0; start < points.size(); start += config_.batch_size) {
    const std::size_t n = std::min(config_.batch_size, points.size() - start);
    const std::span<const GeoPoint> batch(points.data() + start, n);
    std::vector<ElevationRecord> records;
    for (std::size_t attempt = 0;; ++attempt) {
      try {
        ++provider_calls_;
        records = provider_->lookup(batch);
        break;
      } catch (const Unavailable&) {
        if (attempt >= config_.max_retries) throw;
        sleeper_(std::chrono::milliseconds(config_.backoff_ms << std::min<std::size_t>(attempt, 20)));
      }
    }
    if (records.size() != n) {
      throw ProtocolError("provider returned " + std::to_string(records.size()) +
                          " elevations for " + std::to_string(n) + " points");
    }
    for (std::size_t k = 0; k < n; ++k) {
      const auto& rec = records[k];
      const auto& p = batch[k];
      if (std::abs(rec.lat - p.lat) > 1e-6 || std::abs(rec.lon - p.lon) > 1e-6) {
        throw ProtocolError("provider records are out of request order");
      }
      if (!std::isfinite(rec.elevation)) throw ProtocolError("provider returned a non-finite elevation");
      // Lattice row i counts from the south; raster row 0 is the north edge.
      const std::size_t idx = start + k;
      const std::size_t i = idx / cols, j = idx % cols;
      raster.heights[(rows - 1 - i) * cols + j] = rec.elevation;
    }
  }

  CacheEntry entry{key, raster,
                   std::chrono::duration_cast<std::chrono::seconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count()};
  cache_.put(entry);
  return raster;
}

}  // namespace hexflood
