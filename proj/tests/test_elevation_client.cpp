#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "hexflood/elevation_client.hpp"
#include "hexflood/error.hpp"

using namespace hexflood;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("hexflood-ec-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

double fake_elevation(const GeoPoint& p) { return 100.0 * p.lat - 3.0 * p.lon; }

// Answers from a formula; fails the first `failures` calls.
class FakeProvider : public ElevationProvider {
public:
  int failures = 0;
  int drop = 0;  // records to drop from each answer
  std::vector<std::size_t> batch_sizes;
  std::vector<GeoPoint> seen;

  std::vector<ElevationRecord> lookup(std::span<const GeoPoint> points) override {
    if (failures > 0) {
      --failures;
      throw Unavailable("simulated outage");
    }
    batch_sizes.push_back(points.size());
    std::vector<ElevationRecord> out;
    for (const auto& p : points) {
      seen.push_back(p);
      out.push_back({p.lat, p.lon, fake_elevation(p)});
    }
    out.resize(out.size() - std::min<std::size_t>(drop, out.size()));
    return out;
  }
};

ProviderConfig quick_config() {
  ProviderConfig c;
  c.base_url = "http://unused.invalid/";
  c.batch_size = 5;
  c.max_retries = 3;
  c.backoff_ms = 1;
  return c;
}

const BBox kBox{35.0, -6.0, 35.1, -5.8};

}  // namespace

TEST_CASE("lattice_points") {
  const auto pts = lattice_points(kBox, 3, 4);
  REQUIRE(pts.size() == 12);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      const auto& p = pts[i * 4 + j];
      CHECK(p.lat == doctest::Approx(35.0 + 0.05 * i).epsilon(1e-14));
      CHECK(p.lon == doctest::Approx(-6.0 + 0.2 / 3.0 * j).epsilon(1e-14));
    }
  }
  CHECK(pts.front().lat == kBox.south);
  CHECK(pts.front().lon == kBox.west);
  CHECK(pts.back().lat == kBox.north);
  CHECK(pts.back().lon == kBox.east);

  CHECK_THROWS_AS(lattice_points(kBox, 1, 4), InvalidArgument);
  CHECK_THROWS_AS(lattice_points({35.1, -6.0, 35.0, -5.8}, 3, 3), InvalidArgument);
  CHECK_THROWS_AS(lattice_points({-91.0, 0.0, 0.0, 1.0}, 3, 3), InvalidArgument);
}

TEST_CASE("cache_key") {
  const auto k = cache_key(kBox, 3, 4);
  CHECK(k.size() == 64);
  CHECK(k == cache_key(kBox, 3, 4));
  CHECK(k != cache_key(kBox, 4, 3));
  CHECK(k != cache_key({35.0, -6.0, 35.1, -5.80000001}, 3, 4));

  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> lat(-80.0, 80.0), lon(-170.0, 170.0);
  std::uniform_int_distribution<std::size_t> n(2, 500);
  std::set<std::string> keys;
  for (int i = 0; i < 2000; ++i) {
    const double s = lat(gen), w = lon(gen);
    keys.insert(cache_key({s, w, s + 0.1, w + 0.1}, n(gen), n(gen)));
  }
  CHECK(keys.size() == 2000);
}

TEST_CASE("DiskCache") {
  TempDir tmp;
  std::vector<std::string> warnings;
  DiskCache cache(tmp.path / "c", [&](std::string_view w) { warnings.emplace_back(w); });

  const auto key = cache_key(kBox, 2, 3);
  CHECK_FALSE(cache.get(key).has_value());
  CHECK(warnings.empty());

  ElevationRaster r;
  r.bbox = kBox;
  r.rows = 2;
  r.cols = 3;
  r.heights = {0.1, 1.0 / 3.0, -7.25, 1e-300, 12345.678901234567, 2.0 / 7.0};
  cache.put({key, r, 1700000000});
  const auto hit = cache.get(key);
  REQUIRE(hit.has_value());
  CHECK(hit->raster == r);
  CHECK(hit->fetched_at == 1700000000);
  CHECK(warnings.empty());

  SUBCASE("corrupt file is a miss with a warning") {
    std::ofstream(cache.path_for(key), std::ios::trunc) << "not,a\nraster\n";
    CHECK_FALSE(cache.get(key).has_value());
    CHECK(warnings.size() == 1);
  }
  SUBCASE("file under the wrong key is a miss") {
    const auto other = cache_key(kBox, 3, 2);
    fs::copy_file(cache.path_for(key), cache.path_for(other));
    CHECK_FALSE(cache.get(other).has_value());
    CHECK(warnings.size() == 1);
  }
}

TEST_CASE("ElevationClient") {
  TempDir tmp;
  auto provider = std::make_shared<FakeProvider>();
  std::vector<long> sleeps;
  auto sleeper = [&](std::chrono::milliseconds d) { sleeps.push_back(d.count()); };

  SUBCASE("2x2 requests exactly the corners") {
    ElevationClient client(quick_config(), DiskCache(tmp.path), provider, sleeper);
    const auto r = client.fetch_elevation_grid(kBox, 2, 2);
    REQUIRE(provider->seen.size() == 4);
    CHECK(provider->seen[0].lat == kBox.south);
    CHECK(provider->seen[0].lon == kBox.west);
    CHECK(provider->seen[3].lat == kBox.north);
    CHECK(provider->seen[3].lon == kBox.east);
    // Row 0 is the north edge.
    CHECK(r.at(0, 0) == fake_elevation({kBox.north, kBox.west}));
    CHECK(r.at(1, 1) == fake_elevation({kBox.south, kBox.east}));
  }

  SUBCASE("batching, caching and re-fetch") {
    ElevationClient client(quick_config(), DiskCache(tmp.path), provider, sleeper);
    const auto a = client.fetch_elevation_grid(kBox, 3, 4);
    CHECK(provider->batch_sizes == std::vector<std::size_t>{5, 5, 2});
    CHECK(client.provider_calls() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        const GeoPoint p{35.0 + 0.05 * static_cast<double>(2 - i),
                         -6.0 + 0.2 / 3.0 * static_cast<double>(j)};
        CHECK(a.at(i, j) == doctest::Approx(fake_elevation(p)).epsilon(1e-12));
      }
    }

    ElevationClient again(quick_config(), DiskCache(tmp.path), provider, sleeper);
    const auto b = again.fetch_elevation_grid(kBox, 3, 4);
    CHECK(again.provider_calls() == 0);
    CHECK(a == b);

    // Cache only, no provider.
    ElevationClient offline(quick_config(), DiskCache(tmp.path), nullptr, sleeper);
    CHECK(offline.fetch_elevation_grid(kBox, 3, 4) == a);
    CHECK_THROWS_AS(offline.fetch_elevation_grid(kBox, 4, 4), Unavailable);
  }

  SUBCASE("short answer is a protocol error") {
    provider->drop = 1;
    ElevationClient client(quick_config(), DiskCache(tmp.path), provider, sleeper);
    CHECK_THROWS_AS(client.fetch_elevation_grid(kBox, 2, 2), ProtocolError);
    CHECK(fs::is_empty(tmp.path));
  }

  SUBCASE("transient failures are retried with backoff") {
    provider->failures = 3;
    ElevationClient client(quick_config(), DiskCache(tmp.path), provider, sleeper);
    CHECK_NOTHROW(client.fetch_elevation_grid(kBox, 2, 2));
    CHECK(sleeps == std::vector<long>{1, 2, 4});
  }

  SUBCASE("persistent failure surfaces Unavailable") {
    provider->failures = 4;
    ElevationClient client(quick_config(), DiskCache(tmp.path), provider, sleeper);
    CHECK_THROWS_AS(client.fetch_elevation_grid(kBox, 2, 2), Unavailable);
    CHECK(client.provider_calls() == 4);
  }
}

TEST_CASE("HttpElevationProvider against a local server") {
  httplib::Server server;
  std::string auth_seen;
  std::atomic<int> status{200};
  server.Post("/lookup", [&](const httplib::Request& req, httplib::Response& res) {
    auth_seen = req.get_header_value("Authorization");
    if (status != 200) {
      res.status = status;
      return;
    }
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json results = nlohmann::json::array();
    for (const auto& loc : body.at("locations")) {
      const double lat = loc.at("latitude"), lon = loc.at("longitude");
      results.push_back({{"latitude", lat}, {"longitude", lon},
                         {"elevation", fake_elevation({lat, lon})}});
    }
    res.set_content(nlohmann::json{{"results", results}}.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("HEXFLOOD_TEST_KEY", "s3cret", 1);
  ProviderConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/lookup";
  cfg.api_key_env = "HEXFLOOD_TEST_KEY";
  HttpElevationProvider http(cfg);

  const auto pts = lattice_points(kBox, 2, 3);
  const auto recs = http.lookup(pts);
  REQUIRE(recs.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(recs[i].elevation == doctest::Approx(fake_elevation(pts[i])));
  }
  CHECK(auth_seen == "Bearer s3cret");

  status = 503;
  CHECK_THROWS_AS(http.lookup(pts), Unavailable);

  server.stop();
  th.join();
  ::unsetenv("HEXFLOOD_TEST_KEY");

  ProviderConfig dead = cfg;
  dead.base_url = "http://127.0.0.1:" + std::to_string(port) + "/lookup";
  CHECK_THROWS_AS(HttpElevationProvider(dead).lookup(pts), Unavailable);
  CHECK_THROWS_AS(HttpElevationProvider(ProviderConfig{}), InvalidArgument);
}
