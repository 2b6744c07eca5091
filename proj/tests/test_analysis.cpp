#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "hexflood/analysis.hpp"
#include "hexflood/error.hpp"
#include "oracles.hpp"

using namespace hexflood;

namespace {

WaterGrid grid_with(HexExtent e, std::vector<double> depths, std::vector<double> heights = {}) {
  if (heights.empty()) heights.assign(depths.size(), 0.0);
  WaterGrid g(HexTerrain(metrics_from_width(4.0), {}, e, std::move(heights)));
  g.set_depths(std::move(depths));
  return g;
}

}  // namespace

TEST_CASE("summarize") {
  const std::vector<double> two{1.0, 3.0};
  const auto r = summarize(two);
  CHECK(r.count == 2);
  CHECK(r.sum == 4.0);
  CHECK(r.mean == 2.0);
  CHECK(r.sample_std == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(r.min == 1.0);
  CHECK(r.max == 3.0);

  const auto empty = summarize(std::vector<double>{});
  CHECK(empty.count == 0);
  CHECK(empty.sum == 0.0);
  CHECK(empty.mean == 0.0);
  CHECK(empty.sample_std == 0.0);
  CHECK(empty.max == 0.0);

  const auto one = summarize(std::vector<double>{0.5});
  CHECK(one.sample_std == 0.0);
  CHECK(one.mean == 0.5);

  CHECK_THROWS_AS(summarize(std::vector<double>{1.0, NAN}), InvalidArgument);

  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> d(200);
    for (auto& x : d) x = u(gen);
    const auto s = summarize(d);
    CHECK(s.min <= s.mean);
    CHECK(s.mean <= s.max);
    CHECK(s.sample_std >= 0.0);
    CHECK(s.mean == doctest::Approx(s.sum / 200.0).epsilon(1e-14));
    double ss = 0.0;
    for (double x : d) ss += (x - s.mean) * (x - s.mean);
    CHECK(s.sample_std == doctest::Approx(std::sqrt(ss / 199.0)).epsilon(1e-12));
  }
}

TEST_CASE("report json round trip") {
  const auto r = summarize(std::vector<double>{0.1, 0.2, 4.818});
  const auto text = to_json(r);
  CHECK(text.rfind("{\"count\":3,\"sum\":", 0) == 0);
  const auto back = report_from_json(text);
  CHECK(back.count == r.count);
  CHECK(back.sum == r.sum);
  CHECK(back.mean == r.mean);
  CHECK(back.sample_std == r.sample_std);
  CHECK(back.min == r.min);
  CHECK(back.max == r.max);
}

TEST_CASE("flood_zones small cases") {
  // 3x1 row: cells (0,0) (1,0) (2,0).
  auto g = grid_with({3, 1}, {3.0, 2.5, 0.0});
  auto z = flood_zones(g, 2.0);
  REQUIRE(z.size() == 1);
  CHECK(z[0].cells.size() == 2);
  CHECK(z[0].max_depth == 3.0);
  CHECK(z[0].area == doctest::Approx(2.0 * metrics_from_width(4.0).area));

  g = grid_with({3, 1}, {3.0, 0.0, 2.5});
  z = flood_zones(g, 2.0);
  REQUIRE(z.size() == 2);
  CHECK(z[0].max_depth == 3.0);
  CHECK(z[0].label == 1);
  CHECK(z[1].label == 2);

  CHECK(flood_zones(g, 10.0).empty());
  CHECK(flood_zones(g, 3.0).size() == 1);  // threshold is inclusive
  CHECK_THROWS_AS(flood_zones(g, -1.0), InvalidArgument);

  // Sorted by max depth, labels keep discovery order.
  g = grid_with({3, 1}, {2.1, 0.0, 4.0});
  z = flood_zones(g, 2.0);
  REQUIRE(z.size() == 2);
  CHECK(z[0].label == 2);
  CHECK(z[0].max_depth == 4.0);
}

TEST_CASE("flood_zones matches a BFS oracle") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 40; ++t) {
    const HexExtent e{13, 9};
    std::vector<double> d(117);
    for (auto& x : d) x = u(gen) < 0.45 ? 1.0 + u(gen) : 0.0;
    const auto g = grid_with(e, d);

    std::set<std::pair<int, int>> wet;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (d[i] >= 1.0) wet.insert({g.terrain().coord(i).q, g.terrain().coord(i).r});
    }
    const auto want = oracle::components(wet);
    const auto got = flood_zones(g, 1.0);
    REQUIRE(got.size() == want.size());

    std::set<std::set<std::pair<int, int>>> got_sets, want_sets(want.begin(), want.end());
    std::size_t total = 0;
    for (const auto& zone : got) {
      std::set<std::pair<int, int>> s;
      for (auto c : zone.cells) s.insert({c.q, c.r});
      total += s.size();
      got_sets.insert(s);
    }
    CHECK(got_sets == want_sets);
    CHECK(total == wet.size());
    for (std::size_t k = 1; k < got.size(); ++k) CHECK(got[k - 1].max_depth >= got[k].max_depth);

    // Raising the threshold never adds wet cells.
    std::size_t prev = wet.size();
    for (double th : {1.2, 1.5, 1.8, 2.1}) {
      std::size_t cells = 0;
      for (const auto& zone : flood_zones(g, th)) cells += zone.cells.size();
      CHECK(cells <= prev);
      prev = cells;
    }
  }
}

TEST_CASE("color ramp") {
  const auto blues = parse_color_ramp("blues");
  CHECK(blues.start == Rgb{198, 219, 239});
  const auto custom = parse_color_ramp("#000000:#ff8001");
  CHECK(custom.end == Rgb{255, 128, 1});
  CHECK_THROWS_AS(parse_color_ramp("reds"), InvalidArgument);
  CHECK_THROWS_AS(parse_color_ramp("#00000:#ffffff"), InvalidArgument);
}

TEST_CASE("render_depth_map") {
  const auto g = grid_with({4, 3}, std::vector<double>(12, 0.5));
  std::ostringstream a(std::ios::binary), b(std::ios::binary);
  render_depth_map(g, {2.0, {}}, a);
  render_depth_map(g, {2.0, {}}, b);
  const auto img = a.str();
  CHECK(img == b.str());

  std::istringstream in(img);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  in.get();
  CHECK(magic == "P6");
  CHECK(maxval == 255);
  CHECK(w > 0);
  CHECK(h > 0);
  const std::size_t header = static_cast<std::size_t>(in.tellg());
  CHECK(img.size() == header + static_cast<std::size_t>(w) * h * 3);

  // Uniform depth: every non-background pixel has the ramp end color.
  const auto end = ColorRamp{}.end;
  std::size_t water = 0;
  for (std::size_t p = header; p + 2 < img.size(); p += 3) {
    const Rgb px{static_cast<std::uint8_t>(img[p]), static_cast<std::uint8_t>(img[p + 1]),
                 static_cast<std::uint8_t>(img[p + 2])};
    if (px == Rgb{255, 255, 255}) continue;
    CHECK(px == end);
    ++water;
  }
  CHECK(water > 0);

  std::ostringstream sink;
  CHECK_THROWS_AS(render_depth_map(g, {1e-9, {}}, sink), InvalidArgument);
}

TEST_CASE("depth CSV export and import") {
  const auto m = metrics_from_width(4.0);
  WaterGrid g(HexTerrain(m, {}, {2, 2}, {1.5, 2.0, 2.5, 3.0}));
  g.set_depths({0.25, 0.0, 1.0 / 3.0, 2.0});
  std::ostringstream out;
  export_depth_csv(g, out);
  CHECK(out.str() ==
        "q,r,elevation_m,depth_m\n"
        "0,0,1.500000,0.250000\n"
        "1,0,2.000000,0.000000\n"
        "0,1,2.500000,0.333333\n"
        "1,1,3.000000,2.000000\n");

  std::istringstream in(out.str());
  const auto back = import_depth_csv(in, m);
  CHECK(back.terrain().extent().q_cells == 2);
  CHECK(back.terrain().extent().r_cells == 2);
  CHECK(back.depth(2) == doctest::Approx(0.333333));
  CHECK(back.terrain().heights()[3] == 3.0);

  std::istringstream header_only("q,r,elevation_m,depth_m\n");
  const auto empty = import_depth_csv(header_only, m);
  CHECK(empty.size() == 0);
  CHECK(flood_zones(empty, 0.0).empty());

  auto line_of = [&](const std::string& text) -> std::size_t {
    std::istringstream s(text);
    try {
      import_depth_csv(s, m);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("q,r,elevation_m,depth_m\n0,0,1,0\n1,0,x,0\n") == 3);
  CHECK(line_of("q,r,elevation_m,depth_m\n0,0,1,-1\n") == 2);
  CHECK(line_of("q,r,elevation_m,depth_m\n0,0,1,0\n0,0,1,0\n") != 0);
  CHECK(line_of("q,r,depth\n") == 1);
  CHECK(line_of("q,r,elevation_m,depth_m\n0,0,1,0\n1,1,1,0\n") != 0);
}
