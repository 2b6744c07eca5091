#include "hexflood/cli.hpp"

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hexflood/analysis.hpp"
#include "hexflood/elevation_client.hpp"
#include "hexflood/error.hpp"
#include "hexflood/scenario.hpp"

namespace hexflood::cli {

namespace fs = std::filesystem;

namespace {

// Writes through a sibling temporary file so readers never see a partial file.
void write_atomically(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    body(out);
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("failed writing " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void print_zone_table(std::ostream& out, const std::vector<FloodZone>& zones, double threshold) {
  out << zones.size() << " zones (threshold " << fixed6(threshold) << " m)\n";
  if (zones.empty()) return;
  out << "label cells area_m2 max_depth_m\n";
  for (const auto& z : zones) {
    out << z.label << ' ' << z.cells.size() << ' ' << fixed6(z.area) << ' ' << fixed6(z.max_depth)
        << '\n';
  }
}

void write_zone_csv(std::ostream& out, const std::vector<FloodZone>& zones) {
  out << "label,cells,area_m2,max_depth_m\n";
  for (const auto& z : zones) {
    out << z.label << ',' << z.cells.size() << ',' << fixed6(z.area) << ',' << fixed6(z.max_depth)
        << '\n';
  }
}

void print_summary(std::ostream& out, const FloodReport& rep, double cell_area,
                   const std::vector<FloodZone>& zones, double threshold) {
  out << to_json(rep) << '\n';
  out << "volume_m3 " << fixed6(rep.sum * cell_area) << '\n';
  print_zone_table(out, zones, threshold);
}

std::string usage_error(CLI::App& app, const std::string& message) {
  return "error: " + message + "\n" + app.help();
}

BBox parse_bbox(const std::string& text) {
  std::istringstream in(text);
  BBox b;
  char c1 = 0, c2 = 0, c3 = 0;
  in >> b.south >> c1 >> b.west >> c2 >> b.north >> c3 >> b.east;
  if (!in || c1 != ',' || c2 != ',' || c3 != ',' || (in >> std::ws, !in.eof())) {
    throw InvalidArgument("--bbox must be S,W,N,E");
  }
  return b;
}

// Maps library exceptions onto exit codes; `data_code` is what parse and
// geometry errors mean for the calling command.
int report_failure(std::ostream& err, int data_code) {
  try {
    throw;
  } catch (const ConfigError& e) {
    err << "error: config " << e.what() << '\n';
    return kUsage;
  } catch (const Unavailable& e) {
    err << "error: " << e.what() << '\n';
    return kNetwork;
  } catch (const ProtocolError& e) {
    err << "error: " << e.what() << '\n';
    return kNetwork;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return data_code;
  }
}

struct FetchArgs {
  std::string bbox;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string out;
  std::string base_url;
  std::string api_key_env;
  std::size_t batch_size = 256;
  std::size_t max_retries = 3;
  std::size_t backoff_ms = 200;
  std::string cache_dir = ".hexflood-cache";
};

int cmd_fetch_dem(CLI::App& sub, const FetchArgs& a, std::ostream& out, std::ostream& err) {
  BBox bbox;
  try {
    bbox = parse_bbox(a.bbox);
    lattice_points(bbox, a.rows, a.cols);
    if (a.batch_size == 0) throw InvalidArgument("--batch-size must be at least 1");
    if (a.backoff_ms == 0) throw InvalidArgument("--backoff-ms must be positive");
  } catch (const std::exception& e) {
    err << usage_error(sub, e.what());
    return kUsage;
  }
  ProviderConfig cfg{a.base_url, a.api_key_env, a.batch_size, a.max_retries, a.backoff_ms};
  try {
    std::shared_ptr<ElevationProvider> provider;
    if (!cfg.base_url.empty()) provider = std::make_shared<HttpElevationProvider>(cfg);
    ElevationClient client(cfg, DiskCache(a.cache_dir, [&](std::string_view w) {
                             err << "warning: " << w << '\n';
                           }),
                           provider);
    const auto raster = client.fetch_elevation_grid(bbox, a.rows, a.cols);
    write_atomically(a.out, [&](std::ostream& o) { write_csv_raster(raster, o); });
    out << "wrote " << a.rows << "x" << a.cols << " raster to " << a.out << '\n';
    return kOk;
  } catch (...) {
    return report_failure(err, kData);
  }
}

std::string snapshot_name(std::size_t step, std::size_t total_steps) {
  int width = 6;
  for (std::size_t t = total_steps; t >= 1000000; t /= 10) ++width;
  char buf[64];
  std::snprintf(buf, sizeof buf, "step_%0*zu.csv", width, step);
  return buf;
}

int cmd_simulate(const std::string& config_path, std::ostream& out, std::ostream& err) {
  ScenarioConfig cfg;
  try {
    cfg = load_scenario_config(config_path);
  } catch (...) {
    return report_failure(err, kUsage);
  }

  HexTerrain terrain;
  try {
    terrain = build_terrain(cfg);
  } catch (const IoError& e) {
    err << "error: terrain: " << e.what() << '\n';
    return kData;
  } catch (...) {
    return report_failure(err, kData);
  }

  const fs::path out_dir = cfg.output_dir;
  const fs::path staging =
      out_dir.parent_path() / ("." + out_dir.filename().string() + ".staging-" +
                               std::to_string(::getpid()));
  std::vector<std::string> written;
  try {
    fs::remove_all(staging);
    fs::create_directories(staging);
    const std::size_t total_steps = steps_for(cfg.sim.rain_duration, cfg.sim.step_seconds) +
                                    steps_for(cfg.sim.equilibrate_duration, cfg.sim.step_seconds);

    auto save = [&](const std::string& name, const std::function<void(std::ostream&)>& body) {
      write_atomically(staging / name, body);
      written.push_back(name);
    };

    const WaterGrid grid = run_scenario(terrain, cfg.sim, cfg.snapshot_every, [&](const Snapshot& s) {
      auto body = [&](std::ostream& o) { export_depth_csv(terrain, s.depths, o); };
      if (s.periodic) save(snapshot_name(s.step, total_steps), body);
      if (s.after_rain) save("after_rain.csv", body);
      if (s.final) save("final.csv", body);
    });

    const FloodReport rep = summarize(grid.depths());
    const auto zones = flood_zones(grid, cfg.flood_threshold);
    save("report.json", [&](std::ostream& o) { o << to_json(rep) << '\n'; });
    save("zones.csv", [&](std::ostream& o) { write_zone_csv(o, zones); });
    save("final.ppm", [&](std::ostream& o) {
      render_depth_map(grid, RenderOptions{cfg.pixels_per_meter, cfg.color_ramp}, o);
    });

    fs::create_directories(out_dir);
    for (const auto& name : written) fs::rename(staging / name, out_dir / name);
    fs::remove_all(staging);

    print_summary(out, rep, terrain.metrics().area, zones, cfg.flood_threshold);
    if (cfg.sim.boundary == Boundary::OpenOutflow) {
      out << "outflow_total_m " << fixed6(grid.outflow_total()) << '\n';
    }
    return kOk;
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    try {
      throw;
    } catch (const fs::filesystem_error& e) {
      err << "error: " << e.what() << '\n';
      return kIo;
    } catch (...) {
      return report_failure(err, kData);
    }
  }
}

WaterGrid read_depth_csv(const std::string& path, double hex_width) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return import_depth_csv(in, metrics_from_width(hex_width));
}

int cmd_report(CLI::App& sub, const std::string& path, double threshold, double hex_width,
               std::ostream& out, std::ostream& err) {
  if (!(threshold >= 0.0) || !(hex_width > 0.0)) {
    err << usage_error(sub, "--threshold must be >= 0 and --hex-width > 0");
    return kUsage;
  }
  WaterGrid grid;
  try {
    grid = read_depth_csv(path, hex_width);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << path << ": " << e.what() << '\n';
    return kUsage;
  }
  const auto rep = summarize(grid.depths());
  const auto zones = flood_zones(grid, threshold);
  print_summary(out, rep, grid.terrain().metrics().area, zones, threshold);
  return kOk;
}

int cmd_render(CLI::App& sub, const std::string& path, const std::string& image, double ppm,
               double hex_width, const std::string& ramp_spec, std::ostream& out,
               std::ostream& err) {
  RenderOptions options;
  try {
    if (!(ppm > 0.0) || !std::isfinite(ppm)) throw InvalidArgument("--pixels-per-meter must be > 0");
    if (!(hex_width > 0.0)) throw InvalidArgument("--hex-width must be > 0");
    options = {ppm, parse_color_ramp(ramp_spec)};
  } catch (const std::exception& e) {
    err << usage_error(sub, e.what());
    return kUsage;
  }
  WaterGrid grid;
  try {
    grid = read_depth_csv(path, hex_width);
  } catch (const std::exception& e) {
    err << "error: " << path << ": " << e.what() << '\n';
    return kUsage;
  }
  try {
    std::ostringstream buf(std::ios::binary);
    render_depth_map(grid, options, buf);
    write_atomically(image, [&](std::ostream& o) { o << buf.str(); });
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  out << "wrote " << image << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hexagonal cellular-automata runoff and flood-zone simulator", "hexflood"};
  app.require_subcommand(1);

  FetchArgs fetch;
  auto* fetch_cmd = app.add_subcommand("fetch-dem", "Fetch an elevation grid into a CSV raster");
  fetch_cmd->add_option("--bbox", fetch.bbox, "south,west,north,east in degrees")->required();
  fetch_cmd->add_option("--rows", fetch.rows, "Lattice rows (>= 2)")->required();
  fetch_cmd->add_option("--cols", fetch.cols, "Lattice columns (>= 2)")->required();
  fetch_cmd->add_option("--out", fetch.out, "Output CSV raster")->required();
  fetch_cmd->add_option("--base-url", fetch.base_url, "Elevation service URL (omit: cache only)");
  fetch_cmd->add_option("--api-key-env", fetch.api_key_env, "Environment variable holding the key");
  fetch_cmd->add_option("--batch-size", fetch.batch_size, "Points per request")->capture_default_str();
  fetch_cmd->add_option("--max-retries", fetch.max_retries, "Retries per batch")->capture_default_str();
  fetch_cmd->add_option("--backoff-ms", fetch.backoff_ms, "Initial retry backoff")->capture_default_str();
  fetch_cmd->add_option("--cache-dir", fetch.cache_dir, "Disk cache directory")->capture_default_str();

  std::string config_path;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a scenario described by a JSON config");
  sim_cmd->add_option("config", config_path, "Scenario JSON")->required();

  std::string report_csv;
  double threshold = kDefaultRiskThreshold;
  double report_width = 4.0;
  auto* report_cmd = app.add_subcommand("report", "Statistics and flood zones of a depth CSV");
  report_cmd->add_option("depth_csv", report_csv, "Depth CSV")->required();
  report_cmd->add_option("--threshold", threshold, "Flood-zone depth threshold, m")->capture_default_str();
  report_cmd->add_option("--hex-width", report_width, "Cell width, m")->capture_default_str();

  std::string render_csv, image;
  double ppm = 1.0;
  double render_width = 4.0;
  std::string ramp = "blues";
  auto* render_cmd = app.add_subcommand("render", "Render a depth CSV to a PPM image");
  render_cmd->add_option("depth_csv", render_csv, "Depth CSV")->required();
  render_cmd->add_option("--out", image, "Output PPM")->required();
  render_cmd->add_option("--pixels-per-meter", ppm, "Image scale")->capture_default_str();
  render_cmd->add_option("--hex-width", render_width, "Cell width, m")->capture_default_str();
  render_cmd->add_option("--ramp", ramp, "'blues' or '#rrggbb:#rrggbb'")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    CLI::App* which = &app;
    for (auto* sub : {fetch_cmd, sim_cmd, report_cmd, render_cmd}) {
      if (sub->parsed()) which = sub;
    }
    err << usage_error(*which, e.what());
    return kUsage;
  }

  if (fetch_cmd->parsed()) return cmd_fetch_dem(*fetch_cmd, fetch, out, err);
  if (sim_cmd->parsed()) return cmd_simulate(config_path, out, err);
  if (report_cmd->parsed()) {
    return cmd_report(*report_cmd, report_csv, threshold, report_width, out, err);
  }
  return cmd_render(*render_cmd, render_csv, image, ppm, render_width, ramp, out, err);
}

}  // namespace hexflood::cli
