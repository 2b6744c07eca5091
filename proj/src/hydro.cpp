#include "hexflood/hydro.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hexflood/error.hpp"

namespace hexflood {

Boundary parse_boundary(std::string_view name) {
  if (name == "closed") return Boundary::Closed;
  if (name == "open-outflow") return Boundary::OpenOutflow;
  throw InvalidArgument("unknown boundary policy '" + std::string(name) + "'");
}

std::string_view to_string(Boundary b) {
  return b == Boundary::Closed ? "closed" : "open-outflow";
}

PartitionLevel distribute_partition_in_place(std::span<const double> heights,
                                             std::span<double> depths) {
  const std::size_t n = heights.size();
  if (n == 0 || n > kMaxPartition) throw InvalidArgument("partition must have 1 to 7 cells");
  if (depths.size() != n) throw InvalidArgument("partition heights and depths differ in length");

  double total = 0.0;  // W: partition volume over unit-cell area
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(heights[i])) throw InvalidArgument("partition height not finite");
    if (!(depths[i] >= 0.0) || !std::isfinite(depths[i])) {
      throw InvalidArgument("partition depth must be finite and non-negative");
    }
    total += depths[i];
  }

  // Rank by (height, position); insertion sort is stable and n <= 7.
  std::array<std::size_t, kMaxPartition> order{};
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = i;
    while (j > 0 && heights[order[j - 1]] > heights[i]) {
      order[j] = order[j - 1];
      --j;
    }
    order[j] = i;
  }

  const double base = heights[order[0]];
  if (total == 0.0) return {base, 1};

  // Heights relative to the lowest cell keep the sums small.
  std::array<double, kMaxPartition> rel{};
  for (std::size_t i = 0; i < n; ++i) rel[i] = heights[order[i]] - base;

  // k is the largest index whose cells can all be raised to h_k:
  // W >= sum_{i<=k} (h_k - h_i). The right side never decreases with k.
  std::size_t wet = 1;
  double prefix = rel[0];
  for (std::size_t k = 2; k <= n; ++k) {
    const double need = static_cast<double>(k) * rel[k - 1] - (prefix + rel[k - 1]);
    if (total < need) break;
    prefix += rel[k - 1];
    wet = k;
  }
  const double level = (total + prefix) / static_cast<double>(wet);

  double assigned = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = i < wet ? std::max(0.0, level - rel[i]) : 0.0;
    depths[order[i]] = d;
    assigned += d;
  }
  // The lowest cell holds the most water; it absorbs the rounding residual.
  depths[order[0]] = std::max(0.0, depths[order[0]] + (total - assigned));
  return {base + level, wet};
}

std::vector<double> distribute_partition(std::span<const double> heights,
                                         std::span<const double> depths) {
  std::vector<double> out(depths.begin(), depths.end());
  distribute_partition_in_place(heights, out);
  return out;
}

namespace {

std::shared_ptr<const std::vector<std::array<std::int32_t, 6>>> build_adjacency(
    const HexTerrain& terrain) {
  auto adj = std::make_shared<std::vector<std::array<std::int32_t, 6>>>(terrain.size());
  for (std::size_t i = 0; i < terrain.size(); ++i) {
    const auto nbrs = neighbors(terrain.coord(i));
    for (std::size_t k = 0; k < 6; ++k) {
      (*adj)[i][k] = terrain.contains(nbrs[k]) ? static_cast<std::int32_t>(terrain.index(nbrs[k]))
                                               : WaterGrid::kNoNeighbor;
    }
  }
  return adj;
}

}  // namespace

WaterGrid::WaterGrid(HexTerrain terrain, Boundary boundary)
    : WaterGrid(std::make_shared<const HexTerrain>(std::move(terrain)), boundary) {}

WaterGrid::WaterGrid(std::shared_ptr<const HexTerrain> terrain, Boundary boundary)
    : terrain_(std::move(terrain)), boundary_(boundary) {
  if (!terrain_) throw InvalidArgument("water grid needs a terrain");
  if (terrain_->size() > kMaxGridCells) throw ResourceError("grid exceeds the supported size");
  adjacency_ = build_adjacency(*terrain_);
  depths_.assign(terrain_->size(), 0.0);
}

void WaterGrid::set_depths(std::vector<double> depths) {
  if (depths.size() != depths_.size()) throw InvalidArgument("depth count does not match grid");
  for (double d : depths) {
    if (!std::isfinite(d) || d < 0.0) throw InvalidArgument("depths must be finite and >= 0");
  }
  depths_ = std::move(depths);
}

double WaterGrid::total_depth() const {
  double s = 0.0;
  for (double d : depths_) s += d;
  return s;
}

void apply_rain(WaterGrid& grid, double rain_rate, double dt_seconds) {
  if (!std::isfinite(rain_rate) || rain_rate < 0.0) {
    throw InvalidArgument("rain_rate must be finite and non-negative");
  }
  if (!std::isfinite(dt_seconds) || dt_seconds <= 0.0) {
    throw InvalidArgument("time step must be positive");
  }
  const double added = rain_rate * dt_seconds / 3600.0;
  if (added == 0.0) return;
  for (double& d : grid.depths_) d += added;
  grid.rain_ += added * static_cast<double>(grid.depths_.size());
}

void step(WaterGrid& grid, Rng& rng) {
  const std::size_t n = grid.depths_.size();
  if (grid.order_.size() != n) grid.order_.resize(n);
  for (std::size_t i = 0; i < n; ++i) grid.order_[i] = i;
  shuffle_in_place(rng, std::span<std::size_t>(grid.order_));

  const auto heights = grid.terrain_->heights();
  const auto& adjacency = *grid.adjacency_;
  const bool open = grid.boundary_ == Boundary::OpenOutflow;

  std::array<double, kMaxPartition> ph{};
  std::array<double, kMaxPartition> pd{};
  std::array<std::int32_t, kMaxPartition> members{};

  for (const std::size_t center : grid.order_) {
    ph[0] = heights[center];
    pd[0] = grid.depths_[center];
    members[0] = static_cast<std::int32_t>(center);
    std::size_t m = 1;
    double water = pd[0];
    for (const std::int32_t nb : adjacency[center]) {
      if (nb != WaterGrid::kNoNeighbor) {
        ph[m] = heights[static_cast<std::size_t>(nb)];
        pd[m] = grid.depths_[static_cast<std::size_t>(nb)];
        water += pd[m];
      } else if (open) {
        ph[m] = heights[center];  // exterior sink, level with the edge cell
        pd[m] = 0.0;
      } else {
        continue;
      }
      members[m++] = nb;
    }
    // A dry partition stays dry.
    if (water == 0.0) continue;

    distribute_partition_in_place(std::span<const double>(ph.data(), m),
                                  std::span<double>(pd.data(), m));
    for (std::size_t k = 0; k < m; ++k) {
      if (members[k] == WaterGrid::kNoNeighbor) {
        grid.outflow_ += pd[k];
      } else {
        grid.depths_[static_cast<std::size_t>(members[k])] = pd[k];
      }
    }
  }
}

void validate(const SimulationParams& p) {
  if (!std::isfinite(p.step_seconds) || p.step_seconds <= 0.0) {
    throw InvalidArgument("step_seconds must be positive");
  }
  if (!std::isfinite(p.rain_rate) || p.rain_rate < 0.0) {
    throw InvalidArgument("rain_rate must be non-negative");
  }
  if (!std::isfinite(p.rain_duration) || p.rain_duration < 0.0) {
    throw InvalidArgument("rain_duration must be non-negative");
  }
  if (!std::isfinite(p.equilibrate_duration) || p.equilibrate_duration < 0.0) {
    throw InvalidArgument("equilibrate_duration must be non-negative");
  }
}

std::size_t steps_for(double hours, double step_seconds) {
  const double exact = hours * 3600.0 / step_seconds;
  if (!std::isfinite(exact) || exact > 1e15) throw ResourceError("step count out of range");
  const double nearest = std::round(exact);
  if (std::abs(exact - nearest) <= 1e-9 * std::max(1.0, exact)) {
    return static_cast<std::size_t>(nearest);
  }
  return static_cast<std::size_t>(std::ceil(exact));
}

namespace {

std::size_t snapshot_count(std::size_t rain_steps, std::size_t total_steps, std::size_t every) {
  std::size_t count = every ? total_steps / every : 0;
  if (!every || rain_steps % every != 0 || rain_steps == 0) ++count;
  if (!every || total_steps % every != 0 || total_steps == 0) ++count;
  return count;
}

}  // namespace

WaterGrid run_scenario(const HexTerrain& terrain, const SimulationParams& params,
                       std::size_t snapshot_every, const SnapshotSink& sink) {
  validate(params);
  if (terrain.size() > kMaxGridCells) throw ResourceError("grid exceeds the supported size");
  const std::size_t rain_steps = steps_for(params.rain_duration, params.step_seconds);
  const std::size_t total_steps =
      rain_steps + steps_for(params.equilibrate_duration, params.step_seconds);

  WaterGrid grid(terrain, params.boundary);
  Rng rng(params.seed);

  auto emit = [&](std::size_t done) {
    Snapshot snap;
    snap.step = done;
    snap.periodic = snapshot_every != 0 && done != 0 && done % snapshot_every == 0;
    snap.after_rain = done == rain_steps;
    snap.final = done == total_steps;
    if (!(snap.periodic || snap.after_rain || snap.final)) return;
    if (sink) {
      snap.depths.assign(grid.depths().begin(), grid.depths().end());
      snap.outflow_total = grid.outflow_total();
      snap.rain_total = grid.rain_total();
      sink(snap);
    }
  };

  emit(0);
  for (std::size_t s = 1; s <= total_steps; ++s) {
    if (s <= rain_steps) apply_rain(grid, params.rain_rate, params.step_seconds);
    step(grid, rng);
    emit(s);
  }
  return grid;
}

ScenarioResult run_scenario(const HexTerrain& terrain, const SimulationParams& params,
                            std::size_t snapshot_every) {
  validate(params);
  const std::size_t rain_steps = steps_for(params.rain_duration, params.step_seconds);
  const std::size_t total_steps =
      rain_steps + steps_for(params.equilibrate_duration, params.step_seconds);
  const std::size_t count = snapshot_count(rain_steps, total_steps, snapshot_every);
  if (terrain.size() != 0 && count > kMaxSnapshotBytes / sizeof(double) / terrain.size()) {
    throw ResourceError("retained snapshots would exceed the memory budget");
  }
  ScenarioResult result;
  result.snapshots.reserve(count);
  result.final_grid = run_scenario(terrain, params, snapshot_every,
                                   [&](const Snapshot& s) { result.snapshots.push_back(s); });
  return result;
}

}  // namespace hexflood
