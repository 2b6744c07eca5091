#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "hexflood/rng.hpp"
#include "hexflood/terrain.hpp"

namespace hexflood {

// 80 mm of rain over 72 hours, in meters of depth per hour (~1.11e-3).
inline constexpr double kReferenceRainRate = 0.080 / 72.0;
inline constexpr double kDefaultStepSeconds = 10.0;

// A cell plus its up-to-six neighbors.
inline constexpr std::size_t kMaxPartition = 7;

enum class Boundary { Closed, OpenOutflow };

Boundary parse_boundary(std::string_view name);
std::string_view to_string(Boundary b);

struct PartitionLevel {
  double level = 0.0;    // equilibrium water surface H
  std::size_t wet = 0;   // number of cells left wet (k)
};

// Redistributes the water of one partition so that it drains to the lowest
// cells and settles at a common surface level. `depths` is updated in place;
// the total is conserved to rounding. Cells are ranked by (height, position),
// so equal heights resolve by input order.
//
// Throws InvalidArgument for n == 0, n > 7, mismatched spans, negative or
// non-finite depths, or non-finite heights.
PartitionLevel distribute_partition_in_place(std::span<const double> heights,
                                             std::span<double> depths);

std::vector<double> distribute_partition(std::span<const double> heights,
                                         std::span<const double> depths);

// Water depth layered over a hex terrain. Copies share the (immutable)
// terrain and adjacency table.
class WaterGrid {
public:
  static constexpr std::int32_t kNoNeighbor = -1;

  WaterGrid() = default;
  explicit WaterGrid(HexTerrain terrain, Boundary boundary = Boundary::Closed);
  WaterGrid(std::shared_ptr<const HexTerrain> terrain, Boundary boundary);

  const HexTerrain& terrain() const { return *terrain_; }
  const std::shared_ptr<const HexTerrain>& terrain_ptr() const { return terrain_; }
  Boundary boundary() const { return boundary_; }
  std::size_t size() const { return depths_.size(); }

  std::span<const double> depths() const { return depths_; }
  double depth(std::size_t i) const { return depths_[i]; }
  double surface(std::size_t i) const { return terrain_->heights()[i] + depths_[i]; }

  // Throws InvalidArgument unless every depth is finite and >= 0.
  void set_depths(std::vector<double> depths);

  // In-domain neighbor indices in kNeighborOffsets order, kNoNeighbor when
  // the neighbor lies outside the block.
  const std::array<std::int32_t, 6>& adjacency(std::size_t i) const { return (*adjacency_)[i]; }

  double outflow_total() const { return outflow_; }
  double rain_total() const { return rain_; }
  double total_depth() const;

  friend void apply_rain(WaterGrid& grid, double rain_rate, double dt_seconds);
  friend void step(WaterGrid& grid, Rng& rng);

private:
  std::shared_ptr<const HexTerrain> terrain_;
  std::shared_ptr<const std::vector<std::array<std::int32_t, 6>>> adjacency_;
  std::vector<double> depths_;
  Boundary boundary_ = Boundary::Closed;
  double outflow_ = 0.0;
  double rain_ = 0.0;  // sum over cells of rain depth added
  std::vector<std::size_t> order_;
};

// Adds rain_rate * dt / 3600 meters to every cell. Throws InvalidArgument for
// a negative or non-finite rate or non-positive dt.
void apply_rain(WaterGrid& grid, double rain_rate, double dt_seconds);

// One sweep: a fresh random permutation of all cells, then each cell's
// partition is redistributed in that order. Under OpenOutflow, cells on the
// block edge see virtual exterior neighbors at their own terrain height; any
// water they receive leaves the domain and is added to outflow_total.
void step(WaterGrid& grid, Rng& rng);

struct SimulationParams {
  double step_seconds = kDefaultStepSeconds;
  double rain_rate = kReferenceRainRate;  // m/h
  double rain_duration = 0.0;             // h
  double equilibrate_duration = 0.0;      // h
  std::uint64_t seed = 0;
  Boundary boundary = Boundary::Closed;
};

void validate(const SimulationParams& params);

// ceil(hours * 3600 / step_seconds), ignoring rounding noise in the quotient.
std::size_t steps_for(double hours, double step_seconds);

struct Snapshot {
  std::size_t step = 0;  // completed steps
  bool periodic = false;
  bool after_rain = false;
  bool final = false;
  std::vector<double> depths;
  double outflow_total = 0.0;
  double rain_total = 0.0;
};

using SnapshotSink = std::function<void(const Snapshot&)>;

// Upper bound on cells in a simulated grid.
inline constexpr std::size_t kMaxGridCells = std::size_t{1} << 26;
// Upper bound on bytes of retained snapshots for the collecting overload.
inline constexpr std::size_t kMaxSnapshotBytes = std::size_t{1} << 32;

// Rain phase (apply_rain then step) followed by an equilibration phase with
// no rain. A snapshot is emitted every `snapshot_every` steps (0 disables),
// at the end of the rain phase, and at the end of the run.
WaterGrid run_scenario(const HexTerrain& terrain, const SimulationParams& params,
                       std::size_t snapshot_every, const SnapshotSink& sink);

struct ScenarioResult {
  std::vector<Snapshot> snapshots;
  WaterGrid final_grid;
};

ScenarioResult run_scenario(const HexTerrain& terrain, const SimulationParams& params,
                            std::size_t snapshot_every);

}  // namespace hexflood
