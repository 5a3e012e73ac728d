#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tafp/fu_placer.hpp"
#include "tafp/problem.hpp"
#include "tafp/stack.hpp"

namespace tafp {

/// Adds walls to a floorplan. Throws Error(kCollision) when a wall meets a
/// placed unit, a TSV column or a liquid channel.
Floorplan carve_walls(const Floorplan& fp, std::span<const FunctionalUnit> units,
                      std::span<const AirWall> walls);

/// Region label per (layer, y, x). Layers without walls accept both labels;
/// on a walled layer a cell is hot when it lies on the hot side of every
/// wall of that layer and warm otherwise. Wall cells accept neither.
struct RegionMap {
  int nx = 0;
  int ny = 0;
  int layers = 0;
  std::vector<std::uint8_t> allowed;  // RegionConstraint bitmask

  std::uint8_t at(int x, int y, int layer) const {
    return allowed[(static_cast<std::size_t>(layer) * ny + y) * nx + x];
  }
};

RegionMap build_region_map(const StackSpec& stack, std::span<const AirWall> walls, HotSide side);

/// Median power density of all units, in W per cell.
double median_power_density(std::span<const FunctionalUnit> units);

/// Overrides win; otherwise heat sources at or above the threshold are hot
/// and everything else is warm.
Region region_of(const FunctionalUnit& fu, const RegionSpec& spec,
                 std::span<const FunctionalUnit> units);

/// Throws Error(kUncoveredUnit) when a unit's region has no cell anywhere.
RegionConstraint make_region_constraint(const Problem& problem);

/// Decoder options for constrained placement: TSV-aware, walls carved and
/// units confined to their regions.
DecoderOptions constrained_options(const Problem& problem);

DecodeResult constrained_decode(const FuChromosome& chrom, const Problem& problem);

}  // namespace tafp
