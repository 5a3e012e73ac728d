#include "tafp/air_domains.hpp"

#include <algorithm>

#include "tafp/error.hpp"

namespace tafp {

Floorplan carve_walls(const Floorplan& fp, std::span<const FunctionalUnit> units,
                      std::span<const AirWall> walls) {
  Floorplan out = fp;
  const int layers = fp.stack.layer_count();
  for (const auto& w : walls) {
    if (w.layer < 0 || w.layer >= layers) {
      throw Error(ErrorCode::kOutOfBounds, "wall layer outside the stack");
    }
    const CellRect r = wall_rect(w, fp.stack);
    for (const auto& p : fp.placements) {
      if (p.z == w.layer && footprint(p, units[p.fu_id]).intersects(r)) {
        throw Error(ErrorCode::kCollision, "wall crosses a placed unit");
      }
    }
    for (const auto& t : fp.tsvs) {
      if (t.to_layer <= w.layer && r.contains(t.x, t.y)) {
        throw Error(ErrorCode::kCollision, "wall crosses a TSV column");
      }
    }
    for (const auto& c : fp.liquid_channels) {
      if (c.layer == w.layer && c.x >= r.x && c.x < r.x + r.w) {
        throw Error(ErrorCode::kCollision, "wall crosses a liquid channel");
      }
    }
    for (const auto& other : out.air_walls) {
      if (other.layer == w.layer && wall_rect(other, fp.stack).intersects(r)) {
        throw Error(ErrorCode::kCollision, "walls overlap");
      }
    }
    out.air_walls.push_back(w);
  }
  return out;
}

RegionMap build_region_map(const StackSpec& stack, std::span<const AirWall> walls, HotSide side) {
  RegionMap m;
  m.nx = stack.nx();
  m.ny = stack.ny();
  m.layers = stack.layer_count();
  m.allowed.assign(static_cast<std::size_t>(m.nx) * m.ny * m.layers,
                   RegionConstraint::kHotBit | RegionConstraint::kWarmBit);
  for (int z = 0; z < m.layers; ++z) {
    std::vector<std::pair<AirWall, CellRect>> on_layer;
    for (const auto& w : walls) {
      if (w.layer == z) on_layer.emplace_back(w, wall_rect(w, stack));
    }
    if (on_layer.empty()) continue;
    for (int y = 0; y < m.ny; ++y) {
      for (int x = 0; x < m.nx; ++x) {
        bool wall = false;
        bool hot = true;
        for (const auto& [w, r] : on_layer) {
          if (r.contains(x, y)) {
            wall = true;
            break;
          }
          const int c = w.axis == WallAxis::kX ? x : y;
          const int lo = w.axis == WallAxis::kX ? r.x : r.y;
          // Near side: between the wall and the edge its offset is measured from.
          const bool near = w.side == WallSide::kLeft ? c < lo : c > lo;
          hot = hot && (near == (side == HotSide::kNear));
        }
        auto& cell = m.allowed[(static_cast<std::size_t>(z) * m.ny + y) * m.nx + x];
        if (wall) {
          cell = 0;
        } else {
          cell = hot ? RegionConstraint::kHotBit : RegionConstraint::kWarmBit;
        }
      }
    }
  }
  return m;
}

double median_power_density(std::span<const FunctionalUnit> units) {
  if (units.empty()) return 0.0;
  std::vector<double> d;
  d.reserve(units.size());
  for (const auto& u : units) d.push_back(u.power_density());
  std::sort(d.begin(), d.end());
  const std::size_t n = d.size();
  return n % 2 == 1 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
}

Region region_of(const FunctionalUnit& fu, const RegionSpec& spec,
                 std::span<const FunctionalUnit> units) {
  if (const auto it = spec.overrides.find(fu.label); it != spec.overrides.end()) {
    return it->second;
  }
  const double threshold = spec.threshold_W_per_cell.value_or(median_power_density(units));
  return fu.kind == FuKind::kHeatSource && fu.power_density() >= threshold ? Region::kHot
                                                                           : Region::kWarm;
}

RegionConstraint make_region_constraint(const Problem& problem) {
  const auto& c = problem.constraints;
  RegionMap map = build_region_map(problem.stack, c.air_walls, c.regions.hot_side);
  bool has[2] = {false, false};
  for (const auto bits : map.allowed) {
    has[0] = has[0] || (bits & RegionConstraint::kHotBit);
    has[1] = has[1] || (bits & RegionConstraint::kWarmBit);
  }
  RegionConstraint rc;
  rc.allowed = std::move(map.allowed);
  rc.unit_region.reserve(problem.units.size());
  for (const auto& u : problem.units) {
    const Region r = region_of(u, c.regions, problem.units);
    if (!has[static_cast<int>(r)]) {
      throw Error(ErrorCode::kUncoveredUnit,
                  "no cell belongs to the region of unit " + u.label);
    }
    rc.unit_region.push_back(r);
  }
  return rc;
}

DecoderOptions constrained_options(const Problem& problem) {
  DecoderOptions opt;
  opt.tsv_aware = true;
  opt.walls = problem.constraints.air_walls;
  opt.regions = make_region_constraint(problem);
  return opt;
}

DecodeResult constrained_decode(const FuChromosome& chrom, const Problem& problem) {
  return FuDecoder(problem, constrained_options(problem)).decode(chrom);
}

}  // namespace tafp
