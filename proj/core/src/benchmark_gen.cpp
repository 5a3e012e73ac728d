#include "tafp/benchmark_gen.hpp"

#include <fmt/format.h>

#include "tafp/error.hpp"
#include "tafp/materials.hpp"

namespace tafp {

BenchmarkSpec BenchmarkSpec::reference() {
  BenchmarkSpec s;
  s.stack.layers.assign(4, LayerSpec{});
  s.stack.layers.back().epoxy_height_um = 0.0;  // bond layers only sit between tiers
  s.layers = {
      {8, 8, 2, {10, 6}, 84.0},
      {8, 8, 2, {10, 6}, 84.0},
      {16, 8, 4, {12, 6}, 139.0},
      {16, 8, 4, {12, 6}, 139.0},
  };
  for (const auto& [name, k] : {std::pair{materials::kOxide, 30.0}, {materials::kEpoxy, 10.0}}) {
    Material m = s.materials.at(name);
    m.k_W_per_mK = k;
    s.materials.set(m);
  }
  for (int l = 0; l < 4; ++l) {
    AirWall w;
    w.layer = l;
    w.axis = WallAxis::kX;
    w.position_um = 5400.0;
    w.side = l % 2 == 0 ? WallSide::kLeft : WallSide::kRight;
    s.air_walls.push_back(w);
  }
  return s;
}

Benchmark generate_benchmark(const BenchmarkSpec& spec) {
  spec.stack.validate();
  if (static_cast<int>(spec.layers.size()) != spec.stack.layer_count()) {
    throw Error(ErrorCode::kInvalidArgument, "one layer plan per stack layer is required");
  }
  if (spec.core_share < 0.0 || spec.crossbar_share < 0.0 || spec.crossbar_reference_cores <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "power shares must be non-negative");
  }
  Benchmark b;
  Problem& p = b.problem;
  p.stack = spec.stack;
  p.materials = spec.materials;
  p.thermal = spec.thermal;
  p.constraints.air_walls = spec.air_walls;
  p.constraints.min_tsvs = spec.min_tsvs;

  const int cells = spec.stack.nx() * spec.stack.ny();
  auto add = [&](std::string label, BlockShape s, double power, FuKind kind, int layer) {
    FunctionalUnit u;
    u.id = static_cast<int>(p.units.size());
    u.label = std::move(label);
    u.width_cells = s.width_cells;
    u.length_cells = s.length_cells;
    u.power_W = power;
    u.kind = kind;
    p.units.push_back(std::move(u));
    b.home_layer.push_back(layer);
    return p.units.back().id;
  };

  int core_no = 0, l2_no = 0, l2b_no = 0;
  std::vector<int> prev_crossbar;
  for (int l = 0; l < static_cast<int>(spec.layers.size()); ++l) {
    const LayerPlan& lp = spec.layers[l];
    const auto area = [](BlockShape s) { return s.width_cells * s.length_cells; };
    const int mem_area = lp.l2_banks * area(spec.l2_bank) + lp.l2_buffers * area(spec.l2_buffer);
    const int used = lp.cores * area(spec.core) + mem_area + area(lp.crossbar);
    if (used > cells) {
      throw Error(ErrorCode::kInfeasibleArea, fmt::format("layer {} blocks exceed the grid", l));
    }
    const double core_p = lp.cores > 0 ? spec.core_share * lp.power_W / lp.cores : 0.0;
    const double xbar_p = spec.crossbar_share * lp.power_W * lp.cores / spec.crossbar_reference_cores;
    const double mem_total = lp.power_W - core_p * lp.cores - xbar_p;
    if (mem_total < 0.0 || (mem_total > 0.0 && mem_area == 0)) {
      throw Error(ErrorCode::kInvalidArgument, "power shares exceed the layer budget");
    }
    const double mem_density = mem_area > 0 ? mem_total / mem_area : 0.0;

    const int xbar = add(fmt::format("crossbar{}", l), lp.crossbar, xbar_p, FuKind::kHeatSource, l);
    std::vector<int> banks;
    for (int k = 0; k < lp.l2_banks; ++k) {
      banks.push_back(add(fmt::format("l2_{}", l2_no++), spec.l2_bank,
                          mem_density * area(spec.l2_bank), FuKind::kHeatSink, l));
      p.netlist.push_back({banks.back(), xbar});
    }
    for (int k = 0; k < lp.l2_buffers; ++k) {
      const int id = add(fmt::format("l2b_{}", l2b_no++), spec.l2_buffer,
                         mem_density * area(spec.l2_buffer), FuKind::kHeatSink, l);
      p.netlist.push_back({id, xbar});
    }
    for (int k = 0; k < lp.cores; ++k) {
      const int id = add(fmt::format("core{}", core_no++), spec.core, core_p, FuKind::kHeatSource, l);
      p.netlist.push_back({id, xbar});
      if (!banks.empty()) p.netlist.push_back({id, banks[k % banks.size()]});
    }
    if (!prev_crossbar.empty()) p.netlist.push_back({prev_crossbar.back(), xbar});
    prev_crossbar.push_back(xbar);
  }
  p.validate();
  return b;
}

namespace {

// First free position in scan order; rows run bottom-up or top-down.
bool first_fit(OccupancyGrid& occ, const FunctionalUnit& u, int layer, bool from_top,
               Placement& out) {
  const int w = u.width_cells;
  const int h = u.length_cells;
  for (int row = 0; row + h <= occ.ny(); ++row) {
    const int y = from_top ? occ.ny() - h - row : row;
    for (int x = 0; x + w <= occ.nx(); ++x) {
      bool free = true;
      for (int yy = y; yy < y + h && free; ++yy) {
        for (int xx = x; xx < x + w && free; ++xx) free = occ.is_free(xx, yy, layer);
      }
      if (!free) continue;
      out = {u.id, x, y, layer, false};
      occ.occupy(CellRect{x, y, w, h}, layer);
      return true;
    }
  }
  return false;
}

}  // namespace

Floorplan baseline_floorplan(const Benchmark& bench) {
  const Problem& p = bench.problem;
  Floorplan fp;
  fp.stack = p.stack;
  OccupancyGrid occ(p.stack.nx(), p.stack.ny(), p.stack.layer_count());
  fp.placements.resize(p.units.size());
  auto is = [](const FunctionalUnit& u, std::string_view prefix) {
    return u.label.rfind(prefix, 0) == 0;
  };
  // Cores first from the bottom, then crossbars, then memories from the top.
  const auto pass = [&](auto pred, bool from_top) {
    for (const auto& u : p.units) {
      if (!pred(u)) continue;
      if (!first_fit(occ, u, bench.home_layer[u.id], from_top, fp.placements[u.id])) {
        throw Error(ErrorCode::kInfeasibleFloorplan, "cannot pack " + u.label);
      }
    }
  };
  pass([&](const FunctionalUnit& u) { return is(u, "core"); }, false);
  pass([&](const FunctionalUnit& u) { return is(u, "crossbar"); }, false);
  pass([&](const FunctionalUnit& u) { return !is(u, "core") && !is(u, "crossbar"); }, true);
  return fp;
}

}  // namespace tafp
