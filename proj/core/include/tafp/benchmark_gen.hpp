#pragma once

#include <string>
#include <vector>

#include "tafp/materials.hpp"
#include "tafp/problem.hpp"
#include "tafp/stack.hpp"

namespace tafp {

struct BlockShape {
  int width_cells = 1;
  int length_cells = 1;
};

/// Contents and power budget of one layer of the synthetic chip.
struct LayerPlan {
  int cores = 8;
  int l2_banks = 8;
  int l2_buffers = 2;
  BlockShape crossbar{10, 6};
  double power_W = 84.0;
};

/// Synthetic many-core stack. Per layer, cores share core_share of the
/// layer power evenly; the crossbar takes crossbar_share scaled by
/// cores / crossbar_reference_cores; memories split the remainder in
/// proportion to area.
struct BenchmarkSpec {
  StackSpec stack;
  std::vector<LayerPlan> layers;
  BlockShape core{6, 5};
  BlockShape l2_bank{5, 4};
  BlockShape l2_buffer{8, 5};
  double core_share = 0.70;
  double crossbar_share = 0.15;
  int crossbar_reference_cores = 16;
  std::vector<AirWall> air_walls;
  int min_tsvs = 11;
  ThermalParams thermal;
  MaterialTable materials = materials::reference_table();

  /// Four layers: two of 8 cores at 84 W, two of 16 cores at 139 W, with
  /// walls 5400 um from the left on layers 0 and 2 and from the right on
  /// layers 1 and 3. The oxide and bond conductivities are effective
  /// package values (30 and 10 W/(mK)); with the bulk values the stack
  /// has no steady state below the point where silicon k(T) vanishes.
  static BenchmarkSpec reference();
};

struct Benchmark {
  Problem problem;
  std::vector<int> home_layer;  // per unit id
};

/// Netlist: every core to its layer's crossbar and to L2 bank (k mod banks);
/// every memory to its crossbar; crossbars of adjacent layers to each other.
/// Throws Error(kInfeasibleArea) when a layer's blocks exceed its cells.
Benchmark generate_benchmark(const BenchmarkSpec& spec);

/// Naive stacked layout: per home layer, cores packed row by row from the
/// bottom edge, the crossbar next, memories packed from the top edge. Every
/// layer uses the same rule, so cores stack vertically.
/// Throws Error(kInfeasibleFloorplan) when packing fails.
Floorplan baseline_floorplan(const Benchmark& bench);

}  // namespace tafp
