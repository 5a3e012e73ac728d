#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tafp/materials.hpp"
#include "tafp/stack.hpp"

namespace tafp {

/// Boundary and coolant parameters of the thermal model. The bottom face is
/// always adiabatic.
struct ThermalParams {
  double h_top_W_per_m2K = 5.0e5;   // heat sink on the top face
  double h_side_W_per_m2K = 2.0e4;
  std::optional<double> coolant_inlet_K;  // defaults to ambient
  double channel_h_conv_W_per_m2K = 2.0e5;
  double channel_flow_W_per_K = 0.5;
  bool si_temperature_dependent = true;
  /// Silicon k(T) = k + k_quad * (T - si_reference_K). With the reference
  /// table and 0 K this is 295 - 0.491 T, about 148 W/(mK) at 300 K.
  double si_reference_K = 0.0;
  std::optional<double> air_k_override_W_per_mK;
  double picard_tolerance_K = 1e-6;
  int picard_max_iterations = 50;
};

enum class Region : std::uint8_t { kHot, kWarm };

std::string_view to_string(Region r);

enum class HotSide : std::uint8_t { kNear, kFar };

/// How walls split layers into hot and warm regions and which units go where.
struct RegionSpec {
  /// Side of each wall, relative to the edge its offset is measured from,
  /// that forms the hot region.
  HotSide hot_side = HotSide::kNear;
  /// Watts per cell; heat sources at or above it are hot. Unset means the
  /// median unit power density.
  std::optional<double> threshold_W_per_cell;
  /// Explicit unit label -> region assignments.
  std::map<std::string, Region> overrides;
};

struct Constraints {
  double layer_pitch_cells = 1.0;
  /// Distance floor used for coincident centers in the temperature proxy.
  double coincident_distance_cells = 0.5;
  std::vector<AirWall> air_walls;
  RegionSpec regions;
  int min_tsvs = 0;
  std::optional<int> max_channels;
  /// Adds dz * pitch to block->TSV->block routes.
  bool tsv_route_vertical = false;
  /// Restricts the channel surrogate sum to silicon nodes.
  bool f7_silicon_only = false;
};

struct Problem {
  StackSpec stack;
  MaterialTable materials;
  std::vector<FunctionalUnit> units;
  Netlist netlist;
  Constraints constraints;
  ThermalParams thermal;

  void validate() const;
};

}  // namespace tafp
