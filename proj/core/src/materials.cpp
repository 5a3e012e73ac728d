#include "tafp/materials.hpp"

#include <algorithm>
#include <cmath>

#include "tafp/error.hpp"
#include "tafp/problem.hpp"

namespace tafp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDimensionNotMultiple: return "dimension-not-multiple-of-cell";
    case ErrorCode::kOutOfBounds: return "out-of-bounds";
    case ErrorCode::kUnplacedEndpoint: return "unplaced-endpoint";
    case ErrorCode::kUnknownMaterial: return "unknown-material";
    case ErrorCode::kCollision: return "collision";
    case ErrorCode::kUnstableTimeStep: return "unstable-dt";
    case ErrorCode::kSingularSystem: return "singular-system";
    case ErrorCode::kObjectiveMismatch: return "objective-length-mismatch";
    case ErrorCode::kGenomeMismatch: return "genome-mismatch";
    case ErrorCode::kLengthMismatch: return "length-mismatch";
    case ErrorCode::kNoSolution: return "no-solution";
    case ErrorCode::kInsufficientCandidates: return "insufficient-candidates";
    case ErrorCode::kUncoveredUnit: return "uncovered-unit";
    case ErrorCode::kStageDependency: return "stage-dependency";
    case ErrorCode::kSelectionUnsatisfiable: return "selection-unsatisfiable";
    case ErrorCode::kMissingArtifact: return "missing-artifact";
    case ErrorCode::kInfeasibleArea: return "infeasible-area";
    case ErrorCode::kInfeasibleFloorplan: return "infeasible-floorplan";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

double Material::conductivity(double temperature_K, double reference_K) const {
  const double k = k_W_per_mK + k_quad_W_per_mK2 * (temperature_K - reference_K);
  return std::max(k, 0.01 * k_W_per_mK);
}

void MaterialTable::set(Material m) {
  std::string key = m.name;
  entries_[key] = std::move(m);
}

const Material& MaterialTable::at(std::string_view name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw Error(ErrorCode::kUnknownMaterial, "unknown material '" + std::string(name) + "'");
  }
  return it->second;
}

bool MaterialTable::contains(std::string_view name) const { return entries_.find(name) != entries_.end(); }

void MaterialTable::validate() const {
  for (auto name : materials::kRequired) {
    const Material& m = at(name);
    if (!(m.c_vol_J_per_m3K > 0.0) || m.k_W_per_mK < 0.0) {
      throw Error(ErrorCode::kUnknownMaterial,
                  "material '" + m.name + "' needs k >= 0 and c > 0");
    }
  }
}

namespace materials {

MaterialTable reference_table() {
  MaterialTable t;
  t.set({std::string(kSilicon), 295.0, -0.491, 1.628e6});
  t.set({std::string(kOxide), 1.38, 0.0, 4.180e6});
  t.set({std::string(kEpoxy), 0.03, 0.0, 1.73e6});
  t.set({std::string(kTsv), 372.0, 0.0, 3.45e6});
  t.set({std::string(kAir), 2.4e-3, 0.0, 1.0e4});
  t.set({std::string(kWater), 0.58, 0.0, 4.184e6});
  return t;
}

}  // namespace materials

std::string_view to_string(Region r) { return r == Region::kHot ? "hot" : "warm"; }

void Problem::validate() const {
  stack.validate();
  materials.validate();
  validate_units(units);
  validate_netlist(netlist, units);
  if (!(constraints.layer_pitch_cells >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "layer_pitch_cells must be >= 0");
  }
  if (!(constraints.coincident_distance_cells > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "coincident_distance_cells must be > 0");
  }
  for (const auto& w : constraints.air_walls) {
    if (w.layer < 0 || w.layer >= stack.layer_count()) {
      throw Error(ErrorCode::kOutOfBounds, "air wall layer out of range");
    }
    (void)wall_rect(w, stack);
  }
  for (const auto& [label, region] : constraints.regions.overrides) {
    const bool known = std::any_of(units.begin(), units.end(),
                                   [&](const FunctionalUnit& u) { return u.label == label; });
    if (!known) {
      throw Error(ErrorCode::kUncoveredUnit, "region override for unknown unit '" + label + "'");
    }
  }
}

}  // namespace tafp
