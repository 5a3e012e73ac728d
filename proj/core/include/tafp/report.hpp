#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tafp/problem.hpp"
#include "tafp/stack.hpp"
#include "tafp/thermal.hpp"

namespace tafp {

/// One row of the metrics table.
struct MetricsRow {
  std::string label;
  double max_K = 0.0;
  double gradient_K = 0.0;
  double wirelength_cells = 0.0;
};

/// Wirelength of a floorplan: same-layer nets use center Manhattan
/// distance; cross-layer nets route through the best drilled TSV when the
/// floorplan has any, and use Manhattan distance with the layer pitch
/// otherwise. Infinite when some cross-layer net has no usable TSV.
double report_wirelength(const Floorplan& fp, const Problem& problem);

/// CSV "label,max_K,gradient_K,wirelength_cells".
std::string metrics_csv(std::span<const MetricsRow> rows);

/// CSV with one column per objective name and one row per solution.
std::string front_csv(std::span<const std::string> names,
                      std::span<const std::vector<double>> objectives);

/// Silicon temperatures of one layer, CSV "x,y,temperature_K".
std::string thermal_map_csv(const TemperatureField& field, int layer);

/// Field as written by write_field_csv.
std::string field_csv(const TemperatureField& field);

/// Rebuilds metrics.csv in a run directory from the exported simulate
/// artifacts (field.csv and floorplan.json per simulate stage) and the
/// problem copy. Throws Error(kMissingArtifact) when nothing was simulated.
std::vector<MetricsRow> export_report(const std::filesystem::path& run_dir);

}  // namespace tafp
