#include "tafp/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <sstream>

#include "tafp/error.hpp"
#include "tafp/io.hpp"
#include "tafp/tsv_placer.hpp"

namespace tafp {

namespace fs = std::filesystem;

double report_wirelength(const Floorplan& fp, const Problem& problem) {
  const double pitch = problem.constraints.layer_pitch_cells;
  if (fp.tsvs.empty()) return manhattan_wirelength(fp, problem.units, problem.netlist, pitch);
  const TsvEvaluator eval(fp, problem.units, problem.netlist, fp.tsvs,
                          TsvRouting{problem.constraints.tsv_route_vertical, pitch});
  return eval.evaluate(TsvChromosome(fp.tsvs.size(), 1)).f5;
}

std::string metrics_csv(std::span<const MetricsRow> rows) {
  std::string out = "label,max_K,gradient_K,wirelength_cells\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{:.6f},{:.6f},{:.6f}\n", r.label, r.max_K, r.gradient_K,
                       r.wirelength_cells);
  }
  return out;
}

std::string front_csv(std::span<const std::string> names,
                      std::span<const std::vector<double>> objectives) {
  std::string out = "index";
  for (const auto& n : names) out += "," + n;
  out += "\n";
  for (std::size_t i = 0; i < objectives.size(); ++i) {
    if (objectives[i].size() != names.size()) {
      throw Error(ErrorCode::kObjectiveMismatch, "front row width differs from header");
    }
    out += fmt::format("{}", i);
    for (double v : objectives[i]) out += fmt::format(",{:.6f}", v);
    out += "\n";
  }
  return out;
}

std::string thermal_map_csv(const TemperatureField& field, int layer) {
  std::string out = "x,y,temperature_K\n";
  for (std::size_t u = 0; u < field.size(); ++u) {
    const auto& c = field.coords[u];
    if (c.layer != layer || c.slab != Slab::kSilicon) continue;
    out += fmt::format("{},{},{:.6f}\n", c.x, c.y, field.kelvin[u]);
  }
  return out;
}

std::string field_csv(const TemperatureField& field) {
  std::ostringstream os;
  write_field_csv(os, field);
  return os.str();
}

std::vector<MetricsRow> export_report(const fs::path& run_dir) {
  const fs::path problem_path = run_dir / "problem.json";
  if (!fs::exists(problem_path)) {
    throw Error(ErrorCode::kMissingArtifact, "no problem.json in " + run_dir.string());
  }
  const Problem problem = load_problem(problem_path);

  std::vector<fs::path> stages;
  for (const auto& e : fs::directory_iterator(run_dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_directory() && name.ends_with("_simulate")) stages.push_back(e.path());
  }
  std::sort(stages.begin(), stages.end());

  std::vector<MetricsRow> rows;
  for (const auto& dir : stages) {
    if (!fs::exists(dir / "field.csv") || !fs::exists(dir / "floorplan.json")) {
      throw Error(ErrorCode::kMissingArtifact, "incomplete simulate output in " + dir.string());
    }
    std::istringstream in(read_text_file(dir / "field.csv"));
    const ThermalMetrics m = report_metrics(read_field_csv(in));
    const Floorplan fp = load_floorplan(dir / "floorplan.json");
    rows.push_back({dir.filename().string(), m.max_K, m.gradient_K, report_wirelength(fp, problem)});
  }
  if (rows.empty()) {
    throw Error(ErrorCode::kMissingArtifact, "no simulate output in " + run_dir.string());
  }
  write_text_file(run_dir / "metrics.csv", metrics_csv(rows));
  return rows;
}

}  // namespace tafp
