// tafp: command line front end for the thermal-aware 3D floorplanning flow.

#include <fmt/format.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "tafp/benchmark_gen.hpp"
#include "tafp/error.hpp"
#include "tafp/io.hpp"
#include "tafp/lc_placer.hpp"
#include "tafp/pipeline.hpp"
#include "tafp/report.hpp"
#include "tafp/tsv_placer.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::vector<std::string> stages;
  std::optional<std::string> select_rule;
  std::optional<int> min_tsvs;
  std::optional<int> max_channels;
  std::optional<std::string> out;
};

void apply(const Overrides& o, tafp::PipelineConfig& cfg) {
  if (o.seed) cfg.rng_seed = *o.seed;
  if (!o.stages.empty()) {
    cfg.stages.clear();
    for (const auto& s : o.stages) cfg.stages.push_back(tafp::stage_from_string(s));
  }
  if (o.select_rule) cfg.selection.fu_rule = *o.select_rule;
  if (o.min_tsvs) cfg.selection.min_tsvs = o.min_tsvs;
  if (o.max_channels) cfg.selection.max_channels = o.max_channels;
  if (o.out) cfg.output_dir = *o.out;
}

void print_metrics(const std::vector<tafp::MetricsRow>& rows) {
  std::fputs(tafp::metrics_csv(rows).c_str(), stdout);
}

int generate_bench(const std::string& out) {
  const tafp::Benchmark bench = tafp::generate_benchmark(tafp::BenchmarkSpec::reference());
  const fs::path dir(out);
  tafp::save_problem(dir / "problem.json", bench.problem);
  tafp::save_floorplan(dir / "baseline.json", tafp::baseline_floorplan(bench));
  fmt::print("wrote {} and {}\n", (dir / "problem.json").string(), (dir / "baseline.json").string());
  return 0;
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw tafp::Error(tafp::ErrorCode::kParse, e.what());
  }
}

std::vector<double> read_objectives(const Json& a) {
  std::vector<double> o;
  for (const auto& v : a) o.push_back(v.is_string() ? INFINITY : v.get<double>());
  return o;
}

tafp::BitString read_bits(const std::string& s) {
  tafp::BitString b(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) b[i] = s[i] == '1';
  return b;
}

// Re-selects a member of a saved front and writes the resulting floorplan.
int select(const fs::path& stage_dir, const std::string& rule, std::optional<int> min_tsvs,
           std::optional<int> max_channels, const fs::path& out) {
  const Json front = parse_json(tafp::read_text_file(stage_dir / "front.json"));
  const std::string kind = front.at("kind").get<std::string>();
  const tafp::Problem problem = tafp::load_problem(stage_dir.parent_path() / "problem.json");
  tafp::Floorplan result;
  std::size_t pick = 0;
  if (kind == "placement") {
    std::vector<tafp::Individual<tafp::FuChromosome>> pop;
    for (const auto& m : front.at("members")) {
      tafp::Individual<tafp::FuChromosome> ind;
      for (const auto& g : m.at("genome")) ind.genome.push_back({g[0].get<int>(), g[1].get<bool>()});
      ind.objectives = read_objectives(m.at("objectives"));
      pop.push_back(std::move(ind));
    }
    pick = tafp::select_placement(pop, rule);
    result = tafp::load_floorplan(stage_dir / "solutions" / fmt::format("solution_{:03d}.json", pick));
  } else {
    std::vector<tafp::Individual<tafp::BitString>> pop;
    for (const auto& m : front.at("members")) {
      pop.push_back({read_bits(m.at("genome").get<std::string>()),
                     read_objectives(m.at("objectives")), 0, 0.0});
    }
    tafp::Floorplan base = tafp::load_floorplan(stage_dir / "floorplan.json");
    if (kind == "tsv") {
      const int need = min_tsvs.value_or(problem.constraints.min_tsvs);
      pick = rule == "min-wirelength" ? tafp::select_min_wirelength(pop, need)
                                      : tafp::select_solution(pop, need);
      tafp::TsvCandidateArray cand;
      for (const auto& c : front.at("candidates")) cand.push_back({c[0].get<int>(), c[1].get<int>(), c[2].get<int>()});
      base.tsvs.clear();
      result = tafp::apply_tsvs(base, problem.units, cand, pop[pick].genome);
    } else {
      pick = tafp::select_channels(pop, max_channels ? max_channels : problem.constraints.max_channels);
      tafp::LcCandidateArray cand;
      for (const auto& c : front.at("candidates")) cand.push_back({c[0].get<int>(), c[1].get<int>()});
      base.liquid_channels.clear();
      result = tafp::apply_to_floorplan(base, cand, pop[pick].genome, problem.thermal);
    }
  }
  tafp::save_floorplan(out, result);
  fmt::print("selected member {} of {}\n", pick, (stage_dir / "front.json").string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermal-aware 3D floorplanning flow"};
  app.require_subcommand(1);

  std::string bench_out = "bench";
  auto* gen = app.add_subcommand("generate-bench", "Write the synthetic 48-core problem and baseline");
  gen->add_option("--out", bench_out, "Output directory");

  std::string config;
  Overrides ov;
  auto* run = app.add_subcommand("run", "Run the stages of a pipeline config");
  run->add_option("--config", config, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", ov.seed, "Master seed");
  run->add_option("--stage", ov.stages, "Stage list replacing the config's (repeatable)");
  run->add_option("--select-rule", ov.select_rule, "Placement front rule");
  run->add_option("--min-tsvs", ov.min_tsvs, "Minimum TSV count for selection");
  run->add_option("--max-channels", ov.max_channels, "Channel budget");
  run->add_option("--out", ov.out, "Run directory");

  std::string sim_problem, sim_floorplan, sim_out = "sim";
  auto* sim = app.add_subcommand("simulate", "Steady simulation and report of a fixed floorplan");
  sim->add_option("problem", sim_problem)->required()->check(CLI::ExistingFile);
  sim->add_option("floorplan", sim_floorplan)->required()->check(CLI::ExistingFile);
  sim->add_option("--out", sim_out, "Run directory");

  std::string report_dir;
  auto* rep = app.add_subcommand("report", "Rebuild metrics.csv of a run directory");
  rep->add_option("run_dir", report_dir)->required()->check(CLI::ExistingDirectory);

  std::string stage_dir, sel_rule = "min-temperature", sel_out = "selected.json";
  std::optional<int> sel_min_tsvs, sel_max_channels;
  auto* sel = app.add_subcommand("select", "Pick a member of a saved front");
  sel->add_option("stage_dir", stage_dir, "Stage directory holding front.json")
      ->required()
      ->check(CLI::ExistingDirectory);
  sel->add_option("--select-rule", sel_rule,
                  "min-temperature | min-wirelength | index:<k> | min-count");
  sel->add_option("--min-tsvs", sel_min_tsvs);
  sel->add_option("--max-channels", sel_max_channels);
  sel->add_option("--out", sel_out, "Floorplan file to write");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return generate_bench(bench_out);
    if (*run) {
      tafp::PipelineConfig cfg = tafp::load_pipeline_config(config);
      apply(ov, cfg);
      print_metrics(tafp::run_pipeline(cfg).metrics);
      return 0;
    }
    if (*sim) {
      tafp::PipelineConfig cfg;
      cfg.problem_path = sim_problem;
      cfg.floorplan_path = sim_floorplan;
      cfg.stages = {tafp::Stage::kSimulate, tafp::Stage::kReport};
      cfg.output_dir = sim_out;
      print_metrics(tafp::run_pipeline(cfg).metrics);
      return 0;
    }
    if (*rep) {
      print_metrics(tafp::export_report(report_dir));
      return 0;
    }
    if (*sel) return select(stage_dir, sel_rule, sel_min_tsvs, sel_max_channels, sel_out);
  } catch (const tafp::Error& e) {
    fmt::print(stderr, "error [{}]: {}\n", tafp::to_string(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
