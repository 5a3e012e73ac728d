#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tafp/fu_placer.hpp"
#include "tafp/moea.hpp"
#include "tafp/problem.hpp"
#include "tafp/report.hpp"
#include "tafp/stack.hpp"

namespace tafp {

enum class Stage { kPlaceFu, kPlaceFuStar, kPlaceTsv, kPlaceLc, kCarveAc, kSimulate, kReport };

std::string_view to_string(Stage s);
/// Throws Error(kParse) for unknown names.
Stage stage_from_string(std::string_view name);

/// Unset fields take the stage defaults: population 100; placement stages
/// run one generation per unit with mutation 1/units, TSV and channel
/// stages run 250 generations with mutation 1/candidates; crossover 0.9.
struct StageEvolution {
  std::optional<std::size_t> population_size;
  std::optional<std::size_t> generations;
  std::optional<double> crossover_prob;
  std::optional<double> mutation_prob;
  unsigned threads = 1;
};

struct SelectionRules {
  /// "min-temperature", "min-wirelength" or "index:<k>" over the feasible
  /// members of a placement front.
  std::string fu_rule = "min-temperature";
  /// "min-count" (fewest TSVs meeting the minimum) or "min-wirelength".
  std::string tsv_rule = "min-count";
  std::optional<int> min_tsvs;      // overrides the problem constraint
  std::optional<int> max_channels;  // overrides the problem constraint
};

struct PipelineConfig {
  std::filesystem::path problem_path;
  std::optional<std::filesystem::path> floorplan_path;
  std::vector<Stage> stages;
  std::map<Stage, StageEvolution> evolution;
  SelectionRules selection;
  std::filesystem::path output_dir;
  std::uint64_t rng_seed = 1;
};

/// Relative paths resolve against base_dir. Throws Error(kParse).
PipelineConfig pipeline_config_from_json(std::string_view text,
                                         const std::filesystem::path& base_dir);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Throws Error(kStageDependency) when a stage lacks its upstream floorplan
/// or a report has nothing simulated before it.
void check_stage_order(std::span<const Stage> stages, bool has_input_floorplan);

/// Resolved engine settings for one stage occurrence.
EvolutionConfig stage_evolution(Stage stage, const StageEvolution& overrides,
                                std::size_t variables, std::uint64_t seed);

/// Sub-seed of the n-th occurrence (0-based) of a stage.
std::uint64_t stage_seed(std::uint64_t master, Stage stage, int occurrence);

/// Index into front of the member chosen by rule among F1 = 0 members.
/// Throws Error(kSelectionUnsatisfiable) or Error(kParse) for bad rules.
std::size_t select_placement(std::span<const Individual<FuChromosome>> front,
                             std::string_view rule);

/// Brute-force legality count: units missing or out of bounds, pairwise
/// overlaps among units, TSV columns and walls, and channels meeting TSVs
/// or walls.
int floorplan_violations(const Floorplan& fp, std::span<const FunctionalUnit> units);

struct PipelineResult {
  std::optional<Floorplan> floorplan;
  std::vector<MetricsRow> metrics;
};

/// Runs the stages in order, writing every artifact under output_dir.
PipelineResult run_pipeline(const PipelineConfig& cfg);
PipelineResult run_pipeline(const PipelineConfig& cfg, const Problem& problem,
                            std::optional<Floorplan> input);

}  // namespace tafp
