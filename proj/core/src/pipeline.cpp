#include "tafp/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "json_convert.hpp"
#include "tafp/air_domains.hpp"
#include "tafp/error.hpp"
#include "tafp/io.hpp"
#include "tafp/lc_placer.hpp"
#include "tafp/thermal.hpp"
#include "tafp/tsv_placer.hpp"

namespace tafp {

namespace {

using json_io::Json;
namespace fs = std::filesystem;

constexpr std::pair<Stage, std::string_view> kStageNames[] = {
    {Stage::kPlaceFu, "place-fu"},   {Stage::kPlaceFuStar, "place-fu-star"},
    {Stage::kPlaceTsv, "place-tsv"}, {Stage::kPlaceLc, "place-lc"},
    {Stage::kCarveAc, "carve-ac"},   {Stage::kSimulate, "simulate"},
    {Stage::kReport, "report"},
};

bool is_placement(Stage s) {
  return s == Stage::kPlaceFu || s == Stage::kPlaceFuStar || s == Stage::kCarveAc;
}

std::string bits_string(const BitString& bits) {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i) s[i] = bits[i] ? '1' : '0';
  return s;
}

Json objectives_json(const std::vector<double>& o) {
  Json a = Json::array();
  for (double v : o) a.push_back(std::isfinite(v) ? Json(v) : Json("inf"));
  return a;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string_view to_string(Stage s) {
  for (const auto& [stage, name] : kStageNames) {
    if (stage == s) return name;
  }
  return "?";
}

Stage stage_from_string(std::string_view name) {
  for (const auto& [stage, n] : kStageNames) {
    if (n == name) return stage;
  }
  throw Error(ErrorCode::kParse, fmt::format("unknown stage '{}'", name));
}

PipelineConfig pipeline_config_from_json(std::string_view text, const fs::path& base_dir) {
  const Json j = json_io::parse(text);
  try {
    PipelineConfig cfg;
    auto resolve = [&](const std::string& p) {
      const fs::path path(p);
      return path.is_absolute() ? path : base_dir / path;
    };
    cfg.problem_path = resolve(j.at("problem").get<std::string>());
    if (j.contains("floorplan") && !j["floorplan"].is_null()) {
      cfg.floorplan_path = resolve(j["floorplan"].get<std::string>());
    }
    for (const auto& s : j.at("stages")) cfg.stages.push_back(stage_from_string(s.get<std::string>()));
    cfg.output_dir = resolve(j.value("output_dir", std::string("run")));
    cfg.rng_seed = j.value("rng_seed", std::uint64_t{1});
    if (j.contains("evolution")) {
      for (const auto& [name, e] : j["evolution"].items()) {
        StageEvolution se;
        if (e.contains("population_size")) se.population_size = e["population_size"].get<std::size_t>();
        if (e.contains("generations")) se.generations = e["generations"].get<std::size_t>();
        if (e.contains("crossover_prob")) se.crossover_prob = e["crossover_prob"].get<double>();
        if (e.contains("mutation_prob")) se.mutation_prob = e["mutation_prob"].get<double>();
        se.threads = e.value("threads", 1u);
        cfg.evolution[stage_from_string(name)] = se;
      }
    }
    if (j.contains("selection")) {
      const Json& s = j["selection"];
      cfg.selection.fu_rule = s.value("fu", cfg.selection.fu_rule);
      cfg.selection.tsv_rule = s.value("tsv", cfg.selection.tsv_rule);
      if (s.contains("min_tsvs") && !s["min_tsvs"].is_null()) {
        cfg.selection.min_tsvs = s["min_tsvs"].get<int>();
      }
      if (s.contains("max_channels") && !s["max_channels"].is_null()) {
        cfg.selection.max_channels = s["max_channels"].get<int>();
      }
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  return pipeline_config_from_json(read_text_file(path), path.parent_path());
}

void check_stage_order(std::span<const Stage> stages, bool has_input_floorplan) {
  bool floorplan = has_input_floorplan;
  bool simulated = false;
  for (const Stage s : stages) {
    switch (s) {
      case Stage::kPlaceFu:
      case Stage::kPlaceFuStar:
        floorplan = true;
        break;
      case Stage::kPlaceTsv:
      case Stage::kPlaceLc:
      case Stage::kCarveAc:
      case Stage::kSimulate:
        if (!floorplan) {
          throw Error(ErrorCode::kStageDependency,
                      fmt::format("stage {} needs an upstream floorplan", to_string(s)));
        }
        simulated = simulated || s == Stage::kSimulate;
        break;
      case Stage::kReport:
        if (!simulated) {
          throw Error(ErrorCode::kStageDependency, "report needs a simulate stage before it");
        }
        break;
    }
  }
}

EvolutionConfig stage_evolution(Stage stage, const StageEvolution& o, std::size_t variables,
                                std::uint64_t seed) {
  EvolutionConfig c;
  const double inv = variables > 0 ? 1.0 / static_cast<double>(variables) : 0.0;
  c.population_size = o.population_size.value_or(100);
  c.generations = o.generations.value_or(is_placement(stage) ? variables : 250);
  c.crossover_prob = o.crossover_prob.value_or(0.90);
  c.mutation_prob = o.mutation_prob.value_or(inv);
  c.threads = o.threads;
  c.rng_seed = seed;
  return c;
}

std::uint64_t stage_seed(std::uint64_t master, Stage stage, int occurrence) {
  return derive_seed(master, fmt::format("{}#{}", to_string(stage), occurrence));
}

std::size_t select_placement(std::span<const Individual<FuChromosome>> front,
                             std::string_view rule) {
  std::vector<std::size_t> feasible;
  for (std::size_t i = 0; i < front.size(); ++i) {
    if (front[i].objectives.size() != 3) {
      throw Error(ErrorCode::kObjectiveMismatch, "expected (F1, F2, F3) objectives");
    }
    if (front[i].objectives[0] == 0.0) feasible.push_back(i);
  }
  if (feasible.empty()) {
    throw Error(ErrorCode::kSelectionUnsatisfiable, "no feasible placement on the front");
  }
  if (rule.starts_with("index:")) {
    std::size_t k = 0;
    const auto digits = rule.substr(6);
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) {
      throw Error(ErrorCode::kParse, fmt::format("bad selection rule '{}'", rule));
    }
    if (k >= front.size() || front[k].objectives[0] != 0.0) {
      throw Error(ErrorCode::kSelectionUnsatisfiable,
                  fmt::format("front member {} is missing or infeasible", k));
    }
    return k;
  }
  std::size_t primary;
  if (rule == "min-temperature") {
    primary = 2;
  } else if (rule == "min-wirelength") {
    primary = 1;
  } else {
    throw Error(ErrorCode::kParse, fmt::format("unknown selection rule '{}'", rule));
  }
  const std::size_t secondary = primary == 2 ? 1 : 2;
  return *std::min_element(feasible.begin(), feasible.end(), [&](std::size_t a, std::size_t b) {
    const auto& oa = front[a].objectives;
    const auto& ob = front[b].objectives;
    if (oa[primary] != ob[primary]) return oa[primary] < ob[primary];
    if (oa[secondary] != ob[secondary]) return oa[secondary] < ob[secondary];
    return a < b;
  });
}

int floorplan_violations(const Floorplan& fp, std::span<const FunctionalUnit> units) {
  const int nx = fp.stack.nx();
  const int ny = fp.stack.ny();
  const int layers = fp.stack.layer_count();
  int v = 0;
  std::vector<int> seen(units.size(), 0);
  std::vector<std::pair<CellRect, int>> rects;
  for (const auto& p : fp.placements) {
    if (p.fu_id < 0 || static_cast<std::size_t>(p.fu_id) >= units.size()) {
      ++v;
      continue;
    }
    ++seen[p.fu_id];
    const CellRect r = footprint(p, units[p.fu_id]);
    if (!r.inside(nx, ny) || p.z < 0 || p.z >= layers) ++v;
    rects.emplace_back(r, p.z);
  }
  for (const int s : seen) v += s == 1 ? 0 : 1;
  std::vector<std::pair<CellRect, int>> walls;
  for (const auto& w : fp.air_walls) walls.emplace_back(wall_rect(w, fp.stack), w.layer);

  for (std::size_t i = 0; i < rects.size(); ++i) {
    for (std::size_t j = i + 1; j < rects.size(); ++j) {
      if (rects[i].second == rects[j].second && rects[i].first.intersects(rects[j].first)) ++v;
    }
    for (const auto& [wr, wl] : walls) {
      if (wl == rects[i].second && wr.intersects(rects[i].first)) ++v;
    }
  }
  for (const auto& t : fp.tsvs) {
    if (t.x < 0 || t.y < 0 || t.x >= nx || t.y >= ny || t.to_layer < 0 || t.to_layer >= layers) {
      ++v;
      continue;
    }
    for (const auto& [r, z] : rects) {
      if (z >= t.to_layer && r.contains(t.x, t.y)) ++v;
    }
    for (const auto& [wr, wl] : walls) {
      if (wl >= t.to_layer && wr.contains(t.x, t.y)) ++v;
    }
  }
  for (std::size_t i = 0; i < fp.tsvs.size(); ++i) {
    for (std::size_t j = i + 1; j < fp.tsvs.size(); ++j) {
      if (fp.tsvs[i].x == fp.tsvs[j].x && fp.tsvs[i].y == fp.tsvs[j].y) ++v;
    }
  }
  for (const auto& c : fp.liquid_channels) {
    for (const auto& t : fp.tsvs) {
      if (t.x == c.x && t.to_layer <= c.layer) ++v;
    }
    for (const auto& [wr, wl] : walls) {
      if (wl == c.layer && c.x >= wr.x && c.x < wr.x + wr.w) ++v;
    }
  }
  return v;
}

namespace {

/// Mutable state threaded through the stages of one run.
class Runner {
 public:
  Runner(const PipelineConfig& cfg, const Problem& problem, std::optional<Floorplan> input)
      : cfg_(cfg), problem_(problem), current_(std::move(input)) {}

  PipelineResult run() {
    check_stage_order(cfg_.stages, current_.has_value());
    fs::create_directories(cfg_.output_dir);
    write_text_file(cfg_.output_dir / "problem.json", problem_to_json(problem_));
    if (current_) {
      audit(*current_, "input");
      write_text_file(cfg_.output_dir / "input_floorplan.json", floorplan_to_json(*current_));
    }
    for (std::size_t i = 0; i < cfg_.stages.size(); ++i) {
      const Stage s = cfg_.stages[i];
      const int occurrence = occurrences_[s]++;
      const fs::path dir = cfg_.output_dir / fmt::format("{:02d}_{}", i, to_string(s));
      fs::create_directories(dir);
      const std::uint64_t seed = stage_seed(cfg_.rng_seed, s, occurrence);
      switch (s) {
        case Stage::kPlaceFu:
          place_units(s, DecoderOptions{}, dir, seed);
          break;
        case Stage::kPlaceFuStar: {
          DecoderOptions opt;
          opt.tsv_aware = true;
          place_units(s, std::move(opt), dir, seed);
          break;
        }
        case Stage::kCarveAc:
          place_units(s, constrained_options(problem_), dir, seed);
          break;
        case Stage::kPlaceTsv:
          place_tsvs(dir, seed);
          break;
        case Stage::kPlaceLc:
          place_channels(dir, seed);
          break;
        case Stage::kSimulate:
          simulate(dir);
          break;
        case Stage::kReport:
          write_text_file(cfg_.output_dir / "metrics.csv", metrics_csv(rows_));
          break;
      }
      if (current_) {
        audit(*current_, to_string(s));
        write_text_file(dir / "floorplan.json", floorplan_to_json(*current_));
      }
    }
    return {current_, rows_};
  }

 private:
  const StageEvolution& overrides(Stage s) {
    static const StageEvolution kDefault;
    const auto it = cfg_.evolution.find(s);
    return it == cfg_.evolution.end() ? kDefault : it->second;
  }

  void audit(const Floorplan& fp, std::string_view where) const {
    const int v = floorplan_violations(fp, problem_.units);
    if (v != 0) {
      throw Error(ErrorCode::kInfeasibleFloorplan,
                  fmt::format("floorplan after {} has {} violations", where, v));
    }
  }

  void place_units(Stage s, DecoderOptions options, const fs::path& dir, std::uint64_t seed) {
    const FuPlacementProblem prob(problem_, std::move(options));
    const EvolutionConfig ec = stage_evolution(s, overrides(s), problem_.units.size(), seed);
    std::string conv = "generation,front_size,feasible,min_f1,min_f2,min_f3\n";
    const auto observer = [&](std::size_t g, std::span<const Individual<FuChromosome>> pop) {
      std::size_t size = 0, feasible = 0;
      double m[3] = {INFINITY, INFINITY, INFINITY};
      for (const auto& ind : pop) {
        if (ind.rank != 0) continue;
        ++size;
        if (ind.objectives[0] == 0.0) ++feasible;
        for (int k = 0; k < 3; ++k) m[k] = std::min(m[k], ind.objectives[k]);
      }
      conv += fmt::format("{},{},{},{},{:.6f},{:.6f}\n", g, size, feasible, m[0], m[1], m[2]);
    };
    std::vector<FuChromosome> seeds;
    if (s == Stage::kCarveAc) seeds = fu_seeds_;
    const auto front = evolve(prob, ec, std::span<const FuChromosome>(seeds), observer);
    write_text_file(dir / "convergence.csv", conv);

    std::vector<std::vector<double>> objs;
    Json members = Json::array();
    for (std::size_t k = 0; k < front.size(); ++k) {
      objs.push_back(front[k].objectives);
      Json genome = Json::array();
      for (const auto& g : front[k].genome) genome.push_back({g.fu, g.rotated});
      members.push_back({{"index", k},
                         {"objectives", objectives_json(front[k].objectives)},
                         {"genome", std::move(genome)}});
      const DecodeResult d = prob.decoder().decode(front[k].genome);
      write_text_file(dir / "solutions" / fmt::format("solution_{:03d}.json", k),
                      floorplan_to_json(d.floorplan));
    }
    const std::vector<std::string> names = {"F1", "F2", "F3"};
    write_text_file(dir / "front.csv", front_csv(names, objs));

    const std::size_t pick = select_placement(front, cfg_.selection.fu_rule);
    write_text_file(dir / "front.json", dump({{"kind", "placement"},
                                              {"stage", to_string(s)},
                                              {"selected", pick},
                                              {"members", std::move(members)}}));
    current_ = prob.decoder().decode(front[pick].genome).floorplan;
    field_.reset();
    if (s != Stage::kCarveAc) {
      fu_seeds_.clear();
      for (const auto& ind : front) {
        if (ind.objectives[0] == 0.0) fu_seeds_.push_back(ind.genome);
      }
    }
  }

  void place_tsvs(const fs::path& dir, std::uint64_t seed) {
    Floorplan base = *current_;
    base.tsvs.clear();
    TsvCandidateArray cand = enumerate_candidates(base, problem_.units);
    TsvRouting routing{problem_.constraints.tsv_route_vertical,
                       problem_.constraints.layer_pitch_cells};
    const TsvPlacementProblem prob(TsvEvaluator(base, problem_.units, problem_.netlist, cand, routing));
    const EvolutionConfig ec = stage_evolution(Stage::kPlaceTsv, overrides(Stage::kPlaceTsv),
                                               cand.size(), seed);
    std::string conv = "generation,front_size,min_f4,min_f5\n";
    const auto observer = [&](std::size_t g, std::span<const Individual<TsvChromosome>> pop) {
      std::size_t size = 0;
      double m[2] = {INFINITY, INFINITY};
      for (const auto& ind : pop) {
        if (ind.rank != 0) continue;
        ++size;
        for (int k = 0; k < 2; ++k) m[k] = std::min(m[k], ind.objectives[k]);
      }
      conv += fmt::format("{},{},{},{:.6f}\n", g, size, m[0], m[1]);
    };
    const auto front = evolve(prob, ec, {}, observer);
    write_text_file(dir / "convergence.csv", conv);

    const int min_tsvs = cfg_.selection.min_tsvs.value_or(problem_.constraints.min_tsvs);
    std::size_t pick;
    if (cfg_.selection.tsv_rule == "min-count") {
      pick = select_solution(front, min_tsvs);
    } else if (cfg_.selection.tsv_rule == "min-wirelength") {
      pick = select_min_wirelength(front, min_tsvs);
    } else {
      throw Error(ErrorCode::kParse, "unknown TSV selection rule " + cfg_.selection.tsv_rule);
    }
    export_binary_front(dir, "tsv", {"F4", "F5"}, front, pick, [&](Json& j) {
      Json c = Json::array();
      for (const auto& t : cand) c.push_back({t.x, t.y, t.to_layer});
      j["candidates"] = std::move(c);
    });
    current_ = apply_tsvs(base, problem_.units, cand, front[pick].genome);
    field_.reset();
  }

  void place_channels(const fs::path& dir, std::uint64_t seed) {
    Floorplan base = *current_;
    base.liquid_channels.clear();
    if (!field_) field_ = simulate_steady(base, problem_).field;
    LcCandidateArray cand = enumerate_channel_candidates(base);
    const std::optional<int> cap =
        cfg_.selection.max_channels ? cfg_.selection.max_channels : problem_.constraints.max_channels;
    const LcPlacementProblem prob(LcEvaluator(problem_.stack, *field_, cand, cap,
                                              problem_.constraints.f7_silicon_only));
    const EvolutionConfig ec = stage_evolution(Stage::kPlaceLc, overrides(Stage::kPlaceLc),
                                               cand.size(), seed);
    std::string conv = "generation,front_size,min_f6,min_f7\n";
    const auto observer = [&](std::size_t g, std::span<const Individual<LcChromosome>> pop) {
      std::size_t size = 0;
      double m[2] = {INFINITY, INFINITY};
      for (const auto& ind : pop) {
        if (ind.rank != 0) continue;
        ++size;
        for (int k = 0; k < 2; ++k) m[k] = std::min(m[k], ind.objectives[k]);
      }
      conv += fmt::format("{},{},{},{:.6f}\n", g, size, m[0], m[1]);
    };
    const auto front = evolve(prob, ec, {}, observer);
    write_text_file(dir / "convergence.csv", conv);
    const std::size_t pick = select_channels(front, cap);
    export_binary_front(dir, "channels", {"F6", "F7"}, front, pick, [&](Json& j) {
      Json c = Json::array();
      for (const auto& ch : cand) c.push_back({ch.x, ch.layer});
      j["candidates"] = std::move(c);
    });
    current_ = apply_to_floorplan(base, cand, front[pick].genome, problem_.thermal);
    field_.reset();
  }

  template <class Extra>
  void export_binary_front(const fs::path& dir, std::string_view kind,
                           std::vector<std::string> names,
                           const std::vector<Individual<BitString>>& front, std::size_t pick,
                           Extra&& extra) {
    std::vector<std::vector<double>> objs;
    Json members = Json::array();
    for (std::size_t k = 0; k < front.size(); ++k) {
      objs.push_back(front[k].objectives);
      members.push_back({{"index", k},
                         {"objectives", objectives_json(front[k].objectives)},
                         {"genome", bits_string(front[k].genome)}});
    }
    write_text_file(dir / "front.csv", front_csv(names, objs));
    Json j = {{"kind", kind}, {"selected", pick}, {"members", std::move(members)}};
    extra(j);
    write_text_file(dir / "front.json", dump(j));
  }

  void simulate(const fs::path& dir) {
    const SteadyResult r = simulate_steady(*current_, problem_);
    const std::string text = field_csv(r.field);
    write_text_file(dir / "field.csv", text);
    for (int l = 0; l < problem_.stack.layer_count(); ++l) {
      write_text_file(dir / fmt::format("thermal_map_layer{}.csv", l), thermal_map_csv(r.field, l));
    }
    // Metrics come from the exported field so a rebuilt report matches.
    std::istringstream in(text);
    const ThermalMetrics m = report_metrics(read_field_csv(in));
    rows_.push_back({dir.filename().string(), m.max_K, m.gradient_K,
                     report_wirelength(*current_, problem_)});
    field_ = r.field;
  }

  const PipelineConfig& cfg_;
  const Problem& problem_;
  std::optional<Floorplan> current_;
  std::optional<TemperatureField> field_;
  std::vector<FuChromosome> fu_seeds_;
  std::vector<MetricsRow> rows_;
  std::map<Stage, int> occurrences_;
};

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, const Problem& problem,
                            std::optional<Floorplan> input) {
  problem.validate();
  return Runner(cfg, problem, std::move(input)).run();
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  const Problem problem = load_problem(cfg.problem_path);
  std::optional<Floorplan> input;
  if (cfg.floorplan_path) input = load_floorplan(*cfg.floorplan_path);
  return run_pipeline(cfg, problem, std::move(input));
}

}  // namespace tafp
