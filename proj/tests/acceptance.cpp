// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.
//
//   tafp_acceptance            run every criterion
//   tafp_acceptance 1 4 10     run a subset

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "support.hpp"
#include "tafp/benchmark_gen.hpp"
#include "tafp/binary_ops.hpp"
#include "tafp/fu_placer.hpp"
#include "tafp/io.hpp"
#include "tafp/lc_placer.hpp"
#include "tafp/moea.hpp"
#include "tafp/pipeline.hpp"
#include "tafp/thermal.hpp"

namespace {

using namespace tafp;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "tafp_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// ---------------------------------------------------------------- thermal

struct ThermalCase {
  RCNetwork net;
  std::vector<double> oracle;
  TemperatureField field;
};

const std::vector<ThermalCase>& thermal_cases(double* solve_seconds = nullptr) {
  static double elapsed = 0.0;
  static const std::vector<ThermalCase> cases = [] {
    Rng rng(2024);
    std::vector<ThermalCase> out;
    for (int i = 0; i < 25; ++i) {
      const auto inst = test::random_instance(rng, 8, 8, 4);
      RCNetwork net = assemble(inst.floorplan, inst.problem);
      auto oracle = test::dense_steady(net);
      const auto t0 = Clock::now();
      TemperatureField f = solve_steady(net);
      elapsed += seconds_since(t0);
      out.push_back({std::move(net), std::move(oracle), std::move(f)});
    }
    return out;
  }();
  if (solve_seconds) *solve_seconds = elapsed;
  return cases;
}

Outcome thermal_oracle() {
  double secs = 0.0;
  const auto& cases = thermal_cases(&secs);
  double worst = 0.0;
  for (const auto& c : cases) {
    for (std::size_t u = 0; u < c.oracle.size(); ++u) {
      worst = std::max(worst, std::abs(c.field.kelvin[u] - c.oracle[u]) / std::abs(c.oracle[u]));
    }
  }
  return {worst <= 1e-6 && secs < 5.0,
          fmt::format("{} instances, worst relative error {:.2e}, solve time {:.3f} s", cases.size(), worst, secs)};
}

Outcome energy_balance() {
  double worst = 0.0;
  const auto& cases = thermal_cases();
  for (const auto& c : cases) {
    const double in = c.net.total_power();
    if (in <= 0.0) continue;
    worst = std::max(worst, std::abs(test::outflow(c.net, c.field.kelvin) - in) / in);
  }
  return {worst <= 1e-6, fmt::format("{} instances, worst relative imbalance {:.2e}", cases.size(), worst)};
}

Outcome isolation() {
  Problem p = test::small_problem(8, 5, 2);
  p.thermal.air_k_override_W_per_mK = 0.0;
  p.units = {test::unit(0, 2, 3, 0.2), test::unit(1, 3, 2, 0.1)};
  Floorplan fp;
  fp.stack = p.stack;
  fp.placements = {{0, 0, 1, 0, false}, {1, 0, 0, 1, false}};
  for (int l = 0; l < 2; ++l) {
    AirWall w;
    w.layer = l;
    w.position_um = 4 * 300.0;
    fp.air_walls.push_back(w);
  }
  const auto r = simulate_steady(fp, p);
  double worst = 0.0, hottest = 0.0;
  for (std::size_t u = 0; u < r.field.size(); ++u) {
    if (r.field.coords[u].x > 4) worst = std::max(worst, std::abs(r.field.kelvin[u] - p.stack.ambient_K));
    hottest = std::max(hottest, r.field.kelvin[u]);
  }
  return {worst <= 1e-9 && hottest > p.stack.ambient_K + 1.0,
          fmt::format("far side max deviation {:.2e} K, powered side peak {:.2f} K", worst, hottest)};
}

// ---------------------------------------------------------------- NSGA-II

bool dominates_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  bool better = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] > b[k]) return false;
    better = better || a[k] < b[k];
  }
  return better;
}

// Fronts by repeated peeling of the undominated set.
std::vector<int> peel_ranks(const std::vector<std::vector<double>>& objs) {
  std::vector<int> rank(objs.size(), -1);
  std::size_t left = objs.size();
  for (int r = 0; left > 0; ++r) {
    std::vector<std::size_t> layer;
    for (std::size_t i = 0; i < objs.size(); ++i) {
      if (rank[i] >= 0) continue;
      bool dominated = false;
      for (std::size_t j = 0; j < objs.size() && !dominated; ++j) {
        dominated = rank[j] < 0 && j != i && dominates_oracle(objs[j], objs[i]);
      }
      if (!dominated) layer.push_back(i);
    }
    for (std::size_t i : layer) rank[i] = r;
    left -= layer.size();
  }
  return rank;
}

struct Bitcount {
  using Genome = BitString;
  std::size_t objective_count() const { return 2; }
  Genome random_genome(Rng& rng) const { return random_bits(8, 0.5, rng); }
  std::vector<double> evaluate(const Genome& g) const {
    const double c = static_cast<double>(popcount(g));
    return {c, 8.0 - c};
  }
  std::pair<Genome, Genome> crossover(const Genome& a, const Genome& b, Rng& rng) const {
    return single_point_crossover(a, b, rng);
  }
  void mutate(Genome& g, Rng& rng, double p) const { flip_mutation(g, rng, p); }
};

Outcome nsga2() {
  Rng rng(77);
  int sort_ok = 0, reduce_ok = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.index(64);
    const std::size_t m = 2 + rng.index(3);
    std::vector<std::vector<double>> objs(n, std::vector<double>(m));
    for (auto& o : objs) {
      for (auto& v : o) v = static_cast<double>(rng.index(6));  // coarse values force ties
    }
    const auto fronts = nondominated_sort(objs);
    const auto ref = peel_ranks(objs);
    std::vector<int> got(n, -1);
    for (std::size_t r = 0; r < fronts.size(); ++r) {
      for (std::size_t i : fronts[r]) got[i] = static_cast<int>(r);
    }
    sort_ok += got == ref;
    const std::size_t keep = 1 + rng.index(n);
    const auto kept = reduce_population(objs, keep);
    reduce_ok += kept.size() == keep && std::set<std::size_t>(kept.begin(), kept.end()).size() == keep;
  }
  int recovered = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    EvolutionConfig cfg;
    cfg.population_size = 40;
    cfg.generations = 50;
    cfg.mutation_prob = 1.0 / 8;
    cfg.rng_seed = seed;
    std::set<double> counts;
    for (const auto& ind : evolve(Bitcount{}, cfg)) counts.insert(ind.objectives[0]);
    recovered += counts.size() == 9;
  }
  return {sort_ok == 1000 && reduce_ok == 1000 && recovered == 10,
          fmt::format("sort {}/1000, reduction {}/1000, bitcount front recovered {}/10", sort_ok, reduce_ok,
                      recovered)};
}

// ---------------------------------------------------------------- operators

bool valid_permutation(const FuChromosome& c, std::size_t n) {
  std::vector<bool> seen(n, false);
  if (c.size() != n) return false;
  for (const auto& g : c) {
    if (g.fu < 0 || g.fu >= static_cast<int>(n) || seen[g.fu]) return false;
    seen[g.fu] = true;
  }
  return true;
}

Outcome operators() {
  Rng rng(5);
  int ok = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t n = 1 + rng.index(40);
    const auto a = random_chromosome(n, rng);
    const auto b = random_chromosome(n, rng);
    auto [c1, c2] = cycle_crossover(a, b, rng);
    mutate(c1, rng, 1.0);
    mutate(c2, rng, 0.5);
    ok += valid_permutation(c1, n) && valid_permutation(c2, n);
  }
  // Hand traces: the cycle through position 0 is copied from the first
  // parent, the rest from the second.
  struct Fixed {
    FuChromosome a, b, c1, c2;
  };
  const std::vector<Fixed> fixed = {
      {{{0, false}, {1, true}, {2, false}, {3, false}},
       {{1, false}, {0, false}, {3, true}, {2, false}},
       {{0, false}, {1, true}, {3, true}, {2, false}},
       {{1, false}, {0, false}, {2, false}, {3, false}}},
      {{{0, false}, {1, false}, {2, false}, {3, false}, {4, false}},
       {{2, true}, {0, true}, {1, true}, {4, true}, {3, true}},
       {{0, false}, {1, false}, {2, false}, {4, true}, {3, true}},
       {{2, true}, {0, true}, {1, true}, {3, false}, {4, false}}},
      {{{0, false}, {1, false}, {2, false}},
       {{0, true}, {2, true}, {1, true}},
       {{0, false}, {2, true}, {1, true}},
       {{0, true}, {1, false}, {2, false}}},
  };
  int fixed_ok = 0;
  for (const auto& f : fixed) {
    const auto [c1, c2] = cycle_crossover(f.a, f.b, rng);
    fixed_ok += c1 == f.c1 && c2 == f.c2;
  }
  return {ok == 10000 && fixed_ok == static_cast<int>(fixed.size()),
          fmt::format("{}/10000 valid children, {}/{} hand traces", ok, fixed_ok, fixed.size())};
}

// ---------------------------------------------------------------- decoder audits

Problem sixteen_unit_problem() {
  BenchmarkSpec spec = BenchmarkSpec::reference();
  spec.stack.width_um = 20 * spec.stack.cell_xy_um;
  spec.stack.length_um = 18 * spec.stack.cell_xy_um;
  spec.stack.layers.resize(2);
  spec.air_walls.clear();
  LayerPlan lp;
  lp.cores = 4;
  lp.l2_banks = 2;
  lp.l2_buffers = 1;
  lp.crossbar = {4, 3};
  lp.power_W = 40.0;
  spec.layers = {lp, lp};
  spec.crossbar_reference_cores = 8;
  return generate_benchmark(spec).problem;
}

// Cell-level audit, written without the library occupancy helpers.
int overlap_audit(const Floorplan& fp, const Problem& p) {
  const int nx = fp.stack.nx(), ny = fp.stack.ny(), layers = fp.stack.layer_count();
  std::vector<int> count(static_cast<std::size_t>(nx) * ny * layers, 0);
  int bad = static_cast<int>(p.units.size()) - static_cast<int>(fp.placements.size());
  for (const auto& pl : fp.placements) {
    const auto& u = p.units[pl.fu_id];
    const int w = pl.rotated ? u.length_cells : u.width_cells;
    const int h = pl.rotated ? u.width_cells : u.length_cells;
    for (int y = pl.y; y < pl.y + h; ++y) {
      for (int x = pl.x; x < pl.x + w; ++x) {
        if (x < 0 || y < 0 || x >= nx || y >= ny || pl.z < 0 || pl.z >= layers) {
          ++bad;
          continue;
        }
        bad += count[(static_cast<std::size_t>(pl.z) * ny + y) * nx + x]++ > 0;
      }
    }
  }
  return bad;
}

// Every cross-layer net has a column free from the top layer down to its
// lower endpoint layer.
bool tsv_audit(const Floorplan& fp, const Problem& p) {
  const int nx = fp.stack.nx(), ny = fp.stack.ny(), layers = fp.stack.layer_count();
  std::vector<int> lowest_blocked(static_cast<std::size_t>(nx) * ny, -1);  // highest occupied layer
  for (const auto& pl : fp.placements) {
    const auto& u = p.units[pl.fu_id];
    const int w = pl.rotated ? u.length_cells : u.width_cells;
    const int h = pl.rotated ? u.width_cells : u.length_cells;
    for (int y = pl.y; y < pl.y + h; ++y) {
      for (int x = pl.x; x < pl.x + w; ++x) {
        auto& top = lowest_blocked[static_cast<std::size_t>(y) * nx + x];
        top = std::max(top, pl.z);
      }
    }
  }
  (void)layers;
  std::map<int, int> z;
  for (const auto& pl : fp.placements) z[pl.fu_id] = pl.z;
  for (const auto& n : p.netlist) {
    if (z[n.a] == z[n.b]) continue;
    const int need = std::min(z[n.a], z[n.b]);
    if (std::none_of(lowest_blocked.begin(), lowest_blocked.end(), [&](int top) { return top < need; })) {
      return false;
    }
  }
  return true;
}

Outcome decoder_audits() {
  const Problem p = sixteen_unit_problem();
  int checked = 0, overlap_fail = 0, tsv_checked = 0, tsv_fail = 0;
  for (const bool star : {false, true}) {
    DecoderOptions opt;
    opt.tsv_aware = star;
    const FuPlacementProblem prob(p, opt);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      EvolutionConfig cfg;
      cfg.population_size = 40;
      cfg.generations = p.units.size();
      cfg.mutation_prob = 1.0 / p.units.size();
      cfg.rng_seed = seed;
      for (const auto& ind : evolve(prob, cfg)) {
        const auto r = prob.decoder().decode(ind.genome);
        if (star) {
          ++tsv_checked;
          tsv_fail += !tsv_audit(r.floorplan, p);
        }
        if (r.objectives.f1 != 0) continue;
        ++checked;
        overlap_fail += overlap_audit(r.floorplan, p) != 0;
      }
    }
  }
  return {p.units.size() == 16 && checked > 0 && overlap_fail == 0 && tsv_fail == 0,
          fmt::format("{} units; {} feasible solutions, {} overlap failures; {} star front members, {} TSV "
                      "failures",
                      p.units.size(), checked, overlap_fail, tsv_checked, tsv_fail)};
}

// ---------------------------------------------------------------- benchmark trends

struct Snapshot {
  double max_K = 0.0;
  double gradient_K = 0.0;
};

Snapshot snapshot(const Floorplan& fp, const Problem& p) {
  const auto m = report_metrics(simulate_steady(fp, p).field);
  return {m.max_K, m.gradient_K};
}

Snapshot snapshot(const MetricsRow& r) { return {r.max_K, r.gradient_K}; }

struct SeedResult {
  Snapshot fu_star;        // FU* + TSVs, no channels
  Snapshot fu_star_lc32;   // + optimized channels
  Snapshot fu_star_h8;     // + 8 evenly spaced channels per layer
  Snapshot base_lc32;
  Snapshot ac_lc20;        // air domains + TSVs + 20 optimized channels
};

struct BenchmarkContext {
  Benchmark bench = generate_benchmark(BenchmarkSpec::reference());
  Floorplan baseline = baseline_floorplan(bench);
  Snapshot base;
  Snapshot base_h8;
  std::map<std::uint64_t, SeedResult> seeds;

  BenchmarkContext() {
    base = snapshot(baseline, bench.problem);
    base_h8 = snapshot(homogeneous_placement(baseline, 8, bench.problem.thermal), bench.problem);
  }

  PipelineConfig config(const std::string& name, std::vector<Stage> stages, std::uint64_t seed,
                        int max_channels) const {
    PipelineConfig cfg;
    cfg.stages = std::move(stages);
    cfg.rng_seed = seed;
    cfg.output_dir = work_dir() / fmt::format("{}_seed{}", name, seed);
    cfg.selection.max_channels = max_channels;
    return cfg;
  }

  const SeedResult& run(std::uint64_t seed) {
    if (auto it = seeds.find(seed); it != seeds.end()) return it->second;
    const Problem& p = bench.problem;
    SeedResult r;
    const auto t0 = Clock::now();

    auto fu_cfg = config("fu_star", {Stage::kPlaceFuStar, Stage::kPlaceTsv, Stage::kSimulate, Stage::kPlaceLc,
                                     Stage::kSimulate},
                         seed, 32);
    const auto fu = run_pipeline(fu_cfg, p, std::nullopt);
    r.fu_star = snapshot(fu.metrics.at(0));
    r.fu_star_lc32 = snapshot(fu.metrics.at(1));
    const Floorplan with_tsvs = load_floorplan(fu_cfg.output_dir / "01_place-tsv" / "floorplan.json");
    r.fu_star_h8 = snapshot(homogeneous_placement(with_tsvs, 8, p.thermal), p);

    auto base_cfg = config("baseline", {Stage::kSimulate, Stage::kPlaceLc, Stage::kSimulate}, seed, 32);
    r.base_lc32 = snapshot(run_pipeline(base_cfg, p, baseline).metrics.at(1));

    auto ac_cfg = config("air_domains", {Stage::kPlaceFuStar, Stage::kCarveAc, Stage::kPlaceTsv, Stage::kSimulate,
                                         Stage::kPlaceLc, Stage::kSimulate},
                         seed, 20);
    r.ac_lc20 = snapshot(run_pipeline(ac_cfg, p, std::nullopt).metrics.at(1));

    std::printf(
        "  seed %llu (%.0f s): baseline %.2f/%.2f, +h8 %.2f/%.2f, +lc32 %.2f/%.2f | fu* %.2f/%.2f, +h8 "
        "%.2f/%.2f, +lc32 %.2f/%.2f | ac+lc20 %.2f/%.2f\n",
        static_cast<unsigned long long>(seed), seconds_since(t0), base.max_K, base.gradient_K, base_h8.max_K,
        base_h8.gradient_K, r.base_lc32.max_K, r.base_lc32.gradient_K, r.fu_star.max_K, r.fu_star.gradient_K,
        r.fu_star_h8.max_K, r.fu_star_h8.gradient_K, r.fu_star_lc32.max_K, r.fu_star_lc32.gradient_K,
        r.ac_lc20.max_K, r.ac_lc20.gradient_K);
    std::fflush(stdout);
    return seeds.emplace(seed, r).first->second;
  }

  double ambient() const { return bench.problem.stack.ambient_K; }
};

BenchmarkContext& bench_ctx() {
  static BenchmarkContext ctx;
  return ctx;
}

constexpr std::uint64_t kSeeds[] = {1, 2, 3, 4, 5};

Outcome placement_trend() {
  auto& ctx = bench_ctx();
  const auto t0 = Clock::now();
  const SeedResult& r = ctx.run(1);
  const double drop = ctx.base.max_K - r.fu_star.max_K;
  const double need = 0.05 * (ctx.base.max_K - ctx.ambient());
  return {drop >= need && seconds_since(t0) < 1800.0,
          fmt::format("baseline {:.2f} K, placed {:.2f} K, drop {:.2f} K (needs {:.2f} K)", ctx.base.max_K,
                      r.fu_star.max_K, drop, need)};
}

Outcome channel_trend() {
  auto& ctx = bench_ctx();
  int ok = 0;
  for (auto seed : kSeeds) {
    const SeedResult& r = ctx.run(seed);
    const bool base_ok = r.base_lc32.max_K <= ctx.base_h8.max_K && r.base_lc32.gradient_K <= ctx.base_h8.gradient_K;
    const bool opt_ok = r.fu_star_lc32.max_K <= r.fu_star_h8.max_K && r.fu_star_lc32.gradient_K <= r.fu_star_h8.gradient_K;
    ok += base_ok && opt_ok;
  }
  return {ok >= 4, fmt::format("optimized 32 channels no worse than 8 per layer on both floorplans for {}/5 seeds", ok)};
}

Outcome air_domain_trend() {
  auto& ctx = bench_ctx();
  int ok = 0;
  std::string gaps;
  for (auto seed : kSeeds) {
    const SeedResult& r = ctx.run(seed);
    const double ref = r.fu_star_lc32.max_K - ctx.ambient();
    const double got = r.ac_lc20.max_K - ctx.ambient();
    const double gap = (got - ref) / ref;
    ok += gap <= 0.02;
    gaps += fmt::format("{}{:+.1f}%", gaps.empty() ? "" : " ", 100.0 * gap);
  }
  return {ok >= 3, fmt::format("air domains + 20 channels within 2% of placed + 32 channels for {}/5 seeds "
                               "(rise gaps {})",
                               ok, gaps)};
}

// ---------------------------------------------------------------- surrogate

Outcome surrogate() {
  Rng rng(99);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Problem p = test::small_problem(4 + static_cast<int>(rng.index(20)), 2 + static_cast<int>(rng.index(8)),
                                          1 + static_cast<int>(rng.index(4)));
    Floorplan fp;
    fp.stack = p.stack;
    TemperatureField f = uniform_field(assemble(fp, p), p.stack.ambient_K);
    for (auto& v : f.kelvin) v = p.stack.ambient_K + 150.0 * rng.uniform();
    const auto cand = enumerate_channel_candidates(fp);
    LcChromosome bits(cand.size());
    for (auto& b : bits) b = rng.uniform() < 0.25;
    const auto ref = test::lc_oracle(f, cand, bits, p.stack.ambient_K);
    const auto got = LcEvaluator(p.stack, f, cand).estimate(bits).kelvin;
    for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(got[i] - ref[i]));
  }
  int rising = 0;
  const double amb = 300.0;
  for (int i = 0; i <= 1500; ++i) {
    const double t = amb + 0.1 * i;
    for (int off = 0; off <= 2; ++off) rising += channel_update(t, off, amb) > t;
  }
  return {worst <= 1e-12 && rising == 0,
          fmt::format("worst deviation {:.1e} K over 100 fields, {} increasing updates on [300, 450] K", worst, rising)};
}

// ---------------------------------------------------------------- determinism

Outcome determinism() {
  auto& ctx = bench_ctx();
  std::vector<fs::path> dirs;
  for (const char* name : {"det_a", "det_b"}) {
    PipelineConfig cfg = ctx.config(name, {Stage::kPlaceFuStar, Stage::kPlaceTsv, Stage::kSimulate, Stage::kPlaceLc,
                                           Stage::kSimulate, Stage::kReport},
                                    7, 32);
    for (Stage s : {Stage::kPlaceFuStar, Stage::kPlaceTsv, Stage::kPlaceLc}) {
      cfg.evolution[s].population_size = 20;
      cfg.evolution[s].generations = 8;
    }
    run_pipeline(cfg, ctx.bench.problem, std::nullopt);
    dirs.push_back(cfg.output_dir);
  }
  int files = 0, differ = 0;
  for (const auto& e : fs::recursive_directory_iterator(dirs[0])) {
    if (!e.is_regular_file()) continue;
    const fs::path other = dirs[1] / fs::relative(e.path(), dirs[0]);
    ++files;
    differ += !fs::exists(other) || read_text_file(e.path()) != read_text_file(other);
  }
  return {files > 0 && differ == 0, fmt::format("{} files compared, {} differ", files, differ)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, thermal_oracle}, {2, energy_balance}, {3, isolation},        {4, nsga2},
      {5, operators},      {6, decoder_audits}, {7, placement_trend},  {8, channel_trend},
      {9, air_domain_trend}, {10, surrogate},   {11, determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    failed += !o.pass;
    std::printf("%s criterion %d: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  fs::remove_all(work_dir());
  return failed == 0 ? 0 : 1;
}
