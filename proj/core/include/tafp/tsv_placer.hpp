#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tafp/binary_ops.hpp"
#include "tafp/moea.hpp"
#include "tafp/problem.hpp"
#include "tafp/rng.hpp"
#include "tafp/stack.hpp"

namespace tafp {

/// Drillable columns grouped by target layer: all columns reaching layer 0
/// first, then those reaching layer 1, and so on.
using TsvCandidateArray = std::vector<Tsv>;

/// One byte per candidate; nonzero means drilled.
using TsvChromosome = BitString;

TsvCandidateArray enumerate_candidates(const Floorplan& fp, std::span<const FunctionalUnit> units);

struct TsvObjectives {
  int f4 = 0;        // TSV count
  double f5 = 0.0;   // wirelength through TSVs, cells; +inf when a net is cut
};

struct TsvRouting {
  /// Adds pitch * |dz| to every cross-layer route.
  bool vertical = false;
  double layer_pitch_cells = 1.0;
};

/// Evaluates TSV selections against a fixed floorplan and netlist.
class TsvEvaluator {
 public:
  TsvEvaluator(const Floorplan& fp, std::span<const FunctionalUnit> units, const Netlist& netlist,
               TsvCandidateArray candidates, TsvRouting routing = {});

  /// Throws Error(kLengthMismatch).
  TsvObjectives evaluate(const TsvChromosome& chrom) const;

  const TsvCandidateArray& candidates() const { return candidates_; }

 private:
  TsvCandidateArray candidates_;
  double same_layer_ = 0.0;
  // Per cross-layer net, usable candidates ordered by route length.
  std::vector<std::vector<std::pair<double, int>>> routes_;
};

class TsvPlacementProblem {
 public:
  using Genome = TsvChromosome;

  /// Initial individuals draw their own bit density uniformly in
  /// [0, max_initial_density].
  TsvPlacementProblem(TsvEvaluator evaluator, double max_initial_density = 0.5)
      : evaluator_(std::move(evaluator)), max_density_(max_initial_density) {}

  std::size_t objective_count() const { return 2; }
  Genome random_genome(Rng& rng) const {
    return random_bits(evaluator_.candidates().size(), max_density_, rng);
  }
  std::vector<double> evaluate(const Genome& g) const;
  std::pair<Genome, Genome> crossover(const Genome& a, const Genome& b, Rng& rng) const {
    return single_point_crossover(a, b, rng);
  }
  void mutate(Genome& g, Rng& rng, double p) const { flip_mutation(g, rng, p); }

  const TsvEvaluator& evaluator() const { return evaluator_; }

 private:
  TsvEvaluator evaluator_;
  double max_density_;
};

/// Fewest TSVs not below min_tsvs; ties go to the lower F5. Individuals with
/// infinite F5 are ignored. Throws Error(kNoSolution).
std::size_t select_solution(std::span<const Individual<TsvChromosome>> front, int min_tsvs);

/// Lowest F5 among individuals with at least min_tsvs TSVs; ties go to fewer
/// TSVs. Throws Error(kNoSolution).
std::size_t select_min_wirelength(std::span<const Individual<TsvChromosome>> front, int min_tsvs);

/// Adds the drilled columns to fp. A column selected at several depths keeps
/// only the deepest. Throws Error(kCollision) when a column is no longer
/// free and Error(kLengthMismatch).
Floorplan apply_tsvs(const Floorplan& fp, std::span<const FunctionalUnit> units,
                     const TsvCandidateArray& candidates, const TsvChromosome& chrom);

}  // namespace tafp
