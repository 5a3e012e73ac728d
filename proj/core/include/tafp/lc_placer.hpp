#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tafp/binary_ops.hpp"
#include "tafp/moea.hpp"
#include "tafp/problem.hpp"
#include "tafp/stack.hpp"
#include "tafp/thermal.hpp"

namespace tafp {

struct LcCandidate {
  int x = 0;
  int layer = 0;

  friend bool operator==(const LcCandidate&, const LcCandidate&) = default;
};

/// Ordered by layer, then x.
using LcCandidateArray = std::vector<LcCandidate>;
using LcChromosome = BitString;

/// Columns whose full-length oxide run meets no TSV and no air wall.
LcCandidateArray enumerate_channel_candidates(const Floorplan& fp);

/// Logarithmic cooling fit for a cell `offset` columns away from a channel
/// (0, 1 or 2). Unclamped.
double channel_regression(double kelvin, int offset);

/// channel_regression bounded below by ambient and above by the input.
double channel_update(double kelvin, int offset, double ambient_K);

struct LcObjectives {
  int f6 = 0;       // channel count
  double f7 = 0.0;  // estimated temperature sum, K; +inf over the cap
};

/// Surrogate evaluation of channel selections on a frozen steady field. The
/// update acts on the active silicon nodes of the channel's layer.
class LcEvaluator {
 public:
  LcEvaluator(const StackSpec& stack, TemperatureField field, LcCandidateArray candidates,
              std::optional<int> max_channels = std::nullopt, bool silicon_only = false);

  /// Throws Error(kLengthMismatch).
  LcObjectives evaluate(const LcChromosome& chrom) const;

  /// Field after applying the surrogate updates.
  TemperatureField estimate(const LcChromosome& chrom) const;

  const LcCandidateArray& candidates() const { return candidates_; }
  std::optional<int> max_channels() const { return cap_; }

 private:
  void apply(const LcChromosome& chrom, std::vector<double>& t) const;

  CellGrid grid_;
  TemperatureField field_;
  LcCandidateArray candidates_;
  std::optional<int> cap_;
  std::vector<bool> counted_;
  double ambient_K_;
};

class LcPlacementProblem {
 public:
  using Genome = LcChromosome;

  /// Initial bit density is drawn per individual in [0, cap / candidates]
  /// with a cap and [0, 0.5] without.
  explicit LcPlacementProblem(LcEvaluator evaluator) : evaluator_(std::move(evaluator)) {}

  std::size_t objective_count() const { return 2; }
  Genome random_genome(Rng& rng) const;
  std::vector<double> evaluate(const Genome& g) const;
  std::pair<Genome, Genome> crossover(const Genome& a, const Genome& b, Rng& rng) const {
    return single_point_crossover(a, b, rng);
  }
  void mutate(Genome& g, Rng& rng, double p) const { flip_mutation(g, rng, p); }

  const LcEvaluator& evaluator() const { return evaluator_; }

 private:
  LcEvaluator evaluator_;
};

/// Lowest F7 among finite individuals with at most max_channels channels;
/// ties go to fewer channels. Throws Error(kSelectionUnsatisfiable).
std::size_t select_channels(std::span<const Individual<LcChromosome>> front,
                            std::optional<int> max_channels);

/// Adds the selected channels with the coolant parameters of `params`.
/// Throws Error(kCollision) when a channel meets a TSV, a wall or an
/// existing channel, and Error(kLengthMismatch).
Floorplan apply_to_floorplan(const Floorplan& fp, const LcCandidateArray& candidates,
                             const LcChromosome& chrom, const ThermalParams& params);

/// Evenly spaced channels per layer: column floor((i + 0.5) nx / per_layer)
/// snapped to the nearest unused candidate (lower x on ties).
/// Throws Error(kInsufficientCandidates).
Floorplan homogeneous_placement(const Floorplan& fp, int per_layer, const ThermalParams& params);

}  // namespace tafp
