#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tafp/problem.hpp"
#include "tafp/rng.hpp"
#include "tafp/stack.hpp"

namespace tafp {

/// One record of the placement sequence.
struct Gene {
  int fu = 0;
  bool rotated = false;

  friend bool operator==(const Gene&, const Gene&) = default;
};

/// Permutation of all units; order is the placement order.
using FuChromosome = std::vector<Gene>;

struct FuObjectives {
  int f1 = 0;       // topology violations
  double f2 = 0.0;  // wirelength, cells
  double f3 = 0.0;  // temperature proxy

  /// (F1, (1+F1) F2, (1+F1) F3)
  std::vector<double> transformed() const;
};

struct DecodeResult {
  Floorplan floorplan;
  FuObjectives objectives;
};

/// Region labels permitted per cell and the label each unit must sit in.
struct RegionConstraint {
  static constexpr std::uint8_t kHotBit = 1;
  static constexpr std::uint8_t kWarmBit = 2;

  std::vector<std::uint8_t> allowed;  // per (layer, y, x), bitmask of labels
  std::vector<Region> unit_region;    // per unit id
};

struct DecoderOptions {
  /// Reject positions that would leave some cross-layer net without a free
  /// TSV column.
  bool tsv_aware = false;
  /// Walls carved before placement; their cells are occupied.
  std::vector<AirWall> walls;
  std::optional<RegionConstraint> regions;
};

/// Greedy constructive decoder: places units in chromosome order, each at the
/// violation-free position (scan x, then y, then z) that minimizes its
/// incremental temperature proxy (heat sources) or wirelength (heat sinks).
class FuDecoder {
 public:
  FuDecoder(const Problem& problem, DecoderOptions options);

  DecodeResult decode(const FuChromosome& chrom) const;

  const Problem& problem() const { return *problem_; }
  const DecoderOptions& options() const { return options_; }

 private:
  friend class DecodeState;

  const Problem* problem_;
  DecoderOptions options_;
  int nx_, ny_, layers_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<double> density_;
  // 1/distance between half-cell lattice offsets, indexed [dz][dy2][dx2].
  std::vector<double> kernel_;
  int kdx_, kdy_;
  std::vector<CellRect> wall_rects_;
  // Per region label, prefix sums of cells the label may not use.
  std::vector<std::vector<int>> disallowed_prefix_[2];
};

DecodeResult decode(const FuChromosome& chrom, const Problem& problem);
DecodeResult decode_star(const FuChromosome& chrom, const Problem& problem);

/// Sum over unit pairs of p_i p_j / distance between centers, p in W per
/// cell, z scaled by the layer pitch; coincident centers use
/// coincident_distance instead of zero.
double f3_proxy(std::span<const Placement> placements, std::span<const FunctionalUnit> units,
                double layer_pitch_cells = 1.0, double coincident_distance = 0.5);

/// Throws Error(kGenomeMismatch) unless chrom is a permutation of 0..n-1.
void validate_chromosome(const FuChromosome& chrom, std::size_t units);

FuChromosome random_chromosome(std::size_t units, Rng& rng);

/// Cycle crossover on the cycle through position 0; genes keep their
/// rotation flag. The rng is not consumed.
std::pair<FuChromosome, FuChromosome> cycle_crossover(const FuChromosome& a, const FuChromosome& b,
                                                      Rng& rng);

/// With probability p: swap two distinct positions or flip one rotation
/// flag, each with probability 1/2.
void mutate(FuChromosome& chrom, Rng& rng, double p);

class FuPlacementProblem {
 public:
  using Genome = FuChromosome;

  FuPlacementProblem(const Problem& problem, DecoderOptions options)
      : decoder_(problem, std::move(options)) {}

  std::size_t objective_count() const { return 3; }
  Genome random_genome(Rng& rng) const { return random_chromosome(decoder_.problem().units.size(), rng); }
  std::vector<double> evaluate(const Genome& g) const { return decoder_.decode(g).objectives.transformed(); }
  std::pair<Genome, Genome> crossover(const Genome& a, const Genome& b, Rng& rng) const {
    return cycle_crossover(a, b, rng);
  }
  void mutate(Genome& g, Rng& rng, double p) const { tafp::mutate(g, rng, p); }

  const FuDecoder& decoder() const { return decoder_; }

 private:
  FuDecoder decoder_;
};

}  // namespace tafp
