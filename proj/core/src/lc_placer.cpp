#include "tafp/lc_placer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "tafp/error.hpp"

namespace tafp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per layer, columns blocked for a channel.
std::vector<std::vector<bool>> blocked_columns(const Floorplan& fp) {
  const int nx = fp.stack.nx();
  const int layers = fp.stack.layer_count();
  std::vector<std::vector<bool>> blocked(layers, std::vector<bool>(nx, false));
  for (const auto& t : fp.tsvs) {
    if (t.x < 0 || t.x >= nx) continue;
    for (int l = std::max(t.to_layer, 0); l < layers; ++l) blocked[l][t.x] = true;
  }
  for (const auto& w : fp.air_walls) {
    if (w.layer < 0 || w.layer >= layers) continue;
    const CellRect r = wall_rect(w, fp.stack);
    for (int x = std::max(r.x, 0); x < std::min(r.x + r.w, nx); ++x) blocked[w.layer][x] = true;
  }
  return blocked;
}

void check_length(std::size_t got, std::size_t want) {
  if (got != want) {
    throw Error(ErrorCode::kLengthMismatch, "chromosome length differs from candidates");
  }
}

}  // namespace

LcCandidateArray enumerate_channel_candidates(const Floorplan& fp) {
  const auto blocked = blocked_columns(fp);
  LcCandidateArray out;
  for (int l = 0; l < static_cast<int>(blocked.size()); ++l) {
    for (int x = 0; x < static_cast<int>(blocked[l].size()); ++x) {
      if (!blocked[l][x]) out.push_back({x, l});
    }
  }
  return out;
}

double channel_regression(double kelvin, int offset) {
  switch (std::abs(offset)) {
    case 0: return 342.46 * std::log(kelvin) - 1664.4;
    case 1: return 321.28 * std::log(kelvin) - 1541.5;
    case 2: return 293.60 * std::log(kelvin) - 1380.8;
    default: return kelvin;
  }
}

double channel_update(double kelvin, int offset, double ambient_K) {
  return std::min(kelvin, std::max(ambient_K, channel_regression(kelvin, offset)));
}

LcEvaluator::LcEvaluator(const StackSpec& stack, TemperatureField field,
                         LcCandidateArray candidates, std::optional<int> max_channels,
                         bool silicon_only)
    : grid_(build_grid(stack)),
      field_(std::move(field)),
      candidates_(std::move(candidates)),
      cap_(max_channels),
      ambient_K_(stack.ambient_K) {
  const std::size_t nodes = grid_.levels.size() * grid_.cells_per_level();
  if (field_.kelvin.size() != nodes) {
    throw Error(ErrorCode::kLengthMismatch, "temperature field does not match the stack");
  }
  for (const auto& c : candidates_) {
    if (c.x < 0 || c.x >= grid_.nx || c.layer < 0 || c.layer >= grid_.layers) {
      throw Error(ErrorCode::kOutOfBounds, "channel candidate outside the grid");
    }
  }
  counted_.assign(nodes, true);
  if (silicon_only) {
    for (std::size_t lv = 0; lv < grid_.levels.size(); ++lv) {
      if (grid_.levels[lv].slab == Slab::kSilicon) continue;
      std::fill_n(counted_.begin() + static_cast<std::ptrdiff_t>(lv * grid_.cells_per_level()),
                  grid_.cells_per_level(), false);
    }
  }
}

void LcEvaluator::apply(const LcChromosome& chrom, std::vector<double>& t) const {
  static constexpr int kOffsets[] = {0, -1, 1, -2, 2};
  for (std::size_t k = 0; k < chrom.size(); ++k) {
    if (!chrom[k]) continue;
    const auto& c = candidates_[k];
    const int level = grid_.level_of(c.layer, Slab::kSilicon);
    for (int y = 0; y < grid_.ny; ++y) {
      for (const int off : kOffsets) {
        const int x = c.x + off;
        if (x < 0 || x >= grid_.nx) continue;
        double& v = t[node_index(grid_, level, x, y)];
        v = channel_update(v, off, ambient_K_);
      }
    }
  }
}

LcObjectives LcEvaluator::evaluate(const LcChromosome& chrom) const {
  check_length(chrom.size(), candidates_.size());
  LcObjectives o;
  o.f6 = static_cast<int>(popcount(chrom));
  if (cap_ && o.f6 > *cap_) {
    o.f7 = kInf;
    return o;
  }
  std::vector<double> t = field_.kelvin;
  apply(chrom, t);
  double sum = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (counted_[i]) sum += t[i];
  }
  o.f7 = sum;
  return o;
}

TemperatureField LcEvaluator::estimate(const LcChromosome& chrom) const {
  check_length(chrom.size(), candidates_.size());
  TemperatureField out = field_;
  apply(chrom, out.kelvin);
  return out;
}

LcChromosome LcPlacementProblem::random_genome(Rng& rng) const {
  const std::size_t n = evaluator_.candidates().size();
  double max_density = 0.5;
  if (const auto cap = evaluator_.max_channels(); cap && n > 0) {
    max_density = std::min(1.0, static_cast<double>(*cap) / static_cast<double>(n));
  }
  return random_bits(n, max_density, rng);
}

std::vector<double> LcPlacementProblem::evaluate(const Genome& g) const {
  const LcObjectives o = evaluator_.evaluate(g);
  return {static_cast<double>(o.f6), o.f7};
}

std::size_t select_channels(std::span<const Individual<LcChromosome>> front,
                            std::optional<int> max_channels) {
  std::size_t best = front.size();
  for (std::size_t i = 0; i < front.size(); ++i) {
    const auto& o = front[i].objectives;
    if (o.size() != 2) throw Error(ErrorCode::kObjectiveMismatch, "expected (F6, F7) objectives");
    if (!std::isfinite(o[1]) || (max_channels && o[0] > *max_channels)) continue;
    if (best == front.size() || o[1] < front[best].objectives[1] ||
        (o[1] == front[best].objectives[1] && o[0] < front[best].objectives[0])) {
      best = i;
    }
  }
  if (best == front.size()) {
    throw Error(ErrorCode::kSelectionUnsatisfiable, "no channel solution within the budget");
  }
  return best;
}

Floorplan apply_to_floorplan(const Floorplan& fp, const LcCandidateArray& candidates,
                             const LcChromosome& chrom, const ThermalParams& params) {
  check_length(chrom.size(), candidates.size());
  const auto blocked = blocked_columns(fp);
  Floorplan out = fp;
  for (std::size_t k = 0; k < chrom.size(); ++k) {
    if (!chrom[k]) continue;
    const auto& c = candidates[k];
    if (c.layer < 0 || c.layer >= static_cast<int>(blocked.size()) || c.x < 0 ||
        c.x >= static_cast<int>(blocked[c.layer].size())) {
      throw Error(ErrorCode::kOutOfBounds, "channel outside the grid");
    }
    const bool duplicate = std::any_of(out.liquid_channels.begin(), out.liquid_channels.end(),
                                       [&](const LiquidChannel& ch) {
                                         return ch.x == c.x && ch.layer == c.layer;
                                       });
    if (blocked[c.layer][c.x] || duplicate) {
      throw Error(ErrorCode::kCollision, "channel collides with a TSV, wall or channel");
    }
    out.liquid_channels.push_back(
        {c.x, c.layer, params.channel_h_conv_W_per_m2K, params.channel_flow_W_per_K, "water"});
  }
  return out;
}

Floorplan homogeneous_placement(const Floorplan& fp, int per_layer, const ThermalParams& params) {
  if (per_layer < 0) throw Error(ErrorCode::kInvalidArgument, "per_layer must be non-negative");
  const auto blocked = blocked_columns(fp);
  const int nx = fp.stack.nx();
  LcCandidateArray chosen;
  for (int l = 0; l < static_cast<int>(blocked.size()); ++l) {
    std::vector<bool> used(nx, false);
    for (int i = 0; i < per_layer; ++i) {
      const int target = static_cast<int>(std::floor((i + 0.5) * nx / per_layer));
      int pick = -1;
      for (int d = 0; d < nx && pick < 0; ++d) {
        for (const int x : {target - d, target + d}) {
          if (x >= 0 && x < nx && !blocked[l][x] && !used[x]) {
            pick = x;
            break;
          }
        }
      }
      if (pick < 0) {
        throw Error(ErrorCode::kInsufficientCandidates, "not enough free columns for channels");
      }
      used[pick] = true;
      chosen.push_back({pick, l});
    }
  }
  return apply_to_floorplan(fp, chosen, LcChromosome(chosen.size(), 1), params);
}

}  // namespace tafp
