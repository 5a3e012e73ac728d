#include "tafp/tsv_placer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "tafp/error.hpp"

namespace tafp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_length(std::size_t got, std::size_t want) {
  if (got != want) throw Error(ErrorCode::kLengthMismatch, "chromosome length differs from candidates");
}

}  // namespace

TsvCandidateArray enumerate_candidates(const Floorplan& fp, std::span<const FunctionalUnit> units) {
  const OccupancyGrid occ = build_occupancy(fp, units);
  TsvCandidateArray out;
  const int top = occ.layers() - 1;
  for (int l = 0; l < top; ++l) {
    for (int y = 0; y < occ.ny(); ++y) {
      for (int x = 0; x < occ.nx(); ++x) {
        if (tsv_path_exists(occ, x, y, l)) out.push_back({x, y, l});
      }
    }
  }
  return out;
}

TsvEvaluator::TsvEvaluator(const Floorplan& fp, std::span<const FunctionalUnit> units,
                           const Netlist& netlist, TsvCandidateArray candidates, TsvRouting routing)
    : candidates_(std::move(candidates)) {
  for (const auto& net : netlist) {
    const Placement* pa = fp.find(net.a);
    const Placement* pb = fp.find(net.b);
    if (!pa || !pb) throw Error(ErrorCode::kUnplacedEndpoint, "net endpoint is not placed");
    const Point3 a = center(*pa, units[net.a]);
    const Point3 b = center(*pb, units[net.b]);
    if (pa->z == pb->z) {
      same_layer_ += std::abs(a.x - b.x) + std::abs(a.y - b.y);
      continue;
    }
    const int lower = std::min(pa->z, pb->z);
    const double vertical =
        routing.vertical ? routing.layer_pitch_cells * std::abs(pa->z - pb->z) : 0.0;
    std::vector<std::pair<double, int>> r;
    for (std::size_t k = 0; k < candidates_.size(); ++k) {
      const Tsv& t = candidates_[k];
      if (t.to_layer > lower) continue;
      const double tx = t.x + 0.5;
      const double ty = t.y + 0.5;
      const double len = std::abs(a.x - tx) + std::abs(a.y - ty) + std::abs(tx - b.x) +
                         std::abs(ty - b.y) + vertical;
      r.emplace_back(len, static_cast<int>(k));
    }
    std::stable_sort(r.begin(), r.end(),
                     [](const auto& l, const auto& rr) { return l.first < rr.first; });
    routes_.push_back(std::move(r));
  }
}

TsvObjectives TsvEvaluator::evaluate(const TsvChromosome& chrom) const {
  check_length(chrom.size(), candidates_.size());
  TsvObjectives o;
  o.f4 = static_cast<int>(popcount(chrom));
  double f5 = same_layer_;
  for (const auto& r : routes_) {
    double best = kInf;
    for (const auto& [len, k] : r) {
      if (chrom[k]) {
        best = len;
        break;
      }
    }
    if (best == kInf) {
      f5 = kInf;
      break;
    }
    f5 += best;
  }
  o.f5 = f5;
  return o;
}

std::vector<double> TsvPlacementProblem::evaluate(const Genome& g) const {
  const TsvObjectives o = evaluator_.evaluate(g);
  return {static_cast<double>(o.f4), o.f5};
}

std::size_t select_solution(std::span<const Individual<TsvChromosome>> front, int min_tsvs) {
  std::size_t best = front.size();
  for (std::size_t i = 0; i < front.size(); ++i) {
    const auto& o = front[i].objectives;
    if (o.size() != 2) throw Error(ErrorCode::kObjectiveMismatch, "expected (F4, F5) objectives");
    if (o[0] < min_tsvs || !std::isfinite(o[1])) continue;
    if (best == front.size() || o[0] < front[best].objectives[0] ||
        (o[0] == front[best].objectives[0] && o[1] < front[best].objectives[1])) {
      best = i;
    }
  }
  if (best == front.size()) {
    throw Error(ErrorCode::kNoSolution, "no TSV solution meets the minimum count");
  }
  return best;
}

std::size_t select_min_wirelength(std::span<const Individual<TsvChromosome>> front, int min_tsvs) {
  std::size_t best = front.size();
  for (std::size_t i = 0; i < front.size(); ++i) {
    const auto& o = front[i].objectives;
    if (o.size() != 2) throw Error(ErrorCode::kObjectiveMismatch, "expected (F4, F5) objectives");
    if (o[0] < min_tsvs || !std::isfinite(o[1])) continue;
    if (best == front.size() || o[1] < front[best].objectives[1] ||
        (o[1] == front[best].objectives[1] && o[0] < front[best].objectives[0])) {
      best = i;
    }
  }
  if (best == front.size()) {
    throw Error(ErrorCode::kNoSolution, "no TSV solution meets the minimum count");
  }
  return best;
}

Floorplan apply_tsvs(const Floorplan& fp, std::span<const FunctionalUnit> units,
                     const TsvCandidateArray& candidates, const TsvChromosome& chrom) {
  check_length(chrom.size(), candidates.size());
  std::map<std::pair<int, int>, int> deepest;
  for (std::size_t k = 0; k < chrom.size(); ++k) {
    if (!chrom[k]) continue;
    const Tsv& t = candidates[k];
    auto [it, inserted] = deepest.try_emplace({t.y, t.x}, t.to_layer);
    if (!inserted) it->second = std::min(it->second, t.to_layer);
  }
  const OccupancyGrid occ = build_occupancy(fp, units);
  Floorplan out = fp;
  for (const auto& [yx, layer] : deepest) {
    const int x = yx.second;
    const int y = yx.first;
    if (!occ.in_bounds(x, y, layer) || !tsv_path_exists(occ, x, y, layer)) {
      throw Error(ErrorCode::kCollision, "TSV column is not free");
    }
    out.tsvs.push_back({x, y, layer});
  }
  return out;
}

}  // namespace tafp
