#include "tafp/moea.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "tafp/error.hpp"

namespace tafp {

void EvolutionConfig::validate() const {
  if (population_size < 2 || population_size % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "population size must be even and >= 2");
  }
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(crossover_prob) || !prob(mutation_prob)) {
    throw Error(ErrorCode::kInvalidArgument, "probabilities must lie in [0, 1]");
  }
}

bool dominates(std::span<const double> a, std::span<const double> b) {
  bool strictly = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strictly = true;
  }
  return strictly;
}

std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const std::vector<double>> objectives) {
  const std::size_t n = objectives.size();
  if (n == 0) return {};
  const std::size_t m = objectives.front().size();
  for (const auto& o : objectives) {
    if (o.size() != m) throw Error(ErrorCode::kObjectiveMismatch, "objective vectors differ in length");
  }

  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> dominators(n, 0);
  std::vector<std::vector<std::size_t>> fronts(1);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      if (dominates(objectives[p], objectives[q])) {
        dominated[p].push_back(q);
        ++dominators[q];
      } else if (dominates(objectives[q], objectives[p])) {
        dominated[q].push_back(p);
        ++dominators[p];
      }
    }
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (dominators[p] == 0) fronts[0].push_back(p);
  }
  while (true) {
    std::vector<std::size_t> next;
    for (std::size_t p : fronts.back()) {
      for (std::size_t q : dominated[p]) {
        if (--dominators[q] == 0) next.push_back(q);
      }
    }
    if (next.empty()) break;
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(next));
  }
  return fronts;
}

std::vector<double> crowding_distance(std::span<const std::vector<double>> objectives,
                                      std::span<const std::size_t> front) {
  const std::size_t k = front.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(k, 0.0);
  if (k <= 2) {
    std::fill(dist.begin(), dist.end(), inf);
    return dist;
  }
  const std::size_t m = objectives[front[0]].size();
  std::vector<std::size_t> order(k);
  for (std::size_t obj = 0; obj < m; ++obj) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return objectives[front[a]][obj] < objectives[front[b]][obj];
    });
    dist[order.front()] = inf;
    dist[order.back()] = inf;
    const double lo = objectives[front[order.front()]][obj];
    const double hi = objectives[front[order.back()]][obj];
    const double range = hi - lo;
    if (!(range > 0.0) || !std::isfinite(range)) continue;
    for (std::size_t i = 1; i + 1 < k; ++i) {
      const double gap = objectives[front[order[i + 1]]][obj] - objectives[front[order[i - 1]]][obj];
      dist[order[i]] += gap / range;
    }
  }
  return dist;
}

Ranking rank_population(std::span<const std::vector<double>> objectives) {
  Ranking r;
  r.rank.assign(objectives.size(), 0);
  r.crowding.assign(objectives.size(), 0.0);
  const auto fronts = nondominated_sort(objectives);
  for (std::size_t f = 0; f < fronts.size(); ++f) {
    const auto d = crowding_distance(objectives, fronts[f]);
    for (std::size_t i = 0; i < fronts[f].size(); ++i) {
      r.rank[fronts[f][i]] = static_cast<int>(f);
      r.crowding[fronts[f][i]] = d[i];
    }
  }
  return r;
}

std::vector<std::size_t> reduce_population(std::span<const std::vector<double>> objectives,
                                           std::size_t keep) {
  std::vector<std::size_t> kept;
  kept.reserve(keep);
  for (const auto& front : nondominated_sort(objectives)) {
    if (kept.size() == keep) break;
    if (kept.size() + front.size() <= keep) {
      kept.insert(kept.end(), front.begin(), front.end());
      continue;
    }
    const auto d = crowding_distance(objectives, front);
    std::vector<std::size_t> order(front.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
    for (std::size_t i = 0; kept.size() < keep; ++i) kept.push_back(front[order[i]]);
  }
  return kept;
}

std::size_t binary_tournament(std::span<const int> rank, std::span<const double> crowding, Rng& rng) {
  const std::size_t a = rng.index(rank.size());
  const std::size_t b = rng.index(rank.size());
  if (rank[a] != rank[b]) return rank[a] < rank[b] ? a : b;
  if (crowding[a] != crowding[b]) return crowding[a] > crowding[b] ? a : b;
  return rng.coin() ? a : b;
}

namespace detail {

unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned w = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  if (jobs < w) w = static_cast<unsigned>(std::max<std::size_t>(jobs, 1));
  return w;
}

}  // namespace detail

}  // namespace tafp
