#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "tafp/rng.hpp"

namespace tafp {

struct EvolutionConfig {
  std::size_t population_size = 100;
  std::size_t generations = 250;
  double crossover_prob = 0.90;
  double mutation_prob = 0.01;
  std::uint64_t rng_seed = 1;
  /// Offspring evaluation workers; 0 uses the hardware concurrency.
  unsigned threads = 1;

  /// Throws Error(kInvalidArgument).
  void validate() const;
};

template <class Genome>
struct Individual {
  Genome genome;
  std::vector<double> objectives;  // all minimized
  int rank = 0;
  double crowding = 0.0;
};

/// a dominates b: no worse in every objective and strictly better in one.
bool dominates(std::span<const double> a, std::span<const double> b);

/// Fast non-dominated sort. Fronts hold indices in ascending order.
/// Throws Error(kObjectiveMismatch) on ragged input.
std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const std::vector<double>> objectives);

/// Crowding distance of each member of `front` (same order as front).
std::vector<double> crowding_distance(std::span<const std::vector<double>> objectives,
                                      std::span<const std::size_t> front);

struct Ranking {
  std::vector<int> rank;
  std::vector<double> crowding;
};

Ranking rank_population(std::span<const std::vector<double>> objectives);

/// Elitist truncation: whole fronts first, then the last front by crowding
/// distance (descending, stable). Returns kept indices in that order.
std::vector<std::size_t> reduce_population(std::span<const std::vector<double>> objectives,
                                           std::size_t keep);

/// Draws two indices uniformly (with replacement); lower rank wins, then the
/// larger crowding distance, then a coin flip.
std::size_t binary_tournament(std::span<const int> rank, std::span<const double> crowding, Rng& rng);

template <class P>
concept MoeaProblem = requires(const P& p, typename P::Genome& g, const typename P::Genome& cg,
                               Rng& rng, double prob) {
  { p.objective_count() } -> std::convertible_to<std::size_t>;
  { p.random_genome(rng) } -> std::same_as<typename P::Genome>;
  { p.evaluate(cg) } -> std::same_as<std::vector<double>>;
  { p.crossover(cg, cg, rng) } -> std::same_as<std::pair<typename P::Genome, typename P::Genome>>;
  { p.mutate(g, rng, prob) } -> std::same_as<void>;
};

template <class Genome>
using GenerationObserver =
    std::function<void(std::size_t generation, std::span<const Individual<Genome>> population)>;

namespace detail {

unsigned worker_count(unsigned requested, std::size_t jobs);

template <class P, class Genome>
void evaluate_range(const P& problem, std::vector<Individual<Genome>>& pop, std::size_t first,
                    unsigned threads) {
  const std::size_t jobs = pop.size() - first;
  const unsigned workers = worker_count(threads, jobs);
  if (workers <= 1) {
    for (std::size_t i = first; i < pop.size(); ++i) pop[i].objectives = problem.evaluate(pop[i].genome);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = first + w; i < pop.size(); i += workers) {
            pop[i].objectives = problem.evaluate(pop[i].genome);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <class Genome>
void assign_ranking(std::vector<Individual<Genome>>& pop) {
  std::vector<std::vector<double>> objs;
  objs.reserve(pop.size());
  for (const auto& ind : pop) objs.push_back(ind.objectives);
  const Ranking r = rank_population(objs);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    pop[i].rank = r.rank[i];
    pop[i].crowding = r.crowding[i];
  }
}

}  // namespace detail

/// NSGA-II. Draw order per generation: for each of N/2 pairs, two
/// tournaments, the crossover coin, crossover draws, then mutation of each
/// child. `seeds` replace the first random individuals of the initial
/// population. Returns the rank-0 members of the final population.
template <MoeaProblem P>
std::vector<Individual<typename P::Genome>> evolve(
    const P& problem, const EvolutionConfig& cfg,
    std::span<const typename P::Genome> seeds = {},
    const GenerationObserver<typename P::Genome>& observer = {}) {
  using Genome = typename P::Genome;
  cfg.validate();
  Rng rng(cfg.rng_seed);
  const std::size_t n = cfg.population_size;

  std::vector<Individual<Genome>> pop;
  pop.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    Individual<Genome> ind;
    ind.genome = i < seeds.size() ? seeds[i] : problem.random_genome(rng);
    pop.push_back(std::move(ind));
  }
  detail::evaluate_range(problem, pop, 0, cfg.threads);
  detail::assign_ranking(pop);
  if (observer) observer(0, pop);

  std::vector<int> rank(n);
  std::vector<double> crowd(n);
  for (std::size_t g = 1; g <= cfg.generations; ++g) {
    for (std::size_t i = 0; i < n; ++i) {
      rank[i] = pop[i].rank;
      crowd[i] = pop[i].crowding;
    }
    for (std::size_t k = 0; k < n / 2; ++k) {
      const std::size_t a = binary_tournament(rank, crowd, rng);
      const std::size_t b = binary_tournament(rank, crowd, rng);
      std::pair<Genome, Genome> kids;
      if (rng.uniform() < cfg.crossover_prob) {
        kids = problem.crossover(pop[a].genome, pop[b].genome, rng);
      } else {
        kids = {pop[a].genome, pop[b].genome};
      }
      problem.mutate(kids.first, rng, cfg.mutation_prob);
      problem.mutate(kids.second, rng, cfg.mutation_prob);
      Individual<Genome> c1, c2;
      c1.genome = std::move(kids.first);
      c2.genome = std::move(kids.second);
      pop.push_back(std::move(c1));
      pop.push_back(std::move(c2));
    }
    detail::evaluate_range(problem, pop, n, cfg.threads);

    std::vector<std::vector<double>> objs;
    objs.reserve(pop.size());
    for (const auto& ind : pop) objs.push_back(ind.objectives);
    const std::vector<std::size_t> keep = reduce_population(objs, n);
    std::vector<Individual<Genome>> next;
    next.reserve(2 * n);
    for (std::size_t i : keep) next.push_back(std::move(pop[i]));
    pop = std::move(next);
    detail::assign_ranking(pop);
    if (observer) observer(g, pop);
  }

  std::vector<Individual<Genome>> front;
  for (const auto& ind : pop) {
    if (ind.rank == 0) front.push_back(ind);
  }
  return front;
}

}  // namespace tafp
