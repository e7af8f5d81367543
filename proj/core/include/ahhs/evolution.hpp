#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ahhs/genome.hpp"
#include "ahhs/rng.hpp"

namespace ahhs {

struct EvolutionConfig {
    int population_size = 200;
    int generations = 200;
    double mutation_rate = 0.15;     // per gene
    double mutation_max_delta = 0.1; // maximal absolute change per mutation
    double crossover_rate = 0.05;    // two-point, per offspring pair
    int elitism_count = 1;
    int hormone_count = 15;
    int rule_count = 15;
    Variant variant = Variant::ahhs2;
    double fitness_floor = 0.0; // recorded when an evaluation fails
    std::optional<double> reference_max_fitness; // for the 75% reach statistic
    std::string evaluator_id = "pendulum";
    std::uint64_t master_seed = 0;

    // Throws ConfigError naming the offending field.
    void validate() const;

    bool operator==(const EvolutionConfig&) const = default;
};

// Fitness callback: deterministic given the genome and the episode seed.
using FitnessEvaluator =
    std::function<double(const Genome& genome, std::uint64_t episode_seed)>;

struct GenerationRecord {
    int generation = 0;
    double best = 0.0;
    double mean = 0.0;
    double median = 0.0;
    std::uint64_t best_episode_seed = 0; // seed the best individual was scored with
    Genome best_genome;

    bool operator==(const GenerationRecord&) const = default;
};

struct EvolutionHistory {
    std::vector<GenerationRecord> generations;
    std::optional<int> first_reach_75pct; // vs config.reference_max_fitness
    int evaluator_incidents = 0;

    bool operator==(const EvolutionHistory&) const = default;
};

// All genes uniform in [0,1]; AHHS2 weight vectors uniform then normalized
// onto the simplex; AHHS1 tags uniform over their alternatives.
Genome random_genome(const EvolutionConfig& config, Rng& rng);

// Each scalar gene independently, with probability `rate`: add a uniform
// delta in [-max_delta, +max_delta], clamp to [0,1]. Weight vectors get one
// weight-transfer event instead; tags and direction bits are resampled.
Genome mutate(const Genome& genome, double rate, double max_delta, Rng& rng);

// Moves a uniform amount in (0, max_delta] from one randomly chosen weight
// to another (distinct), capped at the donor's current weight.
RuleWeights mutate_rule_weights(RuleWeights weights, double max_delta, Rng& rng);

// Two cut positions on the flattened gene vector; tags and weight vectors
// travel as atomic units. Throws ConfigError on shape mismatch.
std::pair<Genome, Genome> crossover_two_point(const Genome& a, const Genome& b,
                                              Rng& rng);

// Fitness-proportionate (roulette) selection on fitness shifted to be
// non-negative plus a small epsilon, so equal fitnesses select uniformly.
std::size_t select_linear_proportional(std::span<const double> fitness, Rng& rng);

// Generational loop: evaluate, record stats, copy elites unchanged (their
// scores carry over, which keeps the best-fitness sequence non-decreasing
// even under noisy evaluation), breed the rest via selection + optional
// crossover + mutation. Episode seeds derive from (master_seed, generation,
// slot), so the run is a pure function of the config.
EvolutionHistory evolve(const EvolutionConfig& config,
                        const FitnessEvaluator& evaluator,
                        const std::function<void(int)>& on_generation = {});

} // namespace ahhs
