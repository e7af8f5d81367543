#include "ahhs/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ahhs/errors.hpp"
#include "ahhs/stats.hpp"

namespace ahhs {

void EvolutionConfig::validate() const {
    if (population_size < 2) throw ConfigError("evolution.population_size: must be >= 2");
    if (generations < 1) throw ConfigError("evolution.generations: must be >= 1");
    if (mutation_rate < 0.0 || mutation_rate > 1.0) {
        throw ConfigError("evolution.mutation_rate: must be in [0,1]");
    }
    if (mutation_max_delta < 0.0 || mutation_max_delta > 1.0) {
        throw ConfigError("evolution.mutation_max_delta: must be in [0,1]");
    }
    if (crossover_rate < 0.0 || crossover_rate > 1.0) {
        throw ConfigError("evolution.crossover_rate: must be in [0,1]");
    }
    if (elitism_count < 0 || elitism_count >= population_size) {
        throw ConfigError("evolution.elitism_count: must be in [0, population_size)");
    }
    if (hormone_count < 1) throw ConfigError("controller.hormone_count: must be >= 1");
    if (rule_count < 1) throw ConfigError("controller.rule_count: must be >= 1");
}

Genome random_genome(const EvolutionConfig& config, Rng& rng) {
    Genome g;
    g.variant = config.variant;
    g.hormones.resize(config.hormone_count);
    g.rules.resize(config.rule_count);
    for (auto& h : g.hormones) {
        h.production = rng.uniform01();
        h.decay = rng.uniform01();
        h.diffusion = rng.uniform01();
    }
    for (auto& r : g.rules) {
        if (config.variant == Variant::ahhs2) {
            double sum = 0.0;
            for (auto& w : r.weights) {
                w = rng.uniform01();
                sum += w;
            }
            if (sum <= 0.0) {
                r.weights = {0.0, 0.0, 0.0, 0.0, 1.0};
            } else {
                for (auto& w : r.weights) w /= sum;
            }
            r.trigger_center = rng.uniform01();
            r.trigger_width = rng.uniform01();
        } else {
            r.type = static_cast<RuleType>(rng.below(4));
            r.threshold = rng.uniform01();
            r.direction = static_cast<ThresholdDirection>(rng.below(2));
        }
        r.input_index = rng.uniform01();
        r.output_hormone = rng.uniform01();
        r.actuator_index = rng.uniform01();
        r.dependent_dose = rng.uniform01();
        r.fixed_dose = rng.uniform01();
    }
    return g;
}

RuleWeights mutate_rule_weights(RuleWeights weights, double max_delta, Rng& rng) {
    const int donor = static_cast<int>(rng.below(kRuleWeightCount));
    int recipient = static_cast<int>(rng.below(kRuleWeightCount - 1));
    if (recipient >= donor) ++recipient;
    const double transfer = std::min(rng.uniform01() * max_delta, weights[donor]);
    weights[donor] -= transfer;
    weights[recipient] += transfer;
    return weights;
}

Genome mutate(const Genome& genome, double rate, double max_delta, Rng& rng) {
    Genome out = genome;
    const std::size_t slots = out.slot_count();
    for (std::size_t i = 0; i < slots; ++i) {
        if (!rng.chance(rate)) continue;
        std::visit(
            [&](auto* field) {
                using T = std::remove_pointer_t<decltype(field)>;
                if constexpr (std::is_same_v<T, double>) {
                    const double delta = rng.uniform(-max_delta, max_delta);
                    *field = std::clamp(*field + delta, 0.0, 1.0);
                } else if constexpr (std::is_same_v<T, RuleWeights>) {
                    *field = mutate_rule_weights(*field, max_delta, rng);
                } else if constexpr (std::is_same_v<T, RuleType>) {
                    *field = static_cast<RuleType>(rng.below(4));
                } else {
                    *field = static_cast<ThresholdDirection>(rng.below(2));
                }
            },
            gene_slot(out, i));
    }
    return out;
}

std::pair<Genome, Genome> crossover_two_point(const Genome& a, const Genome& b,
                                              Rng& rng) {
    if (a.variant != b.variant || a.hormone_count() != b.hormone_count() ||
        a.rule_count() != b.rule_count()) {
        throw ConfigError("crossover: parent genomes have different shapes");
    }
    Genome child_a = a;
    Genome child_b = b;
    const std::size_t slots = child_a.slot_count();
    std::size_t cut1 = rng.below(slots + 1);
    std::size_t cut2 = rng.below(slots + 1);
    if (cut1 > cut2) std::swap(cut1, cut2);
    for (std::size_t i = cut1; i < cut2; ++i) {
        const SlotRef ra = gene_slot(child_a, i);
        const SlotRef rb = gene_slot(child_b, i);
        std::visit(
            [&](auto* fa) {
                using T = std::remove_pointer_t<decltype(fa)>;
                std::swap(*fa, *std::get<T*>(rb));
            },
            ra);
    }
    return {std::move(child_a), std::move(child_b)};
}

std::size_t select_linear_proportional(std::span<const double> fitness, Rng& rng) {
    if (fitness.size() == 1) return 0;
    const auto [min_it, max_it] = std::minmax_element(fitness.begin(), fitness.end());
    const double shift = *min_it;
    const double epsilon = 1e-6 * (*max_it - shift + 1.0);
    double total = 0.0;
    for (double f : fitness) total += (f - shift) + epsilon;
    const double target = rng.uniform01() * total;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < fitness.size(); ++i) {
        cumulative += (fitness[i] - shift) + epsilon;
        if (target < cumulative) return i;
    }
    return fitness.size() - 1;
}

EvolutionHistory evolve(const EvolutionConfig& config,
                        const FitnessEvaluator& evaluator,
                        const std::function<void(int)>& on_generation) {
    config.validate();

    struct Individual {
        Genome genome;
        double fitness = 0.0;
        std::uint64_t episode_seed = 0;
        bool evaluated = false;
    };

    Rng rng(derive_seed(config.master_seed, {0x6765u})); // variation stream

    std::vector<Individual> population(config.population_size);
    for (auto& ind : population) {
        ind.genome = random_genome(config, rng);
    }

    EvolutionHistory history;
    history.generations.reserve(config.generations);

    std::vector<double> fitness(config.population_size);
    for (int gen = 0; gen < config.generations; ++gen) {
        for (int slot = 0; slot < config.population_size; ++slot) {
            auto& ind = population[slot];
            if (ind.evaluated) continue; // elites keep their recorded score
            ind.episode_seed = derive_seed(
                config.master_seed,
                {static_cast<std::uint64_t>(gen), static_cast<std::uint64_t>(slot)});
            try {
                ind.fitness = evaluator(ind.genome, ind.episode_seed);
                if (!std::isfinite(ind.fitness)) {
                    ind.fitness = config.fitness_floor;
                    ++history.evaluator_incidents;
                }
            } catch (const std::exception&) {
                ind.fitness = config.fitness_floor;
                ++history.evaluator_incidents;
            }
            ind.evaluated = true;
        }

        for (int i = 0; i < config.population_size; ++i) {
            fitness[i] = population[i].fitness;
        }
        std::size_t best_slot = 0;
        for (std::size_t i = 1; i < fitness.size(); ++i) {
            if (fitness[i] > fitness[best_slot]) best_slot = i;
        }

        GenerationRecord record;
        record.generation = gen;
        record.best = fitness[best_slot];
        record.mean =
            std::accumulate(fitness.begin(), fitness.end(), 0.0) / fitness.size();
        record.median = median(fitness);
        record.best_episode_seed = population[best_slot].episode_seed;
        record.best_genome = population[best_slot].genome;
        history.generations.push_back(std::move(record));

        if (config.reference_max_fitness && !history.first_reach_75pct &&
            fitness[best_slot] >= 0.75 * *config.reference_max_fitness) {
            history.first_reach_75pct = gen;
        }
        if (on_generation) on_generation(gen);
        if (gen + 1 == config.generations) break;

        std::vector<std::size_t> order(population.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return fitness[a] > fitness[b];
        });

        std::vector<Individual> next;
        next.reserve(config.population_size);
        for (int e = 0; e < config.elitism_count; ++e) {
            next.push_back(population[order[e]]);
        }
        while (static_cast<int>(next.size()) < config.population_size) {
            const std::size_t pa = select_linear_proportional(fitness, rng);
            const std::size_t pb = select_linear_proportional(fitness, rng);
            Genome child_a = population[pa].genome;
            Genome child_b = population[pb].genome;
            if (rng.chance(config.crossover_rate)) {
                std::tie(child_a, child_b) = crossover_two_point(child_a, child_b, rng);
            }
            child_a = mutate(child_a, config.mutation_rate, config.mutation_max_delta, rng);
            child_b = mutate(child_b, config.mutation_rate, config.mutation_max_delta, rng);
            next.push_back({std::move(child_a)});
            if (static_cast<int>(next.size()) < config.population_size) {
                next.push_back({std::move(child_b)});
            }
        }
        population = std::move(next);
    }
    return history;
}

} // namespace ahhs
