#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ahhs/evolution.hpp"
#include "ahhs/trace.hpp"

namespace ahhs {

// Ticks each rule was active, summed over all mask columns (= modules for
// chain traces).
std::vector<std::int64_t> rule_activation_counts(const EpisodeTrace& trace);

// Same, but kept separate per mask column.
std::vector<std::vector<std::int64_t>>
rule_activation_counts_per_group(const EpisodeTrace& trace);

struct ActivationSummary {
    int rule_count = 0;
    int never_triggered = 0;
    int seldom_triggered = 0; // active in fewer than seldom_fraction of steps
    double never_or_seldom_fraction = 0.0;
    std::int64_t step_capacity = 0; // ticks * mask groups
};
ActivationSummary summarize_activation(const std::vector<std::int64_t>& counts,
                                       std::int64_t ticks, int groups,
                                       double seldom_fraction = 0.01);

// Fitness distribution of single-mutation variants of a genome.
struct NeighborhoodReport {
    double original_fitness = 0.0;
    std::vector<double> mutant_fitness;
    std::vector<double> bin_edges;      // bins + 1 edges
    std::vector<int> bin_counts;        // sums to mutant count
    std::uint64_t master_seed = 0;
    double mutation_rate = 0.15;
    double mutation_max_delta = 0.1;

    bool operator==(const NeighborhoodReport&) const = default;
};

// n independent single applications of the mutation operator, each mutant
// evaluated once with a seed derived from (master_seed, mutant index). A
// failed evaluation records fitness_floor. Histogram: `bins` equal-width
// bins over [0, max observed] (upper edge 1 when everything scored 0).
NeighborhoodReport mutation_neighborhood(const Genome& genome, int n,
                                         const FitnessEvaluator& evaluator,
                                         double mutation_rate,
                                         double mutation_max_delta,
                                         std::uint64_t master_seed,
                                         int bins = 10,
                                         double fitness_floor = 0.0);

// Files carry a "# ahhs-... version seed" comment line.
void save_report_csv(const NeighborhoodReport& report, const std::string& path);
void save_report_json(const NeighborhoodReport& report, const std::string& path);
NeighborhoodReport load_report_json(const std::string& path);

} // namespace ahhs
