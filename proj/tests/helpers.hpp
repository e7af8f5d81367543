#pragma once

#include <cstdlib>
#include <string>

#include "ahhs/controller.hpp"
#include "ahhs/genome.hpp"
#include "ahhs/topology.hpp"

namespace ahhs::test {

// gene values that decode to exact dose/index targets
inline double lambda_gene(double lambda, double lambda_max = 2.0) {
    return (lambda / lambda_max + 1.0) / 2.0;
}
inline double kappa_gene(double kappa, double kappa_max = 1.0) {
    return (kappa / kappa_max + 1.0) / 2.0;
}
inline double index_gene(int index, int count) {
    return count <= 1 ? 0.0 : static_cast<double>(index) / (count - 1);
}

inline RuleGenes idle_rule_ahhs2() {
    RuleGenes r;
    r.weights = {0.0, 0.0, 0.0, 0.0, 1.0};
    return r;
}

inline RuleGenes idle_rule_ahhs1() {
    RuleGenes r;
    r.type = RuleType::idle;
    return r;
}

// inert genome: zero hormone dynamics, one idle rule
inline Genome inert_genome(Variant variant, int hormones) {
    Genome g;
    g.variant = variant;
    g.hormones.assign(hormones, HormoneGenes{});
    g.rules.push_back(variant == Variant::ahhs2 ? idle_rule_ahhs2()
                                                : idle_rule_ahhs1());
    return g;
}

inline CompartmentTopology one_compartment(int sensor_count = 1,
                                           int actuator_count = 1) {
    std::vector<int> sensors, actuators;
    for (int i = 0; i < sensor_count; ++i) sensors.push_back(i);
    for (int i = 0; i < actuator_count; ++i) actuators.push_back(i);
    return CompartmentTopology::make(1, {}, {sensors}, {actuators});
}

inline CompartmentTopology two_compartments_no_io() {
    return CompartmentTopology::make(2, {{0, 1}}, {{}, {}}, {{}, {}});
}

inline CompartmentTopology path_no_io(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return CompartmentTopology::make(n, std::move(edges),
                                     std::vector<std::vector<int>>(n),
                                     std::vector<std::vector<int>>(n));
}

inline std::string cli_path() {
    const char* env = std::getenv("AHHS_CLI");
    return env != nullptr ? env : "";
}

} // namespace ahhs::test
