#pragma once

#include <utility>
#include <vector>

namespace ahhs {

// Spatial layout of a controller: compartments holding hormone
// concentrations, undirected diffusion edges between them, and the global
// sensors/actuators bound to each compartment. In modular robots one
// module is one compartment.
struct CompartmentTopology {
    int compartment_count = 0;
    std::vector<std::pair<int, int>> edges;      // undirected, no self-edges
    std::vector<std::vector<int>> neighbors;     // derived from edges
    std::vector<std::vector<int>> sensors;       // global sensor ids per compartment
    std::vector<std::vector<int>> actuators;     // global actuator ids per compartment
    int sensor_count = 0;
    int actuator_count = 0;

    static CompartmentTopology make(int compartments,
                                    std::vector<std::pair<int, int>> edges,
                                    std::vector<std::vector<int>> sensors,
                                    std::vector<std::vector<int>> actuators);

    int max_degree() const;

    // Throws std::invalid_argument on asymmetric edges, self-edges, or an
    // actuator bound to zero or multiple compartments.
    void validate() const;
};

} // namespace ahhs
