#include "ahhs/topology.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace ahhs {

CompartmentTopology CompartmentTopology::make(
    int compartments, std::vector<std::pair<int, int>> edges,
    std::vector<std::vector<int>> sensors,
    std::vector<std::vector<int>> actuators) {
    CompartmentTopology t;
    t.compartment_count = compartments;
    t.edges = std::move(edges);
    t.sensors = std::move(sensors);
    t.actuators = std::move(actuators);
    t.neighbors.assign(compartments, {});
    for (auto [a, b] : t.edges) {
        if (a < 0 || b < 0 || a >= compartments || b >= compartments) {
            throw std::invalid_argument("topology: edge endpoint out of range");
        }
        t.neighbors[a].push_back(b);
        t.neighbors[b].push_back(a);
    }
    for (auto& n : t.neighbors) std::sort(n.begin(), n.end());
    int max_sensor = -1;
    for (const auto& list : t.sensors) {
        for (int s : list) max_sensor = std::max(max_sensor, s);
    }
    t.sensor_count = max_sensor + 1;
    int max_actuator = -1;
    for (const auto& list : t.actuators) {
        for (int a : list) max_actuator = std::max(max_actuator, a);
    }
    t.actuator_count = max_actuator + 1;
    t.validate();
    return t;
}

int CompartmentTopology::max_degree() const {
    std::size_t deg = 0;
    for (const auto& n : neighbors) deg = std::max(deg, n.size());
    return static_cast<int>(deg);
}

void CompartmentTopology::validate() const {
    if (compartment_count < 1) {
        throw std::invalid_argument("topology: need at least one compartment");
    }
    for (auto [a, b] : edges) {
        if (a == b) throw std::invalid_argument("topology: self-edge on compartment " +
                                                std::to_string(a));
    }
    if (static_cast<int>(sensors.size()) != compartment_count ||
        static_cast<int>(actuators.size()) != compartment_count) {
        throw std::invalid_argument("topology: binding lists must cover every compartment");
    }
    // every actuator bound to exactly one compartment
    std::vector<int> seen(static_cast<std::size_t>(actuator_count), 0);
    for (const auto& list : actuators) {
        for (int a : list) {
            if (a < 0 || a >= actuator_count) {
                throw std::invalid_argument("topology: actuator id out of range");
            }
            if (++seen[a] > 1) {
                throw std::invalid_argument("topology: actuator " + std::to_string(a) +
                                            " bound to multiple compartments");
            }
        }
    }
    for (int a = 0; a < actuator_count; ++a) {
        if (seen[a] == 0) {
            throw std::invalid_argument("topology: actuator " + std::to_string(a) +
                                        " not bound to any compartment");
        }
    }
    for (const auto& list : sensors) {
        for (int s : list) {
            if (s < 0 || s >= sensor_count) {
                throw std::invalid_argument("topology: sensor id out of range");
            }
        }
    }
}

} // namespace ahhs
