#pragma once

#include <array>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "ahhs/controller.hpp"
#include "ahhs/genome.hpp"
#include "ahhs/trace.hpp"

namespace ahhs {

inline constexpr int kChainSensorsPerModule = 4; // up, forward, down, back
inline constexpr int kSensorUp = 0;
inline constexpr int kSensorForward = 1;
inline constexpr int kSensorDown = 2;
inline constexpr int kSensorBack = 3;

// Planar substitute for the 3D gait arena. Each module is two rigid half
// links of length module_length/2 joined by its hinge; inter-module
// connections are rigid. The chain is draped onto a 1D terrain profile
// (flat ground plus a low wall on each side of the arena), and net
// horizontal motion comes from a friction-anchor heuristic: modules in
// ground contact resist sliding, so each tick's pose change is shifted to
// keep the contact-weighted displacement at zero.
struct ChainConfig {
    int module_count = 5;
    double hinge_limit = std::numbers::pi / 2; // rad
    double hinge_slew = std::numbers::pi / 60; // rad per tick (3 degrees)
    int episode_ticks = 2000;
    double module_length = 1.0;
    double wall_distance = 6.0;  // arena center to inner wall face
    double wall_thickness = 1.0;
    double wall_height = 0.5;    // half a module height
    double sensor_range = 2.0;
    double module_radius = 0.4;  // modules seen by proximity rays as discs
    double friction = 1.0;       // anchor weight of a grounded module
    double anchor_baseline = 0.05; // anchor weight of an airborne module
    double contact_tolerance = 1e-6;
    DecodeConfig decode;

    void validate() const; // throws ConfigError

    bool operator==(const ChainConfig&) const = default;
};

struct ChainState {
    std::vector<double> hinge_angle;   // actual, rad, within +-hinge_limit
    std::vector<double> hinge_command; // slew target, rad
    std::vector<double> node_x, node_z; // 2N+1 half-link endpoints
    std::vector<double> module_x, module_z; // module centers (hinge points)
    std::vector<std::uint8_t> contact; // per module, ground contact
    double world_offset_x = 0.0; // shape frame -> world; accumulates anchor shifts
    double centroid_x = 0.0;

    bool operator==(const ChainState&) const = default;
};

// Path graph 0-1-...-(n-1); module i owns global sensors [4i, 4i+4) and the
// hinge actuator i. Throws ConfigError for n < 2.
CompartmentTopology build_chain_topology(int module_count);

// Straight chain resting on the ground at the arena center.
ChainState make_chain_state(const ChainConfig& config);

// Ray-cast proximity in the module frame (up, forward, down, back) against
// terrain and the other modules: 1 at contact, 0 beyond sensor_range,
// linear in between.
std::array<double, kChainSensorsPerModule>
module_proximity_sensors(const ChainState& state, int module,
                         const ChainConfig& config);

// One environment tick: hinge angles slew toward command * hinge_limit,
// poses follow from planar forward kinematics, and the friction-anchor
// shift plus wall blocking determine the net horizontal displacement.
void chain_env_step(ChainState& state, std::span<const double> commands,
                    const ChainConfig& config);

// Full episode: the same genome runs in every module, hormones diffuse
// along the chain, each module's actuator output commands its hinge.
// Fitness is the absolute net centroid displacement. Trace columns: tick,
// centroid_x, per-module hinge angle, per-module H0..H{n-1}, per-module
// up/forward/down/back sensors, per-module activation mask.
double run_chain_episode(const Genome& genome, const ChainConfig& config,
                         std::uint64_t episode_seed,
                         EpisodeTrace* trace = nullptr);

} // namespace ahhs
