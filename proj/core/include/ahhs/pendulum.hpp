#pragma once

#include <array>
#include <cstdint>
#include <numbers>

#include "ahhs/controller.hpp"
#include "ahhs/genome.hpp"
#include "ahhs/rng.hpp"
#include "ahhs/trace.hpp"

namespace ahhs {

// The pendulum may rotate at most 0.05*pi per controller cycle.
inline constexpr double kAngularVelocityCap = 0.05 * std::numbers::pi;

inline constexpr int kPendulumSensorCount = 10;
inline constexpr int kPendulumActuatorCount = 2;

// Crab on a bounded 1D track with a fully rotating pendulum. Angle phi is
// measured from the top position and wrapped to (-pi, pi]; omega is rad per
// tick. Defaults pick gravity so a free pendulum released near the top
// peaks right at the angular-velocity cap when passing the bottom.
struct PendulumConfig {
    double track_width = 4.0; // in pole lengths
    double pole_length = 1.0;
    double gravity = 0.025 * std::numbers::pi * 0.025 * std::numbers::pi;
    double crab_max_speed = 0.025; // track units per tick
    double angular_friction = 0.002;
    double dt = 1.0; // one controller cycle
    int episode_ticks = 2000;
    double noise_amplitude = 0.023; // additive uniform, per sensor per tick
    int ticks_per_control = 1;
    DecodeConfig decode;

    void validate() const; // throws ConfigError

    bool operator==(const PendulumConfig&) const = default;
};

struct PendulumState {
    double phi = std::numbers::pi; // lower equilibrium
    double omega = 0.0;
    double crab_x = 2.0;
    double crab_v = 0.0;

    bool operator==(const PendulumState&) const = default;
};

// Wrap an angle into (-pi, pi].
double wrap_angle(double phi);

// One physics tick. The command in [-1,1] sets the crab velocity; the crab
// is clamped to the walls (velocity zeroed on contact); the pendulum
// integrates phi'' = (g/l) sin(phi) - (x''/l) cos(phi) - friction * omega
// with a velocity-Verlet step, and omega is capped so |dphi| <= 0.05*pi.
PendulumState pendulum_step(const PendulumState& state, double command,
                            const PendulumConfig& config);

// Sensor bank, each value in [0,1] after noise and clamping:
//   S0..S3  quadrant angle ramps: S0 on (0, pi/2] peaking toward the top,
//           S1 on (pi/2, pi] peaking at the bottom, S2/S3 mirrored on the
//           negative side
//   S4/S5   proximity to the wall at x=0 / x=track_width
//   S6/S7   positive / negative crab speed magnitude
//   S8/S9   positive / negative angular velocity, normalized by the cap
// Pass noise = nullptr for noiseless readings.
std::array<double, kPendulumSensorCount>
read_pendulum_sensors(const PendulumState& state, const PendulumConfig& config,
                      Rng* noise);

// Two compartments. Left: sensors S0,S1,S4,S7,S9 and actuator A0.
// Right: sensors S2,S3,S5,S6,S8 and actuator A1.
CompartmentTopology pendulum_topology();

// Per-tick fitness contribution (pi - |phi|)/pi: 1 at the top, 0 hanging.
double pendulum_tick_reward(double phi);

// Full episode from the lower equilibrium with zeroed hormones. The crab
// command is A1 - A0. Returns the tick-averaged reward in [0,1]; fills
// `trace` when given (columns: tick, phi, omega, crab_x, S0..S9, left/right
// H0..H{n-1}, A0, A1, merged activation mask).
double run_pendulum_episode(const Genome& genome, const PendulumConfig& config,
                            std::uint64_t episode_seed,
                            EpisodeTrace* trace = nullptr);

} // namespace ahhs
