#include "ahhs/pendulum.hpp"

#include <algorithm>
#include <cmath>

#include "ahhs/errors.hpp"

namespace ahhs {

namespace {

constexpr double kPi = std::numbers::pi;

double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

} // namespace

void PendulumConfig::validate() const {
    if (track_width <= 0.0) throw ConfigError("environment.pendulum.track_width: must be > 0");
    if (pole_length <= 0.0) throw ConfigError("environment.pendulum.pole_length: must be > 0");
    if (gravity <= 0.0) throw ConfigError("environment.pendulum.gravity: must be > 0");
    if (crab_max_speed <= 0.0) throw ConfigError("environment.pendulum.crab_max_speed: must be > 0");
    if (angular_friction < 0.0) throw ConfigError("environment.pendulum.angular_friction: must be >= 0");
    if (dt <= 0.0) throw ConfigError("environment.pendulum.dt: must be > 0");
    if (episode_ticks < 1) throw ConfigError("environment.pendulum.episode_ticks: must be >= 1");
    if (noise_amplitude < 0.0 || noise_amplitude >= 1.0) {
        throw ConfigError("environment.pendulum.noise_amplitude: must be in [0,1)");
    }
    if (ticks_per_control < 1) {
        throw ConfigError("environment.pendulum.ticks_per_control: must be >= 1");
    }
}

double wrap_angle(double phi) {
    phi = std::remainder(phi, 2.0 * kPi); // [-pi, pi]
    if (phi <= -kPi) phi += 2.0 * kPi;
    return phi;
}

PendulumState pendulum_step(const PendulumState& state, double command,
                            const PendulumConfig& config) {
    PendulumState next = state;
    const double dt = config.dt;
    const double omega_cap = kAngularVelocityCap / dt;

    // kinematic crab: the command sets the velocity, walls stop it
    const double v_prev = state.crab_v;
    double v = std::clamp(command, -1.0, 1.0) * config.crab_max_speed;
    double x = state.crab_x + v * dt;
    if (x <= 0.0) {
        x = 0.0;
        v = 0.0;
    } else if (x >= config.track_width) {
        x = config.track_width;
        v = 0.0;
    }
    next.crab_x = x;
    next.crab_v = v;
    const double crab_accel = (v - v_prev) / dt;

    const double g_over_l = config.gravity / config.pole_length;
    const double drive = crab_accel / config.pole_length;
    const auto accel = [&](double phi, double omega) {
        return g_over_l * std::sin(phi) - drive * std::cos(phi) -
               config.angular_friction * omega;
    };

    // velocity Verlet; the half-step velocity moves phi, so capping it
    // bounds the per-tick angle change
    double omega_half = state.omega + 0.5 * accel(state.phi, state.omega) * dt;
    omega_half = std::clamp(omega_half, -omega_cap, omega_cap);
    next.phi = wrap_angle(state.phi + omega_half * dt);
    next.omega = omega_half + 0.5 * accel(next.phi, omega_half) * dt;
    next.omega = std::clamp(next.omega, -omega_cap, omega_cap);
    return next;
}

std::array<double, kPendulumSensorCount>
read_pendulum_sensors(const PendulumState& state, const PendulumConfig& config,
                      Rng* noise) {
    std::array<double, kPendulumSensorCount> s{};
    const double phi = state.phi;
    const double half = kPi / 2.0;
    if (phi > 0.0 && phi <= half) {
        s[0] = 1.0 - phi / half; // toward the top from the positive side
    } else if (phi > half && phi <= kPi) {
        s[1] = (phi - half) / half; // toward the bottom
    } else if (phi > -kPi && phi <= -half) {
        s[2] = (-phi - half) / half;
    } else if (phi > -half && phi <= 0.0) {
        s[3] = 1.0 + phi / half;
    }

    s[4] = clamp_unit(1.0 - state.crab_x / config.track_width);
    s[5] = clamp_unit(1.0 - (config.track_width - state.crab_x) / config.track_width);

    const double speed = state.crab_v / config.crab_max_speed;
    s[6] = clamp_unit(speed);
    s[7] = clamp_unit(-speed);

    const double turn = state.omega * config.dt / kAngularVelocityCap;
    s[8] = clamp_unit(turn);
    s[9] = clamp_unit(-turn);

    if (noise != nullptr && config.noise_amplitude > 0.0) {
        for (auto& v : s) {
            v = clamp_unit(v + noise->uniform(-config.noise_amplitude,
                                              config.noise_amplitude));
        }
    }
    return s;
}

CompartmentTopology pendulum_topology() {
    return CompartmentTopology::make(
        2, {{0, 1}},
        {{0, 1, 4, 7, 9}, {2, 3, 5, 6, 8}}, // left | right sensor bank
        {{0}, {1}});                        // A0 | A1
}

double pendulum_tick_reward(double phi) { return (kPi - std::abs(phi)) / kPi; }

double run_pendulum_episode(const Genome& genome, const PendulumConfig& config,
                            std::uint64_t episode_seed, EpisodeTrace* trace) {
    config.validate();
    const Controller controller(genome, pendulum_topology(), config.decode);
    CompartmentStates states = controller.make_states();
    const int hormone_count = controller.hormone_count();
    const int rule_count = controller.rule_count();

    PendulumState state;
    state.crab_x = config.track_width / 2.0;

    Rng noise(derive_seed(episode_seed, {0x6e6fu}));
    Rng* noise_ptr = config.noise_amplitude > 0.0 ? &noise : nullptr;

    if (trace != nullptr) {
        *trace = EpisodeTrace{};
        trace->seed = episode_seed;
        trace->rule_count = rule_count;
        trace->value_columns = {"phi", "omega", "crab_x"};
        for (int i = 0; i < kPendulumSensorCount; ++i) {
            trace->value_columns.push_back("S" + std::to_string(i));
        }
        for (const char* side : {"left", "right"}) {
            for (int h = 0; h < hormone_count; ++h) {
                trace->value_columns.push_back(std::string(side) + "_H" +
                                               std::to_string(h));
            }
        }
        trace->value_columns.push_back("A0");
        trace->value_columns.push_back("A1");
        trace->mask_columns = {"activated"};
    }

    TickEffects effects;
    std::array<double, kPendulumActuatorCount> actuators{};
    std::array<double, kPendulumSensorCount> sensors{};
    double reward_sum = 0.0;

    for (int tick = 0; tick < config.episode_ticks; ++tick) {
        if (tick % config.ticks_per_control == 0) {
            sensors = read_pendulum_sensors(state, config, noise_ptr);
            controller.tick(sensors, states, effects, actuators);
        }
        const double command = actuators[1] - actuators[0];
        state = pendulum_step(state, command, config);
        reward_sum += pendulum_tick_reward(state.phi);

        if (trace != nullptr) {
            std::vector<double> row;
            row.reserve(trace->value_columns.size());
            row.push_back(state.phi);
            row.push_back(state.omega);
            row.push_back(state.crab_x);
            row.insert(row.end(), sensors.begin(), sensors.end());
            row.insert(row.end(), states.raw().begin(), states.raw().end());
            row.push_back(actuators[0]);
            row.push_back(actuators[1]);

            RuleMask mask(rule_count, 0);
            for (int r = 0; r < rule_count; ++r) {
                if (effects.rule_activated(r, rule_count)) mask[r] = 1;
            }
            trace->append_row(tick, std::move(row), {std::move(mask)});
        }
    }
    return reward_sum / config.episode_ticks;
}

} // namespace ahhs
