#include "ahhs/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ahhs/errors.hpp"

namespace ahhs {

namespace {

struct Terrain {
    double wall_lo_min, wall_lo_max; // left wall band
    double wall_hi_min, wall_hi_max; // right wall band
    double wall_height;

    explicit Terrain(const ChainConfig& c)
        : wall_lo_min(-c.wall_distance - c.wall_thickness),
          wall_lo_max(-c.wall_distance), wall_hi_min(c.wall_distance),
          wall_hi_max(c.wall_distance + c.wall_thickness),
          wall_height(c.wall_height) {}

    double height(double x) const {
        if ((x >= wall_lo_min && x <= wall_lo_max) ||
            (x >= wall_hi_min && x <= wall_hi_max)) {
            return wall_height;
        }
        return 0.0;
    }
};

struct Shape {
    std::vector<double> node_x, node_z; // 2N+1 endpoints, internal origin
    std::vector<double> sample_x, sample_z; // endpoints + half-link midpoints
    std::vector<int> sample_module;          // owning module per sample
};

// Planar forward kinematics: each module is two half links joined by its
// hinge; inter-module joints are rigid. Link orientations are shifted to a
// zero mean so neither chain end is pinned to the ground plane.
Shape compute_shape(std::span<const double> hinge_angle, const ChainConfig& config) {
    const int n = static_cast<int>(hinge_angle.size());
    const int links = 2 * n;
    std::vector<double> orientation(links);
    double running = 0.0;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        orientation[2 * i] = running;
        sum += running;
        running += hinge_angle[i];
        orientation[2 * i + 1] = running;
        sum += running;
    }
    const double mean = sum / links;

    Shape shape;
    shape.node_x.resize(links + 1);
    shape.node_z.resize(links + 1);
    shape.node_x[0] = 0.0;
    shape.node_z[0] = 0.0;
    const double half = config.module_length / 2.0;
    for (int k = 0; k < links; ++k) {
        const double a = orientation[k] - mean;
        shape.node_x[k + 1] = shape.node_x[k] + half * std::cos(a);
        shape.node_z[k + 1] = shape.node_z[k] + half * std::sin(a);
    }

    shape.sample_x.reserve(2 * links + 1);
    shape.sample_z.reserve(2 * links + 1);
    shape.sample_module.reserve(2 * links + 1);
    for (int k = 0; k <= links; ++k) {
        shape.sample_x.push_back(shape.node_x[k]);
        shape.sample_z.push_back(shape.node_z[k]);
        shape.sample_module.push_back(std::clamp((k - 1) / 2, 0, n - 1));
    }
    for (int k = 0; k < links; ++k) {
        shape.sample_x.push_back((shape.node_x[k] + shape.node_x[k + 1]) / 2.0);
        shape.sample_z.push_back((shape.node_z[k] + shape.node_z[k + 1]) / 2.0);
        shape.sample_module.push_back(k / 2);
    }
    return shape;
}

// vertical offset that rests the shape on the terrain
double drape_offset(const Shape& shape, double x_shift, const Terrain& terrain) {
    double offset = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < shape.sample_x.size(); ++i) {
        offset = std::max(offset,
                          terrain.height(shape.sample_x[i] + x_shift) - shape.sample_z[i]);
    }
    return offset;
}

} // namespace

void ChainConfig::validate() const {
    if (module_count < 2) throw ConfigError("environment.chain.module_count: must be >= 2");
    if (hinge_limit <= 0.0 || hinge_limit > std::numbers::pi / 2.0) {
        throw ConfigError("environment.chain.hinge_limit_deg: must be in (0, 90]");
    }
    if (hinge_slew <= 0.0) throw ConfigError("environment.chain.hinge_slew_deg: must be > 0");
    if (episode_ticks < 1) throw ConfigError("environment.chain.episode_ticks: must be >= 1");
    if (module_length <= 0.0) throw ConfigError("environment.chain.module_length: must be > 0");
    if (wall_distance <= 0.0) throw ConfigError("environment.chain.wall_distance: must be > 0");
    if (wall_thickness <= 0.0) throw ConfigError("environment.chain.wall_thickness: must be > 0");
    if (wall_height < 0.0) throw ConfigError("environment.chain.wall_height: must be >= 0");
    if (sensor_range <= 0.0) throw ConfigError("environment.chain.sensor_range: must be > 0");
    if (module_radius <= 0.0) throw ConfigError("environment.chain.module_radius: must be > 0");
    if (friction < 0.0) throw ConfigError("environment.chain.friction: must be >= 0");
    if (anchor_baseline <= 0.0) {
        throw ConfigError("environment.chain.anchor_baseline: must be > 0");
    }
}

CompartmentTopology build_chain_topology(int module_count) {
    if (module_count < 2) {
        throw ConfigError("chain topology: need at least 2 modules");
    }
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<int>> sensors(module_count);
    std::vector<std::vector<int>> actuators(module_count);
    for (int m = 0; m < module_count; ++m) {
        if (m + 1 < module_count) edges.emplace_back(m, m + 1);
        for (int s = 0; s < kChainSensorsPerModule; ++s) {
            sensors[m].push_back(m * kChainSensorsPerModule + s);
        }
        actuators[m].push_back(m);
    }
    return CompartmentTopology::make(module_count, std::move(edges),
                                     std::move(sensors), std::move(actuators));
}

ChainState make_chain_state(const ChainConfig& config) {
    config.validate();
    const int n = config.module_count;
    ChainState state;
    state.hinge_angle.assign(n, 0.0);
    state.hinge_command.assign(n, 0.0);

    const Shape shape = compute_shape(state.hinge_angle, config);
    // center the straight chain on the arena origin
    double centroid = 0.0;
    for (int i = 0; i < n; ++i) centroid += shape.node_x[2 * i + 1];
    centroid /= n;
    const double offset = -centroid;
    state.world_offset_x = offset;

    const Terrain terrain(config);
    const double z_off = drape_offset(shape, offset, terrain);

    state.node_x.resize(shape.node_x.size());
    state.node_z.resize(shape.node_z.size());
    for (std::size_t k = 0; k < shape.node_x.size(); ++k) {
        state.node_x[k] = shape.node_x[k] + offset;
        state.node_z[k] = shape.node_z[k] + z_off;
    }
    state.module_x.resize(n);
    state.module_z.resize(n);
    state.contact.assign(n, 0);
    std::vector<double> clearance(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < shape.sample_x.size(); ++i) {
        const double x = shape.sample_x[i] + offset;
        const double z = shape.sample_z[i] + z_off;
        clearance[shape.sample_module[i]] =
            std::min(clearance[shape.sample_module[i]], z - terrain.height(x));
    }
    for (int i = 0; i < n; ++i) {
        state.module_x[i] = state.node_x[2 * i + 1];
        state.module_z[i] = state.node_z[2 * i + 1];
        state.contact[i] = clearance[i] <= config.contact_tolerance ? 1 : 0;
    }
    state.centroid_x = 0.0;
    for (int i = 0; i < n; ++i) state.centroid_x += state.module_x[i];
    state.centroid_x /= n;
    return state;
}

void chain_env_step(ChainState& state, std::span<const double> commands,
                    const ChainConfig& config) {
    const int n = config.module_count;

    for (int i = 0; i < n; ++i) {
        const double target =
            std::clamp(commands[i], -1.0, 1.0) * config.hinge_limit;
        state.hinge_command[i] = target;
        const double step =
            std::clamp(target - state.hinge_angle[i], -config.hinge_slew,
                       config.hinge_slew);
        state.hinge_angle[i] += step;
    }

    const Shape shape = compute_shape(state.hinge_angle, config);
    const Terrain terrain(config);

    // provisional placement keeps the previous world offset, so an unchanged
    // pose stays put bit-identically; the anchor shift below then measures
    // the contact-weighted slip of the new shape against the old positions
    const double world_offset = state.world_offset_x;

    double weight_sum = 0.0;
    double weighted_dx = 0.0;
    for (int i = 0; i < n; ++i) {
        const double new_x = shape.node_x[2 * i + 1] + world_offset;
        const double dx = new_x - state.module_x[i];
        const double w = config.anchor_baseline + config.friction * state.contact[i];
        weight_sum += w;
        weighted_dx += w * dx;
    }
    double shift = -(weighted_dx / weight_sum);

    // wall blocking: a sample point below the wall top may not cross a wall
    // face horizontally
    const double z_provisional = drape_offset(shape, world_offset, terrain);
    for (std::size_t i = 0; i < shape.sample_x.size(); ++i) {
        const double x = shape.sample_x[i] + world_offset;
        const double z = shape.sample_z[i] + z_provisional;
        if (z >= terrain.wall_height) continue;
        if (shift > 0.0) {
            for (double face : {terrain.wall_lo_min, terrain.wall_hi_min}) {
                if (x <= face && x + shift > face) shift = face - x;
            }
        } else if (shift < 0.0) {
            for (double face : {terrain.wall_lo_max, terrain.wall_hi_max}) {
                if (x >= face && x + shift < face) shift = face - x;
            }
        }
    }

    const double final_offset = world_offset + shift;
    state.world_offset_x = final_offset;
    const double z_off = drape_offset(shape, final_offset, terrain);

    for (std::size_t k = 0; k < shape.node_x.size(); ++k) {
        state.node_x[k] = shape.node_x[k] + final_offset;
        state.node_z[k] = shape.node_z[k] + z_off;
    }
    std::vector<double> clearance(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < shape.sample_x.size(); ++i) {
        const double x = shape.sample_x[i] + final_offset;
        const double z = shape.sample_z[i] + z_off;
        clearance[shape.sample_module[i]] =
            std::min(clearance[shape.sample_module[i]], z - terrain.height(x));
    }
    double centroid = 0.0;
    for (int i = 0; i < n; ++i) {
        state.module_x[i] = state.node_x[2 * i + 1];
        state.module_z[i] = state.node_z[2 * i + 1];
        state.contact[i] = clearance[i] <= config.contact_tolerance ? 1 : 0;
        centroid += state.module_x[i];
    }
    state.centroid_x = centroid / n;
}

std::array<double, kChainSensorsPerModule>
module_proximity_sensors(const ChainState& state, int module,
                         const ChainConfig& config) {
    const Terrain terrain(config);
    const int n = config.module_count;

    const double px = state.module_x[module];
    const double pz = state.module_z[module];
    double ax = state.node_x[2 * module + 2] - state.node_x[2 * module];
    double az = state.node_z[2 * module + 2] - state.node_z[2 * module];
    const double len = std::hypot(ax, az);
    if (len > 0.0) {
        ax /= len;
        az /= len;
    } else {
        ax = 1.0;
        az = 0.0;
    }

    const auto cast = [&](double dx, double dz) -> double {
        double best = std::numeric_limits<double>::infinity();
        // ground plane; a ray grazing along the surface (dz == 0) is no hit
        if (pz < 0.0) {
            best = 0.0;
        } else if (dz < 0.0) {
            best = std::min(best, -pz / dz);
        }
        // wall boxes (slab test)
        const auto box = [&](double xlo, double xhi, double zlo, double zhi) {
            double tmin = 0.0;
            double tmax = std::numeric_limits<double>::infinity();
            for (int axis = 0; axis < 2; ++axis) {
                const double origin = axis == 0 ? px : pz;
                const double dir = axis == 0 ? dx : dz;
                const double lo = axis == 0 ? xlo : zlo;
                const double hi = axis == 0 ? xhi : zhi;
                if (dir == 0.0) {
                    if (origin < lo || origin > hi) return;
                } else {
                    double t1 = (lo - origin) / dir;
                    double t2 = (hi - origin) / dir;
                    if (t1 > t2) std::swap(t1, t2);
                    tmin = std::max(tmin, t1);
                    tmax = std::min(tmax, t2);
                    if (tmin > tmax) return;
                }
            }
            best = std::min(best, tmin);
        };
        box(terrain.wall_lo_min, terrain.wall_lo_max, 0.0, terrain.wall_height);
        box(terrain.wall_hi_min, terrain.wall_hi_max, 0.0, terrain.wall_height);
        // other modules as discs
        for (int m = 0; m < n; ++m) {
            if (m == module) continue;
            const double ocx = px - state.module_x[m];
            const double ocz = pz - state.module_z[m];
            const double c = ocx * ocx + ocz * ocz -
                             config.module_radius * config.module_radius;
            if (c <= 0.0) {
                best = 0.0;
                continue;
            }
            const double b = ocx * dx + ocz * dz;
            const double disc = b * b - c;
            if (disc < 0.0) continue;
            const double t = -b - std::sqrt(disc);
            if (t >= 0.0) best = std::min(best, t);
        }
        if (best > config.sensor_range) return 0.0;
        return std::clamp(1.0 - best / config.sensor_range, 0.0, 1.0);
    };

    std::array<double, kChainSensorsPerModule> out{};
    const double upx = -az, upz = ax;
    out[kSensorUp] = cast(upx, upz);
    out[kSensorForward] = cast(ax, az);
    out[kSensorDown] = cast(-upx, -upz);
    out[kSensorBack] = cast(-ax, -az);
    return out;
}

double run_chain_episode(const Genome& genome, const ChainConfig& config,
                         std::uint64_t episode_seed, EpisodeTrace* trace) {
    config.validate();
    const Controller controller(genome, build_chain_topology(config.module_count),
                                config.decode);
    CompartmentStates states = controller.make_states();
    const int n = config.module_count;
    const int hormone_count = controller.hormone_count();
    const int rule_count = controller.rule_count();

    ChainState chain = make_chain_state(config);
    const double start_x = chain.centroid_x;

    if (trace != nullptr) {
        *trace = EpisodeTrace{};
        trace->seed = episode_seed;
        trace->rule_count = rule_count;
        trace->value_columns = {"centroid_x"};
        for (int m = 0; m < n; ++m) {
            trace->value_columns.push_back("m" + std::to_string(m) + "_hinge");
        }
        for (int m = 0; m < n; ++m) {
            for (int h = 0; h < hormone_count; ++h) {
                trace->value_columns.push_back("m" + std::to_string(m) + "_H" +
                                               std::to_string(h));
            }
        }
        static constexpr const char* kRayNames[] = {"up", "forward", "down", "back"};
        for (int m = 0; m < n; ++m) {
            for (const char* ray : kRayNames) {
                trace->value_columns.push_back("m" + std::to_string(m) + "_" + ray);
            }
        }
        for (int m = 0; m < n; ++m) {
            trace->mask_columns.push_back("m" + std::to_string(m) + "_activated");
        }
    }

    std::vector<double> sensors(static_cast<std::size_t>(n) * kChainSensorsPerModule);
    std::vector<double> actuators(n, 0.0);
    TickEffects effects;

    for (int tick = 0; tick < config.episode_ticks; ++tick) {
        for (int m = 0; m < n; ++m) {
            const auto readings = module_proximity_sensors(chain, m, config);
            std::copy(readings.begin(), readings.end(),
                      sensors.begin() + static_cast<std::size_t>(m) * kChainSensorsPerModule);
        }
        controller.tick(sensors, states, effects, actuators);
        chain_env_step(chain, actuators, config);

        if (trace != nullptr) {
            std::vector<double> row;
            row.reserve(trace->value_columns.size());
            row.push_back(chain.centroid_x);
            for (int m = 0; m < n; ++m) row.push_back(chain.hinge_angle[m]);
            row.insert(row.end(), states.raw().begin(), states.raw().end());
            row.insert(row.end(), sensors.begin(), sensors.end());

            std::vector<RuleMask> row_masks;
            row_masks.reserve(n);
            for (int m = 0; m < n; ++m) {
                RuleMask mask(rule_count, 0);
                for (int r = 0; r < rule_count; ++r) {
                    mask[r] =
                        effects.activated[static_cast<std::size_t>(m) * rule_count + r];
                }
                row_masks.push_back(std::move(mask));
            }
            trace->append_row(tick, std::move(row), std::move(row_masks));
        }
    }
    return std::abs(chain.centroid_x - start_x);
}

} // namespace ahhs
