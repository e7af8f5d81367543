#include "ahhs/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ahhs {

double trigger_weight(double x, double center, double width) {
    const double distance = std::abs(x - center);
    if (distance >= width) return 0.0;
    return (width - distance) / width;
}

FloatingIndex resolve_floating_hormone_index(double gene, int hormone_count) {
    FloatingIndex out;
    if (hormone_count <= 1) return out;
    const double f = gene * (hormone_count - 1);
    double integral = 0.0;
    const double frac = std::modf(f, &integral);
    out.lo = std::clamp(static_cast<int>(integral), 0, hormone_count - 1);
    if (frac == 0.0) {
        out.hi = out.lo;
        out.lo_share = 1.0;
        out.hi_share = 0.0;
    } else {
        out.hi = std::min(out.lo + 1, hormone_count - 1);
        out.lo_share = 1.0 - frac;
        out.hi_share = frac;
    }
    return out;
}

int resolve_discrete_index(double gene, int count) {
    if (count <= 1) return 0;
    const int idx = static_cast<int>(std::lround(gene * (count - 1)));
    return std::clamp(idx, 0, count - 1);
}

bool TickEffects::rule_activated(int rule, int rule_count) const {
    for (std::size_t i = rule; i < activated.size();
         i += static_cast<std::size_t>(rule_count)) {
        if (activated[i]) return true;
    }
    return false;
}

Controller::Controller(const Genome& genome, CompartmentTopology topology,
                       DecodeConfig decode)
    : topology_(std::move(topology)), decode_(decode),
      hormone_count_(genome.hormone_count()), variant_(genome.variant) {
    topology_.validate();
    if (genome.hormone_count() < 1 || genome.rule_count() < 1) {
        throw std::invalid_argument("controller: genome needs >= 1 hormone and rule");
    }

    const double degree_bound = std::max(1, topology_.max_degree());
    specs_.reserve(genome.hormones.size());
    for (const auto& h : genome.hormones) {
        HormoneSpec spec;
        spec.base_production = h.production;
        spec.decay_rate = h.decay;
        // scaled so one synchronous exchange step cannot overshoot
        spec.diffusion_coefficient = h.diffusion / degree_bound;
        specs_.push_back(spec);
    }

    rules_.reserve(genome.rules.size());
    for (const auto& r : genome.rules) {
        DecodedRule d;
        d.weights = r.weights;
        d.type = r.type;
        d.trigger_center = r.trigger_center;
        d.trigger_width = std::max(r.trigger_width, decode_.min_trigger_width);
        d.threshold = r.threshold;
        d.direction = r.direction;
        d.input_hormone = resolve_discrete_index(r.input_index, hormone_count_);
        d.output = resolve_floating_hormone_index(r.output_hormone, hormone_count_);
        d.lambda = (2.0 * r.dependent_dose - 1.0) * decode_.lambda_max;
        d.kappa = (2.0 * r.fixed_dose - 1.0) * decode_.kappa_max;
        rules_.push_back(d);
    }

    // Resolve per-compartment sensor/actuator picks once; the same gene maps
    // onto whatever the compartment offers.
    const int compartments = topology_.compartment_count;
    const int rule_count = static_cast<int>(rules_.size());
    sensor_pick_.assign(static_cast<std::size_t>(compartments) * rule_count, -1);
    actuator_pick_.assign(static_cast<std::size_t>(compartments) * rule_count, -1);
    for (int c = 0; c < compartments; ++c) {
        const auto& comp_sensors = topology_.sensors[c];
        const auto& comp_actuators = topology_.actuators[c];
        for (int r = 0; r < rule_count; ++r) {
            const std::size_t idx = static_cast<std::size_t>(c) * rule_count + r;
            if (!comp_sensors.empty()) {
                const int pick = resolve_discrete_index(
                    genome.rules[r].input_index,
                    static_cast<int>(comp_sensors.size()));
                sensor_pick_[idx] = comp_sensors[pick];
            }
            if (!comp_actuators.empty()) {
                const int pick = resolve_discrete_index(
                    genome.rules[r].actuator_index,
                    static_cast<int>(comp_actuators.size()));
                actuator_pick_[idx] = comp_actuators[pick];
            }
        }
    }
}

void Controller::evaluate_rules_into(std::span<const double> sensors,
                                     const CompartmentStates& states,
                                     TickEffects& effects) const {
    const int compartments = topology_.compartment_count;
    const int rule_count = static_cast<int>(rules_.size());
    effects.hormone_deltas.assign(
        static_cast<std::size_t>(compartments) * hormone_count_, 0.0);
    effects.actuator_contributions.assign(topology_.actuator_count, 0.0);
    effects.activated.assign(static_cast<std::size_t>(compartments) * rule_count, 0);

    for (int c = 0; c < compartments; ++c) {
        const std::span<const double> h = states.compartment(c);
        double* deltas =
            effects.hormone_deltas.data() + static_cast<std::size_t>(c) * hormone_count_;
        for (int r = 0; r < rule_count; ++r) {
            const DecodedRule& rule = rules_[r];
            const std::size_t pick_idx = static_cast<std::size_t>(c) * rule_count + r;
            const int sensor_id = sensor_pick_[pick_idx];
            const int actuator_id = actuator_pick_[pick_idx];
            const double hormone_in = h[rule.input_hormone];

            const auto deposit = [&](double amount) {
                deltas[rule.output.lo] += amount * rule.output.lo_share;
                if (rule.output.hi_share != 0.0) {
                    deltas[rule.output.hi] += amount * rule.output.hi_share;
                }
            };

            if (variant_ == Variant::ahhs2) {
                const double theta_h =
                    trigger_weight(hormone_in, rule.trigger_center, rule.trigger_width);
                double theta_s = 0.0;
                if (sensor_id >= 0) {
                    theta_s = trigger_weight(sensors[sensor_id], rule.trigger_center,
                                             rule.trigger_width);
                }
                if (theta_s > 0.0 || theta_h > 0.0) {
                    effects.activated[pick_idx] = 1;
                }
                if (theta_s > 0.0 && rule.weights[kWeightSensor] > 0.0) {
                    const double s = sensors[sensor_id];
                    deposit(rule.weights[kWeightSensor] * theta_s *
                            (rule.lambda * s + rule.kappa));
                }
                if (theta_h > 0.0) {
                    if (rule.weights[kWeightLinearHormone] > 0.0) {
                        deposit(rule.weights[kWeightLinearHormone] * theta_h *
                                (rule.lambda * hormone_in + rule.kappa));
                    }
                    if (rule.weights[kWeightNonlinearHormone] > 0.0) {
                        // dx/dt = x*y with x the target hormone, y the input
                        const double base = rule.weights[kWeightNonlinearHormone] *
                                            theta_h * rule.lambda * hormone_in;
                        deltas[rule.output.lo] +=
                            base * h[rule.output.lo] * rule.output.lo_share;
                        if (rule.output.hi_share != 0.0) {
                            deltas[rule.output.hi] +=
                                base * h[rule.output.hi] * rule.output.hi_share;
                        }
                    }
                    if (actuator_id >= 0 && rule.weights[kWeightActuator] > 0.0) {
                        effects.actuator_contributions[actuator_id] +=
                            rule.weights[kWeightActuator] * theta_h *
                            (rule.lambda * hormone_in + rule.kappa);
                    }
                }
            } else {
                // AHHS1: discrete type, hard threshold, full-strength response
                double input = hormone_in;
                if (rule.type == RuleType::sensor) {
                    if (sensor_id < 0) continue;
                    input = sensors[sensor_id];
                }
                const bool fired = rule.direction == ThresholdDirection::exceed
                                       ? input > rule.threshold
                                       : input < rule.threshold;
                if (!fired) continue;
                effects.activated[pick_idx] = 1;
                const double amount = rule.lambda * input + rule.kappa;
                switch (rule.type) {
                case RuleType::sensor:
                case RuleType::hormone:
                    deposit(amount);
                    break;
                case RuleType::actuator:
                    if (actuator_id >= 0) {
                        effects.actuator_contributions[actuator_id] += amount;
                    }
                    break;
                case RuleType::idle:
                    break;
                }
            }
        }
    }
}

TickEffects Controller::evaluate_rules(std::span<const double> sensors,
                                       const CompartmentStates& states) const {
    TickEffects effects;
    evaluate_rules_into(sensors, states, effects);
    return effects;
}

void Controller::diffuse(CompartmentStates& states) const {
    const std::vector<double> snapshot = states.raw();
    const int compartments = topology_.compartment_count;
    for (int c = 0; c < compartments; ++c) {
        const std::size_t base = static_cast<std::size_t>(c) * hormone_count_;
        for (int h = 0; h < hormone_count_; ++h) {
            const double d = specs_[h].diffusion_coefficient;
            if (d == 0.0) continue;
            double exchange = 0.0;
            for (int n : topology_.neighbors[c]) {
                exchange += snapshot[static_cast<std::size_t>(n) * hormone_count_ + h] -
                            snapshot[base + h];
            }
            states.raw()[base + h] += d * exchange;
        }
    }
}

void Controller::tick(std::span<const double> sensors, CompartmentStates& states,
                      TickEffects& effects, std::span<double> actuators_out) const {
    evaluate_rules_into(sensors, states, effects);

    const int compartments = topology_.compartment_count;
    auto& values = states.raw();
    for (int c = 0; c < compartments; ++c) {
        const std::size_t base = static_cast<std::size_t>(c) * hormone_count_;
        for (int h = 0; h < hormone_count_; ++h) {
            double v = values[base + h];
            v *= 1.0 - specs_[h].decay_rate;
            v += specs_[h].base_production;
            v += effects.hormone_deltas[base + h];
            values[base + h] = v;
        }
    }

    diffuse(states);

    for (auto& v : values) v = std::clamp(v, 0.0, 1.0);

    for (int a = 0; a < topology_.actuator_count; ++a) {
        actuators_out[a] = std::clamp(effects.actuator_contributions[a], -1.0, 1.0);
    }
}

TickResult controller_tick(const Controller& controller,
                           std::span<const double> sensors,
                           const CompartmentStates& states) {
    TickResult result;
    result.states = states;
    result.actuators.assign(controller.topology().actuator_count, 0.0);
    TickEffects effects;
    controller.tick(sensors, result.states, effects, result.actuators);
    result.activated = std::move(effects.activated);
    return result;
}

} // namespace ahhs
