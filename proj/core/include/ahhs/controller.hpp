#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ahhs/genome.hpp"
#include "ahhs/topology.hpp"

namespace ahhs {

// Tent-shaped trigger window: 1 at x == center, linear falloff to 0 at
// |x - center| == width, 0 outside. Requires width > 0 (decode enforces).
double trigger_weight(double x, double center, double width);

// A floating hormone index splits a rule's effect between the two nearest
// integer indices; shares sum to 1. lo == hi with lo_share == 1 when the
// index is exact (and always when hormone_count == 1).
struct FloatingIndex {
    int lo = 0;
    int hi = 0;
    double lo_share = 1.0;
    double hi_share = 0.0;
};
FloatingIndex resolve_floating_hormone_index(double gene, int hormone_count);

// Nearest-integer mapping of a normalized gene onto [0, count).
int resolve_discrete_index(double gene, int count);

// Decode-time ranges for the dose genes and the trigger width floor.
struct DecodeConfig {
    double lambda_max = 2.0; // dependent dose decodes to [-lambda_max, lambda_max]
    double kappa_max = 1.0;  // fixed dose decodes to [-kappa_max, kappa_max]
    double min_trigger_width = 1e-3;

    bool operator==(const DecodeConfig&) const = default;
};

// Decoded per-hormone dynamics parameters.
struct HormoneSpec {
    double base_production = 0.0;      // added per tick
    double decay_rate = 0.0;           // multiplicative fraction removed per tick
    double diffusion_coefficient = 0.0; // exchange fraction per neighbor per tick
};

// Hormone concentrations of all compartments, stored flat.
class CompartmentStates {
public:
    CompartmentStates() = default;
    CompartmentStates(int compartments, int hormones)
        : compartments_(compartments), hormones_(hormones),
          values_(static_cast<std::size_t>(compartments) * hormones, 0.0) {}

    double& at(int c, int h) { return values_[static_cast<std::size_t>(c) * hormones_ + h]; }
    double at(int c, int h) const { return values_[static_cast<std::size_t>(c) * hormones_ + h]; }
    std::span<double> compartment(int c) {
        return {values_.data() + static_cast<std::size_t>(c) * hormones_,
                static_cast<std::size_t>(hormones_)};
    }
    std::span<const double> compartment(int c) const {
        return {values_.data() + static_cast<std::size_t>(c) * hormones_,
                static_cast<std::size_t>(hormones_)};
    }

    int compartment_count() const { return compartments_; }
    int hormone_count() const { return hormones_; }
    std::vector<double>& raw() { return values_; }
    const std::vector<double>& raw() const { return values_; }

    bool operator==(const CompartmentStates&) const = default;

private:
    int compartments_ = 0;
    int hormones_ = 0;
    std::vector<double> values_;
};

// Additive effects collected from one rule-evaluation pass plus the rule
// activation record, all against the pre-tick snapshot.
struct TickEffects {
    std::vector<double> hormone_deltas;         // flat [compartment][hormone]
    std::vector<double> actuator_contributions; // [global actuator]
    std::vector<std::uint8_t> activated;        // flat [compartment][rule], 0/1

    bool rule_activated(int rule, int rule_count) const;
};

struct DecodedRule {
    RuleWeights weights{};
    RuleType type = RuleType::idle;
    double trigger_center = 0.0;
    double trigger_width = 1.0;
    double threshold = 0.0;
    ThresholdDirection direction = ThresholdDirection::exceed;
    int input_hormone = 0;   // hormone aspects read this concentration
    FloatingIndex output;    // hormone dose targets
    double lambda = 0.0;     // dependent dose
    double kappa = 0.0;      // fixed dose
};

// A genome decoded against a topology. Immutable once constructed; safe to
// share across threads. One tick:
//   1. evaluate all rules in every compartment against the pre-tick snapshot
//   2. multiplicative decay
//   3. base production
//   4. add rule hormone deltas
//   5. synchronous diffusion exchange
//   6. clamp concentrations to [0,1]
//   7. actuator value = clamp(sum of contributions, [-1,1])
class Controller {
public:
    Controller(const Genome& genome, CompartmentTopology topology,
               DecodeConfig decode = {});

    const CompartmentTopology& topology() const { return topology_; }
    const std::vector<HormoneSpec>& hormone_specs() const { return specs_; }
    const std::vector<DecodedRule>& decoded_rules() const { return rules_; }
    int hormone_count() const { return hormone_count_; }
    int rule_count() const { return static_cast<int>(rules_.size()); }

    CompartmentStates make_states() const {
        return {topology_.compartment_count, hormone_count_};
    }

    // Rule evaluation only (pipeline step 1); exposed for analysis/tests.
    TickEffects evaluate_rules(std::span<const double> sensors,
                               const CompartmentStates& states) const;

    // One synchronous diffusion exchange (pipeline step 5).
    void diffuse(CompartmentStates& states) const;

    // Full tick, in place. `effects` is scratch that also carries the
    // activation record out; `actuators_out` must have actuator_count slots.
    void tick(std::span<const double> sensors, CompartmentStates& states,
              TickEffects& effects, std::span<double> actuators_out) const;

private:
    void evaluate_rules_into(std::span<const double> sensors,
                             const CompartmentStates& states,
                             TickEffects& effects) const;

    CompartmentTopology topology_;
    DecodeConfig decode_;
    int hormone_count_ = 0;
    Variant variant_ = Variant::ahhs2;
    std::vector<HormoneSpec> specs_;
    std::vector<DecodedRule> rules_;
    std::vector<int> sensor_pick_;   // flat [compartment][rule]; -1 = no sensor
    std::vector<int> actuator_pick_; // flat [compartment][rule]; -1 = no actuator
};

// Pure single-tick transition, the kernel the environments drive.
struct TickResult {
    CompartmentStates states;
    std::vector<double> actuators;
    std::vector<std::uint8_t> activated; // flat [compartment][rule]
};
TickResult controller_tick(const Controller& controller,
                           std::span<const double> sensors,
                           const CompartmentStates& states);

} // namespace ahhs
