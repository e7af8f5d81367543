#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ahhs {

enum class Variant : std::uint8_t { ahhs1, ahhs2 };

// Discrete rule types of the original controller design (AHHS1).
enum class RuleType : std::uint8_t { sensor, hormone, actuator, idle };

enum class ThresholdDirection : std::uint8_t { exceed, fall_below };

// Rule-type weight slots of the redesigned controller (AHHS2). One rule
// carries a weight for every type; the weights live on the probability
// simplex and the idle weight acts as an evolvable off-switch.
inline constexpr int kWeightSensor = 0;
inline constexpr int kWeightLinearHormone = 1;
inline constexpr int kWeightNonlinearHormone = 2;
inline constexpr int kWeightActuator = 3;
inline constexpr int kWeightIdle = 4;
inline constexpr int kRuleWeightCount = 5;

using RuleWeights = std::array<double, kRuleWeightCount>;

// Per-hormone genes; all three are rates in [0,1]. The diffusion gene is
// scaled by the topology's degree bound when decoded so that a synchronous
// exchange step can never overshoot.
struct HormoneGenes {
    double production = 0.0;
    double decay = 0.0;
    double diffusion = 0.0;

    bool operator==(const HormoneGenes&) const = default;
};

// One evolvable sensor/hormone/actuator interaction. Both controller
// variants share the index and dose genes; trigger window fields are
// AHHS2-only, threshold fields AHHS1-only. The input index gene doubles as
// a sensor index (sensor aspect) and a hormone index (hormone aspects).
struct RuleGenes {
    // AHHS2
    RuleWeights weights{0.0, 0.0, 0.0, 0.0, 1.0};
    double trigger_center = 0.5; // zeta
    double trigger_width = 0.5;  // eta gene, decoded into (0,1]

    // AHHS1
    RuleType type = RuleType::idle;
    double threshold = 0.5;
    ThresholdDirection direction = ThresholdDirection::exceed;

    // shared, all normalized to [0,1]
    double input_index = 0.0;
    double output_hormone = 0.0; // floating output hormone index
    double actuator_index = 0.0;
    double dependent_dose = 0.5; // lambda gene
    double fixed_dose = 0.5;     // kappa gene

    bool operator==(const RuleGenes&) const = default;
};

// Complete heritable description of one controller.
struct Genome {
    Variant variant = Variant::ahhs2;
    std::vector<HormoneGenes> hormones;
    std::vector<RuleGenes> rules;

    int hormone_count() const { return static_cast<int>(hormones.size()); }
    int rule_count() const { return static_cast<int>(rules.size()); }

    // Number of variation slots. A slot is a scalar gene, an AHHS2 weight
    // vector, an AHHS1 type tag, or an AHHS1 direction bit; the composite
    // slots travel as atomic units under crossover.
    std::size_t slot_count() const;

    // Flattened, ordered vector of all normalized genes. Weight vectors
    // expand to five entries, tags and direction bits encode as indices.
    // unflatten() is the exact inverse.
    std::vector<double> flatten() const;
    static Genome unflatten(Variant variant, int hormone_count, int rule_count,
                            const std::vector<double>& flat);

    bool operator==(const Genome&) const = default;
};

// Mutable view of one variation slot.
using SlotRef = std::variant<double*, RuleWeights*, RuleType*, ThresholdDirection*>;
SlotRef gene_slot(Genome& genome, std::size_t index);

const char* to_string(Variant v);
const char* to_string(RuleType t);
const char* to_string(ThresholdDirection d);
Variant variant_from_string(std::string_view s);
RuleType rule_type_from_string(std::string_view s);
ThresholdDirection direction_from_string(std::string_view s);

// JSON serialization (format_version 1). Numeric fields round-trip
// bit-exactly: genome_from_json(genome_to_json(g)) == g.
std::string genome_to_json(const Genome& genome);
Genome genome_from_json(const std::string& text);

void save_genome(const Genome& genome, const std::string& path);
Genome load_genome(const std::string& path);

} // namespace ahhs
