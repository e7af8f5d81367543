#include "ahhs/genome.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "ahhs/errors.hpp"

namespace ahhs {

namespace {

using json = nlohmann::ordered_json;

// Slots per rule; both variants happen to use eight.
constexpr std::size_t kRuleSlots = 8;
constexpr std::size_t kHormoneSlots = 3;

} // namespace

std::size_t Genome::slot_count() const {
    return hormones.size() * kHormoneSlots + rules.size() * kRuleSlots;
}

SlotRef gene_slot(Genome& genome, std::size_t index) {
    const std::size_t hormone_span = genome.hormones.size() * kHormoneSlots;
    if (index < hormone_span) {
        HormoneGenes& h = genome.hormones[index / kHormoneSlots];
        switch (index % kHormoneSlots) {
        case 0: return &h.production;
        case 1: return &h.decay;
        default: return &h.diffusion;
        }
    }
    const std::size_t r = (index - hormone_span) / kRuleSlots;
    const std::size_t field = (index - hormone_span) % kRuleSlots;
    RuleGenes& rule = genome.rules.at(r);
    if (genome.variant == Variant::ahhs2) {
        switch (field) {
        case 0: return &rule.weights;
        case 1: return &rule.trigger_center;
        case 2: return &rule.trigger_width;
        case 3: return &rule.input_index;
        case 4: return &rule.output_hormone;
        case 5: return &rule.actuator_index;
        case 6: return &rule.dependent_dose;
        default: return &rule.fixed_dose;
        }
    }
    switch (field) {
    case 0: return &rule.type;
    case 1: return &rule.threshold;
    case 2: return &rule.direction;
    case 3: return &rule.input_index;
    case 4: return &rule.output_hormone;
    case 5: return &rule.actuator_index;
    case 6: return &rule.dependent_dose;
    default: return &rule.fixed_dose;
    }
}

std::vector<double> Genome::flatten() const {
    std::vector<double> flat;
    flat.reserve(hormones.size() * 3 +
                 rules.size() * (variant == Variant::ahhs2 ? 12 : 8));
    for (const auto& h : hormones) {
        flat.push_back(h.production);
        flat.push_back(h.decay);
        flat.push_back(h.diffusion);
    }
    for (const auto& r : rules) {
        if (variant == Variant::ahhs2) {
            flat.insert(flat.end(), r.weights.begin(), r.weights.end());
            flat.push_back(r.trigger_center);
            flat.push_back(r.trigger_width);
        } else {
            flat.push_back(static_cast<double>(r.type));
            flat.push_back(r.threshold);
            flat.push_back(static_cast<double>(r.direction));
        }
        flat.push_back(r.input_index);
        flat.push_back(r.output_hormone);
        flat.push_back(r.actuator_index);
        flat.push_back(r.dependent_dose);
        flat.push_back(r.fixed_dose);
    }
    return flat;
}

Genome Genome::unflatten(Variant variant, int hormone_count, int rule_count,
                         const std::vector<double>& flat) {
    const std::size_t expected =
        static_cast<std::size_t>(hormone_count) * 3 +
        static_cast<std::size_t>(rule_count) * (variant == Variant::ahhs2 ? 12 : 8);
    if (flat.size() != expected) {
        throw ConfigError("genome unflatten: expected " + std::to_string(expected) +
                          " genes, got " + std::to_string(flat.size()));
    }
    Genome g;
    g.variant = variant;
    g.hormones.resize(hormone_count);
    g.rules.resize(rule_count);
    std::size_t i = 0;
    for (auto& h : g.hormones) {
        h.production = flat[i++];
        h.decay = flat[i++];
        h.diffusion = flat[i++];
    }
    for (auto& r : g.rules) {
        if (variant == Variant::ahhs2) {
            for (auto& w : r.weights) w = flat[i++];
            r.trigger_center = flat[i++];
            r.trigger_width = flat[i++];
        } else {
            r.type = static_cast<RuleType>(static_cast<int>(flat[i++]));
            r.threshold = flat[i++];
            r.direction = static_cast<ThresholdDirection>(static_cast<int>(flat[i++]));
        }
        r.input_index = flat[i++];
        r.output_hormone = flat[i++];
        r.actuator_index = flat[i++];
        r.dependent_dose = flat[i++];
        r.fixed_dose = flat[i++];
    }
    return g;
}

const char* to_string(Variant v) {
    return v == Variant::ahhs1 ? "ahhs1" : "ahhs2";
}

const char* to_string(RuleType t) {
    switch (t) {
    case RuleType::sensor: return "sensor";
    case RuleType::hormone: return "hormone";
    case RuleType::actuator: return "actuator";
    default: return "idle";
    }
}

const char* to_string(ThresholdDirection d) {
    return d == ThresholdDirection::exceed ? "exceed" : "fall_below";
}

Variant variant_from_string(std::string_view s) {
    if (s == "ahhs1") return Variant::ahhs1;
    if (s == "ahhs2") return Variant::ahhs2;
    throw ConfigError("unknown variant '" + std::string(s) + "' (expected ahhs1 or ahhs2)");
}

RuleType rule_type_from_string(std::string_view s) {
    if (s == "sensor") return RuleType::sensor;
    if (s == "hormone") return RuleType::hormone;
    if (s == "actuator") return RuleType::actuator;
    if (s == "idle") return RuleType::idle;
    throw ConfigError("unknown rule_type '" + std::string(s) + "'");
}

ThresholdDirection direction_from_string(std::string_view s) {
    if (s == "exceed") return ThresholdDirection::exceed;
    if (s == "fall_below") return ThresholdDirection::fall_below;
    throw ConfigError("unknown direction '" + std::string(s) + "'");
}

namespace {

void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed) {
            if (key == a) { known = true; break; }
        }
        if (!known) throw ConfigError(where + "." + key + ": unknown key");
    }
    for (const char* a : allowed) {
        if (!obj.contains(a)) {
            throw ConfigError(where + "." + a + ": missing key");
        }
    }
}

double number_at(const json& obj, const char* key, const std::string& where) {
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return v.get<double>();
}

} // namespace

std::string genome_to_json(const Genome& genome) {
    json doc;
    doc["format"] = "ahhs-genome";
    doc["format_version"] = 1;
    doc["variant"] = to_string(genome.variant);
    json hormones = json::array();
    for (const auto& h : genome.hormones) {
        hormones.push_back({{"production", h.production},
                            {"decay", h.decay},
                            {"diffusion", h.diffusion}});
    }
    doc["hormones"] = std::move(hormones);
    json rules = json::array();
    for (const auto& r : genome.rules) {
        json rule;
        if (genome.variant == Variant::ahhs2) {
            rule["weights"] = r.weights;
            rule["trigger_center"] = r.trigger_center;
            rule["trigger_width"] = r.trigger_width;
        } else {
            rule["rule_type"] = to_string(r.type);
            rule["threshold"] = r.threshold;
            rule["direction"] = to_string(r.direction);
        }
        rule["input_index"] = r.input_index;
        rule["output_hormone"] = r.output_hormone;
        rule["actuator_index"] = r.actuator_index;
        rule["dependent_dose"] = r.dependent_dose;
        rule["fixed_dose"] = r.fixed_dose;
        rules.push_back(std::move(rule));
    }
    doc["rules"] = std::move(rules);
    return doc.dump(2) + "\n";
}

Genome genome_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("genome: invalid JSON: ") + e.what());
    }
    require_keys(doc, {"format", "format_version", "variant", "hormones", "rules"},
                 "genome");
    if (doc["format"] != "ahhs-genome") {
        throw ConfigError("genome.format: expected \"ahhs-genome\"");
    }
    if (doc["format_version"] != 1) {
        throw ConfigError("genome.format_version: unsupported version");
    }
    Genome g;
    g.variant = variant_from_string(doc["variant"].get<std::string>());
    if (!doc["hormones"].is_array() || doc["hormones"].empty()) {
        throw ConfigError("genome.hormones: expected a non-empty array");
    }
    if (!doc["rules"].is_array() || doc["rules"].empty()) {
        throw ConfigError("genome.rules: expected a non-empty array");
    }
    for (const auto& h : doc["hormones"]) {
        require_keys(h, {"production", "decay", "diffusion"}, "genome.hormones[]");
        HormoneGenes genes;
        genes.production = number_at(h, "production", "genome.hormones[]");
        genes.decay = number_at(h, "decay", "genome.hormones[]");
        genes.diffusion = number_at(h, "diffusion", "genome.hormones[]");
        g.hormones.push_back(genes);
    }
    for (const auto& r : doc["rules"]) {
        RuleGenes rule;
        if (g.variant == Variant::ahhs2) {
            require_keys(r,
                         {"weights", "trigger_center", "trigger_width", "input_index",
                          "output_hormone", "actuator_index", "dependent_dose",
                          "fixed_dose"},
                         "genome.rules[]");
            const auto& w = r.at("weights");
            if (!w.is_array() || w.size() != kRuleWeightCount) {
                throw ConfigError("genome.rules[].weights: expected 5 values");
            }
            for (int i = 0; i < kRuleWeightCount; ++i) {
                rule.weights[i] = w[i].get<double>();
            }
            rule.trigger_center = number_at(r, "trigger_center", "genome.rules[]");
            rule.trigger_width = number_at(r, "trigger_width", "genome.rules[]");
        } else {
            require_keys(r,
                         {"rule_type", "threshold", "direction", "input_index",
                          "output_hormone", "actuator_index", "dependent_dose",
                          "fixed_dose"},
                         "genome.rules[]");
            rule.type = rule_type_from_string(r.at("rule_type").get<std::string>());
            rule.threshold = number_at(r, "threshold", "genome.rules[]");
            rule.direction = direction_from_string(r.at("direction").get<std::string>());
        }
        rule.input_index = number_at(r, "input_index", "genome.rules[]");
        rule.output_hormone = number_at(r, "output_hormone", "genome.rules[]");
        rule.actuator_index = number_at(r, "actuator_index", "genome.rules[]");
        rule.dependent_dose = number_at(r, "dependent_dose", "genome.rules[]");
        rule.fixed_dose = number_at(r, "fixed_dose", "genome.rules[]");
        g.rules.push_back(rule);
    }
    return g;
}

void save_genome(const Genome& genome, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write genome file: " + path);
    out << genome_to_json(genome);
    if (!out) throw IoError("write failed: " + path);
}

Genome load_genome(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open genome file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return genome_from_json(text);
}

} // namespace ahhs
