#include "ahhs/run_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <sstream>

#include "ahhs/errors.hpp"
#include "ahhs/version.hpp"

namespace ahhs {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr double kDegToRad = std::numbers::pi / 180.0;

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed) {
            if (key == a) { known = true; break; }
        }
        if (!known) throw ConfigError(where + "." + key + ": unknown key");
    }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong value type");
    }
}

json decode_to_json(const DecodeConfig& d) {
    return {{"lambda_max", d.lambda_max},
            {"kappa_max", d.kappa_max},
            {"min_trigger_width", d.min_trigger_width}};
}

json pendulum_to_json(const PendulumConfig& p) {
    return {{"track_width", p.track_width},
            {"pole_length", p.pole_length},
            {"gravity", p.gravity},
            {"crab_max_speed", p.crab_max_speed},
            {"angular_friction", p.angular_friction},
            {"dt", p.dt},
            {"episode_ticks", p.episode_ticks},
            {"noise_amplitude", p.noise_amplitude},
            {"ticks_per_control", p.ticks_per_control}};
}

json chain_to_json(const ChainConfig& c) {
    return {{"module_count", c.module_count},
            {"hinge_limit_deg", c.hinge_limit / kDegToRad},
            {"hinge_slew_deg", c.hinge_slew / kDegToRad},
            {"episode_ticks", c.episode_ticks},
            {"module_length", c.module_length},
            {"wall_distance", c.wall_distance},
            {"wall_thickness", c.wall_thickness},
            {"wall_height", c.wall_height},
            {"sensor_range", c.sensor_range},
            {"module_radius", c.module_radius},
            {"friction", c.friction},
            {"anchor_baseline", c.anchor_baseline}};
}

void pendulum_from_json(const json& obj, PendulumConfig& p, const std::string& where) {
    check_keys(obj,
               {"track_width", "pole_length", "gravity", "crab_max_speed",
                "angular_friction", "dt", "episode_ticks", "noise_amplitude",
                "ticks_per_control"},
               where);
    read_field(obj, "track_width", p.track_width, where);
    read_field(obj, "pole_length", p.pole_length, where);
    read_field(obj, "gravity", p.gravity, where);
    read_field(obj, "crab_max_speed", p.crab_max_speed, where);
    read_field(obj, "angular_friction", p.angular_friction, where);
    read_field(obj, "dt", p.dt, where);
    read_field(obj, "episode_ticks", p.episode_ticks, where);
    read_field(obj, "noise_amplitude", p.noise_amplitude, where);
    read_field(obj, "ticks_per_control", p.ticks_per_control, where);
}

void chain_from_json(const json& obj, ChainConfig& c, const std::string& where) {
    check_keys(obj,
               {"module_count", "hinge_limit_deg", "hinge_slew_deg", "episode_ticks",
                "module_length", "wall_distance", "wall_thickness", "wall_height",
                "sensor_range", "module_radius", "friction", "anchor_baseline"},
               where);
    read_field(obj, "module_count", c.module_count, where);
    double limit_deg = c.hinge_limit / kDegToRad;
    double slew_deg = c.hinge_slew / kDegToRad;
    read_field(obj, "hinge_limit_deg", limit_deg, where);
    read_field(obj, "hinge_slew_deg", slew_deg, where);
    c.hinge_limit = limit_deg * kDegToRad;
    c.hinge_slew = slew_deg * kDegToRad;
    read_field(obj, "episode_ticks", c.episode_ticks, where);
    read_field(obj, "module_length", c.module_length, where);
    read_field(obj, "wall_distance", c.wall_distance, where);
    read_field(obj, "wall_thickness", c.wall_thickness, where);
    read_field(obj, "wall_height", c.wall_height, where);
    read_field(obj, "sensor_range", c.sensor_range, where);
    read_field(obj, "module_radius", c.module_radius, where);
    read_field(obj, "friction", c.friction, where);
    read_field(obj, "anchor_baseline", c.anchor_baseline, where);
}

json genome_to_embedded_json(const Genome& g) {
    return json::parse(genome_to_json(g));
}

} // namespace

const char* to_string(EnvironmentKind k) {
    return k == EnvironmentKind::pendulum ? "pendulum" : "chain";
}

int RunConfig::episode_ticks() const {
    return env_kind == EnvironmentKind::pendulum ? pendulum.episode_ticks
                                                 : chain.episode_ticks;
}

FitnessEvaluator RunConfig::make_evaluator() const {
    if (env_kind == EnvironmentKind::pendulum) {
        PendulumConfig cfg = pendulum;
        cfg.decode = decode;
        return [cfg](const Genome& g, std::uint64_t seed) {
            return run_pendulum_episode(g, cfg, seed);
        };
    }
    ChainConfig cfg = chain;
    cfg.decode = decode;
    return [cfg](const Genome& g, std::uint64_t seed) {
        return run_chain_episode(g, cfg, seed);
    };
}

void RunConfig::validate() const {
    if (hormone_count < 1) throw ConfigError("controller.hormone_count: must be >= 1");
    if (rule_count < 1) throw ConfigError("controller.rule_count: must be >= 1");
    if (decode.lambda_max <= 0.0) throw ConfigError("controller.lambda_max: must be > 0");
    if (decode.kappa_max <= 0.0) throw ConfigError("controller.kappa_max: must be > 0");
    if (decode.min_trigger_width <= 0.0 || decode.min_trigger_width > 1.0) {
        throw ConfigError("controller.min_trigger_width: must be in (0,1]");
    }
    if (has_evolution) evolution.validate();
    if (env_kind == EnvironmentKind::pendulum) {
        pendulum.validate();
    } else {
        chain.validate();
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path);
    return text;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

RunConfig parse_run_config(const std::string& json_text,
                           std::span<const std::string> overrides) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    // accept a run manifest in place of a config
    if (doc.is_object() && doc.contains("config") && doc.contains("tool_version")) {
        doc = doc.at("config");
    }

    for (const std::string& entry : overrides) {
        const std::size_t eq = entry.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("override '" + entry + "': expected key=value");
        }
        const std::string path = entry.substr(0, eq);
        const std::string value = entry.substr(eq + 1);
        json parsed;
        try {
            parsed = json::parse(value);
        } catch (const json::parse_error&) {
            parsed = value; // bare word -> string
        }
        json* cursor = &doc;
        std::size_t start = 0;
        while (true) {
            const std::size_t dot = path.find('.', start);
            const std::string key = path.substr(start, dot - start);
            if (key.empty()) throw ConfigError("override '" + entry + "': empty key");
            if (dot == std::string::npos) {
                (*cursor)[key] = parsed;
                break;
            }
            if (!cursor->contains(key) || !(*cursor)[key].is_object()) {
                (*cursor)[key] = json::object();
            }
            cursor = &(*cursor)[key];
            start = dot + 1;
        }
    }

    check_keys(doc,
               {"variant", "controller", "evolution", "environment", "output_dir",
                "master_seed"},
               "config");

    RunConfig config;
    if (doc.contains("variant")) {
        config.variant = variant_from_string(doc.at("variant").get<std::string>());
    }
    if (doc.contains("controller")) {
        const auto& c = doc.at("controller");
        check_keys(c,
                   {"hormone_count", "rule_count", "lambda_max", "kappa_max",
                    "min_trigger_width"},
                   "config.controller");
        read_field(c, "hormone_count", config.hormone_count, "config.controller");
        read_field(c, "rule_count", config.rule_count, "config.controller");
        read_field(c, "lambda_max", config.decode.lambda_max, "config.controller");
        read_field(c, "kappa_max", config.decode.kappa_max, "config.controller");
        read_field(c, "min_trigger_width", config.decode.min_trigger_width,
                   "config.controller");
    }
    if (doc.contains("evolution")) {
        config.has_evolution = true;
        const auto& e = doc.at("evolution");
        check_keys(e,
                   {"population_size", "generations", "mutation_rate",
                    "mutation_max_delta", "crossover_rate", "elitism_count",
                    "fitness_floor", "reference_max_fitness"},
                   "config.evolution");
        read_field(e, "population_size", config.evolution.population_size,
                   "config.evolution");
        read_field(e, "generations", config.evolution.generations, "config.evolution");
        read_field(e, "mutation_rate", config.evolution.mutation_rate,
                   "config.evolution");
        read_field(e, "mutation_max_delta", config.evolution.mutation_max_delta,
                   "config.evolution");
        read_field(e, "crossover_rate", config.evolution.crossover_rate,
                   "config.evolution");
        read_field(e, "elitism_count", config.evolution.elitism_count,
                   "config.evolution");
        read_field(e, "fitness_floor", config.evolution.fitness_floor,
                   "config.evolution");
        if (e.contains("reference_max_fitness") &&
            !e.at("reference_max_fitness").is_null()) {
            double ref = 0.0;
            read_field(e, "reference_max_fitness", ref, "config.evolution");
            config.evolution.reference_max_fitness = ref;
        }
    }
    if (doc.contains("environment")) {
        const auto& env = doc.at("environment");
        check_keys(env, {"type", "pendulum", "chain"}, "config.environment");
        if (!env.contains("type")) {
            throw ConfigError("config.environment.type: missing key");
        }
        const std::string type = env.at("type").get<std::string>();
        if (type == "pendulum") {
            config.env_kind = EnvironmentKind::pendulum;
        } else if (type == "chain") {
            config.env_kind = EnvironmentKind::chain;
        } else {
            throw ConfigError("config.environment.type: unknown environment '" + type +
                              "'");
        }
        if (env.contains("pendulum")) {
            if (config.env_kind != EnvironmentKind::pendulum) {
                throw ConfigError("config.environment.pendulum: section does not match type");
            }
            pendulum_from_json(env.at("pendulum"), config.pendulum,
                               "config.environment.pendulum");
        }
        if (env.contains("chain")) {
            if (config.env_kind != EnvironmentKind::chain) {
                throw ConfigError("config.environment.chain: section does not match type");
            }
            chain_from_json(env.at("chain"), config.chain, "config.environment.chain");
        }
    }
    read_field(doc, "output_dir", config.output_dir, "config");
    if (doc.contains("master_seed")) {
        config.has_master_seed = true;
        read_field(doc, "master_seed", config.master_seed, "config");
    }

    // keep the evolution config's shape fields in sync
    config.evolution.hormone_count = config.hormone_count;
    config.evolution.rule_count = config.rule_count;
    config.evolution.variant = config.variant;
    config.evolution.master_seed = config.master_seed;
    config.evolution.evaluator_id = to_string(config.env_kind);

    config.pendulum.decode = config.decode;
    config.chain.decode = config.decode;

    config.validate();
    return config;
}

RunConfig load_run_config(const std::string& path,
                          std::span<const std::string> overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return parse_run_config(text, overrides);
}

std::string run_config_to_json(const RunConfig& config) {
    json doc;
    doc["variant"] = to_string(config.variant);
    doc["controller"] = {{"hormone_count", config.hormone_count},
                         {"rule_count", config.rule_count},
                         {"lambda_max", config.decode.lambda_max},
                         {"kappa_max", config.decode.kappa_max},
                         {"min_trigger_width", config.decode.min_trigger_width}};
    if (config.has_evolution) {
        json e = {{"population_size", config.evolution.population_size},
                  {"generations", config.evolution.generations},
                  {"mutation_rate", config.evolution.mutation_rate},
                  {"mutation_max_delta", config.evolution.mutation_max_delta},
                  {"crossover_rate", config.evolution.crossover_rate},
                  {"elitism_count", config.evolution.elitism_count},
                  {"fitness_floor", config.evolution.fitness_floor}};
        if (config.evolution.reference_max_fitness) {
            e["reference_max_fitness"] = *config.evolution.reference_max_fitness;
        } else {
            e["reference_max_fitness"] = nullptr;
        }
        doc["evolution"] = std::move(e);
    }
    json env;
    env["type"] = to_string(config.env_kind);
    if (config.env_kind == EnvironmentKind::pendulum) {
        env["pendulum"] = pendulum_to_json(config.pendulum);
    } else {
        env["chain"] = chain_to_json(config.chain);
    }
    doc["environment"] = std::move(env);
    if (!config.output_dir.empty()) doc["output_dir"] = config.output_dir;
    if (config.has_master_seed) doc["master_seed"] = config.master_seed;
    return doc.dump(2) + "\n";
}

std::string history_to_json(const EvolutionHistory& history,
                            const EvolutionConfig& config) {
    json doc;
    doc["format"] = "ahhs-history";
    doc["format_version"] = 1;
    doc["tool_version"] = kToolVersion;
    doc["master_seed"] = config.master_seed;
    doc["evaluator"] = config.evaluator_id;
    doc["evaluator_incidents"] = history.evaluator_incidents;
    if (history.first_reach_75pct) {
        doc["first_reach_75pct"] = *history.first_reach_75pct;
    } else {
        doc["first_reach_75pct"] = nullptr;
    }
    json gens = json::array();
    for (const auto& rec : history.generations) {
        gens.push_back({{"generation", rec.generation},
                        {"best", rec.best},
                        {"mean", rec.mean},
                        {"median", rec.median},
                        {"best_episode_seed", rec.best_episode_seed},
                        {"best_genome", genome_to_embedded_json(rec.best_genome)}});
    }
    doc["generations"] = std::move(gens);
    return doc.dump(2) + "\n";
}

EvolutionHistory history_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("history: invalid JSON: ") + e.what());
    }
    if (!doc.contains("format") || doc.at("format") != "ahhs-history") {
        throw ConfigError("history: not an ahhs-history document");
    }
    EvolutionHistory history;
    history.evaluator_incidents = doc.value("evaluator_incidents", 0);
    if (doc.contains("first_reach_75pct") && !doc.at("first_reach_75pct").is_null()) {
        history.first_reach_75pct = doc.at("first_reach_75pct").get<int>();
    }
    for (const auto& g : doc.at("generations")) {
        GenerationRecord rec;
        rec.generation = g.at("generation").get<int>();
        rec.best = g.at("best").get<double>();
        rec.mean = g.at("mean").get<double>();
        rec.median = g.at("median").get<double>();
        rec.best_episode_seed = g.at("best_episode_seed").get<std::uint64_t>();
        rec.best_genome = genome_from_json(g.at("best_genome").dump());
        history.generations.push_back(std::move(rec));
    }
    return history;
}

std::string history_to_csv(const EvolutionHistory& history) {
    std::ostringstream out;
    char buf[32];
    const auto fmt = [&buf](double v) {
        const auto res = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, res.ptr);
    };
    out << "generation,best,mean,median\n";
    for (const auto& rec : history.generations) {
        out << rec.generation << ',' << fmt(rec.best) << ',' << fmt(rec.mean) << ','
            << fmt(rec.median) << '\n';
    }
    return out.str();
}

RunOutput execute_evolve_run(const RunConfig& config, const std::string& out_dir,
                             const std::function<void(int)>& on_generation) {
    if (!config.has_evolution) {
        throw ConfigError("config.evolution: missing section (required by evolve)");
    }
    if (!config.has_master_seed) {
        throw ConfigError("config.master_seed: missing key (required by evolve)");
    }
    config.validate();

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create run directory: " + out_dir);

    const EvolutionHistory history =
        evolve(config.evolution, config.make_evaluator(), on_generation);

    json manifest;
    manifest["tool_version"] = kToolVersion;
    manifest["config"] = json::parse(run_config_to_json(config));
    write_text_file((fs::path(out_dir) / "manifest.json").string(),
                    manifest.dump(2) + "\n");
    write_text_file((fs::path(out_dir) / "history.json").string(),
                    history_to_json(history, config.evolution));
    write_text_file((fs::path(out_dir) / "history.csv").string(),
                    history_to_csv(history));
    if (!history.generations.empty()) {
        save_genome(history.generations.back().best_genome,
                    (fs::path(out_dir) / "best_genome.json").string());
    }
    return {out_dir, history};
}

namespace {

bool is_run_dir(const fs::path& dir) {
    return fs::exists(dir / "history.json");
}

RunData load_run_data(const fs::path& dir) {
    RunData run;
    run.path = dir.string();
    const fs::path manifest_path = dir / "manifest.json";
    if (fs::exists(manifest_path)) {
        json manifest = json::parse(read_text_file(manifest_path.string()));
        if (manifest.contains("config") &&
            manifest.at("config").contains("environment")) {
            run.env_type =
                manifest.at("config").at("environment").at("type").get<std::string>();
        }
    }
    const EvolutionHistory history =
        history_from_json(read_text_file((dir / "history.json").string()));
    run.best_per_gen.reserve(history.generations.size());
    for (const auto& rec : history.generations) {
        run.best_per_gen.push_back(rec.best);
    }
    if (run.best_per_gen.empty()) {
        throw ConfigError(run.path + ": history has no generations");
    }
    return run;
}

} // namespace

CompareGroup load_compare_group(const std::string& dir) {
    const fs::path root(dir);
    if (!fs::exists(root)) throw ConfigError("no such directory: " + dir);
    CompareGroup group;
    group.name = root.filename().empty() ? root.parent_path().filename().string()
                                         : root.filename().string();
    if (is_run_dir(root)) {
        group.runs.push_back(load_run_data(root));
        return group;
    }
    std::vector<fs::path> subdirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory() && is_run_dir(entry.path())) {
            subdirs.push_back(entry.path());
        }
    }
    std::sort(subdirs.begin(), subdirs.end());
    for (const auto& sub : subdirs) {
        group.runs.push_back(load_run_data(sub));
    }
    if (group.runs.empty()) {
        throw ConfigError(dir + ": no run directories with history.json found");
    }
    return group;
}

CompareResult compare_groups(std::span<const CompareGroup> groups,
                             std::optional<double> reference_max) {
    if (groups.size() < 1) throw ConfigError("compare: needs at least one group");

    std::string env;
    for (const auto& g : groups) {
        for (const auto& run : g.runs) {
            if (run.env_type.empty()) continue;
            if (env.empty()) {
                env = run.env_type;
            } else if (env != run.env_type) {
                throw ConfigError("compare: runs use different environments (" + env +
                                  " vs " + run.env_type + ")");
            }
        }
    }

    CompareResult result;
    double observed_max = -std::numeric_limits<double>::infinity();
    for (const auto& g : groups) {
        for (const auto& run : g.runs) {
            observed_max = std::max(
                observed_max, *std::max_element(run.best_per_gen.begin(),
                                                run.best_per_gen.end()));
        }
    }
    result.reference_max = reference_max.value_or(observed_max);
    const double threshold = 0.75 * result.reference_max;

    for (const auto& g : groups) {
        GroupStats stats;
        stats.name = g.name;
        stats.run_count = static_cast<int>(g.runs.size());
        for (const auto& run : g.runs) {
            const double best = *std::max_element(run.best_per_gen.begin(),
                                                  run.best_per_gen.end());
            stats.final_bests.push_back(best);
            for (std::size_t gen = 0; gen < run.best_per_gen.size(); ++gen) {
                if (run.best_per_gen[gen] >= threshold) {
                    stats.gen75_values.push_back(static_cast<double>(gen));
                    ++stats.reached_75;
                    break;
                }
            }
        }
        stats.best = quartiles(stats.final_bests);
        if (!stats.gen75_values.empty()) {
            stats.gen75 = quartiles(stats.gen75_values);
        }
        result.groups.push_back(std::move(stats));
    }

    for (std::size_t i = 0; i < result.groups.size(); ++i) {
        for (std::size_t j = i + 1; j < result.groups.size(); ++j) {
            const auto r = wilcoxon_rank_sum(result.groups[i].final_bests,
                                             result.groups[j].final_bests);
            result.pairs.push_back({result.groups[i].name, result.groups[j].name, r.u,
                                    r.p_value, r.exact});
        }
    }
    return result;
}

std::string compare_table(const CompareResult& result) {
    std::ostringstream out;
    out << "reference max fitness: " << result.reference_max << "\n\n";
    out << "group                      n    best min/q1/med/q3/max          reached75  gen75 med\n";
    for (const auto& g : result.groups) {
        char line[256];
        std::snprintf(line, sizeof(line),
                      "%-26s %-4d %.4f/%.4f/%.4f/%.4f/%.4f  %d/%d",
                      g.name.c_str(), g.run_count, g.best.min, g.best.q1,
                      g.best.median, g.best.q3, g.best.max, g.reached_75,
                      g.run_count);
        out << line;
        if (!g.gen75_values.empty()) {
            char gen[64];
            std::snprintf(gen, sizeof(gen), "        %.1f", g.gen75.median);
            out << gen;
        }
        out << "\n";
    }
    if (!result.pairs.empty()) {
        out << "\npairwise Wilcoxon rank-sum (two-sided) on best fitness:\n";
        for (const auto& p : result.pairs) {
            char line[256];
            std::snprintf(line, sizeof(line), "%s vs %s: U=%.1f p=%.6g%s\n",
                          p.group_a.c_str(), p.group_b.c_str(), p.u, p.p_value,
                          p.exact ? " (exact)" : " (normal approx.)");
            out << line;
        }
    }
    return out.str();
}

std::string compare_csv(const CompareResult& result) {
    std::ostringstream out;
    char buf[32];
    const auto fmt = [&buf](double v) {
        const auto res = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, res.ptr);
    };
    out << "record,group_a,group_b,n,best_min,best_q1,best_median,best_q3,best_max,"
           "reached75,gen75_median,u,p_value\n";
    for (const auto& g : result.groups) {
        out << "group," << g.name << ",," << g.run_count << ',' << fmt(g.best.min)
            << ',' << fmt(g.best.q1) << ',' << fmt(g.best.median) << ','
            << fmt(g.best.q3) << ',' << fmt(g.best.max) << ',' << g.reached_75 << ',';
        if (!g.gen75_values.empty()) out << fmt(g.gen75.median);
        out << ",,\n";
    }
    for (const auto& p : result.pairs) {
        out << "pair," << p.group_a << ',' << p.group_b << ",,,,,,,,," << fmt(p.u)
            << ',' << fmt(p.p_value) << '\n';
    }
    return out.str();
}

} // namespace ahhs
