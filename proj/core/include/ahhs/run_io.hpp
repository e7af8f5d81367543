#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ahhs/analysis.hpp"
#include "ahhs/chain.hpp"
#include "ahhs/evolution.hpp"
#include "ahhs/pendulum.hpp"
#include "ahhs/stats.hpp"

namespace ahhs {

enum class EnvironmentKind { pendulum, chain };
const char* to_string(EnvironmentKind k);

// One experiment description: controller shape, evolution parameters,
// environment, output destination, and master seed. Parsed from a strict
// JSON document; unknown keys are rejected with the offending key path.
struct RunConfig {
    Variant variant = Variant::ahhs2;
    int hormone_count = 15;
    int rule_count = 15;
    DecodeConfig decode;

    bool has_evolution = false; // evolution section present
    EvolutionConfig evolution;  // shape/seed fields kept in sync on parse

    EnvironmentKind env_kind = EnvironmentKind::pendulum;
    PendulumConfig pendulum;
    ChainConfig chain;

    std::string output_dir; // optional
    bool has_master_seed = false;
    std::uint64_t master_seed = 0;

    int episode_ticks() const;
    // Evaluator bound to the configured environment and decode ranges.
    FitnessEvaluator make_evaluator() const;
    void validate() const; // throws ConfigError
};

std::string read_text_file(const std::string& path);   // throws IoError
void write_text_file(const std::string& path, const std::string& content);

// `overrides` entries are "dotted.key=value" with the value parsed as a
// JSON literal (bare words fall back to strings). A run manifest
// ({"tool_version", "config": {...}}) is accepted in place of a config.
RunConfig parse_run_config(const std::string& json_text,
                           std::span<const std::string> overrides = {});
RunConfig load_run_config(const std::string& path,
                          std::span<const std::string> overrides = {});

// Canonical JSON echo with every field explicit; reparsing reproduces the
// config exactly.
std::string run_config_to_json(const RunConfig& config);

std::string history_to_json(const EvolutionHistory& history,
                            const EvolutionConfig& config);
EvolutionHistory history_from_json(const std::string& text);
std::string history_to_csv(const EvolutionHistory& history);

// Runs evolve() for `config` and writes manifest.json, history.json,
// history.csv and best_genome.json into `out_dir` (created if needed).
struct RunOutput {
    std::string dir;
    EvolutionHistory history;
};
RunOutput execute_evolve_run(const RunConfig& config, const std::string& out_dir,
                             const std::function<void(int)>& on_generation = {});

// --- run comparison -------------------------------------------------------

struct RunData {
    std::string path;
    std::string env_type;
    std::vector<double> best_per_gen;
};

// A group is a directory that either is a run (contains history.json) or
// contains run subdirectories.
struct CompareGroup {
    std::string name;
    std::vector<RunData> runs;
};
CompareGroup load_compare_group(const std::string& dir);

struct GroupStats {
    std::string name;
    int run_count = 0;
    Quartiles best;                  // final best fitness per run
    std::vector<double> final_bests;
    int reached_75 = 0;              // runs that hit 75% of the reference max
    Quartiles gen75;                 // over the runs that reached it
    std::vector<double> gen75_values;
};

struct PairStat {
    std::string group_a;
    std::string group_b;
    double u = 0.0;
    double p_value = 1.0;
    bool exact = true;
};

struct CompareResult {
    double reference_max = 0.0;
    std::vector<GroupStats> groups;
    std::vector<PairStat> pairs;
};

// Refuses (ConfigError) when groups mix environments. The default
// reference maximum is the best fitness observed across all groups.
CompareResult compare_groups(std::span<const CompareGroup> groups,
                             std::optional<double> reference_max = {});
std::string compare_table(const CompareResult& result);
std::string compare_csv(const CompareResult& result);

} // namespace ahhs
