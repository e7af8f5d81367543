#include <CLI11.hpp>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "ahhs/analysis.hpp"
#include "ahhs/errors.hpp"
#include "ahhs/run_io.hpp"
#include "ahhs/version.hpp"

namespace fs = std::filesystem;
using namespace ahhs;

namespace {

std::string format_full(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

std::string default_out_root() {
    if (const char* env = std::getenv("AHHS_OUT_ROOT")) return env;
    return "runs";
}

struct EvolveArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

int run_evolve(const EvolveArgs& args) {
    std::vector<std::string> overrides = args.overrides;
    if (args.seed_set) {
        overrides.push_back("master_seed=" + std::to_string(args.seed));
    }
    const RunConfig config = load_run_config(args.config_path, overrides);

    std::string out = args.out_dir;
    if (out.empty()) out = config.output_dir;
    if (out.empty()) {
        out = (fs::path(default_out_root()) /
               ("run-" + std::string(to_string(config.env_kind)) + "-" +
                std::string(to_string(config.variant)) + "-seed" +
                std::to_string(config.master_seed)))
                  .string();
    }

    const RunOutput result = execute_evolve_run(config, out, [](int gen) {
        if ((gen + 1) % 25 == 0) {
            std::fprintf(stderr, "generation %d done\n", gen + 1);
        }
    });

    const auto& last = result.history.generations.back();
    std::cout << "run_dir=" << result.dir << "\n";
    std::cout << "generations=" << result.history.generations.size() << "\n";
    std::cout << "best_fitness=" << format_full(last.best) << "\n";
    if (result.history.first_reach_75pct) {
        std::cout << "first_reach_75pct=" << *result.history.first_reach_75pct << "\n";
    }
    if (result.history.evaluator_incidents > 0) {
        std::cout << "evaluator_incidents=" << result.history.evaluator_incidents
                  << "\n";
    }
    return 0;
}

int run_replay(const std::string& genome_path, const std::string& env_path,
               std::uint64_t seed, const std::string& trace_path) {
    const Genome genome = load_genome(genome_path);
    const RunConfig config = load_run_config(env_path);

    EpisodeTrace trace;
    EpisodeTrace* trace_ptr = trace_path.empty() ? nullptr : &trace;
    double fitness = 0.0;
    if (config.env_kind == EnvironmentKind::pendulum) {
        PendulumConfig env = config.pendulum;
        env.decode = config.decode;
        fitness = run_pendulum_episode(genome, env, seed, trace_ptr);
    } else {
        ChainConfig env = config.chain;
        env.decode = config.decode;
        fitness = run_chain_episode(genome, env, seed, trace_ptr);
    }
    std::cout << "fitness=" << format_full(fitness) << "\n";
    if (trace_ptr != nullptr) {
        save_trace_csv(trace, trace_path);
        const auto counts = rule_activation_counts(trace);
        const auto summary = summarize_activation(
            counts, static_cast<std::int64_t>(trace.row_count()),
            static_cast<int>(trace.mask_columns.size()));
        std::cout << "trace=" << trace_path << "\n";
        std::cout << "rules_never_triggered=" << summary.never_triggered << "/"
                  << summary.rule_count << "\n";
        std::cout << "rules_never_or_seldom_fraction="
                  << format_full(summary.never_or_seldom_fraction) << "\n";
    }
    return 0;
}

struct MutantsArgs {
    std::string genome_path;
    std::string env_path;
    int n = 35;
    std::uint64_t seed = 0;
    double mutation_rate = -1.0; // <0: take from config or default
    double max_delta = -1.0;
    int bins = 10;
    std::string out_dir = ".";
};

int run_mutants(const MutantsArgs& args) {
    const Genome genome = load_genome(args.genome_path);
    const RunConfig config = load_run_config(args.env_path);

    double rate = args.mutation_rate;
    double delta = args.max_delta;
    if (rate < 0.0) {
        rate = config.has_evolution ? config.evolution.mutation_rate : 0.15;
    }
    if (delta < 0.0) {
        delta = config.has_evolution ? config.evolution.mutation_max_delta : 0.1;
    }

    const NeighborhoodReport report = mutation_neighborhood(
        genome, args.n, config.make_evaluator(), rate, delta, args.seed, args.bins);

    std::error_code ec;
    fs::create_directories(args.out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + args.out_dir);
    const std::string csv_path = (fs::path(args.out_dir) / "mutants.csv").string();
    const std::string json_path = (fs::path(args.out_dir) / "mutants.json").string();
    save_report_csv(report, csv_path);
    save_report_json(report, json_path);

    std::cout << "original_fitness=" << format_full(report.original_fitness) << "\n";
    std::cout << "mutants=" << report.mutant_fitness.size() << "\n";
    const auto q = quartiles(report.mutant_fitness);
    std::cout << "mutant_fitness_min=" << format_full(q.min) << "\n";
    std::cout << "mutant_fitness_median=" << format_full(q.median) << "\n";
    std::cout << "mutant_fitness_max=" << format_full(q.max) << "\n";
    std::cout << "report_csv=" << csv_path << "\n";
    std::cout << "report_json=" << json_path << "\n";
    return 0;
}

int run_compare(const std::vector<std::string>& dirs, const std::string& csv_path,
                double reference, bool reference_set) {
    std::vector<CompareGroup> groups;
    groups.reserve(dirs.size());
    for (const auto& dir : dirs) groups.push_back(load_compare_group(dir));
    const CompareResult result = compare_groups(
        groups, reference_set ? std::optional<double>(reference) : std::nullopt);
    std::cout << compare_table(result);
    if (!csv_path.empty()) {
        write_text_file(csv_path, compare_csv(result));
        std::cout << "csv=" << csv_path << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"artificial homeostatic hormone system controller workbench"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    EvolveArgs evolve_args;
    CLI::App* evolve = app.add_subcommand("evolve", "run a generational evolution");
    evolve->add_option("--config", evolve_args.config_path,
                       "run config JSON (or manifest)")
        ->required();
    evolve->add_option("--seed", evolve_args.seed, "master seed override")
        ->each([&evolve_args](const std::string&) { evolve_args.seed_set = true; });
    evolve->add_option("--set", evolve_args.overrides,
                       "config override, dotted.key=value (repeatable)");
    evolve->add_option("--out", evolve_args.out_dir, "run output directory");

    std::string genome_path, env_path, trace_path;
    std::uint64_t replay_seed = 0;
    CLI::App* replay =
        app.add_subcommand("replay", "run one episode of a stored genome");
    replay->add_option("--genome", genome_path, "genome JSON")->required();
    replay->add_option("--env", env_path, "config JSON naming the environment")
        ->required();
    replay->add_option("--seed", replay_seed, "episode seed");
    replay->add_option("--trace", trace_path, "write an episode trace CSV here");

    MutantsArgs mutants_args;
    CLI::App* mutants =
        app.add_subcommand("mutants", "mutation-neighborhood fitness report");
    mutants->add_option("--genome", mutants_args.genome_path, "genome JSON")
        ->required();
    mutants
        ->add_option("--env", mutants_args.env_path,
                     "config JSON naming the environment")
        ->required();
    mutants->add_option("--n", mutants_args.n, "number of mutants")
        ->check(CLI::PositiveNumber);
    mutants->add_option("--seed", mutants_args.seed, "master seed");
    mutants->add_option("--mutation-rate", mutants_args.mutation_rate,
                        "per-gene mutation rate override");
    mutants->add_option("--max-delta", mutants_args.max_delta,
                        "maximal absolute gene change override");
    mutants->add_option("--bins", mutants_args.bins, "histogram bins")
        ->check(CLI::PositiveNumber);
    mutants->add_option("--out", mutants_args.out_dir, "output directory");

    std::vector<std::string> compare_dirs;
    std::string compare_csv_path;
    double reference = 0.0;
    bool reference_set = false;
    CLI::App* compare = app.add_subcommand("compare", "summarize and test run groups");
    compare->add_option("dirs", compare_dirs, "run or group directories")
        ->required()
        ->expected(-2);
    compare->add_option("--csv", compare_csv_path, "also write a CSV summary here");
    compare->add_option("--reference-max", reference, "reference maximum fitness")
        ->each([&reference_set](const std::string&) { reference_set = true; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e); // prints the message
        return 2;
    }

    try {
        if (*evolve) return run_evolve(evolve_args);
        if (*replay) return run_replay(genome_path, env_path, replay_seed, trace_path);
        if (*mutants) return run_mutants(mutants_args);
        if (*compare) {
            return run_compare(compare_dirs, compare_csv_path, reference,
                               reference_set);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
