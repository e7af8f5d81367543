#include <doctest.h>
#include <filesystem>
#include <numeric>

#include "ahhs/analysis.hpp"
#include "ahhs/chain.hpp"
#include "ahhs/errors.hpp"
#include "ahhs/run_io.hpp"
#include "helpers.hpp"

using namespace ahhs;
using namespace ahhs::test;

namespace {

EpisodeTrace tiny_trace() {
    EpisodeTrace t;
    t.seed = 99;
    t.rule_count = 3;
    t.value_columns = {"x", "y"};
    t.mask_columns = {"g0", "g1"};
    t.append_row(0, {1.5, -2.0}, {{1, 0, 0}, {1, 0, 1}});
    t.append_row(1, {0.25, 1e-17}, {{0, 0, 0}, {1, 0, 0}});
    t.append_row(2, {-0.0, 123456.789012345678}, {{0, 1, 0}, {0, 1, 1}});
    return t;
}

} // namespace

TEST_CASE("mask hex encoding round-trips") {
    CHECK(mask_to_hex({1, 0, 0, 0}) == "1");
    CHECK(mask_to_hex({0, 0, 0, 0, 1}) == "10");
    CHECK(mask_to_hex({1, 1, 1, 1, 1, 1, 1, 1}) == "ff");
    CHECK(mask_to_hex({}) == "0");
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const int rules = 1 + static_cast<int>(rng.below(70));
        RuleMask mask(rules);
        for (auto& b : mask) b = rng.below(2) != 0u ? 1 : 0;
        CHECK(mask_from_hex(mask_to_hex(mask), rules) == mask);
    }
}

TEST_CASE("activation counts: aggregated and per group") {
    const EpisodeTrace t = tiny_trace();
    const auto counts = rule_activation_counts(t);
    CHECK(counts == std::vector<std::int64_t>{3, 2, 2});
    const auto per_group = rule_activation_counts_per_group(t);
    REQUIRE(per_group.size() == 2);
    CHECK(per_group[0] == std::vector<std::int64_t>{1, 1, 0});
    CHECK(per_group[1] == std::vector<std::int64_t>{2, 1, 2});
    const std::int64_t capacity =
        static_cast<std::int64_t>(t.row_count()) * 2;
    for (auto c : counts) CHECK(c <= capacity);
}

TEST_CASE("activation counts from a trace equal online accumulation") {
    ChainConfig config;
    config.module_count = 3;
    config.episode_ticks = 120;
    EvolutionConfig shape;
    shape.variant = Variant::ahhs2;
    shape.hormone_count = 4;
    shape.rule_count = 6;
    Rng rng(64);
    const Genome genome = random_genome(shape, rng);

    EpisodeTrace trace;
    run_chain_episode(genome, config, 11, &trace);
    const auto from_trace = rule_activation_counts(trace);

    // independent accumulation: replicate the episode loop, counting online
    const Controller controller(genome, build_chain_topology(config.module_count),
                                config.decode);
    CompartmentStates states = controller.make_states();
    ChainState chain = make_chain_state(config);
    std::vector<double> sensors(3 * kChainSensorsPerModule);
    std::vector<double> actuators(3, 0.0);
    TickEffects effects;
    std::vector<std::int64_t> online(shape.rule_count, 0);
    for (int tick = 0; tick < config.episode_ticks; ++tick) {
        for (int m = 0; m < 3; ++m) {
            const auto readings = module_proximity_sensors(chain, m, config);
            std::copy(readings.begin(), readings.end(),
                      sensors.begin() + m * kChainSensorsPerModule);
        }
        controller.tick(sensors, states, effects, actuators);
        chain_env_step(chain, actuators, config);
        for (std::size_t i = 0; i < effects.activated.size(); ++i) {
            online[i % shape.rule_count] += effects.activated[i];
        }
    }
    CHECK(from_trace == online);
}

TEST_CASE("activation summary: never and seldom fractions") {
    const std::vector<std::int64_t> counts{0, 0, 3, 500, 1000};
    const auto s = summarize_activation(counts, 1000, 1, 0.01);
    CHECK(s.rule_count == 5);
    CHECK(s.never_triggered == 2);
    CHECK(s.seldom_triggered == 1); // 3 < 10
    CHECK(s.never_or_seldom_fraction == doctest::Approx(0.6));
}

namespace {

double gene_mean_fitness(const Genome& g, std::uint64_t) {
    const auto flat = g.flatten();
    return std::accumulate(flat.begin(), flat.end(), 0.0) / flat.size();
}

} // namespace

TEST_CASE("mutation neighborhood: exact mutant count and reproducibility") {
    Rng rng(15);
    EvolutionConfig shape;
    shape.hormone_count = 3;
    shape.rule_count = 4;
    const Genome g = random_genome(shape, rng);
    const NeighborhoodReport r1 =
        mutation_neighborhood(g, 35, gene_mean_fitness, 0.15, 0.1, 12345);
    CHECK(r1.mutant_fitness.size() == 35);
    CHECK(std::accumulate(r1.bin_counts.begin(), r1.bin_counts.end(), 0) == 35);
    CHECK(r1.bin_edges.size() == 11);
    CHECK(r1.bin_edges.front() == 0.0);

    const NeighborhoodReport r2 =
        mutation_neighborhood(g, 35, gene_mean_fitness, 0.15, 0.1, 12345);
    CHECK(r1 == r2); // bit-exact
    const NeighborhoodReport r3 =
        mutation_neighborhood(g, 35, gene_mean_fitness, 0.15, 0.1, 54321);
    CHECK(r1.mutant_fitness != r3.mutant_fitness);
}

TEST_CASE("mutation neighborhood: disabled mutation reproduces the original") {
    Rng rng(16);
    EvolutionConfig shape;
    shape.hormone_count = 2;
    shape.rule_count = 3;
    const Genome g = random_genome(shape, rng);
    const NeighborhoodReport r =
        mutation_neighborhood(g, 35, gene_mean_fitness, 0.0, 0.1, 7);
    for (double f : r.mutant_fitness) CHECK(f == r.original_fitness);
}

TEST_CASE("mutation neighborhood: evaluator failures score the floor") {
    Rng rng(17);
    EvolutionConfig shape;
    shape.hormone_count = 2;
    shape.rule_count = 2;
    const Genome g = random_genome(shape, rng);
    int calls = 0;
    const auto flaky = [&calls](const Genome& genome, std::uint64_t s) {
        if (++calls % 3 == 0) throw std::runtime_error("boom");
        return gene_mean_fitness(genome, s);
    };
    const NeighborhoodReport r = mutation_neighborhood(g, 9, flaky, 0.15, 0.1, 1);
    CHECK(r.mutant_fitness.size() == 9);
    int floored = 0;
    for (double f : r.mutant_fitness) floored += f == 0.0 ? 1 : 0;
    CHECK(floored == 3);
}

TEST_CASE("trace CSV: lossless round-trip") {
    const EpisodeTrace t = tiny_trace();
    const std::string csv = trace_to_csv(t);
    const EpisodeTrace back = trace_from_csv(csv);
    CHECK(back == t);
}

TEST_CASE("trace CSV: empty trace keeps headers") {
    EpisodeTrace t;
    t.seed = 5;
    t.rule_count = 2;
    t.value_columns = {"a", "b"};
    t.mask_columns = {"m"};
    const std::string csv = trace_to_csv(t);
    CHECK(csv.find("tick,a,b,m\n") != std::string::npos);
    const EpisodeTrace back = trace_from_csv(csv);
    CHECK(back == t);
    CHECK(back.row_count() == 0);
}

TEST_CASE("trace CSV: header comment carries version and seed") {
    const std::string csv = trace_to_csv(tiny_trace());
    CHECK(csv.rfind("# ahhs-trace version=", 0) == 0);
    CHECK(csv.find("seed=99") != std::string::npos);
    CHECK_THROWS_AS(trace_from_csv("tick,a\n0,1\n"), ConfigError);
}

TEST_CASE("trace CSV: file save/load") {
    const auto path =
        (std::filesystem::temp_directory_path() / "ahhs_trace_test.csv").string();
    const EpisodeTrace t = tiny_trace();
    save_trace_csv(t, path);
    CHECK(load_trace_csv(path) == t);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_trace_csv("/nonexistent/trace.csv"), ConfigError);
}

TEST_CASE("neighborhood report files") {
    Rng rng(18);
    EvolutionConfig shape;
    shape.hormone_count = 2;
    shape.rule_count = 2;
    const Genome g = random_genome(shape, rng);
    const NeighborhoodReport r =
        mutation_neighborhood(g, 12, gene_mean_fitness, 0.15, 0.1, 3);

    const auto dir = std::filesystem::temp_directory_path();
    const std::string json_path = (dir / "ahhs_report_test.json").string();
    const std::string csv_path = (dir / "ahhs_report_test.csv").string();
    save_report_json(r, json_path);
    save_report_csv(r, csv_path);
    CHECK(load_report_json(json_path) == r);

    const std::string csv = read_text_file(csv_path);
    CHECK(csv.rfind("# ahhs-mutants version=", 0) == 0);
    CHECK(csv.find("bin_low,bin_high,count") != std::string::npos);
    std::filesystem::remove(json_path);
    std::filesystem::remove(csv_path);
}
