#include <doctest.h>
#include <filesystem>

#include "ahhs/errors.hpp"
#include "ahhs/run_io.hpp"
#include "helpers.hpp"

using namespace ahhs;
namespace fs = std::filesystem;

namespace {

const char* kMinimalPendulum = R"({
  "variant": "ahhs2",
  "controller": {"hormone_count": 3, "rule_count": 4},
  "evolution": {"population_size": 6, "generations": 3},
  "environment": {"type": "pendulum", "pendulum": {"episode_ticks": 50}},
  "master_seed": 11
})";

} // namespace

TEST_CASE("run config: defaults fill unspecified fields") {
    const RunConfig c = parse_run_config(kMinimalPendulum);
    CHECK(c.variant == Variant::ahhs2);
    CHECK(c.hormone_count == 3);
    CHECK(c.rule_count == 4);
    CHECK(c.evolution.population_size == 6);
    CHECK(c.evolution.mutation_rate == 0.15);
    CHECK(c.evolution.mutation_max_delta == 0.1);
    CHECK(c.evolution.crossover_rate == 0.05);
    CHECK(c.evolution.elitism_count == 1);
    CHECK(c.env_kind == EnvironmentKind::pendulum);
    CHECK(c.pendulum.episode_ticks == 50);
    CHECK(c.pendulum.noise_amplitude == 0.023);
    CHECK(c.master_seed == 11);
    CHECK(c.evolution.master_seed == 11);
    CHECK(c.evolution.hormone_count == 3);
}

TEST_CASE("run config: unknown keys are rejected with their path") {
    std::string text = kMinimalPendulum;
    text.insert(text.find("\"variant\""), "\"surprise\": 1, ");
    try {
        parse_run_config(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("surprise") != std::string::npos);
    }

    const char* bad_env = R"({
      "environment": {"type": "pendulum", "pendulum": {"gravty": 1.0}}
    })";
    try {
        parse_run_config(bad_env);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("gravty") != std::string::npos);
    }
}

TEST_CASE("run config: validation names the offending key") {
    try {
        parse_run_config(R"({"evolution": {"population_size": 1}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("population_size") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_run_config(R"({"variant": "ahhs3"})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"environment": {"type": "maze"}})"),
                    ConfigError);
    CHECK_THROWS_AS(
        parse_run_config(
            R"({"environment": {"type": "pendulum", "chain": {"module_count": 3}}})"),
        ConfigError);
    CHECK_THROWS_AS(parse_run_config("{nonsense"), ConfigError);
}

TEST_CASE("run config: overrides reach nested keys") {
    const std::vector<std::string> overrides{
        "evolution.population_size=10", "environment.pendulum.noise_amplitude=0",
        "master_seed=77", "variant=ahhs1"};
    const RunConfig c = parse_run_config(kMinimalPendulum, overrides);
    CHECK(c.evolution.population_size == 10);
    CHECK(c.pendulum.noise_amplitude == 0.0);
    CHECK(c.master_seed == 77);
    CHECK(c.variant == Variant::ahhs1);
    CHECK_THROWS_AS(parse_run_config(kMinimalPendulum, {{"no_equals_sign"}}),
                    ConfigError);
    // an override that lands on an unknown key is still rejected
    CHECK_THROWS_AS(parse_run_config(kMinimalPendulum, {{"evolution.typo=3"}}),
                    ConfigError);
}

TEST_CASE("run config: canonical echo reparses to the same configuration") {
    const RunConfig c = parse_run_config(kMinimalPendulum);
    const std::string echoed = run_config_to_json(c);
    const RunConfig back = parse_run_config(echoed);
    CHECK(back.variant == c.variant);
    CHECK(back.evolution == c.evolution);
    CHECK(back.pendulum == c.pendulum);
    CHECK(back.env_kind == c.env_kind);
    CHECK(back.master_seed == c.master_seed);
}

TEST_CASE("run config: chain environment with degree units") {
    const char* text = R"({
      "controller": {"hormone_count": 5, "rule_count": 6},
      "environment": {"type": "chain", "chain": {"module_count": 4,
        "hinge_limit_deg": 60, "hinge_slew_deg": 5, "episode_ticks": 100}}
    })";
    const RunConfig c = parse_run_config(text);
    CHECK(c.env_kind == EnvironmentKind::chain);
    CHECK(c.chain.module_count == 4);
    CHECK(c.chain.hinge_limit == doctest::Approx(std::numbers::pi / 3));
    CHECK(c.chain.hinge_slew == doctest::Approx(std::numbers::pi / 36));
    CHECK(c.chain.episode_ticks == 100);
}

TEST_CASE("history JSON and CSV round-trip") {
    const RunConfig config = parse_run_config(kMinimalPendulum);
    const EvolutionHistory history =
        evolve(config.evolution, [](const Genome& g, std::uint64_t) {
            return g.hormones[0].production;
        });
    const std::string json_text = history_to_json(history, config.evolution);
    const EvolutionHistory back = history_from_json(json_text);
    CHECK(back == history);

    const std::string csv = history_to_csv(history);
    CHECK(csv.rfind("generation,best,mean,median\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') ==
          1 + static_cast<long>(history.generations.size()));
}

TEST_CASE("execute_evolve_run writes a self-describing directory") {
    RunConfig config = parse_run_config(kMinimalPendulum);
    const auto dir = (fs::temp_directory_path() / "ahhs_run_io_test").string();
    fs::remove_all(dir);
    const RunOutput out = execute_evolve_run(config, dir);
    CHECK(fs::exists(fs::path(dir) / "manifest.json"));
    CHECK(fs::exists(fs::path(dir) / "history.json"));
    CHECK(fs::exists(fs::path(dir) / "history.csv"));
    CHECK(fs::exists(fs::path(dir) / "best_genome.json"));

    // the manifest alone reproduces the run bit-exactly
    const auto dir2 = (fs::temp_directory_path() / "ahhs_run_io_test2").string();
    fs::remove_all(dir2);
    const std::string manifest_text =
        read_text_file((fs::path(dir) / "manifest.json").string());
    const RunConfig from_manifest = parse_run_config(manifest_text);
    execute_evolve_run(from_manifest, dir2);
    CHECK(read_text_file((fs::path(dir) / "history.json").string()) ==
          read_text_file((fs::path(dir2) / "history.json").string()));
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("evolve run requires the evolution section and a master seed") {
    const char* no_evo = R"({
      "environment": {"type": "pendulum"},
      "master_seed": 3
    })";
    CHECK_THROWS_AS(execute_evolve_run(parse_run_config(no_evo), "/tmp/ahhs_x"),
                    ConfigError);
    const char* no_seed = R"({
      "evolution": {"population_size": 4, "generations": 2},
      "environment": {"type": "pendulum"}
    })";
    CHECK_THROWS_AS(execute_evolve_run(parse_run_config(no_seed), "/tmp/ahhs_x"),
                    ConfigError);
}

TEST_CASE("compare groups: environment mismatch is refused") {
    CompareGroup a;
    a.name = "a";
    a.runs.push_back({"x", "pendulum", {0.1, 0.2}});
    CompareGroup b;
    b.name = "b";
    b.runs.push_back({"y", "chain", {0.3}});
    const std::vector<CompareGroup> groups{a, b};
    CHECK_THROWS_AS(compare_groups(groups), ConfigError);
}

TEST_CASE("compare groups: stats, 75% reach and pairwise tests") {
    CompareGroup a;
    a.name = "fast";
    a.runs.push_back({"r1", "pendulum", {0.1, 0.8, 0.9}});
    a.runs.push_back({"r2", "pendulum", {0.2, 0.3, 1.0}});
    a.runs.push_back({"r3", "pendulum", {0.9, 0.9, 0.9}});
    CompareGroup b;
    b.name = "slow";
    b.runs.push_back({"r4", "pendulum", {0.1, 0.1, 0.2}});
    b.runs.push_back({"r5", "pendulum", {0.1, 0.2, 0.3}});
    b.runs.push_back({"r6", "pendulum", {0.0, 0.1, 0.1}});

    const std::vector<CompareGroup> groups{a, b};
    const CompareResult r = compare_groups(groups);
    CHECK(r.reference_max == 1.0); // max over all runs
    REQUIRE(r.groups.size() == 2);
    CHECK(r.groups[0].run_count == 3);
    CHECK(r.groups[0].best.max == 1.0);
    // threshold 0.75: r1 reaches at gen 1, r2 at gen 2, r3 at gen 0
    CHECK(r.groups[0].reached_75 == 3);
    CHECK(r.groups[0].gen75.median == 1.0);
    CHECK(r.groups[1].reached_75 == 0);
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.pairs[0].p_value == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(r.pairs[0].u == 9.0); // fast wins all nine pairs

    const std::string table = compare_table(r);
    CHECK(table.find("fast") != std::string::npos);
    const std::string csv = compare_csv(r);
    CHECK(csv.find("group,fast") != std::string::npos);
    CHECK(csv.find("pair,fast,slow") != std::string::npos);
}

TEST_CASE("compare: group of one run collapses quartiles") {
    CompareGroup a;
    a.name = "solo";
    a.runs.push_back({"r", "pendulum", {0.4, 0.5}});
    const std::vector<CompareGroup> groups{a};
    const CompareResult r = compare_groups(groups);
    CHECK(r.groups[0].best.min == 0.5);
    CHECK(r.groups[0].best.median == 0.5);
    CHECK(r.groups[0].best.max == 0.5);
    CHECK(r.pairs.empty());
}

TEST_CASE("compare: identical group against itself gives p=1") {
    CompareGroup a;
    a.name = "a";
    a.runs.push_back({"r1", "pendulum", {0.5}});
    a.runs.push_back({"r2", "pendulum", {0.6}});
    a.runs.push_back({"r3", "pendulum", {0.7}});
    CompareGroup b = a;
    b.name = "b";
    const std::vector<CompareGroup> groups{a, b};
    const CompareResult r = compare_groups(groups);
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.pairs[0].p_value == 1.0);
}
