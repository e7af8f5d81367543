#include <doctest.h>
#include <filesystem>

#include "ahhs/errors.hpp"
#include "ahhs/evolution.hpp"
#include "ahhs/genome.hpp"
#include "ahhs/rng.hpp"

using namespace ahhs;

namespace {

EvolutionConfig shape(Variant v, int hormones, int rules) {
    EvolutionConfig c;
    c.variant = v;
    c.hormone_count = hormones;
    c.rule_count = rules;
    return c;
}

} // namespace

TEST_CASE("flatten/unflatten are inverse bijections") {
    Rng rng(2024);
    for (Variant v : {Variant::ahhs1, Variant::ahhs2}) {
        for (int i = 0; i < 20; ++i) {
            const int hormones = 1 + static_cast<int>(rng.below(8));
            const int rules = 1 + static_cast<int>(rng.below(8));
            const Genome g = random_genome(shape(v, hormones, rules), rng);
            const auto flat = g.flatten();
            const Genome back = Genome::unflatten(v, hormones, rules, flat);
            CHECK(back == g);
            CHECK(back.flatten() == flat);
        }
    }
}

TEST_CASE("flatten length matches the gene layout") {
    Rng rng(3);
    const Genome g2 = random_genome(shape(Variant::ahhs2, 4, 3), rng);
    CHECK(g2.flatten().size() == 4 * 3 + 3 * 12);
    CHECK(g2.slot_count() == 4 * 3 + 3 * 8);
    const Genome g1 = random_genome(shape(Variant::ahhs1, 4, 3), rng);
    CHECK(g1.flatten().size() == 4 * 3 + 3 * 8);
    CHECK(g1.slot_count() == 4 * 3 + 3 * 8);
}

TEST_CASE("unflatten rejects wrong-size vectors") {
    CHECK_THROWS_AS(Genome::unflatten(Variant::ahhs2, 2, 2, std::vector<double>(5)),
                    ConfigError);
}

TEST_CASE("genome JSON round-trips bit-exactly") {
    Rng rng(77);
    for (Variant v : {Variant::ahhs1, Variant::ahhs2}) {
        const Genome g = random_genome(shape(v, 5, 4), rng);
        const std::string text = genome_to_json(g);
        const Genome back = genome_from_json(text);
        CHECK(back == g);
        CHECK(back.flatten() == g.flatten()); // bit-exact through the gene vector
        CHECK(text.find("\"format_version\": 1") != std::string::npos);
    }
}

TEST_CASE("genome JSON is strict about structure") {
    Rng rng(78);
    const Genome g = random_genome(shape(Variant::ahhs2, 2, 1), rng);
    std::string text = genome_to_json(g);

    SUBCASE("unknown key rejected") {
        text.insert(text.find("\"variant\""), "\"surprise\": 1,\n  ");
        CHECK_THROWS_AS(genome_from_json(text), ConfigError);
    }
    SUBCASE("wrong format tag rejected") {
        const auto pos = text.find("ahhs-genome");
        text.replace(pos, 11, "ahhs-genOme");
        CHECK_THROWS_AS(genome_from_json(text), ConfigError);
    }
    SUBCASE("not json") {
        CHECK_THROWS_AS(genome_from_json("not json at all"), ConfigError);
    }
}

TEST_CASE("genome save/load via files") {
    Rng rng(5);
    const Genome g = random_genome(shape(Variant::ahhs1, 3, 2), rng);
    const auto path =
        (std::filesystem::temp_directory_path() / "ahhs_genome_test.json").string();
    save_genome(g, path);
    CHECK(load_genome(path) == g);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_genome("/nonexistent/genome.json"), ConfigError);
}
