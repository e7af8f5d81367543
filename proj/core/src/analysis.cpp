#include "ahhs/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ahhs/errors.hpp"
#include "ahhs/version.hpp"

namespace ahhs {

namespace {
using json = nlohmann::ordered_json;
}

std::vector<std::int64_t> rule_activation_counts(const EpisodeTrace& trace) {
    std::vector<std::int64_t> counts(trace.rule_count, 0);
    for (const auto& row : trace.masks) {
        for (const auto& mask : row) {
            for (std::size_t r = 0; r < mask.size() && r < counts.size(); ++r) {
                counts[r] += mask[r];
            }
        }
    }
    return counts;
}

std::vector<std::vector<std::int64_t>>
rule_activation_counts_per_group(const EpisodeTrace& trace) {
    std::vector<std::vector<std::int64_t>> counts(
        trace.mask_columns.size(), std::vector<std::int64_t>(trace.rule_count, 0));
    for (const auto& row : trace.masks) {
        for (std::size_t g = 0; g < row.size(); ++g) {
            for (std::size_t r = 0; r < row[g].size(); ++r) {
                counts[g][r] += row[g][r];
            }
        }
    }
    return counts;
}

ActivationSummary summarize_activation(const std::vector<std::int64_t>& counts,
                                       std::int64_t ticks, int groups,
                                       double seldom_fraction) {
    ActivationSummary s;
    s.rule_count = static_cast<int>(counts.size());
    s.step_capacity = ticks * groups;
    const double cutoff = seldom_fraction * static_cast<double>(s.step_capacity);
    for (std::int64_t c : counts) {
        if (c == 0) {
            ++s.never_triggered;
        } else if (static_cast<double>(c) < cutoff) {
            ++s.seldom_triggered;
        }
    }
    if (s.rule_count > 0) {
        s.never_or_seldom_fraction =
            static_cast<double>(s.never_triggered + s.seldom_triggered) / s.rule_count;
    }
    return s;
}

NeighborhoodReport mutation_neighborhood(const Genome& genome, int n,
                                         const FitnessEvaluator& evaluator,
                                         double mutation_rate,
                                         double mutation_max_delta,
                                         std::uint64_t master_seed, int bins,
                                         double fitness_floor) {
    if (n < 1) throw ConfigError("mutation_neighborhood: n must be >= 1");
    if (bins < 1) throw ConfigError("mutation_neighborhood: bins must be >= 1");

    NeighborhoodReport report;
    report.master_seed = master_seed;
    report.mutation_rate = mutation_rate;
    report.mutation_max_delta = mutation_max_delta;

    const auto score = [&](const Genome& g, std::uint64_t seed) {
        try {
            const double f = evaluator(g, seed);
            return std::isfinite(f) ? f : fitness_floor;
        } catch (const std::exception&) {
            return fitness_floor;
        }
    };

    report.original_fitness =
        score(genome, derive_seed(master_seed, {0x6f72u})); // original's episode
    report.mutant_fitness.reserve(n);
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(master_seed, {0x6d75u, static_cast<std::uint64_t>(i)}));
        const Genome mutant = mutate(genome, mutation_rate, mutation_max_delta, rng);
        const std::uint64_t episode_seed =
            derive_seed(master_seed, {0x6570u, static_cast<std::uint64_t>(i)});
        report.mutant_fitness.push_back(score(mutant, episode_seed));
    }

    double hi = 0.0;
    for (double f : report.mutant_fitness) hi = std::max(hi, f);
    if (hi <= 0.0) hi = 1.0;
    report.bin_edges.resize(bins + 1);
    for (int i = 0; i <= bins; ++i) {
        report.bin_edges[i] = hi * static_cast<double>(i) / bins;
    }
    report.bin_counts.assign(bins, 0);
    for (double f : report.mutant_fitness) {
        int bin = static_cast<int>(std::floor(f / hi * bins));
        bin = std::clamp(bin, 0, bins - 1);
        ++report.bin_counts[bin];
    }
    return report;
}

void save_report_csv(const NeighborhoodReport& report, const std::string& path) {
    std::ostringstream out;
    out << "# ahhs-mutants version=" << kToolVersion << " seed=" << report.master_seed
        << "\n";
    out << "bin_low,bin_high,count\n";
    char buf[32];
    const auto fmt = [&buf](double v) {
        const auto res = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, res.ptr);
    };
    for (std::size_t i = 0; i < report.bin_counts.size(); ++i) {
        out << fmt(report.bin_edges[i]) << ',' << fmt(report.bin_edges[i + 1]) << ','
            << report.bin_counts[i] << '\n';
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot write report file: " + path);
    file << out.str();
    if (!file) throw IoError("write failed: " + path);
}

void save_report_json(const NeighborhoodReport& report, const std::string& path) {
    json doc;
    doc["format"] = "ahhs-mutants";
    doc["format_version"] = 1;
    doc["tool_version"] = kToolVersion;
    doc["seed"] = report.master_seed;
    doc["mutation_rate"] = report.mutation_rate;
    doc["mutation_max_delta"] = report.mutation_max_delta;
    doc["original_fitness"] = report.original_fitness;
    doc["mutant_fitness"] = report.mutant_fitness;
    doc["bin_edges"] = report.bin_edges;
    doc["bin_counts"] = report.bin_counts;
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot write report file: " + path);
    file << doc.dump(2) << "\n";
    if (!file) throw IoError("write failed: " + path);
}

NeighborhoodReport load_report_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open report file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": invalid JSON: " + e.what());
    }
    NeighborhoodReport report;
    report.master_seed = doc.at("seed").get<std::uint64_t>();
    report.mutation_rate = doc.at("mutation_rate").get<double>();
    report.mutation_max_delta = doc.at("mutation_max_delta").get<double>();
    report.original_fitness = doc.at("original_fitness").get<double>();
    report.mutant_fitness = doc.at("mutant_fitness").get<std::vector<double>>();
    report.bin_edges = doc.at("bin_edges").get<std::vector<double>>();
    report.bin_counts = doc.at("bin_counts").get<std::vector<int>>();
    return report;
}

} // namespace ahhs
