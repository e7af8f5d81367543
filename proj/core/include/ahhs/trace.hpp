#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ahhs {

using RuleMask = std::vector<std::uint8_t>; // one 0/1 entry per rule

// Per-tick episode record: a tick index, named numeric columns, and one or
// more rule-activation bitmask columns (one per module for chain episodes,
// a single merged one for the pendulum). The CSV column layout follows the
// environment contracts; value_columns/mask_columns hold the header names.
struct EpisodeTrace {
    std::uint64_t seed = 0;
    int rule_count = 0;
    std::vector<std::string> value_columns;
    std::vector<std::string> mask_columns;

    std::vector<std::int64_t> ticks;
    std::vector<std::vector<double>> values; // [row][value column]
    std::vector<std::vector<RuleMask>> masks; // [row][mask column]

    std::size_t row_count() const { return ticks.size(); }
    // -1 when the column does not exist
    int value_column_index(std::string_view name) const;

    void append_row(std::int64_t tick, std::vector<double> row_values,
                    std::vector<RuleMask> row_masks);

    bool operator==(const EpisodeTrace&) const = default;
};

// Lowercase hex, most significant digit first; bit i = rule i.
std::string mask_to_hex(const RuleMask& mask);
RuleMask mask_from_hex(std::string_view hex, int rule_count);

// CSV with a leading "# ahhs-trace ..." comment carrying tool version and
// seed. Doubles use shortest round-trip formatting, so exported files
// re-import losslessly.
void save_trace_csv(const EpisodeTrace& trace, const std::string& path);
std::string trace_to_csv(const EpisodeTrace& trace);
EpisodeTrace trace_from_csv(const std::string& text);
EpisodeTrace load_trace_csv(const std::string& path);

} // namespace ahhs
