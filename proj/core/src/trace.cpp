#include "ahhs/trace.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "ahhs/errors.hpp"
#include "ahhs/version.hpp"

namespace ahhs {

namespace {

// shortest round-trip representation, locale independent
std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

double parse_double(std::string_view text, const std::string& what) {
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ConfigError(what + ": bad number '" + std::string(text) + "'");
    }
    return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

} // namespace

int EpisodeTrace::value_column_index(std::string_view name) const {
    for (std::size_t i = 0; i < value_columns.size(); ++i) {
        if (value_columns[i] == name) return static_cast<int>(i);
    }
    return -1;
}

void EpisodeTrace::append_row(std::int64_t tick, std::vector<double> row_values,
                              std::vector<RuleMask> row_masks) {
    ticks.push_back(tick);
    values.push_back(std::move(row_values));
    masks.push_back(std::move(row_masks));
}

std::string mask_to_hex(const RuleMask& mask) {
    const int digits = (static_cast<int>(mask.size()) + 3) / 4;
    std::string out(std::max(digits, 1), '0');
    for (std::size_t bit = 0; bit < mask.size(); ++bit) {
        if (!mask[bit]) continue;
        const int digit = static_cast<int>(bit) / 4;
        const int pos = static_cast<int>(out.size()) - 1 - digit;
        int v = out[pos] <= '9' ? out[pos] - '0' : out[pos] - 'a' + 10;
        v |= 1 << (bit % 4);
        out[pos] = v < 10 ? static_cast<char>('0' + v) : static_cast<char>('a' + v - 10);
    }
    return out;
}

RuleMask mask_from_hex(std::string_view hex, int rule_count) {
    RuleMask mask(rule_count, 0);
    for (int bit = 0; bit < rule_count; ++bit) {
        const int digit = bit / 4;
        if (digit >= static_cast<int>(hex.size())) break;
        const char c = hex[hex.size() - 1 - digit];
        int v = 0;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
        else throw ConfigError("trace: bad activation mask digit");
        if (v & (1 << (bit % 4))) mask[bit] = 1;
    }
    return mask;
}

std::string trace_to_csv(const EpisodeTrace& trace) {
    std::ostringstream out;
    out << "# ahhs-trace version=" << kToolVersion << " seed=" << trace.seed
        << " rules=" << trace.rule_count
        << " value_columns=" << trace.value_columns.size() << "\n";
    out << "tick";
    for (const auto& c : trace.value_columns) out << ',' << c;
    for (const auto& c : trace.mask_columns) out << ',' << c;
    out << '\n';
    for (std::size_t row = 0; row < trace.row_count(); ++row) {
        out << trace.ticks[row];
        for (double v : trace.values[row]) out << ',' << format_double(v);
        for (const auto& mask : trace.masks[row]) out << ',' << mask_to_hex(mask);
        out << '\n';
    }
    return out.str();
}

EpisodeTrace trace_from_csv(const std::string& text) {
    EpisodeTrace trace;
    std::istringstream in(text);
    std::string line;

    if (!std::getline(in, line) || line.rfind("# ahhs-trace", 0) != 0) {
        throw ConfigError("trace: missing '# ahhs-trace' header comment");
    }
    std::size_t value_count = std::string::npos;
    for (const auto field : split(line, ' ')) {
        if (field.rfind("seed=", 0) == 0) {
            trace.seed = std::stoull(std::string(field.substr(5)));
        } else if (field.rfind("rules=", 0) == 0) {
            trace.rule_count = std::stoi(std::string(field.substr(6)));
        } else if (field.rfind("value_columns=", 0) == 0) {
            value_count = std::stoul(std::string(field.substr(14)));
        }
    }
    if (value_count == std::string::npos) {
        throw ConfigError("trace: header comment lacks value_columns=");
    }

    if (!std::getline(in, line)) throw ConfigError("trace: missing column header");
    const auto headers = split(line, ',');
    if (headers.empty() || headers[0] != "tick") {
        throw ConfigError("trace: first column must be 'tick'");
    }
    const std::vector<std::string> names(headers.begin() + 1, headers.end());
    if (value_count > names.size()) {
        throw ConfigError("trace: value_columns exceeds header width");
    }
    trace.value_columns.assign(names.begin(), names.begin() + value_count);
    trace.mask_columns.assign(names.begin() + value_count, names.end());

    std::vector<std::string> data_lines;
    while (std::getline(in, line)) {
        if (!line.empty()) data_lines.push_back(line);
    }

    for (const auto& row_line : data_lines) {
        const auto cells = split(row_line, ',');
        if (cells.size() != names.size() + 1) {
            throw ConfigError("trace: row width does not match header");
        }
        std::int64_t tick = std::stoll(std::string(cells[0]));
        std::vector<double> row_values;
        row_values.reserve(value_count);
        for (std::size_t i = 0; i < value_count; ++i) {
            row_values.push_back(parse_double(cells[1 + i], "trace"));
        }
        std::vector<RuleMask> row_masks;
        row_masks.reserve(trace.mask_columns.size());
        for (std::size_t i = value_count; i < names.size(); ++i) {
            row_masks.push_back(mask_from_hex(cells[1 + i], trace.rule_count));
        }
        trace.append_row(tick, std::move(row_values), std::move(row_masks));
    }
    return trace;
}

void save_trace_csv(const EpisodeTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write trace file: " + path);
    out << trace_to_csv(trace);
    if (!out) throw IoError("write failed: " + path);
}

EpisodeTrace load_trace_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open trace file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return trace_from_csv(text);
}

} // namespace ahhs
