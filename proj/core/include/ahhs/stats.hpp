#pragma once

#include <span>
#include <vector>

namespace ahhs {

// Quartiles with linear interpolation between order statistics. A single
// observation collapses all five numbers to that value.
struct Quartiles {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};
Quartiles quartiles(std::vector<double> values);
double median(std::vector<double> values);

// Wilcoxon/Mann-Whitney rank-sum test, two-sided. Exact (tie-aware, via the
// permutation distribution of the midrank sum) when both samples have at
// most `exact_limit` observations, normal approximation with tie-corrected
// variance and continuity correction otherwise.
struct RankSumResult {
    double u = 0.0;        // Mann-Whitney U of sample a
    double rank_sum = 0.0; // midrank sum of sample a
    double p_value = 1.0;
    bool exact = true;
};
RankSumResult wilcoxon_rank_sum(std::span<const double> a,
                                std::span<const double> b,
                                int exact_limit = 12);

} // namespace ahhs
