#include "ahhs/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ahhs {

namespace {

// linear interpolation between order statistics (the common "type 7" rule)
double percentile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("percentile of empty sample");
    if (sorted.size() == 1) return sorted.front();
    const double pos = p * (sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

} // namespace

Quartiles quartiles(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    Quartiles q;
    q.min = values.front();
    q.q1 = percentile_sorted(values, 0.25);
    q.median = percentile_sorted(values, 0.5);
    q.q3 = percentile_sorted(values, 0.75);
    q.max = values.back();
    return q;
}

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return percentile_sorted(values, 0.5);
}

RankSumResult wilcoxon_rank_sum(std::span<const double> a,
                                std::span<const double> b, int exact_limit) {
    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(b.size());
    if (n < 1 || m < 1) throw std::invalid_argument("rank-sum test needs both samples");

    // pooled midranks, doubled so ties stay integral
    struct Entry {
        double value;
        bool from_a;
    };
    std::vector<Entry> pooled;
    pooled.reserve(n + m);
    for (double v : a) pooled.push_back({v, true});
    for (double v : b) pooled.push_back({v, false});
    std::sort(pooled.begin(), pooled.end(),
              [](const Entry& x, const Entry& y) { return x.value < y.value; });

    const int total = n + m;
    std::vector<long long> rank2(total); // 2 * midrank
    std::vector<long long> tie_sizes;
    for (int i = 0; i < total;) {
        int j = i;
        while (j < total && pooled[j].value == pooled[i].value) ++j;
        const long long r2 = (i + 1) + j; // 2 * average of ranks i+1 .. j
        for (int k = i; k < j; ++k) rank2[k] = r2;
        tie_sizes.push_back(j - i);
        i = j;
    }

    long long w2 = 0; // 2 * rank sum of sample a
    for (int i = 0; i < total; ++i) {
        if (pooled[i].from_a) w2 += rank2[i];
    }

    RankSumResult result;
    result.rank_sum = static_cast<double>(w2) / 2.0;
    result.u = result.rank_sum - static_cast<double>(n) * (n + 1) / 2.0;

    if (n <= exact_limit && m <= exact_limit) {
        // permutation distribution of the (doubled) midrank sum: count the
        // ways to choose n of the pooled ranks per achievable sum
        long long max_sum = 0;
        std::vector<long long> sorted_r2 = rank2;
        std::sort(sorted_r2.begin(), sorted_r2.end());
        for (int i = total - n; i < total; ++i) max_sum += sorted_r2[i];

        // dp[k][s] = number of k-subsets with doubled-rank sum s
        std::vector<std::vector<double>> dp(
            n + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
        dp[0][0] = 1.0;
        for (int i = 0; i < total; ++i) {
            const long long r = rank2[i];
            for (int k = std::min(n, i + 1); k >= 1; --k) {
                auto& row = dp[k];
                const auto& prev = dp[k - 1];
                for (long long s = max_sum; s >= r; --s) {
                    if (prev[s - r] != 0.0) row[s] += prev[s - r];
                }
            }
        }
        double total_count = 0.0;
        double le = 0.0;
        double ge = 0.0;
        for (long long s = 0; s <= max_sum; ++s) {
            const double c = dp[n][s];
            if (c == 0.0) continue;
            total_count += c;
            if (s <= w2) le += c;
            if (s >= w2) ge += c;
        }
        result.p_value = std::min(1.0, 2.0 * std::min(le, ge) / total_count);
        result.exact = true;
        return result;
    }

    // normal approximation, tie-corrected variance, continuity correction
    const double nn = n;
    const double mm = m;
    const double nt = total;
    const double mu = nn * (nt + 1.0) / 2.0;
    double tie_term = 0.0;
    for (long long t : tie_sizes) {
        tie_term += static_cast<double>(t) * t * t - static_cast<double>(t);
    }
    const double var =
        nn * mm / 12.0 * ((nt + 1.0) - tie_term / (nt * (nt - 1.0)));
    if (var <= 0.0) {
        result.p_value = 1.0; // every pooled value tied
        result.exact = false;
        return result;
    }
    const double w = result.rank_sum;
    const double z = (std::abs(w - mu) - 0.5) / std::sqrt(var);
    result.p_value = std::min(1.0, std::erfc(std::max(z, 0.0) / std::sqrt(2.0)));
    result.exact = false;
    return result;
}

} // namespace ahhs
