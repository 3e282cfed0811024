#pragma once

#include "shotline/common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace shotline {

/// Linear-interpolation quantile of a sample (the "type 7" definition used
/// by R and numpy by default).
inline double quantile(std::vector<double> v, double q) {
    require(!v.empty(), "quantile of an empty sample");
    require(q >= 0.0 && q <= 1.0, "quantile level must lie in [0, 1]");
    std::sort(v.begin(), v.end());
    const double h = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

struct RankSumResult {
    double u = 0.0;  // Mann-Whitney U of the first sample
    double p_value = 1.0;
};

/// Two-sided Mann-Whitney rank-sum test, normal approximation with tie
/// and continuity corrections.
inline RankSumResult mann_whitney(const std::vector<double>& a, const std::vector<double>& b) {
    require(!a.empty() && !b.empty(), "rank-sum test needs two nonempty samples");
    const std::size_t n = a.size() + b.size();
    std::vector<std::pair<double, int>> pooled;
    pooled.reserve(n);
    for (double x : a) pooled.emplace_back(x, 0);
    for (double x : b) pooled.emplace_back(x, 1);
    std::sort(pooled.begin(), pooled.end(), [](const auto& l, const auto& r) { return l.first < r.first; });

    double rank_sum_a = 0.0;
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && pooled[j].first == pooled[i].first) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k)
            if (pooled[k].second == 0) rank_sum_a += avg_rank;
        const auto t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const auto na = static_cast<double>(a.size());
    const auto nb = static_cast<double>(b.size());
    const auto nn = static_cast<double>(n);
    RankSumResult r;
    r.u = rank_sum_a - na * (na + 1.0) / 2.0;
    const double mean = na * nb / 2.0;
    const double var = na * nb / 12.0 * ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
    if (var <= 0.0) return r;  // every value tied
    const double z = (std::abs(r.u - mean) - 0.5) / std::sqrt(var);
    r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    return r;
}

}  // namespace shotline
