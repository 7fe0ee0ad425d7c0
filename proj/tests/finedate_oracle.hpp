#pragma once

// Straight-from-the-definition indicator computation, independent of the
// library: sort, then read the formulas off. Shared by unit and acceptance
// tests.

#include <algorithm>
#include <array>
#include <vector>

#include "radiofine/finedate.hpp"

namespace rftest {

inline double brute_mean(std::vector<double> v) {
    std::sort(v.begin(), v.end());  // fixed summation order
    long double s = 0;
    for (double x : v) s += x;
    return static_cast<double>(s / static_cast<long double>(v.size()));
}

inline double brute_median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

inline std::vector<double> brute_unique(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

// Twelve values in the library's canonical order: per family (CalDate,
// Mean, Median): mean, median, unique mean, unique median.
inline std::array<double, 12> brute_indicators(const std::vector<radiofine::RefRecord>& matched) {
    std::array<std::vector<double>, 3> fam;
    for (const auto& r : matched) {
        fam[0].push_back(r.base_date);
        fam[1].push_back(r.cal_mean);
        fam[2].push_back(r.cal_median);
    }
    std::array<double, 12> out{};
    for (std::size_t f = 0; f < 3; ++f) {
        const auto u = brute_unique(fam[f]);
        out[4 * f + 0] = brute_mean(fam[f]);
        out[4 * f + 1] = brute_median(fam[f]);
        out[4 * f + 2] = brute_mean(u);
        out[4 * f + 3] = brute_median(u);
    }
    return out;
}

}  // namespace rftest
