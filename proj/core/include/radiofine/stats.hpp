#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace radiofine {

struct NormalityResult {
    std::string test_name;
    double statistic = 0.0;
    std::optional<double> p_value;
    std::size_t n = 0;
};

// D'Agostino-Pearson K^2: squared skewness and kurtosis z-scores summed,
// p from chi-square with 2 degrees of freedom. Requires n >= 20.
NormalityResult dagostino_pearson(std::span<const double> sample);

// Anderson-Darling A^2 against a normal with sample mean and (n-1) sd,
// reported with the small-sample factor (1 + 0.75/n + 2.25/n^2).
// Requires n >= 8 and nonzero variance. No p-value.
NormalityResult anderson_darling(std::span<const double> sample);

// Upper 1% critical value of the adjusted statistic.
inline constexpr double kAndersonDarlingCritical1 = 1.035;

// ceil(2 * n^(1/3)), computed exactly.
std::size_t rice_bins(std::size_t n);

struct Histogram {
    std::vector<double> edges;         // bins + 1 edges
    std::vector<std::size_t> counts;   // right-open bins, last closed
};

// Equal-width bins spanning [min, max]; a constant sample lands in the
// first bin of a unit-width grid.
Histogram histogram(std::span<const double> sample, std::optional<std::size_t> bins = std::nullopt);

}  // namespace radiofine
