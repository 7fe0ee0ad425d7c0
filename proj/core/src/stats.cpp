#include "radiofine/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "radiofine/error.hpp"

namespace radiofine {
namespace {

struct Moments {
    double mean = 0.0;
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
};

Moments central_moments(std::span<const double> x) {
    Moments m;
    const double n = static_cast<double>(x.size());
    m.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    for (double v : x) {
        const double d = v - m.mean;
        const double d2 = d * d;
        m.m2 += d2;
        m.m3 += d2 * d;
        m.m4 += d2 * d2;
    }
    m.m2 /= n;
    m.m3 /= n;
    m.m4 /= n;
    return m;
}

double skew_z(double b1, double n) {
    double y = b1 * std::sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)));
    const double beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0) /
                         ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
    const double w2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
    const double delta = 1.0 / std::sqrt(0.5 * std::log(w2));
    const double alpha = std::sqrt(2.0 / (w2 - 1.0));
    if (y == 0.0) y = 1.0;
    const double r = y / alpha;
    return delta * std::log(r + std::sqrt(r * r + 1.0));
}

double kurtosis_z(double b2, double n) {
    const double expected = 3.0 * (n - 1.0) / (n + 1.0);
    const double var_b2 = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
    const double x = (b2 - expected) / std::sqrt(var_b2);
    const double sqrt_beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0)) *
                              std::sqrt(6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0)));
    const double a = 6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + std::sqrt(1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)));
    const double term1 = 1.0 - 2.0 / (9.0 * a);
    const double denom = 1.0 + x * std::sqrt(2.0 / (a - 4.0));
    if (denom == 0.0) throw DataError("kurtosis transform undefined");
    const double term2 = std::copysign(std::cbrt((1.0 - 2.0 / a) / std::abs(denom)), denom);
    return (term1 - term2) / std::sqrt(2.0 / (9.0 * a));
}

// log Phi(z) and log(1 - Phi(z)) without cancellation in the tails.
double log_cdf(double z) { return std::log(0.5 * std::erfc(-z / std::sqrt(2.0))); }
double log_sf(double z) { return std::log(0.5 * std::erfc(z / std::sqrt(2.0))); }

}  // namespace

NormalityResult dagostino_pearson(std::span<const double> sample) {
    if (sample.size() < 20) throw DataError("sample too small for omnibus test");
    const double n = static_cast<double>(sample.size());
    const auto m = central_moments(sample);
    if (m.m2 <= 0.0) throw DataError("zero variance sample");
    const double zs = skew_z(m.m3 / std::pow(m.m2, 1.5), n);
    const double zk = kurtosis_z(m.m4 / (m.m2 * m.m2), n);
    const double k2 = zs * zs + zk * zk;
    return {"dagostino_pearson", k2, std::exp(-0.5 * k2), sample.size()};
}

NormalityResult anderson_darling(std::span<const double> sample) {
    if (sample.size() < 8) throw DataError("sample too small for Anderson-Darling test");
    const std::size_t n = sample.size();
    const double nd = static_cast<double>(n);
    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / nd;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    if (ss <= 0.0) throw DataError("zero variance sample");
    const double sd = std::sqrt(ss / (nd - 1.0));
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = (x[i] - mean) / sd;
        const double hi = (x[n - 1 - i] - mean) / sd;
        s += (2.0 * static_cast<double>(i) + 1.0) * (log_cdf(lo) + log_sf(hi));
    }
    const double a2 = -nd - s / nd;
    const double adjusted = a2 * (1.0 + 0.75 / nd + 2.25 / (nd * nd));
    return {"anderson_darling", adjusted, std::nullopt, n};
}

std::size_t rice_bins(std::size_t n) {
    if (n == 0) throw UsageError("rice_bins needs n >= 1");
    // smallest k with k^3 >= 8n
    auto k = static_cast<std::size_t>(std::ceil(2.0 * std::cbrt(static_cast<double>(n))));
    while (k > 1 && (k - 1) * (k - 1) * (k - 1) >= 8 * n) --k;
    while (k * k * k < 8 * n) ++k;
    return k;
}

Histogram histogram(std::span<const double> sample, std::optional<std::size_t> bins) {
    if (sample.empty()) throw UsageError("histogram of an empty sample");
    const std::size_t k = bins.value_or(rice_bins(sample.size()));
    if (k == 0) throw UsageError("histogram needs at least one bin");
    const auto [lo_it, hi_it] = std::minmax_element(sample.begin(), sample.end());
    const double lo = *lo_it;
    double hi = *hi_it;
    if (hi == lo) hi = lo + 1.0;
    const double width = (hi - lo) / static_cast<double>(k);
    Histogram h;
    h.edges.resize(k + 1);
    for (std::size_t i = 0; i <= k; ++i) h.edges[i] = lo + width * static_cast<double>(i);
    h.edges[k] = hi;
    h.counts.assign(k, 0);
    for (double v : sample) {
        auto bin = static_cast<std::size_t>(std::floor((v - lo) / width));
        bin = std::min(bin, k - 1);
        // floating bin index may land one off near an edge
        while (bin > 0 && v < h.edges[bin]) --bin;
        while (bin + 1 < k && v >= h.edges[bin + 1]) ++bin;
        ++h.counts[bin];
    }
    return h;
}

}  // namespace radiofine
