#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "radiofine/calibrate.hpp"
#include "radiofine/reftable.hpp"

namespace radiofine {

// The twelve central-tendency estimates, in canonical output order.
enum class Indicator : std::size_t {
    CalDateMean,
    CalDateMedian,
    UniqueCalDateMean,
    UniqueCalDateMedian,
    MeanMean,
    MeanMedian,
    UniqueMeanMean,
    UniqueMeanMedian,
    MedianMean,
    MedianMedian,
    UniqueMedianMean,
    UniqueMedianMedian,
};

inline constexpr std::size_t kIndicatorCount = 12;
inline constexpr std::array<Indicator, kIndicatorCount> kAllIndicators = {
    Indicator::CalDateMean,      Indicator::CalDateMedian,      Indicator::UniqueCalDateMean,
    Indicator::UniqueCalDateMedian, Indicator::MeanMean,        Indicator::MeanMedian,
    Indicator::UniqueMeanMean,   Indicator::UniqueMeanMedian,   Indicator::MedianMean,
    Indicator::MedianMedian,     Indicator::UniqueMedianMean,   Indicator::UniqueMedianMedian,
};

// Source multiset an indicator aggregates: matched calendar dates, or the
// calibrated means / medians stored with the matched records.
enum class Family { CalDate, Mean, Median };

Family family_of(Indicator ind);
bool is_unique_variant(Indicator ind);
// Machine name, e.g. "CalDateMedian", "unique_MeanMean".
std::string_view indicator_name(Indicator ind);
// Table label, e.g. "CalDate Median", "unique_Mean Mean".
std::string_view indicator_label(Indicator ind);
std::string_view family_name(Family f);
// Accepts machine names and table labels.
std::optional<Indicator> parse_indicator(std::string_view text);

struct MatchSet {
    std::vector<Measurement> measurements;
    std::vector<std::vector<RefRecord>> per_measurement;  // X'_i with their records
    std::vector<double> pooled;          // X'
    std::vector<double> pooled_means;    // {mu_ij}
    std::vector<double> pooled_medians;  // {M_ij}
    std::vector<int> unmatched;          // measured ages with no match

    std::size_t n_prime() const { return pooled.size(); }
    // Number of distinct measured ages (diagnostic only).
    std::size_t unique_measured() const;
    const std::vector<double>& source(Family f) const;
};

struct IndicatorSet {
    std::array<double, kIndicatorCount> values{};
    std::array<std::size_t, kIndicatorCount> n_used{};

    double operator[](Indicator ind) const { return values[static_cast<std::size_t>(ind)]; }
    double& operator[](Indicator ind) { return values[static_cast<std::size_t>(ind)]; }
    std::size_t used(Indicator ind) const { return n_used[static_cast<std::size_t>(ind)]; }
};

// Exact-age index over a reference table.
class AgeIndex {
public:
    explicit AgeIndex(const RefTable& table);
    explicit AgeIndex(RefTable&&) = delete;
    std::span<const std::size_t> lookup(int age) const;
    const RefTable& table() const { return *table_; }

private:
    const RefTable* table_;
    std::unordered_map<int, std::vector<std::size_t>> by_age_;
};

// Exact integer matching; each measured age contributes its full match
// list, duplicates included. Throws DataError "no matches in reference
// table" when no age matches.
MatchSet match_measurements(const AgeIndex& index, std::span<const Measurement> measurements);
MatchSet match_measurements(const RefTable& table, std::span<const Measurement> measurements);

// Unweighted means and medians over the pooled multisets; unique variants
// deduplicate each pooled multiset by exact value.
IndicatorSet compute_indicators(const MatchSet& matches);

double mean_of(std::span<const double> values);
// Even sizes take the mean of the central pair.
double median_of(std::vector<double> values);

// Overview: one row per matched record. Summary: one row per indicator.
void write_overview(std::ostream& out, const MatchSet& matches,
                    const std::vector<std::pair<std::string, std::string>>& meta = {});
void write_summary(std::ostream& out, const MatchSet& matches, const IndicatorSet& indicators,
                   const std::vector<std::pair<std::string, std::string>>& meta = {});
IndicatorSet read_summary(std::istream& in);

}  // namespace radiofine
