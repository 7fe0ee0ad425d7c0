#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "radiofine/finedate.hpp"
#include "radiofine/reftable.hpp"
#include "radiofine/simulate.hpp"

namespace radiofine {

// ---------------------------------------------------------------------------
// Most probable date search

struct MpdParams {
    double t0 = 1.0;
    double dt = 1.0;
    double t_max = 10.0;
    std::size_t m_min = 5;
};

struct MpdResult {
    std::string indicator_name;
    double input = 0.0;
    double tolerance = 0.0;
    std::size_t match_count = 0;
    double mpd = 0.0;
    double range = 0.0;
    std::optional<double> delta;
    bool under_min = false;
};

// Sorted multiset of reference values, queried repeatedly.
class ReferencePool {
public:
    explicit ReferencePool(std::vector<double> values);

    // Grows the tolerance from t0 by dt until m_min values lie within it or
    // t_max is reached. The mode breaks ties toward x, then toward the older
    // value. Throws DataError when nothing lies within t_max.
    MpdResult search(double x, const MpdParams& params = {}) const;

    // Values r with |x - r| <= tolerance, ascending.
    std::span<const double> within(double x, double tolerance) const;
    std::size_t size() const { return values_.size(); }

private:
    std::vector<double> values_;
};

MpdResult mpd_search(std::span<const double> pool, double x, const MpdParams& params = {});

// ---------------------------------------------------------------------------
// Delta categories

enum class DeltaCategory { Excellent, HighQuality, Satisfactory, Improvable };

// |delta| <= 10, <= 25, <= 35, otherwise improvable.
DeltaCategory classify_delta(double delta);
std::string_view category_name(DeltaCategory c);
std::optional<DeltaCategory> parse_category(std::string_view text);

struct OverallAggregate {
    double mean = 0.0;
    double median = 0.0;
};

OverallAggregate overall_aggregate(std::span<const MpdResult> results);

// ---------------------------------------------------------------------------
// Test-series evaluation

enum class EvalFlag { Ok, OutOfSpan, NoMatch };
std::string_view flag_name(EvalFlag f);

struct EvalRow {
    std::int64_t data_id = 0;
    double original_date = 0.0;
    Indicator indicator = Indicator::CalDateMean;
    std::optional<double> value;
    std::optional<double> delta;
    EvalFlag flag = EvalFlag::Ok;
    std::size_t n_matches = 0;
    std::size_t unmatched_ages = 0;

    std::optional<DeltaCategory> category() const {
        return delta ? std::optional(classify_delta(*delta)) : std::nullopt;
    }
};

// Long form: twelve rows per dataset, datasets in input order.
struct EvalTable {
    std::vector<EvalRow> rows;

    std::size_t dataset_count() const { return rows.size() / kIndicatorCount; }
    std::vector<double> values(Indicator ind) const;
};

EvalTable evaluate_test_series(const RefTable& table, const std::vector<TestDataset>& datasets,
                               int workers = 1);

void write_eval_csv(std::ostream& out, const EvalTable& eval,
                    const std::vector<std::pair<std::string, std::string>>& meta = {});
EvalTable read_eval_csv(std::istream& in);

// ---------------------------------------------------------------------------
// Aggregate views

struct PerformancePoint {
    double date = 0.0;
    Family family = Family::CalDate;
    std::size_t datasets = 0;
    std::size_t successes = 0;
    double fraction = 0.0;
};

// Family score = mean of the family's four absolute deltas. Datasets
// without matches count as failures. Only thresholds 25 and 35 are accepted.
std::vector<PerformancePoint> performance_curves(const EvalTable& eval, double threshold);

struct AverageDeviation {
    std::vector<double> dates;
    // by_date[d][indicator]: signed mean delta over matched datasets at dates[d]
    std::vector<std::array<std::optional<double>, kIndicatorCount>> by_date;
    std::array<std::optional<double>, kIndicatorCount> full_span{};
};

AverageDeviation average_deviation_analysis(const EvalTable& eval);

// Fraction of indicator evaluations with |delta| <= limit over all matched rows.
double fraction_within(const EvalTable& eval, double limit);

void write_performance_csv(std::ostream& out, const std::vector<PerformancePoint>& points,
                           const std::vector<std::pair<std::string, std::string>>& meta = {});
void write_avg_deviation_csv(std::ostream& out, const AverageDeviation& avg,
                             const std::vector<std::pair<std::string, std::string>>& meta = {});

// Normality battery per original date: D'Agostino-Pearson on the simulated
// test ages, Anderson-Darling on the pooled matched calendar dates.
// Tests whose preconditions fail leave their fields empty.
struct IntervalNormality {
    double date = 0.0;
    std::size_t n_ages = 0;
    std::optional<double> dp_statistic;
    std::optional<double> dp_p;
    std::size_t n_matched = 0;
    std::optional<double> ad_statistic;
};

std::vector<IntervalNormality> normality_by_interval(const RefTable& table,
                                                     const std::vector<TestDataset>& datasets);

void write_normality_csv(std::ostream& out, const std::vector<IntervalNormality>& rows,
                         const std::vector<std::pair<std::string, std::string>>& meta = {});

// MPD search of every evaluated indicator value against the pool of values
// the same indicator took in `pool` (often the table itself).
struct MpdRow {
    std::int64_t data_id = 0;
    double original_date = 0.0;
    Indicator indicator = Indicator::CalDateMean;
    MpdResult result;
};

std::vector<MpdRow> mpd_report(const EvalTable& eval, const EvalTable& pool, const MpdParams& params = {});

void write_mpd_report_csv(std::ostream& out, const std::vector<MpdRow>& rows,
                          const std::vector<std::pair<std::string, std::string>>& meta = {});

}  // namespace radiofine
