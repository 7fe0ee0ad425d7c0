#include "radiofine/finedate.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <set>

#include "radiofine/error.hpp"
#include "radiofine/text.hpp"

namespace radiofine {
namespace {

struct IndicatorInfo {
    std::string_view name;
    std::string_view label;
    Family family;
    bool unique;
    bool median;
};

constexpr std::array<IndicatorInfo, kIndicatorCount> kInfo = {{
    {"CalDateMean", "CalDate Mean", Family::CalDate, false, false},
    {"CalDateMedian", "CalDate Median", Family::CalDate, false, true},
    {"unique_CalDateMean", "unique_CalDate Mean", Family::CalDate, true, false},
    {"unique_CalDateMedian", "unique_CalDate Median", Family::CalDate, true, true},
    {"MeanMean", "Mean Mean", Family::Mean, false, false},
    {"MeanMedian", "Mean Median", Family::Mean, false, true},
    {"unique_MeanMean", "unique_Mean Mean", Family::Mean, true, false},
    {"unique_MeanMedian", "unique_Mean Median", Family::Mean, true, true},
    {"MedianMean", "Median Mean", Family::Median, false, false},
    {"MedianMedian", "Median Median", Family::Median, false, true},
    {"unique_MedianMean", "unique_Median Mean", Family::Median, true, false},
    {"unique_MedianMedian", "unique_Median Median", Family::Median, true, true},
}};

const IndicatorInfo& info(Indicator ind) { return kInfo[static_cast<std::size_t>(ind)]; }

std::vector<double> dedupe(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

Family family_of(Indicator ind) { return info(ind).family; }
bool is_unique_variant(Indicator ind) { return info(ind).unique; }
std::string_view indicator_name(Indicator ind) { return info(ind).name; }
std::string_view indicator_label(Indicator ind) { return info(ind).label; }

std::string_view family_name(Family f) {
    switch (f) {
        case Family::CalDate: return "CalDate";
        case Family::Mean: return "Mean";
        case Family::Median: return "Median";
    }
    return "";
}

namespace {

// case, '_' and ' ' are not significant: "caldate_median" == "CalDate Median"
std::string fold_name(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '_' || c == ' ') continue;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

}  // namespace

std::optional<Indicator> parse_indicator(std::string_view text) {
    text = trim(text);
    for (auto ind : kAllIndicators) {
        if (text == info(ind).name || text == info(ind).label) return ind;
    }
    auto key = fold_name(text);
    if (key.starts_with("u") && !key.starts_with("unique")) key = "unique" + key.substr(1);  // u_mean_mean
    for (auto ind : kAllIndicators) {
        if (key == fold_name(info(ind).name)) return ind;
    }
    return std::nullopt;
}

std::size_t MatchSet::unique_measured() const {
    std::set<int> ages;
    for (const auto& m : measurements) ages.insert(m.age);
    return ages.size();
}

const std::vector<double>& MatchSet::source(Family f) const {
    switch (f) {
        case Family::CalDate: return pooled;
        case Family::Mean: return pooled_means;
        case Family::Median: return pooled_medians;
    }
    return pooled;
}

AgeIndex::AgeIndex(const RefTable& table) : table_(&table) {
    for (std::size_t i = 0; i < table.records.size(); ++i) by_age_[table.records[i].age].push_back(i);
}

std::span<const std::size_t> AgeIndex::lookup(int age) const {
    const auto it = by_age_.find(age);
    if (it == by_age_.end()) return {};
    return it->second;
}

MatchSet match_measurements(const AgeIndex& index, std::span<const Measurement> measurements) {
    if (measurements.empty()) throw UsageError("no measurements");
    MatchSet m;
    m.measurements.assign(measurements.begin(), measurements.end());
    m.per_measurement.resize(measurements.size());
    const auto& records = index.table().records;
    for (std::size_t i = 0; i < measurements.size(); ++i) {
        const auto hits = index.lookup(measurements[i].age);
        if (hits.empty()) m.unmatched.push_back(measurements[i].age);
        for (std::size_t idx : hits) {
            const auto& rec = records[idx];
            m.per_measurement[i].push_back(rec);
            m.pooled.push_back(rec.base_date);
            m.pooled_means.push_back(rec.cal_mean);
            m.pooled_medians.push_back(rec.cal_median);
        }
    }
    if (m.pooled.empty()) throw DataError("no matches in reference table");
    return m;
}

MatchSet match_measurements(const RefTable& table, std::span<const Measurement> measurements) {
    return match_measurements(AgeIndex(table), measurements);
}

double mean_of(std::span<const double> values) {
    if (values.empty()) throw DataError("nothing to aggregate");
    // sorted summation: the result must not depend on input order
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double v : sorted) sum += v;
    return sum / static_cast<double>(sorted.size());
}

double median_of(std::vector<double> values) {
    if (values.empty()) throw DataError("nothing to aggregate");
    const std::size_t n = values.size();
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(values.begin(), mid, values.end());
    const double upper = *mid;
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), mid);
    return 0.5 * (lower + upper);
}

IndicatorSet compute_indicators(const MatchSet& matches) {
    if (matches.n_prime() == 0) throw DataError("nothing to aggregate");
    IndicatorSet out;
    for (auto fam : {Family::CalDate, Family::Mean, Family::Median}) {
        const auto& pooled = matches.source(fam);
        const auto unique = dedupe(pooled);
        for (auto ind : kAllIndicators) {
            if (family_of(ind) != fam) continue;
            const auto& src = is_unique_variant(ind) ? unique : pooled;
            out[ind] = info(ind).median ? median_of(src) : mean_of(src);
            out.n_used[static_cast<std::size_t>(ind)] = src.size();
        }
    }
    return out;
}

void write_overview(std::ostream& out, const MatchSet& matches,
                    const std::vector<std::pair<std::string, std::string>>& meta) {
    for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
    out << "measurement_index,measured_age,ref_id,ref_cal_date,ref_cal_mean,ref_cal_median,ref_cal_sigma\n";
    for (std::size_t i = 0; i < matches.per_measurement.size(); ++i) {
        for (const auto& r : matches.per_measurement[i]) {
            out << i + 1 << ',' << matches.measurements[i].age << ',' << r.sim_id << ','
                << format_double(r.base_date) << ',' << format_double(r.cal_mean) << ','
                << format_double(r.cal_median) << ',' << format_double(r.cal_sigma) << '\n';
        }
    }
}

void write_summary(std::ostream& out, const MatchSet& matches, const IndicatorSet& indicators,
                   const std::vector<std::pair<std::string, std::string>>& meta) {
    for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
    out << "# measurements=" << matches.measurements.size() << '\n';
    out << "# unique_measured=" << matches.unique_measured() << '\n';
    out << "# n_prime=" << matches.n_prime() << '\n';
    out << "# unmatched=";
    for (std::size_t i = 0; i < matches.unmatched.size(); ++i) out << (i ? ";" : "") << matches.unmatched[i];
    out << '\n';
    out << "indicator,label,value,n_used\n";
    for (auto ind : kAllIndicators) {
        out << indicator_name(ind) << ',' << indicator_label(ind) << ',' << format_double(indicators[ind])
            << ',' << indicators.used(ind) << '\n';
    }
}

IndicatorSet read_summary(std::istream& in) {
    const auto doc = read_csv(in);
    const auto c_ind = doc.column("indicator");
    const auto c_val = doc.column("value");
    const auto c_n = doc.column("n_used");
    IndicatorSet out;
    std::array<bool, kIndicatorCount> seen{};
    for (const auto& row : doc.rows) {
        if (row.size() <= std::max({c_ind, c_val, c_n})) throw DataError("short summary row");
        const auto ind = parse_indicator(row[c_ind]);
        const auto v = parse_double(row[c_val]);
        const auto n = parse_int(row[c_n]);
        if (!ind || !v || !n) throw DataError("malformed summary row");
        out[*ind] = *v;
        out.n_used[static_cast<std::size_t>(*ind)] = static_cast<std::size_t>(*n);
        seen[static_cast<std::size_t>(*ind)] = true;
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
        throw DataError("summary lacks some indicators");
    }
    return out;
}

}  // namespace radiofine
