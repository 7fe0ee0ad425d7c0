#include "radiofine/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include "radiofine/error.hpp"
#include "radiofine/parallel.hpp"
#include "radiofine/stats.hpp"
#include "radiofine/text.hpp"

namespace radiofine {

ReferencePool::ReferencePool(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw UsageError("empty reference pool");
    std::sort(values_.begin(), values_.end());
}

std::span<const double> ReferencePool::within(double x, double tolerance) const {
    const auto lo = std::lower_bound(values_.begin(), values_.end(), x - tolerance);
    const auto hi = std::upper_bound(lo, values_.end(), x + tolerance);
    // bounds are computed in floating point; re-check the defining inequality
    auto first = lo;
    while (first != hi && std::abs(x - *first) > tolerance) ++first;
    auto last = hi;
    while (last != first && std::abs(x - *(last - 1)) > tolerance) --last;
    return {first, last};
}

MpdResult ReferencePool::search(double x, const MpdParams& params) const {
    if (!(params.t0 > 0.0) || !(params.dt > 0.0) || params.t_max < params.t0) {
        throw UsageError("invalid tolerance schedule");
    }
    double t = params.t0;
    auto hits = within(x, t);
    while (hits.size() < params.m_min && t < params.t_max) {
        t = std::min(t + params.dt, params.t_max);
        hits = within(x, t);
    }
    if (hits.empty()) throw DataError("no reference values within tolerance");

    MpdResult r;
    r.input = x;
    r.tolerance = t;
    r.match_count = hits.size();
    r.range = hits.back() - hits.front();
    r.under_min = hits.size() < params.m_min;

    std::size_t best_count = 0;
    double best = hits.front();
    for (std::size_t i = 0; i < hits.size();) {
        std::size_t j = i;
        while (j < hits.size() && hits[j] == hits[i]) ++j;
        const std::size_t count = j - i;
        const double v = hits[i];
        // ascending scan: on a full tie the older value is already held
        if (count > best_count || (count == best_count && std::abs(v - x) < std::abs(best - x))) {
            best_count = count;
            best = v;
        }
        i = j;
    }
    r.mpd = best;
    return r;
}

MpdResult mpd_search(std::span<const double> pool, double x, const MpdParams& params) {
    return ReferencePool(std::vector<double>(pool.begin(), pool.end())).search(x, params);
}

DeltaCategory classify_delta(double delta) {
    const double a = std::abs(delta);
    if (a <= 10.0) return DeltaCategory::Excellent;
    if (a <= 25.0) return DeltaCategory::HighQuality;
    if (a <= 35.0) return DeltaCategory::Satisfactory;
    return DeltaCategory::Improvable;
}

std::string_view category_name(DeltaCategory c) {
    switch (c) {
        case DeltaCategory::Excellent: return "excellent";
        case DeltaCategory::HighQuality: return "high_quality";
        case DeltaCategory::Satisfactory: return "satisfactory";
        case DeltaCategory::Improvable: return "improvable";
    }
    return "";
}

std::optional<DeltaCategory> parse_category(std::string_view text) {
    for (auto c : {DeltaCategory::Excellent, DeltaCategory::HighQuality, DeltaCategory::Satisfactory,
                   DeltaCategory::Improvable}) {
        if (text == category_name(c)) return c;
    }
    return std::nullopt;
}

OverallAggregate overall_aggregate(std::span<const MpdResult> results) {
    if (results.empty()) throw DataError("nothing to aggregate");
    std::vector<double> mpds;
    mpds.reserve(results.size());
    for (const auto& r : results) mpds.push_back(r.mpd);
    std::sort(mpds.begin(), mpds.end());
    return {mean_of(mpds), median_of(mpds)};
}

std::string_view flag_name(EvalFlag f) {
    switch (f) {
        case EvalFlag::Ok: return "ok";
        case EvalFlag::OutOfSpan: return "out_of_span";
        case EvalFlag::NoMatch: return "no_match";
    }
    return "";
}

std::vector<double> EvalTable::values(Indicator ind) const {
    std::vector<double> out;
    for (const auto& r : rows) {
        if (r.indicator == ind && r.value) out.push_back(*r.value);
    }
    return out;
}

EvalTable evaluate_test_series(const RefTable& table, const std::vector<TestDataset>& datasets, int workers) {
    const AgeIndex index(table);
    double oldest = 0.0;
    double youngest = 0.0;
    for (std::size_t i = 0; i < table.components.size(); ++i) {
        const auto& c = table.components[i];
        oldest = i == 0 ? c.oldest : std::min(oldest, c.oldest);
        youngest = i == 0 ? c.youngest : std::max(youngest, c.youngest);
    }
    EvalTable eval;
    eval.rows.resize(datasets.size() * kIndicatorCount);
    parallel_for(datasets.size(), workers, [&](std::size_t k) {
        const auto& ds = datasets[k];
        const auto meas = ds.measurements();
        EvalFlag flag = EvalFlag::Ok;
        if (!table.components.empty() && (ds.original_date < oldest || ds.original_date > youngest)) {
            flag = EvalFlag::OutOfSpan;
        }
        std::optional<MatchSet> matches;
        std::optional<IndicatorSet> ind;
        try {
            matches = match_measurements(index, meas);
            ind = compute_indicators(*matches);
        } catch (const DataError&) {
            flag = EvalFlag::NoMatch;
        }
        for (std::size_t i = 0; i < kIndicatorCount; ++i) {
            EvalRow& row = eval.rows[k * kIndicatorCount + i];
            row.data_id = ds.data_id;
            row.original_date = ds.original_date;
            row.indicator = kAllIndicators[i];
            row.flag = flag;
            if (ind) {
                row.value = (*ind)[row.indicator];
                row.delta = *row.value - ds.original_date;
                row.n_matches = matches->n_prime();
                row.unmatched_ages = matches->unmatched.size();
            } else {
                row.unmatched_ages = meas.size();
            }
        }
    });
    return eval;
}

void write_eval_csv(std::ostream& out, const EvalTable& eval,
                    const std::vector<std::pair<std::string, std::string>>& meta) {
    for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
    out << "data_id,original_cal_date,indicator,value,delta,category,flag,n_matches,unmatched_ages\n";
    for (const auto& r : eval.rows) {
        out << r.data_id << ',' << format_double(r.original_date) << ',' << indicator_name(r.indicator) << ','
            << (r.value ? format_double(*r.value) : "") << ',' << (r.delta ? format_double(*r.delta) : "")
            << ',' << (r.category() ? category_name(*r.category()) : "") << ',' << flag_name(r.flag) << ','
            << r.n_matches << ',' << r.unmatched_ages << '\n';
    }
}

EvalTable read_eval_csv(std::istream& in) {
    const auto doc = read_csv(in);
    const auto c_id = doc.column("data_id");
    const auto c_date = doc.column("original_cal_date");
    const auto c_ind = doc.column("indicator");
    const auto c_val = doc.column("value");
    const auto c_delta = doc.column("delta");
    const auto c_flag = doc.find_column("flag");
    const auto c_n = doc.find_column("n_matches");
    const auto c_un = doc.find_column("unmatched_ages");

    // data_id -> slot, in order of first appearance
    std::map<std::int64_t, std::size_t> slot;
    std::vector<std::array<std::optional<EvalRow>, kIndicatorCount>> groups;
    for (std::size_t r = 0; r < doc.rows.size(); ++r) {
        const auto& row = doc.rows[r];
        const auto where = "line " + std::to_string(doc.row_lines[r]);
        auto cell = [&](std::size_t c) -> std::string_view { return c < row.size() ? std::string_view(row[c]) : ""; };
        const auto id = parse_int(cell(c_id));
        const auto date = parse_double(cell(c_date));
        const auto ind = parse_indicator(cell(c_ind));
        if (!id || !date || !ind) throw DataError(where + ": malformed evaluation row");
        EvalRow e;
        e.data_id = *id;
        e.original_date = *date;
        e.indicator = *ind;
        if (!cell(c_val).empty()) {
            e.value = parse_double(cell(c_val));
            if (!e.value) throw DataError(where + ": bad value");
        }
        if (!cell(c_delta).empty()) {
            e.delta = parse_double(cell(c_delta));
            if (!e.delta) throw DataError(where + ": bad delta");
        }
        if (c_flag) {
            const auto f = cell(*c_flag);
            e.flag = f == "no_match" ? EvalFlag::NoMatch : f == "out_of_span" ? EvalFlag::OutOfSpan : EvalFlag::Ok;
        }
        if (c_n) e.n_matches = static_cast<std::size_t>(parse_int(cell(*c_n)).value_or(0));
        if (c_un) e.unmatched_ages = static_cast<std::size_t>(parse_int(cell(*c_un)).value_or(0));
        auto [it, fresh] = slot.try_emplace(e.data_id, groups.size());
        if (fresh) groups.emplace_back();
        auto& g = groups[it->second][static_cast<std::size_t>(e.indicator)];
        if (g) throw DataError(where + ": duplicate indicator for dataset " + std::to_string(e.data_id));
        g = e;
    }
    EvalTable eval;
    eval.rows.reserve(groups.size() * kIndicatorCount);
    for (const auto& g : groups) {
        for (const auto& r : g) {
            if (!r) throw DataError("evaluation dataset lacks some indicators");
            eval.rows.push_back(*r);
        }
    }
    return eval;
}

std::vector<PerformancePoint> performance_curves(const EvalTable& eval, double threshold) {
    if (threshold != 25.0 && threshold != 35.0) throw UsageError("unknown threshold (use 25 or 35)");
    std::map<std::pair<double, int>, PerformancePoint> acc;
    for (std::size_t k = 0; k < eval.dataset_count(); ++k) {
        const EvalRow* rows = &eval.rows[k * kIndicatorCount];
        for (auto fam : {Family::CalDate, Family::Mean, Family::Median}) {
            auto& p = acc[{rows[0].original_date, static_cast<int>(fam)}];
            p.date = rows[0].original_date;
            p.family = fam;
            ++p.datasets;
            double sum = 0.0;
            int n = 0;
            for (std::size_t i = 0; i < kIndicatorCount; ++i) {
                if (family_of(rows[i].indicator) != fam || !rows[i].delta) continue;
                sum += std::abs(*rows[i].delta);
                ++n;
            }
            if (n > 0 && sum / n <= threshold) ++p.successes;
        }
    }
    std::vector<PerformancePoint> out;
    for (auto& [key, p] : acc) {
        p.fraction = static_cast<double>(p.successes) / static_cast<double>(p.datasets);
        out.push_back(p);
    }
    return out;
}

AverageDeviation average_deviation_analysis(const EvalTable& eval) {
    if (eval.rows.empty()) throw DataError("empty evaluation table");
    std::map<double, std::array<std::pair<double, std::size_t>, kIndicatorCount>> by_date;
    std::array<std::pair<double, std::size_t>, kIndicatorCount> total{};
    for (const auto& r : eval.rows) {
        auto& cell = by_date[r.original_date];
        if (!r.delta) continue;
        const auto i = static_cast<std::size_t>(r.indicator);
        cell[i].first += *r.delta;
        ++cell[i].second;
        total[i].first += *r.delta;
        ++total[i].second;
    }
    AverageDeviation out;
    for (const auto& [date, cells] : by_date) {
        out.dates.push_back(date);
        auto& row = out.by_date.emplace_back();
        for (std::size_t i = 0; i < kIndicatorCount; ++i) {
            if (cells[i].second) row[i] = cells[i].first / static_cast<double>(cells[i].second);
        }
    }
    for (std::size_t i = 0; i < kIndicatorCount; ++i) {
        if (total[i].second) out.full_span[i] = total[i].first / static_cast<double>(total[i].second);
    }
    return out;
}

double fraction_within(const EvalTable& eval, double limit) {
    std::size_t n = 0;
    std::size_t hit = 0;
    for (const auto& r : eval.rows) {
        if (!r.delta) continue;
        ++n;
        if (std::abs(*r.delta) <= limit) ++hit;
    }
    if (n == 0) throw DataError("no matched evaluations");
    return static_cast<double>(hit) / static_cast<double>(n);
}

void write_performance_csv(std::ostream& out, const std::vector<PerformancePoint>& points,
                           const std::vector<std::pair<std::string, std::string>>& meta) {
    for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
    out << "original_cal_date,family,datasets,successes,fraction\n";
    for (const auto& p : points) {
        out << format_double(p.date) << ',' << family_name(p.family) << ',' << p.datasets << ','
            << p.successes << ',' << format_double(p.fraction) << '\n';
    }
}

void write_avg_deviation_csv(std::ostream& out, const AverageDeviation& avg,
                             const std::vector<std::pair<std::string, std::string>>& meta) {
    for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
    out << "original_cal_date";
    for (auto ind : kAllIndicators) out << ',' << indicator_name(ind);
    out << '\n';
    auto emit = [&](const std::array<std::optional<double>, kIndicatorCount>& row) {
        for (const auto& v : row) out << ',' << (v ? format_double(*v) : "");
        out << '\n';
    };
    for (std::size_t d = 0; d < avg.dates.size(); ++d) {
        out << format_double(avg.dates[d]);
        emit(avg.by_date[d]);
    }
    out << "all";
    emit(avg.full_span);
}

std::vector<IntervalNormality> normality_by_interval(const RefTable& table,
                                                     const std::vector<TestDataset>& datasets) {
    const AgeIndex index(table);
    std::map<double, std::pair<std::vector<double>, std::vector<double>>> by_date;
    for (const auto& ds : datasets) {
        auto& [ages, matched] = by_date[ds.original_date];
        for (const auto& d : ds.draws) ages.push_back(static_cast<double>(d.age));
        const auto ms = ds.measurements();
        for (const auto& m : ms) {
            for (auto i : index.lookup(m.age)) matched.push_back(table.records[i].base_date);
        }
    }
    std::vector<IntervalNormality> out;
    out.reserve(by_date.size());
    for (const auto& [date, samples] : by_date) {
        IntervalNormality row;
        row.date = date;
        row.n_ages = samples.first.size();
        row.n_matched = samples.second.size();
        try {
            const auto dp = dagostino_pearson(samples.first);
            row.dp_statistic = dp.statistic;
            row.dp_p = dp.p_value;
        } catch (const DataError&) {
        }
        try {
            row.ad_statistic = anderson_darling(samples.second).statistic;
        } catch (const DataError&) {
        }
        out.push_back(row);
    }
    return out;
}

void write_normality_csv(std::ostream& out, const std::vector<IntervalNormality>& rows,
                         const std::vector<std::pair<std::string, std::string>>& meta) {
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
    out << "original_cal_date,n_ages,dagostino_k2,dagostino_p,n_matched,anderson_darling_a2\n";
    for (const auto& r : rows) {
        out << format_double(r.date) << ',' << r.n_ages << ',' << opt(r.dp_statistic) << ',' << opt(r.dp_p) << ','
            << r.n_matched << ',' << opt(r.ad_statistic) << '\n';
    }
}

std::vector<MpdRow> mpd_report(const EvalTable& eval, const EvalTable& pool, const MpdParams& params) {
    std::vector<std::optional<ReferencePool>> pools(kIndicatorCount);
    for (auto ind : kAllIndicators) {
        auto v = pool.values(ind);
        if (!v.empty()) pools[static_cast<std::size_t>(ind)].emplace(std::move(v));
    }
    std::vector<MpdRow> out;
    for (const auto& r : eval.rows) {
        if (!r.value) continue;
        const auto& p = pools[static_cast<std::size_t>(r.indicator)];
        if (!p) continue;
        MpdResult res;
        try {
            res = p->search(*r.value, params);
        } catch (const DataError&) {
            continue;  // nothing within the widest tolerance
        }
        res.delta = res.mpd - r.original_date;
        out.push_back({r.data_id, r.original_date, r.indicator, std::move(res)});
    }
    return out;
}

void write_mpd_report_csv(std::ostream& out, const std::vector<MpdRow>& rows,
                          const std::vector<std::pair<std::string, std::string>>& meta) {
    for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
    out << "data_id,original_cal_date,indicator,input,tolerance,match_count,mpd,range,delta,category,under_min\n";
    for (const auto& r : rows) {
        const auto& m = r.result;
        out << r.data_id << ',' << format_double(r.original_date) << ',' << indicator_name(r.indicator) << ','
            << format_double(m.input) << ',' << format_double(m.tolerance) << ',' << m.match_count << ','
            << format_double(m.mpd) << ',' << format_double(m.range) << ','
            << (m.delta ? format_double(*m.delta) : "") << ','
            << (m.delta ? category_name(classify_delta(*m.delta)) : "") << ',' << (m.under_min ? 1 : 0) << '\n';
    }
}

}  // namespace radiofine
