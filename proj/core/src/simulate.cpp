#include "radiofine/simulate.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "radiofine/error.hpp"
#include "radiofine/parallel.hpp"
#include "radiofine/text.hpp"

namespace radiofine {

Rng substream(std::uint64_t seed, std::uint64_t slice, std::uint64_t replicate) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(slice), static_cast<std::uint32_t>(slice >> 32),
                      static_cast<std::uint32_t>(replicate), static_cast<std::uint32_t>(replicate >> 32)};
    return Rng(seq);
}

Simulator::Simulator(const CalCurve& curve, double grid_step)
    : curve_(&curve), calibrator_(curve, grid_step) {}

int Simulator::draw_age(CalendarDate date, double sd, Rng& rng) const {
    if (sd < 0.0) throw UsageError("negative sd");
    const auto p = curve_->at(date);
    std::normal_distribution<double> normal(p.mu, std::sqrt(sd * sd + p.sigma * p.sigma));
    return static_cast<int>(round_half_away(normal(rng)));
}

SimRecord Simulator::simulate(CalendarDate date, double sd, Rng& rng) const {
    SimRecord rec;
    rec.base_date = date.value();
    rec.age = draw_age(date, sd, rng);
    rec.sd = sd;
    const auto cal = calibrator_.calibrate({rec.age, sd});
    rec.cal_mean = round_half_away(cal.mean);
    rec.cal_median = round_half_away(cal.median);
    rec.cal_sigma = round_half_away(cal.sigma);
    return rec;
}

SimRecord r_simulate(const CalCurve& curve, CalendarDate date, double sd, Rng& rng) {
    return Simulator(curve).simulate(date, sd, rng);
}

std::vector<Measurement> TestDataset::measurements() const {
    std::vector<Measurement> out;
    out.reserve(draws.size());
    for (const auto& d : draws) out.push_back({d.age, d.sd});
    return out;
}

std::vector<TestDataset> generate_test_datasets(const Simulator& sim, const TestSeriesParams& params) {
    if (params.dates.empty()) throw UsageError("no dates");
    if (params.datasets_per_date < 1) throw UsageError("datasets per date must be >= 1");
    if (params.group_size < 1) throw UsageError("group size must be >= 1");
    const auto per = static_cast<std::size_t>(params.datasets_per_date);
    std::vector<TestDataset> out(params.dates.size() * per);
    parallel_for(out.size(), params.workers, [&](std::size_t k) {
        const std::size_t date_idx = k / per;
        const std::size_t ds_idx = k % per;
        auto rng = substream(params.seed, date_idx, ds_idx);
        TestDataset& ds = out[k];
        ds.data_id = static_cast<std::int64_t>(k + 1);
        ds.original_date = params.dates[date_idx];
        for (int g = 0; g < params.group_size; ++g) {
            auto rec = sim.simulate(CalendarDate(ds.original_date), params.sd, rng);
            rec.sim_id = static_cast<std::int64_t>(k) * params.group_size + g + 1;
            ds.draws.push_back(rec);
        }
    });
    return out;
}

std::vector<TestDataset> generate_test_datasets(const CalCurve& curve, const TestSeriesParams& params) {
    return generate_test_datasets(Simulator(curve), params);
}

std::vector<double> parse_date_range(const std::string& spec) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = spec.find(':', start);
        parts.push_back(spec.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    if (parts.size() < 2 || parts.size() > 3) throw UsageError("date range must be start:end[:step]");
    const double from = parse_calendar_date(parts[0]).value();
    const double to = parse_calendar_date(parts[1]).value();
    double step = 1.0;
    if (parts.size() == 3) {
        const auto s = parse_double(parts[2]);
        if (!s || !(*s > 0.0)) throw UsageError("date range step must be positive");
        step = *s;
    }
    if (to < from) throw UsageError("date range end precedes start");
    const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = from + static_cast<double>(i) * step;
    return out;
}

void write_tests_csv(std::ostream& out, const std::vector<TestDataset>& datasets,
                     const std::vector<std::pair<std::string, std::string>>& meta) {
    for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
    out << "data_id,original_cal_date,age_bp,sd,cal_mean,cal_median,cal_sigma\n";
    for (const auto& ds : datasets) {
        for (const auto& d : ds.draws) {
            out << ds.data_id << ',' << format_double(ds.original_date) << ',' << d.age << ','
                << format_double(d.sd) << ',' << format_double(d.cal_mean) << ','
                << format_double(d.cal_median) << ',' << format_double(d.cal_sigma) << '\n';
        }
    }
}

std::vector<TestDataset> read_tests_csv(std::istream& in) {
    const auto doc = read_csv(in);
    const auto c_id = doc.column("data_id");
    const auto c_date = doc.column("original_cal_date");
    const auto c_age = doc.column("age_bp");
    const auto c_sd = doc.column("sd");
    const auto c_mean = doc.find_column("cal_mean");
    const auto c_median = doc.find_column("cal_median");
    const auto c_sigma = doc.find_column("cal_sigma");

    std::vector<TestDataset> out;
    for (std::size_t r = 0; r < doc.rows.size(); ++r) {
        const auto& row = doc.rows[r];
        const auto where = "line " + std::to_string(doc.row_lines[r]);
        auto cell = [&](std::size_t c) -> std::string_view {
            if (c >= row.size()) throw DataError(where + ": missing column");
            return row[c];
        };
        const auto id = parse_int(cell(c_id));
        const auto date = parse_double(cell(c_date));
        const auto age = parse_int(cell(c_age));
        const auto sd = parse_double(cell(c_sd));
        if (!id || !date || !age || !sd) throw DataError(where + ": malformed test row");
        SimRecord rec;
        rec.base_date = *date;
        rec.age = static_cast<int>(*age);
        rec.sd = *sd;
        auto optional_cell = [&](std::optional<std::size_t> c) {
            if (!c || *c >= row.size() || row[*c].empty()) return 0.0;
            const auto v = parse_double(row[*c]);
            if (!v) throw DataError(where + ": malformed calibrated value");
            return *v;
        };
        rec.cal_mean = optional_cell(c_mean);
        rec.cal_median = optional_cell(c_median);
        rec.cal_sigma = optional_cell(c_sigma);
        if (out.empty() || out.back().data_id != *id) {
            out.push_back({*id, *date, {}});
        } else if (out.back().original_date != *date) {
            throw DataError(where + ": dataset " + std::to_string(*id) + " mixes original dates");
        }
        rec.sim_id = static_cast<std::int64_t>(r + 1);
        out.back().draws.push_back(rec);
    }
    return out;
}

}  // namespace radiofine
