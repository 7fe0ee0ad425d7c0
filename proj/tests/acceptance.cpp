// Acceptance gate: one line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <string>

#include "cli.hpp"
#include "finedate_oracle.hpp"
#include "radiofine/calibrate.hpp"
#include "radiofine/error.hpp"
#include "radiofine/evaluate.hpp"
#include "radiofine/finedate.hpp"
#include "radiofine/lookup.hpp"
#include "radiofine/reftable.hpp"
#include "radiofine/simulate.hpp"
#include "radiofine/stats.hpp"
#include "radiofine/text.hpp"

namespace fs = std::filesystem;
using namespace radiofine;

namespace {

constexpr std::uint64_t kTableSeed = 5;
constexpr std::uint64_t kTestSeed = 11;

struct Verdict {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Verdict()> body;
};

std::string fmt(double v, int decimals = 2) { return format_fixed(v, decimals); }

const CalCurve& intcal() {
    static const CalCurve c = load_curve_file(RADIOFINE_CURVE_FILE);
    return c;
}

const Simulator& simulator() {
    static const Simulator s(intcal());
    return s;
}

int workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// Sampling series: 61 dates x 100 datasets x 3 draws at sd 20.
const std::vector<TestDataset>& series3() {
    static const auto ds = [] {
        TestSeriesParams p;
        p.dates = parse_date_range("-300:0:5");
        p.datasets_per_date = 100;
        p.group_size = 3;
        p.sd = 20;
        p.seed = kTestSeed;
        p.workers = workers();
        return generate_test_datasets(simulator(), p);
    }();
    return ds;
}

RefTable preset_table(const std::string& label) {
    auto spec = table1_preset(label);
    spec.seed = kTableSeed;
    return build_reference_table(simulator(), spec, workers());
}

const EvalTable& eval_against(const std::string& label) {
    static std::map<std::string, EvalTable> cache;
    auto it = cache.find(label);
    if (it == cache.end()) {
        it = cache.emplace(label, evaluate_test_series(preset_table(label), series3(), workers())).first;
    }
    return it->second;
}

Verdict rice_rule() {
    const auto a = rice_bins(300), b = rice_bins(1163), c = rice_bins(12);
    return {a == 14 && b == 22 && c == 5,
            "rice(300)=" + std::to_string(a) + " rice(1163)=" + std::to_string(b) + " rice(12)=" + std::to_string(c)};
}

Verdict calibration_oracle() {
    std::vector<CurveKnot> knots;
    for (int bp = 0; bp <= 4000; bp += 10) knots.push_back({double(bp), double(bp), 0.01});
    const CalCurve linear("linear", knots);
    const Calibrator cal(linear);
    std::mt19937_64 rng(2020);
    std::uniform_int_distribution<int> age(1500, 2600);
    std::uniform_real_distribution<double> sd(5, 60);
    double worst_loc = 0, worst_rel = 0;
    for (int i = 0; i < 20; ++i) {
        const Measurement m{age(rng), sd(rng)};
        const auto r = cal.calibrate(m);
        const double mu = 1950.0 - m.age;
        const double sigma = std::sqrt(m.sd * m.sd + 1e-4);
        worst_loc = std::max({worst_loc, std::abs(r.mean - mu), std::abs(r.median - mu)});
        worst_rel = std::max(worst_rel, std::abs(r.sigma - sigma) / sigma);
    }
    return {worst_loc <= 0.5 && worst_rel <= 0.05,
            "max |loc err|=" + fmt(worst_loc, 4) + " max sigma rel err=" + fmt(100 * worst_rel, 3) + "%"};
}

Verdict indicator_oracle() {
    std::mt19937_64 rng(31337);
    int compared = 0;
    double worst = 0;
    while (compared < 1000) {
        RefTable t;
        const std::size_t n = 1 + rng() % 80;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = -300 + 5.0 * static_cast<double>(rng() % 65);
            t.records.push_back({static_cast<std::int64_t>(i + 1), d, 2000 + static_cast<int>(rng() % 15), 5,
                                 d + static_cast<double>(rng() % 41) - 20, d + static_cast<double>(rng() % 31) - 15, 40});
        }
        std::vector<Measurement> ms(1 + rng() % 5);
        for (auto& m : ms) m = {2000 + static_cast<int>(rng() % 15), 20};
        std::vector<RefRecord> brute;
        for (const auto& m : ms) {
            for (const auto& r : t.records) {
                if (r.age == m.age) brute.push_back(r);
            }
        }
        if (brute.empty() || brute.size() > 50) continue;
        const auto got = compute_indicators(match_measurements(t, ms));
        const auto want = rftest::brute_indicators(brute);
        for (std::size_t k = 0; k < kIndicatorCount; ++k) worst = std::max(worst, std::abs(got.values[k] - want[k]));
        ++compared;
    }
    std::ostringstream d;
    d << compared << " match sets, max |diff|=" << worst;
    return {worst <= 1e-9, d.str()};
}

Verdict table_shapes() {
    const auto a = preset_table("1_50_5").records.size();
    const auto b = preset_table("5_20_5").records.size();
    const auto c = preset_table("5_100_5").records.size();
    auto specs = combo_components();
    for (auto& s : specs) s.seed = kTableSeed;
    const auto d = build_combo_table(simulator(), specs, workers()).records.size();
    return {a == 10000 && b == 1300 && c == 6500 && d == 26000,
            std::to_string(a) + " / " + std::to_string(b) + " / " + std::to_string(c) + " / " + std::to_string(d)};
}

Verdict series3_normality() {
    std::map<double, std::vector<double>> ages;
    for (const auto& ds : series3()) {
        for (const auto& r : ds.draws) ages[ds.original_date].push_back(r.age);
    }
    std::size_t pass = 0;
    double stat = 0, p = 0;
    for (const auto& [date, x] : ages) {
        const auto r = dagostino_pearson(x);
        pass += *r.p_value > 0.05;
        stat += r.statistic;
        p += *r.p_value;
    }
    const double n = static_cast<double>(ages.size());
    const double frac = static_cast<double>(pass) / n;
    stat /= n;
    p /= n;
    return {ages.size() == 61 && frac >= 0.85 && stat >= 1.0 && stat <= 3.0 && p >= 0.35 && p <= 0.70,
            std::to_string(pass) + "/" + std::to_string(ages.size()) + " intervals p>0.05, mean K2=" + fmt(stat) +
                ", mean p=" + fmt(p, 3)};
}

Verdict unique_ratio() {
    auto rng = substream(kTestSeed, 0, 0);
    std::set<int> distinct;
    for (int i = 0; i < 300; ++i) distinct.insert(simulator().draw_age(CalendarDate(0), 20, rng));
    return {distinct.size() >= 75 && distinct.size() <= 115, std::to_string(distinct.size()) + " distinct of 300"};
}

Verdict bias_structure() {
    const auto avg = average_deviation_analysis(eval_against("5_50_5"));
    auto full = [&](Indicator i) { return *avg.full_span[static_cast<std::size_t>(i)]; };
    bool ok = std::abs(full(Indicator::CalDateMean)) <= 6 && std::abs(full(Indicator::CalDateMedian)) <= 6;
    double lo = 1e9, hi = -1e9;
    for (auto i : kAllIndicators) {
        if (family_of(i) == Family::CalDate) continue;
        lo = std::min(lo, full(i));
        hi = std::max(hi, full(i));
    }
    ok = ok && lo >= -25 && hi <= -5;
    return {ok, "CalDateMean=" + fmt(full(Indicator::CalDateMean)) + " CalDateMedian=" +
                    fmt(full(Indicator::CalDateMedian)) + " mean/median families in [" + fmt(lo) + ", " + fmt(hi) + "]"};
}

Verdict delta_categories() {
    const auto& ev = eval_against("5_20_5");
    const double a = fraction_within(ev, 25);
    const double b = fraction_within(ev, 35);
    return {a >= 0.45 && a <= 0.67 && b >= 0.60 && b <= 0.81,
            "|d|<=25: " + fmt(100 * a) + "%, |d|<=35: " + fmt(100 * b) + "%"};
}

Verdict dendro() {
    const auto table = preset_table("5_100_5");
    const std::vector<Measurement> ms = {{1999, 10}, {2003, 16}, {2022, 16}, {2035, 15}};
    const auto m = match_measurements(table, ms);
    const auto ind = compute_indicators(m);
    double worst = 0;
    for (auto i : kAllIndicators) worst = std::max(worst, std::abs(ind[i] + 20.5));
    const double u1 = std::abs(ind[Indicator::UniqueCalDateMean] + 20.5);
    const double u2 = std::abs(ind[Indicator::UniqueCalDateMedian] + 20.5);
    std::string split;
    for (const auto& pm : m.per_measurement) split += (split.empty() ? "" : "/") + std::to_string(pm.size());
    return {worst <= 35 && u1 <= 20 && u2 <= 20,
            "N'=" + std::to_string(m.n_prime()) + " (" + split + "), max |d|=" + fmt(worst) + ", unique caldate |d|=" +
                fmt(u1) + "/" + fmt(u2)};
}

Verdict problem_zones() {
    const auto pts = performance_curves(eval_against("5_50_5"), 25);
    std::vector<double> caldate;
    std::map<double, double> by_date;
    for (const auto& p : pts) {
        if (p.family != Family::CalDate) continue;
        caldate.push_back(p.fraction);
        by_date[p.date] = p.fraction;
    }
    const double median = rftest::brute_median(caldate);
    const double a = by_date.at(-60), b = by_date.at(-210);
    return {caldate.size() == 61 && a < median && b < median,
            "f(-60)=" + fmt(a) + " f(-210)=" + fmt(b) + " median=" + fmt(median)};
}

Verdict mpd_suite() {
    bool ok = true;
    const auto a = mpd_search(std::vector<double>(5, -75.0), -75);
    ok = ok && a.tolerance == 1 && a.mpd == -75 && a.range == 0 && a.match_count == 5;
    const auto b = mpd_search(std::vector<double>{-80, -80, -75, -74, -60}, -76);
    ok = ok && b.tolerance == 10 && b.mpd == -80 && b.range == 6 && b.match_count == 4 && b.under_min;
    bool threw = false;
    try {
        mpd_search(std::vector<double>{0}, 50);
    } catch (const DataError&) {
        threw = true;
    }
    ok = ok && threw;

    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> v(-150, 0);
    std::size_t violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> pool(1 + rng() % 60);
        for (auto& x : pool) x = v(rng);
        const ReferencePool ref(pool);
        const double x = v(rng);
        std::multiset<double> prev;
        for (double t = 1; t <= 10; ++t) {
            const auto hits = ref.within(x, t);
            const std::multiset<double> cur(hits.begin(), hits.end());
            if (!std::includes(cur.begin(), cur.end(), prev.begin(), prev.end())) ++violations;
            prev = cur;
        }
    }
    return {ok && violations == 0,
            std::string("examples ") + (ok ? "ok" : "FAILED") + ", monotonicity violations=" + std::to_string(violations)};
}

Verdict lookup_correctness() {
    bool ok = bucket_left_of(-251, 5) == -255 && bucket_left_of(-250, 5) == -250 && bucket_left_of(-242, 5) == -245;
    const auto& ev = eval_against("5_20_5");
    const auto table = build_lookup(ev);
    std::size_t bad_sum = 0, bad_order = 0;
    for (auto ind : kAllIndicators) {
        std::size_t present = 0, total = 0;
        for (const auto& r : ev.rows) present += r.indicator == ind && r.value.has_value();
        for (std::size_t b = 0; b < table.bucket_count(); ++b) {
            const auto& c = table.at(b, ind);
            total += c.total;
            if (c.total && !(*c.frac_tight <= *c.frac_wide)) ++bad_order;
        }
        bad_sum += total != present;
    }
    const auto hit = table.query(Indicator::CalDateMedian, -251);
    ok = ok && hit.bucket_left == -255 && bad_sum == 0 && bad_order == 0;
    return {ok, "buckets=" + std::to_string(table.bucket_count()) + ", count-sum mismatches=" + std::to_string(bad_sum) +
                    ", frac12>frac25 cells=" + std::to_string(bad_order)};
}

std::map<std::string, std::string> pipeline_csvs(const fs::path& dir, int worker_count) {
    fs::remove_all(dir);
    const auto w = std::to_string(worker_count);
    const auto p = [&](const char* f) { return (dir / f).string(); };
    const std::vector<std::vector<std::string>> steps = {
        {"--workers", w, "--seed", "5", "ref-gen", "--label", "5_20_5", "--out", p("ref.csv")},
        {"--workers", w, "--seed", "11", "simulate", "tests", "--dates=-300:0:5", "--out", p("tests.csv")},
        {"--workers", w, "evaluate", "--ref", p("ref.csv"), "--tests", p("tests.csv"), "--out", p("eval")},
        {"lookup", "build", "--eval", p("eval/eval_long.csv"), "--out", p("lookup.csv")},
        {"finedate", "--ref", p("ref.csv"), "--ages", "2073,2087,2097", "--sd", "20", "--out", p("fd")},
        {"hist", "--in", p("eval/eval_long.csv"), "--col", "CalDateMedian", "--out", p("hist.csv")},
        {"scatter", "--in", p("eval/eval_long.csv"), "--x", "original_cal_date", "--y", "caldate_median", "--out",
         p("scatter.csv")},
    };
    std::ostringstream sink;
    for (const auto& s : steps) {
        if (cli::run(s, sink, sink) != 0) throw std::runtime_error("pipeline step failed: " + sink.str());
    }
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.path().extension() != ".csv") continue;
        std::ifstream in(e.path(), std::ios::binary);
        files[fs::relative(e.path(), dir).string()] = {std::istreambuf_iterator<char>(in), {}};
    }
    return files;
}

Verdict determinism() {
    const auto base = fs::temp_directory_path() / "radiofine_acceptance";
    const auto a = pipeline_csvs(base / "a", 1);
    const auto b = pipeline_csvs(base / "b", std::max(2, workers()));
    std::size_t differ = 0;
    for (const auto& [name, text] : a) {
        auto it = b.find(name);
        differ += it == b.end() || it->second != text;
    }
    fs::remove_all(base);
    return {!a.empty() && a.size() == b.size() && differ == 0,
            std::to_string(a.size()) + " CSVs compared across worker counts, differing=" + std::to_string(differ)};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "Rice-rule determinism", 0.001, rice_rule},
        {2, "Calibration oracle (linear curve)", 1, calibration_oracle},
        {3, "Indicator oracle (1,000 match sets)", 5, indicator_oracle},
        {4, "Reference table shapes", 60, table_shapes},
        {5, "61-date sampling normality", 120, series3_normality},
        {6, "Unique-ratio band at date 0", 1, unique_ratio},
        {7, "Full-span bias structure (5_50_5)", 600, bias_structure},
        {8, "Delta-category distribution (5_20_5)", 600, delta_categories},
        {9, "Known-age validation (5_100_5)", 60, dendro},
        {10, "Problem-zone detection", 600, problem_zones},
        {11, "MPD unit suite", 60, mpd_suite},
        {12, "Lookup correctness", 60, lookup_correctness},
        {13, "Pipeline determinism", 600, determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.body();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.limit_seconds;
        const bool pass = v.pass && in_time;
        failures += !pass;
        std::printf("%s  C%02d %-40s %10.3f ms  %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs * 1e3,
                    v.detail.c_str(), in_time ? "" : "  (over time limit)");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
