#include <cmath>
#include <set>
#include <sstream>

#include "radiofine/simulate.hpp"
#include "radiofine/stats.hpp"
#include "support.hpp"

using namespace radiofine;

TEST(RSimulate, FlatCurveZeroSdIsExact) {
    const auto curve = rftest::flat_curve(2000, 0.01);
    auto rng = substream(1, 0, 0);
    for (int i = 0; i < 200; ++i) EXPECT_EQ(r_simulate(curve, CalendarDate(-100), 0, rng).age, 2000);
}

TEST(RSimulate, LinearCurveSampleMean) {
    const auto curve = rftest::linear_curve();
    const Simulator sim(curve);
    auto rng = substream(2024, 0, 0);
    double sum = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) sum += sim.draw_age(CalendarDate(-200), 20, rng);
    EXPECT_NEAR(sum / n, 2150.0, 0.7);
}

TEST(RSimulate, SameStreamSameRecord) {
    const auto curve = load_curve_file(rftest::curve_path());
    auto a = substream(42, 0, 0);
    auto b = substream(42, 0, 0);
    const auto ra = r_simulate(curve, CalendarDate(-200), 20, a);
    const auto rb = r_simulate(curve, CalendarDate(-200), 20, b);
    EXPECT_EQ(ra.age, rb.age);
    EXPECT_EQ(ra.cal_mean, rb.cal_mean);
    EXPECT_EQ(ra.cal_median, rb.cal_median);
    EXPECT_EQ(ra.cal_sigma, rb.cal_sigma);
    EXPECT_EQ(ra.base_date, -200);
}

TEST(RSimulate, SummariesMatchCalibrationOfDrawnAge) {
    const auto curve = load_curve_file(rftest::curve_path());
    const Simulator sim(curve);
    auto rng = substream(9, 1, 2);
    for (int i = 0; i < 20; ++i) {
        const auto r = sim.simulate(CalendarDate(-120), 20, rng);
        const auto c = calibrate(curve, {r.age, 20});
        EXPECT_EQ(r.cal_mean, std::round(c.mean));
        EXPECT_EQ(r.cal_median, std::round(c.median));
        EXPECT_EQ(r.cal_sigma, std::round(c.sigma));
    }
}

TEST(Substream, DistinctKeysGiveDistinctStreams) {
    auto a = substream(5, 0, 0);
    auto b = substream(5, 0, 1);
    auto c = substream(5, 1, 0);
    auto d = substream(6, 0, 0);
    const auto va = a();
    EXPECT_NE(va, b());
    EXPECT_NE(va, c());
    EXPECT_NE(va, d());
}

TEST(GenerateTests, SixtyOneDateShape) {
    const auto curve = load_curve_file(rftest::curve_path());
    TestSeriesParams p;
    p.dates = parse_date_range("-300:0:5");
    p.seed = 11;
    const auto ds = generate_test_datasets(curve, p);
    ASSERT_EQ(p.dates.size(), 61u);
    ASSERT_EQ(ds.size(), 6100u);
    std::size_t sims = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        sims += ds[i].draws.size();
        EXPECT_EQ(ds[i].data_id, static_cast<std::int64_t>(i + 1));
        for (const auto& d : ds[i].draws) {
            EXPECT_EQ(d.base_date, ds[i].original_date);
            EXPECT_EQ(d.sd, 20);
        }
    }
    EXPECT_EQ(sims, 18300u);
}

TEST(GenerateTests, UnitCaseAndErrors) {
    const auto curve = rftest::linear_curve(5);
    TestSeriesParams p;
    p.dates = {-100};
    p.datasets_per_date = 1;
    const auto ds = generate_test_datasets(curve, p);
    ASSERT_EQ(ds.size(), 1u);
    EXPECT_EQ(ds[0].measurements().size(), 3u);
    p.dates.clear();
    EXPECT_THROW_MSG(generate_test_datasets(curve, p), UsageError, "no dates");
}

TEST(GenerateTests, DeterministicAcrossSeedsAndWorkers) {
    const auto curve = load_curve_file(rftest::curve_path());
    TestSeriesParams p;
    p.dates = parse_date_range("-100:-50:10");
    p.datasets_per_date = 20;
    p.seed = 77;
    auto ages = [&](const std::vector<TestDataset>& ds) {
        std::vector<int> v;
        for (const auto& d : ds) {
            for (const auto& r : d.draws) v.push_back(r.age);
        }
        return v;
    };
    const auto one = ages(generate_test_datasets(curve, p));
    p.workers = 4;
    EXPECT_EQ(one, ages(generate_test_datasets(curve, p)));
    p.seed = 78;
    auto other = ages(generate_test_datasets(curve, p));
    EXPECT_NE(one, other);
}

TEST(GenerateTests, CsvRoundTrip) {
    const auto curve = load_curve_file(rftest::curve_path());
    TestSeriesParams p;
    p.dates = {-150, -145};
    p.datasets_per_date = 4;
    const auto ds = generate_test_datasets(curve, p);
    std::stringstream buf;
    write_tests_csv(buf, ds, {{"k", "v"}});
    const auto back = read_tests_csv(buf);
    ASSERT_EQ(back.size(), ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        EXPECT_EQ(back[i].data_id, ds[i].data_id);
        EXPECT_EQ(back[i].original_date, ds[i].original_date);
        ASSERT_EQ(back[i].draws.size(), 3u);
        for (std::size_t j = 0; j < 3; ++j) {
            EXPECT_EQ(back[i].draws[j].age, ds[i].draws[j].age);
            EXPECT_EQ(back[i].draws[j].cal_median, ds[i].draws[j].cal_median);
        }
    }
}

TEST(DateRange, Parsing) {
    EXPECT_EQ(parse_date_range("-10:0:5"), (std::vector<double>{-10, -5, 0}));
    EXPECT_EQ(parse_date_range("-2:0"), (std::vector<double>{-2, -1, 0}));
    EXPECT_EQ(parse_date_range("10BC:AD5:5").size(), 4u);
    EXPECT_THROW(parse_date_range("0:-10:5"), UsageError);
}

// locally linear curve: ages at a fixed date look normal
TEST(SimulateProperties, AgesNormalOnLinearCurve) {
    const auto curve = rftest::linear_curve(10);
    const Simulator sim(curve);
    int passes = 0;
    for (int rep = 0; rep < 20; ++rep) {
        auto rng = substream(500, 0, static_cast<std::uint64_t>(rep));
        std::vector<double> ages;
        for (int i = 0; i < 300; ++i) {
            const double exact = 1950.0 - (-120.0);
            const int a = sim.draw_age(CalendarDate(-120), 20, rng);
            ages.push_back(a);
            EXPECT_LE(std::abs(a - exact), 10 * 22.4);
        }
        if (*dagostino_pearson(ages).p_value > 0.01) ++passes;
    }
    EXPECT_GE(passes, 18);
}

TEST(SimulateProperties, UniqueRatioAtDateZero) {
    const auto curve = load_curve_file(rftest::curve_path());
    const Simulator sim(curve);
    auto rng = substream(11, 0, 0);
    std::set<int> distinct;
    for (int i = 0; i < 300; ++i) distinct.insert(sim.draw_age(CalendarDate(0), 20, rng));
    EXPECT_GE(distinct.size(), 300u / 4);
    EXPECT_LE(distinct.size(), 120u);  // 300 / 2.5
}
