#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "radiofine/reftable.hpp"
#include "support.hpp"

using namespace radiofine;

namespace {

const CalCurve& intcal() {
    static const CalCurve c = load_curve_file(rftest::curve_path());
    return c;
}

std::string serialise(const RefTable& t, const TableWriteOptions& o = {}) {
    std::ostringstream out;
    write_table(out, t, o);
    return out.str();
}

RefTable parse(const std::string& text) {
    std::istringstream in(text);
    return read_table(in);
}

}  // namespace

TEST(RefSpec, PresetCounts) {
    const std::map<std::string, std::size_t> expected = {
        {"1_50_5", 10000}, {"5_10_20", 650}, {"5_20_5", 1300},  {"5_50_5", 3250},
        {"5_50_20", 3250}, {"5_80_5", 5200}, {"5_100_0", 6500}, {"5_100_5", 6500},
    };
    for (const auto& [label, n] : expected) EXPECT_EQ(table1_preset(label).record_count(), n) << label;
    EXPECT_EQ(table1_preset("5_20_5").slice_count(), 65u);
    EXPECT_EQ(table1_preset("1_50_5").slice_count(), 200u);
    std::size_t combo = 0;
    for (const auto& s : combo_components()) combo += s.record_count();
    EXPECT_EQ(combo, 26000u);
    EXPECT_THROW(table1_preset("7_7_7"), UsageError);
}

TEST(RefSpec, Validation) {
    auto s = table1_preset("5_20_5");
    s.per_slice = 0;
    EXPECT_THROW_MSG(s.validate(), UsageError, "empty spec");
    s = table1_preset("5_20_5");
    s.youngest = 22;
    EXPECT_THROW(s.validate(), UsageError);
    s = table1_preset("5_20_5");
    s.oldest = -60000;
    EXPECT_THROW_MSG(build_reference_table(intcal(), s), DataError, "span outside curve domain");
}

TEST(RefTable, BuildShapeAndGrid) {
    auto spec = table1_preset("5_20_5");
    spec.seed = 5;
    const auto t = build_reference_table(intcal(), spec);
    ASSERT_EQ(t.records.size(), 1300u);
    for (std::size_t i = 0; i < t.records.size(); ++i) {
        const auto& r = t.records[i];
        EXPECT_EQ(r.sim_id, static_cast<std::int64_t>(i + 1));
        EXPECT_EQ(r.base_date, spec.slice_date(i / 20));
        EXPECT_EQ(r.sd, 5);
    }
}

TEST(RefTable, RoundTripAndByteStable) {
    auto spec = table1_preset("5_20_5");
    spec.seed = 5;
    const auto t = build_reference_table(intcal(), spec);
    const auto text = serialise(t);
    EXPECT_EQ(parse(text), t);
    EXPECT_EQ(serialise(build_reference_table(intcal(), spec, 3)), text);
}

TEST(RefTable, HpdColumnsOptional) {
    auto spec = table1_preset("5_20_5");
    spec.oldest = -100;
    spec.youngest = -95;
    const auto t = build_reference_table(intcal(), spec);
    const Simulator sim(intcal());
    TableWriteOptions o;
    o.hpd_calibrator = &sim.calibrator();
    const auto text = serialise(t, o);
    EXPECT_NE(text.find(",hpd68,hpd95"), std::string::npos);
    EXPECT_EQ(parse(text), t);
}

TEST(RefTable, TruncatedFileIsCorrupt) {
    auto spec = table1_preset("5_20_5");
    const auto text = serialise(build_reference_table(intcal(), spec));
    EXPECT_THROW_MSG(parse(text.substr(0, text.size() / 2)), DataError, "corrupt table");
    EXPECT_THROW_MSG(parse(text.substr(0, 40)), DataError, "corrupt table");
}

TEST(RefTable, HandBuiltFixture) {
    std::ifstream in(rftest::data_path("two_records.csv"));
    ASSERT_TRUE(in);
    const auto t = read_table(in);
    EXPECT_EQ(t.label, "tiny");
    EXPECT_EQ(t.curve_name, "handmade");
    ASSERT_EQ(t.records.size(), 2u);
    EXPECT_EQ(t.records[0].base_date, -55);
    EXPECT_EQ(t.records[0].age, 2005);
    EXPECT_EQ(t.records[1].cal_median, -50.5);
    EXPECT_EQ(t.records[1].cal_sigma, 41.25);
    ASSERT_EQ(t.components.size(), 1u);
    EXPECT_EQ(t.components[0].seed, 3u);
}

TEST(ComboTable, CompositionAndIds) {
    auto s = table1_preset("5_20_5");
    const auto single = build_reference_table(intcal(), s);
    const auto combo1 = build_combo_table(intcal(), {s}, 1, "5_20_5");
    EXPECT_EQ(combo1.records, single.records);

    const auto twice = build_combo_table(intcal(), {s, s});
    ASSERT_EQ(twice.records.size(), 2600u);
    for (std::size_t i = 0; i < twice.records.size(); ++i) {
        EXPECT_EQ(twice.records[i].sim_id, static_cast<std::int64_t>(i + 1));
    }
    auto off = s;
    off.oldest = -200;
    EXPECT_THROW_MSG(build_combo_table(intcal(), {s, off}), UsageError, "incompatible specs");
}

namespace {

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i] / n;
        mb += b[i] / n;
    }
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST(RefTableProperties, SliceMeansTrackCurve) {
    auto spec = table1_preset("5_100_5");
    spec.seed = 21;
    const auto t = build_reference_table(intcal(), spec);
    std::map<double, std::pair<double, int>> acc;
    for (const auto& r : t.records) {
        acc[r.base_date].first += r.age;
        ++acc[r.base_date].second;
    }
    std::vector<double> means, mus;
    for (const auto& [d, s] : acc) {
        const auto p = intcal().at(CalendarDate(d));
        const double se = std::sqrt(25.0 + p.sigma * p.sigma) / std::sqrt(static_cast<double>(s.second));
        EXPECT_LE(std::abs(s.first / s.second - p.mu), 4 * se + 0.5) << d;
        means.push_back(s.first / s.second);
        mus.push_back(p.mu);
    }
    EXPECT_GT(correlation(means, mus), 0.99);
}

// Record-level: per-record noise is sqrt(sd^2 + sigma_curve^2) ~ 16 years,
// so the span needs a steep curve; AD 1200-1500 rises ~300 BP.
TEST(RefTableProperties, RecordAgesTrackCurve) {
    RefTableSpec spec{"steep", 5, 20, 5, 1200, 1500, 4};
    const auto t = build_reference_table(intcal(), spec);
    std::vector<double> ages, mus;
    for (const auto& r : t.records) {
        ages.push_back(r.age);
        mus.push_back(intcal().at(CalendarDate(r.base_date)).mu);
    }
    EXPECT_GT(correlation(ages, mus), 0.99);
}
