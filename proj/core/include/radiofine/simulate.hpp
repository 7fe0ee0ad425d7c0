#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "radiofine/calcurve.hpp"
#include "radiofine/calibrate.hpp"

namespace radiofine {

using Rng = std::mt19937_64;

// Independent stream for one (slice, replicate) cell of a run. Streams do
// not depend on the order in which cells are generated.
Rng substream(std::uint64_t seed, std::uint64_t slice, std::uint64_t replicate);

struct SimRecord {
    std::int64_t sim_id = 0;
    double base_date = 0.0;  // calendar date the age was simulated for
    int age = 0;             // years BP
    double sd = 0.0;
    // Calibrated summary of (age, sd), whole years.
    double cal_mean = 0.0;
    double cal_median = 0.0;
    double cal_sigma = 0.0;

    bool operator==(const SimRecord&) const = default;
};

// Draws and calibrates simulated ages against one curve.
class Simulator {
public:
    explicit Simulator(const CalCurve& curve, double grid_step = 1.0);
    // keeps a reference to the curve: temporaries would dangle
    explicit Simulator(CalCurve&&, double = 1.0) = delete;

    // Age ~ Normal(mu(date), sqrt(sd^2 + sigma_curve(date)^2)), rounded half
    // away from zero, then calibrated with the same sd.
    SimRecord simulate(CalendarDate date, double sd, Rng& rng) const;

    int draw_age(CalendarDate date, double sd, Rng& rng) const;

    const CalCurve& curve() const { return *curve_; }
    const Calibrator& calibrator() const { return calibrator_; }

private:
    const CalCurve* curve_;
    Calibrator calibrator_;
};

SimRecord r_simulate(const CalCurve& curve, CalendarDate date, double sd, Rng& rng);

struct TestDataset {
    std::int64_t data_id = 0;
    double original_date = 0.0;
    std::vector<SimRecord> draws;  // shared sd and base date

    std::vector<Measurement> measurements() const;
};

struct TestSeriesParams {
    std::vector<double> dates;
    int datasets_per_date = 100;
    int group_size = 3;
    double sd = 20.0;
    std::uint64_t seed = 0;
    int workers = 1;
};

// Datasets ordered by date index, then dataset index; data_id runs from 1.
std::vector<TestDataset> generate_test_datasets(const Simulator& sim, const TestSeriesParams& params);
std::vector<TestDataset> generate_test_datasets(const CalCurve& curve, const TestSeriesParams& params);

// start:end:step, both ends inclusive, BC/AD suffixes accepted.
std::vector<double> parse_date_range(const std::string& spec);

// CSV columns: data_id, original_cal_date, age_bp, sd, cal_mean, cal_median, cal_sigma.
void write_tests_csv(std::ostream& out, const std::vector<TestDataset>& datasets,
                     const std::vector<std::pair<std::string, std::string>>& meta = {});
// cal_* columns may be blank. Rows sharing a data_id form one dataset.
std::vector<TestDataset> read_tests_csv(std::istream& in);

}  // namespace radiofine
