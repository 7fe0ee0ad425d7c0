#pragma once

#include <cstddef>
#include <vector>

#include "radiofine/calcurve.hpp"

namespace radiofine {

struct Measurement {
    int age = 0;       // years BP, integer by contract
    double sd = 0.0;   // years
};

struct HpdSegment {
    double start = 0.0;  // calendar years, older edge
    double end = 0.0;    // calendar years, younger edge
    double probability = 0.0;
};

inline constexpr double kHpd68 = 0.6827;
inline constexpr double kHpd95 = 0.9545;

// Posterior over calendar dates. The grid is the support window of the
// posterior: cells outside it carry less than e^-50 of the peak density.
struct CalibrationResult {
    double grid_start = 0.0;  // calendar date of the first cell centre
    double grid_step = 1.0;
    std::vector<double> pdf;  // probability mass per cell, sums to 1

    double mean = 0.0;
    double median = 0.0;
    double sigma = 0.0;
    std::vector<HpdSegment> hpd68;
    std::vector<HpdSegment> hpd95;

    double date_at(std::size_t cell) const {
        return grid_start + static_cast<double>(cell) * grid_step;
    }
    std::vector<double> grid() const;
};

// Highest-density set covering `target` mass. Cells are admitted by
// descending density (ties toward older dates); the last cell is admitted
// fractionally so the reported mass equals `target`.
std::vector<HpdSegment> hpd_segments(const std::vector<double>& pdf, double grid_start,
                                     double grid_step, double target);

// Curve sampled on a fixed calendar grid, reusable across many calibrations.
class Calibrator {
public:
    explicit Calibrator(const CalCurve& curve, double grid_step = 1.0);

    // Throws DataError "age outside calibratable range" when the summed
    // unnormalised likelihood falls below 1e-300.
    CalibrationResult calibrate(Measurement meas) const;

    double grid_step() const { return step_; }
    std::size_t cell_count() const { return mu_.size(); }

private:
    struct Block {
        double mu_min;
        double mu_max;
        double sigma_max;
    };

    double start_ = 0.0;
    double step_ = 1.0;
    std::vector<double> mu_;
    std::vector<double> var_;
    std::vector<Block> blocks_;
};

CalibrationResult calibrate(const CalCurve& curve, Measurement meas, double grid_step = 1.0);

}  // namespace radiofine
