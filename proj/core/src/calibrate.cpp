#include "radiofine/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "radiofine/error.hpp"

namespace radiofine {
namespace {

constexpr std::size_t kBlockSize = 64;
// Cells whose exponent exceeds this cannot contribute 1e-300 of mass.
constexpr double kDeadExponent = 760.0;
// Cells further than this below the peak exponent are outside the support window.
constexpr double kWindowExponent = 50.0;
const double kLogMinMass = std::log(1e-300);

}  // namespace

std::vector<double> CalibrationResult::grid() const {
    std::vector<double> g(pdf.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = date_at(i);
    return g;
}

std::vector<HpdSegment> hpd_segments(const std::vector<double>& pdf, double grid_start,
                                     double grid_step, double target) {
    const std::size_t n = pdf.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // stable: equal densities keep ascending index, i.e. older dates first
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pdf[a] > pdf[b]; });

    std::vector<double> share(n, 0.0);  // fraction of each cell admitted
    double acc = 0.0;
    std::size_t partial = n;
    for (std::size_t idx : order) {
        if (acc >= target || pdf[idx] <= 0.0) break;
        const double need = target - acc;
        if (pdf[idx] <= need) {
            share[idx] = 1.0;
            acc += pdf[idx];
        } else {
            share[idx] = need / pdf[idx];
            acc = target;
            partial = idx;
        }
    }

    struct Piece {
        double a, b, p;
        bool cut_left, cut_right;
    };
    std::vector<HpdSegment> out;
    bool open = false;
    bool prev_cut_right = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (share[i] <= 0.0) {
            open = false;
            continue;
        }
        const double t = grid_start + static_cast<double>(i) * grid_step;
        const double lo = t - 0.5 * grid_step;
        const double hi = t + 0.5 * grid_step;
        Piece piece{lo, hi, pdf[i] * share[i], false, false};
        if (i == partial) {
            const double w = share[i] * grid_step;
            const bool left = i > 0 && share[i - 1] > 0.0;
            const bool right = i + 1 < n && share[i + 1] > 0.0;
            if (left) {
                piece.b = lo + w;
                piece.cut_right = true;
            } else if (right) {
                piece.a = hi - w;
                piece.cut_left = true;
            } else {
                piece.a = t - 0.5 * w;
                piece.b = t + 0.5 * w;
                piece.cut_left = piece.cut_right = true;
            }
        }
        if (open && !prev_cut_right && !piece.cut_left) {
            out.back().end = piece.b;
            out.back().probability += piece.p;
        } else {
            out.push_back({piece.a, piece.b, piece.p});
        }
        open = true;
        prev_cut_right = piece.cut_right;
    }
    return out;
}

Calibrator::Calibrator(const CalCurve& curve, double grid_step) : step_(grid_step) {
    if (!(grid_step > 0.0)) throw UsageError("grid step must be positive");
    start_ = curve.domain_min().value();
    const double span = curve.domain_max().value() - start_;
    const auto cells = static_cast<std::size_t>(std::floor(span / grid_step + 1e-9)) + 1;
    mu_.resize(cells);
    var_.resize(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        const auto p = curve.at(CalendarDate(start_ + static_cast<double>(i) * grid_step));
        mu_[i] = p.mu;
        var_[i] = p.sigma * p.sigma;
    }
    for (std::size_t b = 0; b < cells; b += kBlockSize) {
        const std::size_t e = std::min(cells, b + kBlockSize);
        Block blk{mu_[b], mu_[b], var_[b]};
        for (std::size_t i = b; i < e; ++i) {
            blk.mu_min = std::min(blk.mu_min, mu_[i]);
            blk.mu_max = std::max(blk.mu_max, mu_[i]);
            blk.sigma_max = std::max(blk.sigma_max, var_[i]);
        }
        blk.sigma_max = std::sqrt(blk.sigma_max);
        blocks_.push_back(blk);
    }
}

CalibrationResult Calibrator::calibrate(Measurement meas) const {
    if (meas.sd < 0.0) throw UsageError("negative measurement sd");
    const double age = meas.age;
    const double sd2 = meas.sd * meas.sd;

    // Locate the blocks that can carry mass at all.
    std::size_t first = mu_.size();
    std::size_t last = 0;
    std::vector<bool> live(blocks_.size(), false);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        const auto& blk = blocks_[b];
        const double d = age < blk.mu_min ? blk.mu_min - age : (age > blk.mu_max ? age - blk.mu_max : 0.0);
        const double q = d * d / (2.0 * (sd2 + blk.sigma_max * blk.sigma_max));
        if (q <= kDeadExponent) {
            live[b] = true;
            first = std::min(first, b * kBlockSize);
            last = std::max(last, std::min(mu_.size(), (b + 1) * kBlockSize) - 1);
        }
    }
    if (first > last) throw DataError("age outside calibratable range");

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> q(last - first + 1, inf);
    double q_min = inf;
    for (std::size_t i = first; i <= last; ++i) {
        if (!live[i / kBlockSize]) continue;
        const double d = age - mu_[i];
        const double v = d * d / (2.0 * (sd2 + var_[i]));
        q[i - first] = v;
        q_min = std::min(q_min, v);
    }

    std::size_t lo = q.size();
    std::size_t hi = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] - q_min <= kWindowExponent) {
            lo = std::min(lo, i);
            hi = i;
        }
    }

    CalibrationResult r;
    r.grid_step = step_;
    r.grid_start = start_ + static_cast<double>(first + lo) * step_;
    r.pdf.resize(hi - lo + 1);
    double total = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
        const double w = std::exp(-(q[i] - q_min));
        r.pdf[i - lo] = w;
        total += w;
    }
    if (-q_min + std::log(total) < kLogMinMass) throw DataError("age outside calibratable range");
    for (double& p : r.pdf) p /= total;

    double mean = 0.0;
    for (std::size_t i = 0; i < r.pdf.size(); ++i) mean += r.pdf[i] * r.date_at(i);
    double var = 0.0;
    for (std::size_t i = 0; i < r.pdf.size(); ++i) {
        const double d = r.date_at(i) - mean;
        var += r.pdf[i] * d * d;
    }
    r.mean = mean;
    r.sigma = std::sqrt(var);

    double cum = 0.0;
    r.median = r.date_at(r.pdf.size() - 1);
    for (std::size_t i = 0; i < r.pdf.size(); ++i) {
        if (r.pdf[i] > 0.0 && cum + r.pdf[i] >= 0.5) {
            r.median = r.date_at(i) - 0.5 * step_ + step_ * (0.5 - cum) / r.pdf[i];
            break;
        }
        cum += r.pdf[i];
    }

    r.hpd68 = hpd_segments(r.pdf, r.grid_start, step_, kHpd68);
    r.hpd95 = hpd_segments(r.pdf, r.grid_start, step_, kHpd95);
    return r;
}

CalibrationResult calibrate(const CalCurve& curve, Measurement meas, double grid_step) {
    return Calibrator(curve, grid_step).calibrate(meas);
}

}  // namespace radiofine
