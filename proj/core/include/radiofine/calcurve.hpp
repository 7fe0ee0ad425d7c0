#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace radiofine {

// Reference year of the BP scale.
inline constexpr double kBpReferenceYear = 1950.0;

// Signed calendar year: negative = BC, positive = AD, no year-zero correction.
class CalendarDate {
public:
    constexpr CalendarDate() = default;
    constexpr explicit CalendarDate(double value) : value_(value) {}

    static constexpr CalendarDate from_cal_bp(double cal_bp) {
        return CalendarDate(kBpReferenceYear - cal_bp);
    }

    constexpr double value() const { return value_; }
    constexpr double cal_bp() const { return kBpReferenceYear - value_; }

    friend constexpr auto operator<=>(CalendarDate, CalendarDate) = default;

private:
    double value_ = 0.0;
};

// Parses "-200", "200BC", "200 BC", "20AD", "AD20". Throws UsageError.
CalendarDate parse_calendar_date(const std::string& text);

struct CurveKnot {
    double cal_bp = 0.0;
    double c14_age = 0.0;
    double error = 0.0;  // 1-sigma, years
};

struct CurvePoint {
    double mu = 0.0;     // expected 14C age, years BP
    double sigma = 0.0;  // curve error, years
};

// Piecewise-linear calibration curve. Immutable once constructed.
class CalCurve {
public:
    // Knots may arrive in ascending or descending cal BP order; they are
    // stored ascending. Throws DataError on fewer than two knots, duplicate
    // or non-monotone cal BP, or non-positive error.
    CalCurve(std::string name, std::vector<CurveKnot> knots);

    const std::string& name() const { return name_; }
    const std::vector<CurveKnot>& knots() const { return knots_; }

    // Oldest and youngest calendar dates covered.
    CalendarDate domain_min() const { return CalendarDate::from_cal_bp(knots_.back().cal_bp); }
    CalendarDate domain_max() const { return CalendarDate::from_cal_bp(knots_.front().cal_bp); }
    bool contains(CalendarDate t) const;

    // Linear interpolation of mean and error. Throws DataError
    // "out of curve range" outside the domain.
    CurvePoint at(CalendarDate t) const;

    // Largest curve error over the calendar interval [from, to].
    double max_error(CalendarDate from, CalendarDate to) const;

private:
    std::string name_;
    std::vector<CurveKnot> knots_;
};

enum class CurveFormat { Auto, Comma, Whitespace };

// Reads `#`-commented rows `cal_bp, c14_age, error[, ...]`. Extra columns
// are ignored. Parse failures carry the 1-based line number.
CalCurve load_curve(std::istream& in, std::string name, CurveFormat format = CurveFormat::Auto);
CalCurve load_curve_file(const std::filesystem::path& path, CurveFormat format = CurveFormat::Auto);

inline CurvePoint curve_at(const CalCurve& curve, CalendarDate t) { return curve.at(t); }

}  // namespace radiofine
