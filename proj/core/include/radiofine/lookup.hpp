#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

#include "radiofine/evaluate.hpp"
#include "radiofine/finedate.hpp"

namespace radiofine {

struct LookupCell {
    std::size_t total = 0;
    std::optional<double> frac_tight;  // percent with |delta| <= tight tolerance
    std::optional<double> frac_wide;   // percent with |delta| <= wide tolerance
};

struct LookupHit {
    double bucket_left = 0.0;
    LookupCell cell;
};

// Per value bucket [left, left + width) and indicator: how often the
// indicator landed within the tolerances of the true date.
class LookupTable {
public:
    LookupTable(double bucket_width, double first_left, std::size_t bucket_count, double tight = 12.0,
                double wide = 25.0);

    double bucket_width() const { return width_; }
    double first_left() const { return first_left_; }
    std::size_t bucket_count() const { return cells_.size(); }
    double bucket_left(std::size_t b) const { return first_left_ + static_cast<double>(b) * width_; }
    double tight() const { return tight_; }
    double wide() const { return wide_; }

    LookupCell& at(std::size_t bucket, Indicator ind) { return cells_[bucket][static_cast<std::size_t>(ind)]; }
    const LookupCell& at(std::size_t bucket, Indicator ind) const {
        return cells_[bucket][static_cast<std::size_t>(ind)];
    }

    // Throws DataError "outside lookup range".
    LookupHit query(Indicator ind, double value) const;

private:
    double width_;
    double first_left_;
    double tight_;
    double wide_;
    std::vector<std::array<LookupCell, kIndicatorCount>> cells_;
};

// Left edge of the bucket holding `value`.
double bucket_left_of(double value, double width);

LookupTable build_lookup(const EvalTable& eval, double bucket_width = 5.0, double tight = 12.0, double wide = 25.0);

// Rows = BucketLeft; per indicator `<Ind>_TotalCount,<Ind>_Frac12,<Ind>_Frac25`.
void write_lookup_csv(std::ostream& out, const LookupTable& table,
                      const std::vector<std::pair<std::string, std::string>>& meta = {});
LookupTable read_lookup_csv(std::istream& in);

}  // namespace radiofine
