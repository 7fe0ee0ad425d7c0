#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "radiofine/calcurve.hpp"
#include "radiofine/simulate.hpp"

namespace radiofine {

struct RefTableSpec {
    std::string label;
    double year_interval = 5.0;
    int per_slice = 20;
    double sd = 5.0;
    double oldest = -300.0;
    double youngest = 20.0;
    std::uint64_t seed = 0;

    // Throws UsageError unless the span divides evenly into the interval.
    std::size_t slice_count() const;
    std::size_t record_count() const { return slice_count() * static_cast<std::size_t>(per_slice); }
    double slice_date(std::size_t i) const { return oldest + static_cast<double>(i) * year_interval; }
    void validate() const;
};

bool operator==(const RefTableSpec& a, const RefTableSpec& b);

// A SimRecord keyed by its table-local id (dense from 1).
using RefRecord = SimRecord;

struct RefTable {
    std::string label;
    std::string curve_name;
    std::vector<RefTableSpec> components;  // one entry unless Combo
    std::vector<RefRecord> records;

    bool operator==(const RefTable&) const = default;
};

// The variants of the published overview, keyed by label ("1_50_5",
// "5_20_5", ...). The seed is left at 0.
std::vector<RefTableSpec> table1_presets();
RefTableSpec table1_preset(const std::string& label);
// The six 5-year components whose totals sum to the Combo table.
std::vector<RefTableSpec> combo_components();

RefTable build_reference_table(const Simulator& sim, const RefTableSpec& spec, int workers = 1);
RefTable build_reference_table(const CalCurve& curve, const RefTableSpec& spec, int workers = 1);

// Components must share span and step. Ids are reassigned densely.
RefTable build_combo_table(const Simulator& sim, const std::vector<RefTableSpec>& specs,
                           int workers = 1, const std::string& label = "Combo");
RefTable build_combo_table(const CalCurve& curve, const std::vector<RefTableSpec>& specs,
                           int workers = 1, const std::string& label = "Combo");

struct TableWriteOptions {
    // When set, each record is recalibrated and its 68%/95% HPD segments are
    // appended as `start:end:prob;...` columns. read_table ignores them.
    const Calibrator* hpd_calibrator = nullptr;
    std::vector<std::pair<std::string, std::string>> extra_meta;
};

void write_table(std::ostream& out, const RefTable& table, const TableWriteOptions& options = {});
// Validates header, shape and checksum; throws DataError "corrupt table: ...".
RefTable read_table(std::istream& in);

}  // namespace radiofine
