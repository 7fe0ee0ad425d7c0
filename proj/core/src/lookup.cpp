#include "radiofine/lookup.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "radiofine/error.hpp"
#include "radiofine/text.hpp"

namespace radiofine {
namespace {

std::string tol_tag(double t) { return format_double(t); }

// 0.01 percent resolution
double percent(std::size_t hit, std::size_t total) {
    return std::round(10000.0 * static_cast<double>(hit) / static_cast<double>(total)) / 100.0;
}

}  // namespace

LookupTable::LookupTable(double bucket_width, double first_left, std::size_t bucket_count, double tight,
                         double wide)
    : width_(bucket_width), first_left_(first_left), tight_(tight), wide_(wide), cells_(bucket_count) {
    if (!(bucket_width > 0.0)) throw UsageError("bucket width must be positive");
    if (!(tight <= wide)) throw UsageError("tight tolerance exceeds wide tolerance");
}

double bucket_left_of(double value, double width) { return std::floor(value / width) * width; }

LookupHit LookupTable::query(Indicator ind, double value) const {
    const double left = bucket_left_of(value, width_);
    const double idx = std::round((left - first_left_) / width_);
    if (idx < 0.0 || idx >= static_cast<double>(cells_.size())) throw DataError("outside lookup range");
    const auto b = static_cast<std::size_t>(idx);
    return {bucket_left(b), at(b, ind)};
}

LookupTable build_lookup(const EvalTable& eval, double bucket_width, double tight, double wide) {
    if (!(bucket_width > 0.0)) throw UsageError("bucket width must be positive");
    std::optional<double> lo;
    std::optional<double> hi;
    for (const auto& r : eval.rows) {
        if (!r.value || !r.delta) continue;
        lo = std::min(lo.value_or(*r.value), *r.value);
        hi = std::max(hi.value_or(*r.value), *r.value);
    }
    if (!lo) throw DataError("no evaluated values to bucket");
    const double first = bucket_left_of(*lo, bucket_width);
    const double last = bucket_left_of(*hi, bucket_width);
    const auto count = static_cast<std::size_t>(std::round((last - first) / bucket_width)) + 1;
    LookupTable table(bucket_width, first, count, tight, wide);

    std::vector<std::array<std::array<std::size_t, 2>, kIndicatorCount>> hits(count);
    for (const auto& r : eval.rows) {
        if (!r.value || !r.delta) continue;
        const auto b = static_cast<std::size_t>(std::round((bucket_left_of(*r.value, bucket_width) - first) / bucket_width));
        const auto i = static_cast<std::size_t>(r.indicator);
        auto& cell = table.at(b, r.indicator);
        ++cell.total;
        if (std::abs(*r.delta) <= tight) ++hits[b][i][0];
        if (std::abs(*r.delta) <= wide) ++hits[b][i][1];
    }
    for (std::size_t b = 0; b < count; ++b) {
        for (auto ind : kAllIndicators) {
            auto& cell = table.at(b, ind);
            if (cell.total == 0) continue;
            const auto i = static_cast<std::size_t>(ind);
            cell.frac_tight = percent(hits[b][i][0], cell.total);
            cell.frac_wide = percent(hits[b][i][1], cell.total);
        }
    }
    return table;
}

void write_lookup_csv(std::ostream& out, const LookupTable& table,
                      const std::vector<std::pair<std::string, std::string>>& meta) {
    for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
    out << "# bucket_width=" << format_double(table.bucket_width()) << '\n';
    out << "# tolerances=" << format_double(table.tight()) << ',' << format_double(table.wide()) << '\n';
    out << "BucketLeft";
    const auto t = tol_tag(table.tight());
    const auto w = tol_tag(table.wide());
    for (auto ind : kAllIndicators) {
        const auto n = std::string(indicator_name(ind));
        out << ',' << n << "_TotalCount," << n << "_Frac" << t << ',' << n << "_Frac" << w;
    }
    out << '\n';
    for (std::size_t b = 0; b < table.bucket_count(); ++b) {
        out << format_double(table.bucket_left(b));
        for (auto ind : kAllIndicators) {
            const auto& c = table.at(b, ind);
            out << ',' << c.total << ',' << (c.frac_tight ? format_fixed(*c.frac_tight, 2) : "") << ','
                << (c.frac_wide ? format_fixed(*c.frac_wide, 2) : "");
        }
        out << '\n';
    }
}

LookupTable read_lookup_csv(std::istream& in) {
    const auto doc = read_csv(in);
    const auto width = doc.meta_value("bucket_width");
    const auto tols = doc.meta_value("tolerances");
    if (!width || !tols) throw DataError("lookup table lacks bucket_width/tolerances header");
    const auto w = parse_double(*width);
    const auto tparts = split_csv_line(*tols);
    if (!w || tparts.size() != 2) throw DataError("bad lookup header");
    const auto tight = parse_double(tparts[0]);
    const auto wide = parse_double(tparts[1]);
    if (!tight || !wide) throw DataError("bad lookup tolerances");
    if (doc.rows.empty()) throw DataError("empty lookup table");
    const auto c_left = doc.column("BucketLeft");
    const auto first = parse_double(doc.rows.front().at(c_left));
    if (!first) throw DataError("bad BucketLeft");
    LookupTable table(*w, *first, doc.rows.size(), *tight, *wide);
    for (std::size_t b = 0; b < doc.rows.size(); ++b) {
        const auto& row = doc.rows[b];
        const auto left = parse_double(row.at(c_left));
        if (!left || std::abs(*left - table.bucket_left(b)) > 1e-9) throw DataError("non-contiguous buckets");
        for (auto ind : kAllIndicators) {
            const auto n = std::string(indicator_name(ind));
            const auto ct = doc.column(n + "_TotalCount");
            const auto c1 = doc.column(n + "_Frac" + tol_tag(*tight));
            const auto c2 = doc.column(n + "_Frac" + tol_tag(*wide));
            if (row.size() <= std::max({ct, c1, c2})) throw DataError("short lookup row");
            auto& cell = table.at(b, ind);
            const auto total = parse_int(row[ct]);
            if (!total) throw DataError("bad TotalCount");
            cell.total = static_cast<std::size_t>(*total);
            if (!row[c1].empty()) cell.frac_tight = parse_double(row[c1]);
            if (!row[c2].empty()) cell.frac_wide = parse_double(row[c2]);
        }
    }
    return table;
}

}  // namespace radiofine
