#include "radiofine/reftable.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "radiofine/error.hpp"
#include "radiofine/parallel.hpp"
#include "radiofine/text.hpp"

namespace radiofine {
namespace {

const char* const kColumns = "id,cal_date,age_bp,sd,cal_mean,cal_median,cal_sigma";

std::string describe(const RefTableSpec& s) {
    std::ostringstream os;
    os << s.label << " step=" << format_double(s.year_interval) << " per_slice=" << s.per_slice
       << " sd=" << format_double(s.sd) << " span=" << format_double(s.oldest) << ':'
       << format_double(s.youngest) << " seed=" << s.seed;
    return os.str();
}

RefTableSpec parse_component(const std::string& text) {
    const auto parts = split_whitespace(text);
    if (parts.empty()) throw DataError("corrupt table: empty component");
    RefTableSpec s;
    s.label = std::string(parts[0]);
    int seen = 0;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const auto eq = parts[i].find('=');
        if (eq == std::string_view::npos) throw DataError("corrupt table: bad component field");
        const auto key = parts[i].substr(0, eq);
        const auto val = parts[i].substr(eq + 1);
        bool ok = true;
        if (key == "step") {
            auto v = parse_double(val);
            ok = v.has_value();
            if (ok) s.year_interval = *v;
        } else if (key == "per_slice") {
            auto v = parse_int(val);
            ok = v.has_value();
            if (ok) s.per_slice = static_cast<int>(*v);
        } else if (key == "sd") {
            auto v = parse_double(val);
            ok = v.has_value();
            if (ok) s.sd = *v;
        } else if (key == "span") {
            // the oldest edge may itself be negative, so split at the last ':'
            const auto colon = val.rfind(':');
            auto a = colon == std::string_view::npos ? std::nullopt : parse_double(val.substr(0, colon));
            auto b = colon == std::string_view::npos ? std::nullopt : parse_double(val.substr(colon + 1));
            ok = a && b;
            if (ok) {
                s.oldest = *a;
                s.youngest = *b;
            }
        } else if (key == "seed") {
            auto v = parse_int(val);
            ok = v.has_value();
            if (ok) s.seed = static_cast<std::uint64_t>(*v);
        } else {
            continue;
        }
        if (!ok) throw DataError("corrupt table: bad component value '" + std::string(parts[i]) + "'");
        ++seen;
    }
    if (seen != 5) throw DataError("corrupt table: incomplete component '" + text + "'");
    return s;
}

std::string hpd_cell(const std::vector<HpdSegment>& segs) {
    std::string out;
    for (const auto& s : segs) {
        if (!out.empty()) out += ';';
        out += format_fixed(s.start, 1) + ':' + format_fixed(s.end, 1) + ':' + format_fixed(s.probability, 4);
    }
    return out;
}

std::uint64_t stream_key(const RefTableSpec& spec) { return spec.seed ^ fnv1a64(spec.label); }

}  // namespace

std::size_t RefTableSpec::slice_count() const {
    const double slices = (youngest - oldest) / year_interval;
    const double rounded = std::round(slices);
    if (std::abs(slices - rounded) > 1e-9) throw UsageError("span is not a multiple of the year interval");
    return static_cast<std::size_t>(rounded) + 1;
}

void RefTableSpec::validate() const {
    if (per_slice < 1) throw UsageError("empty spec");
    if (!(year_interval >= 1.0)) throw UsageError("year interval must be >= 1");
    if (!(oldest < youngest)) throw UsageError("span oldest must precede youngest");
    if (sd < 0.0) throw UsageError("negative sd");
    (void)slice_count();
}

bool operator==(const RefTableSpec& a, const RefTableSpec& b) {
    return a.label == b.label && a.year_interval == b.year_interval && a.per_slice == b.per_slice &&
           a.sd == b.sd && a.oldest == b.oldest && a.youngest == b.youngest && a.seed == b.seed;
}

std::vector<RefTableSpec> table1_presets() {
    return {
        {"1_50_5", 1, 50, 5, -200, -1, 0},   {"5_10_20", 5, 10, 20, -300, 20, 0},
        {"5_20_5", 5, 20, 5, -300, 20, 0},   {"5_50_5", 5, 50, 5, -300, 20, 0},
        {"5_50_20", 5, 50, 20, -300, 20, 0}, {"5_80_5", 5, 80, 5, -300, 20, 0},
        {"5_100_0", 5, 100, 0, -300, 20, 0}, {"5_100_5", 5, 100, 5, -300, 20, 0},
    };
}

RefTableSpec table1_preset(const std::string& label) {
    for (auto& s : table1_presets()) {
        if (s.label == label) return s;
    }
    throw UsageError("unknown reference table preset '" + label + "'");
}

std::vector<RefTableSpec> combo_components() {
    std::vector<RefTableSpec> out;
    for (const char* l : {"5_20_5", "5_50_5", "5_50_20", "5_80_5", "5_100_0", "5_100_5"}) {
        out.push_back(table1_preset(l));
    }
    return out;
}

RefTable build_reference_table(const Simulator& sim, const RefTableSpec& spec, int workers) {
    spec.validate();
    const auto& curve = sim.curve();
    if (!curve.contains(CalendarDate(spec.oldest)) || !curve.contains(CalendarDate(spec.youngest))) {
        throw DataError("span outside curve domain");
    }
    RefTable table;
    table.label = spec.label;
    table.curve_name = curve.name();
    table.components = {spec};
    const std::size_t per = static_cast<std::size_t>(spec.per_slice);
    table.records.resize(spec.record_count());
    const auto key = stream_key(spec);
    parallel_for(spec.slice_count(), workers, [&](std::size_t slice) {
        const CalendarDate date(spec.slice_date(slice));
        for (std::size_t rep = 0; rep < per; ++rep) {
            auto rng = substream(key, slice, rep);
            const std::size_t idx = slice * per + rep;
            table.records[idx] = sim.simulate(date, spec.sd, rng);
            table.records[idx].sim_id = static_cast<std::int64_t>(idx + 1);
        }
    });
    return table;
}

RefTable build_reference_table(const CalCurve& curve, const RefTableSpec& spec, int workers) {
    return build_reference_table(Simulator(curve), spec, workers);
}

RefTable build_combo_table(const Simulator& sim, const std::vector<RefTableSpec>& specs, int workers,
                           const std::string& label) {
    if (specs.empty()) throw UsageError("no component specs");
    for (const auto& s : specs) {
        if (s.oldest != specs[0].oldest || s.youngest != specs[0].youngest ||
            s.year_interval != specs[0].year_interval) {
            throw UsageError("incompatible specs");
        }
    }
    RefTable out;
    out.label = specs.size() == 1 ? specs[0].label : label;
    out.curve_name = sim.curve().name();
    for (const auto& s : specs) {
        auto part = build_reference_table(sim, s, workers);
        out.components.push_back(s);
        for (auto& r : part.records) {
            r.sim_id = static_cast<std::int64_t>(out.records.size() + 1);
            out.records.push_back(r);
        }
    }
    return out;
}

RefTable build_combo_table(const CalCurve& curve, const std::vector<RefTableSpec>& specs, int workers,
                           const std::string& label) {
    return build_combo_table(Simulator(curve), specs, workers, label);
}

void write_table(std::ostream& out, const RefTable& table, const TableWriteOptions& options) {
    std::ostringstream body;
    body << kColumns;
    if (options.hpd_calibrator) body << ",hpd68,hpd95";
    body << '\n';
    for (const auto& r : table.records) {
        body << r.sim_id << ',' << format_double(r.base_date) << ',' << r.age << ',' << format_double(r.sd)
             << ',' << format_double(r.cal_mean) << ',' << format_double(r.cal_median) << ','
             << format_double(r.cal_sigma);
        if (options.hpd_calibrator) {
            const auto cal = options.hpd_calibrator->calibrate({r.age, r.sd});
            body << ',' << hpd_cell(cal.hpd68) << ',' << hpd_cell(cal.hpd95);
        }
        body << '\n';
    }
    const std::string text = body.str();

    out << "# label=" << table.label << '\n';
    out << "# seed=" << (table.components.empty() ? 0 : table.components.front().seed) << '\n';
    out << "# curve=" << table.curve_name << '\n';
    for (const auto& c : table.components) out << "# component=" << describe(c) << '\n';
    out << "# records=" << table.records.size() << '\n';
    std::ostringstream hex;
    hex << std::hex << fnv1a64(text);
    out << "# checksum=" << hex.str() << '\n';
    for (const auto& [k, v] : options.extra_meta) out << "# " << k << '=' << v << '\n';
    out << text;
}

RefTable read_table(std::istream& in) {
    std::ostringstream raw_body;
    std::string line;
    std::vector<std::string> header_lines;
    bool in_body = false;
    while (std::getline(in, line)) {
        if (!in_body && (line.empty() || line.front() == '#')) {
            header_lines.push_back(line);
            continue;
        }
        in_body = true;
        if (trim(line).empty()) continue;
        raw_body << line << '\n';
    }
    const std::string body = raw_body.str();

    std::ostringstream joined;
    for (const auto& h : header_lines) joined << h << '\n';
    joined << body;
    std::istringstream reparsed(joined.str());
    const auto doc = read_csv(reparsed);

    RefTable t;
    const auto label = doc.meta_value("label");
    const auto curve = doc.meta_value("curve");
    const auto records = doc.meta_value("records");
    const auto checksum = doc.meta_value("checksum");
    if (!label || !curve || !records || !checksum) throw DataError("corrupt table: missing header");
    t.label = *label;
    t.curve_name = *curve;
    for (const auto& [k, v] : doc.meta) {
        if (k == "component") t.components.push_back(parse_component(v));
    }
    if (t.components.empty()) throw DataError("corrupt table: no component spec");

    std::ostringstream hex;
    hex << std::hex << fnv1a64(body);
    if (hex.str() != *checksum) throw DataError("corrupt table: checksum mismatch");
    if (doc.columns.size() < 7 || doc.columns[0] != "id") throw DataError("corrupt table: bad columns");

    const auto expected = parse_int(*records);
    std::size_t planned = 0;
    for (const auto& c : t.components) planned += c.record_count();
    if (!expected || static_cast<std::size_t>(*expected) != doc.rows.size() || planned != doc.rows.size()) {
        throw DataError("corrupt table: record count mismatch");
    }

    std::size_t comp = 0;
    std::size_t in_comp = 0;
    for (std::size_t i = 0; i < doc.rows.size(); ++i) {
        const auto& row = doc.rows[i];
        const auto where = "corrupt table: line " + std::to_string(doc.row_lines[i]);
        if (row.size() < 7) throw DataError(where + ": short row");
        const auto id = parse_int(row[0]);
        const auto date = parse_double(row[1]);
        const auto age = parse_int(row[2]);
        const auto sd = parse_double(row[3]);
        const auto mean = parse_double(row[4]);
        const auto median = parse_double(row[5]);
        const auto sigma = parse_double(row[6]);
        if (!id || !date || !age || !sd || !mean || !median || !sigma) throw DataError(where + ": bad field");
        if (*id != static_cast<long long>(i + 1)) throw DataError(where + ": ids not dense");
        while (in_comp == t.components[comp].record_count()) {
            ++comp;
            in_comp = 0;
        }
        const auto& spec = t.components[comp];
        const double k = (*date - spec.oldest) / spec.year_interval;
        if (*date < spec.oldest || *date > spec.youngest || std::abs(k - std::round(k)) > 1e-9) {
            throw DataError(where + ": date off the table grid");
        }
        ++in_comp;
        t.records.push_back({*id, *date, static_cast<int>(*age), *sd, *mean, *median, *sigma});
    }
    return t;
}

}  // namespace radiofine
