#include "radiofine/calcurve.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "radiofine/error.hpp"
#include "radiofine/text.hpp"

namespace radiofine {

CalendarDate parse_calendar_date(const std::string& text) {
    std::string s;
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(static_cast<char>(std::toupper(c)));
    }
    int sign = 1;
    bool era = false;
    auto strip = [&](const std::string& tag, int tag_sign) {
        if (s.size() > tag.size() && s.ends_with(tag)) {
            s.resize(s.size() - tag.size());
        } else if (s.size() > tag.size() && s.starts_with(tag)) {
            s.erase(0, tag.size());
        } else {
            return;
        }
        sign = tag_sign;
        era = true;
    };
    strip("BC", -1);
    if (!era) strip("AD", 1);
    const auto v = parse_double(s);
    if (!v || (era && *v < 0)) throw UsageError("invalid calendar date '" + text + "'");
    return CalendarDate(sign * *v);
}

CalCurve::CalCurve(std::string name, std::vector<CurveKnot> knots)
    : name_(std::move(name)), knots_(std::move(knots)) {
    if (knots_.empty()) throw DataError("no knots");
    if (knots_.size() < 2) throw DataError("curve needs at least 2 knots");
    if (knots_.front().cal_bp > knots_.back().cal_bp) std::reverse(knots_.begin(), knots_.end());
    for (std::size_t i = 0; i < knots_.size(); ++i) {
        if (!(knots_[i].error > 0.0)) throw DataError("invalid error at knot " + std::to_string(i + 1));
        if (i > 0 && !(knots_[i].cal_bp > knots_[i - 1].cal_bp)) throw DataError("unsorted curve");
    }
}

bool CalCurve::contains(CalendarDate t) const {
    const double bp = t.cal_bp();
    return bp >= knots_.front().cal_bp && bp <= knots_.back().cal_bp;
}

CurvePoint CalCurve::at(CalendarDate t) const {
    if (!contains(t)) throw DataError("out of curve range");
    const double bp = t.cal_bp();
    auto hi = std::lower_bound(knots_.begin(), knots_.end(), bp,
                               [](const CurveKnot& k, double v) { return k.cal_bp < v; });
    if (hi->cal_bp == bp) return {hi->c14_age, hi->error};
    auto lo = hi - 1;
    const double f = (bp - lo->cal_bp) / (hi->cal_bp - lo->cal_bp);
    return {lo->c14_age + f * (hi->c14_age - lo->c14_age), lo->error + f * (hi->error - lo->error)};
}

double CalCurve::max_error(CalendarDate from, CalendarDate to) const {
    if (to < from) std::swap(from, to);
    double best = std::max(at(from).sigma, at(to).sigma);
    for (const auto& k : knots_) {
        const auto d = CalendarDate::from_cal_bp(k.cal_bp);
        if (d >= from && d <= to) best = std::max(best, k.error);
    }
    return best;
}

CalCurve load_curve(std::istream& in, std::string name, CurveFormat format) {
    std::vector<CurveKnot> knots;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        char delim = ',';
        if (format == CurveFormat::Whitespace ||
            (format == CurveFormat::Auto && body.find(',') == std::string_view::npos)) {
            delim = ' ';
        }
        const auto fields = delim == ',' ? split_csv_line(body) : split_whitespace(body);
        double v[3];
        if (fields.size() < 3) throw DataError("line " + std::to_string(line_no) + ": expected 3 columns");
        for (int i = 0; i < 3; ++i) {
            const auto parsed = parse_double(fields[i]);
            if (!parsed) {
                throw DataError("line " + std::to_string(line_no) + ": cannot parse '" +
                                std::string(fields[i]) + "'");
            }
            v[i] = *parsed;
        }
        if (!(v[2] > 0.0)) throw DataError("invalid error at line " + std::to_string(line_no));
        knots.push_back({v[0], v[1], v[2]});
    }
    if (knots.empty()) throw DataError("no knots");
    // Direction is taken from the first pair; anything else is unsorted.
    const bool descending = knots.size() > 1 && knots[1].cal_bp < knots[0].cal_bp;
    for (std::size_t i = 1; i < knots.size(); ++i) {
        const bool ok = descending ? knots[i].cal_bp < knots[i - 1].cal_bp
                                   : knots[i].cal_bp > knots[i - 1].cal_bp;
        if (!ok) throw DataError("unsorted curve");
    }
    return CalCurve(std::move(name), std::move(knots));
}

CalCurve load_curve_file(const std::filesystem::path& path, CurveFormat format) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open curve file " + path.string());
    return load_curve(in, path.filename().string(), format);
}

}  // namespace radiofine
