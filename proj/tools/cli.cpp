#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "radiofine/calcurve.hpp"
#include "radiofine/error.hpp"
#include "radiofine/evaluate.hpp"
#include "radiofine/finedate.hpp"
#include "radiofine/lookup.hpp"
#include "radiofine/parallel.hpp"
#include "radiofine/reftable.hpp"
#include "radiofine/simulate.hpp"
#include "radiofine/stats.hpp"
#include "radiofine/text.hpp"

#ifndef RADIOFINE_DEFAULT_CURVE
#define RADIOFINE_DEFAULT_CURVE "intcal20.14c"
#endif

namespace fs = std::filesystem;

namespace radiofine::cli {
namespace {

using Meta = std::vector<std::pair<std::string, std::string>>;

constexpr const char* kManifestName = "run_manifest.txt";

struct Globals {
    std::string config;
    std::uint64_t seed = 1;
    int workers = default_workers();
    std::string curve;
    double grid_step = 1.0;
};

// ---- config file -------------------------------------------------------

// Flat `key = value` lines; '#' starts a comment. Keys use the long flag
// name with '_' and '-' interchangeable.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        auto body = line.substr(0, line.find('#'));
        const auto t = trim(body);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) {
            throw UsageError("config line " + std::to_string(n) + ": expected key = value");
        }
        std::string key(trim(t.substr(0, eq)));
        std::replace(key.begin(), key.end(), '_', '-');
        if (key.empty()) throw UsageError("config line " + std::to_string(n) + ": empty key");
        out.emplace_back(std::move(key), std::string(trim(t.substr(eq + 1))));
    }
    return out;
}

std::optional<std::string> config_path_from(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    return std::nullopt;
}

bool flag_given(const std::vector<std::string>& args, const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
        return a == flag || a.rfind(flag + "=", 0) == 0;
    });
}

// Appends `--key=value` for config entries the command line leaves unset.
// Keys are resolved against the subcommand chain named in args, innermost
// first; unknown keys are reported and skipped.
std::vector<std::string> merge_config(CLI::App& app, std::vector<std::string> args, std::ostream& err) {
    const auto path = config_path_from(args);
    if (!path) return args;
    std::vector<CLI::App*> chain{&app};
    for (const auto& a : args) {
        if (auto* sub = chain.back()->get_subcommand_no_throw(a)) chain.push_back(sub);
    }
    const auto original = args;
    for (const auto& [key, value] : read_config(*path)) {
        const std::string flag = "--" + key;
        if (key == "config" || flag_given(original, flag)) continue;
        const bool known = std::any_of(chain.rbegin(), chain.rend(),
                                       [&](CLI::App* a) { return a->get_option_no_throw(flag) != nullptr; });
        if (!known) {
            err << "warning: config key '" << key << "' not used by this command\n";
            continue;
        }
        args.push_back(flag + "=" + value);
    }
    return args;
}

// ---- output plumbing ---------------------------------------------------

std::ofstream open_output(const fs::path& path) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

std::string join(const std::vector<std::string>& v, const char* sep = ",") {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += sep;
        s += v[i];
    }
    return s;
}

// Records everything that shaped the outputs; deliberately no timestamps.
class Run {
public:
    Run(std::string command, const std::vector<CLI::App*>& chain, const Globals& g)
        : command_(std::move(command)), globals_(g) {
        for (auto* app : chain) {
            for (const auto* opt : app->get_options()) {
                const auto name = opt->get_single_name();
                if (name.empty() || name == "help" || name == "version" || name == "config") continue;
                const auto value = opt->count() ? join(opt->results()) : opt->get_default_str();
                options_[name] = value;
            }
        }
    }

    void set_curve(std::string name) { curve_ = std::move(name); }

    Meta provenance() const {
        return {{"generated_by", std::string(kToolName) + " " + kToolVersion},
                {"manifest", kManifestName},
                {"command", command_}};
    }

    void write_manifest(const fs::path& dir) const {
        const auto path = dir / kManifestName;
        auto out = open_output(path);
        out << "tool=" << kToolName << '\n'
            << "version=" << kToolVersion << '\n'
            << "command=" << command_ << '\n'
            << "curve=" << curve_ << '\n'
            << "seed=" << globals_.seed << '\n'
            << "grid_step=" << format_double(globals_.grid_step) << '\n'
            << "workers=" << globals_.workers << '\n';
        for (const auto& [k, v] : options_) out << "option." << k << '=' << v << '\n';
        finish(out, path);
    }

private:
    std::string command_;
    Globals globals_;
    std::string curve_;
    std::map<std::string, std::string> options_;
};

fs::path dir_of(const fs::path& file) {
    return file.has_parent_path() ? file.parent_path() : fs::path(".");
}

CalCurve load_global_curve(const Globals& g) {
    const std::string path = g.curve.empty() ? std::string(RADIOFINE_DEFAULT_CURVE) : g.curve;
    if (!fs::exists(path)) throw IoError("curve file not found: " + path);
    return load_curve_file(path);
}

std::pair<double, double> parse_span(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw UsageError("span must be START:END, got '" + text + "'");
    return {parse_calendar_date(text.substr(0, colon)).value(), parse_calendar_date(text.substr(colon + 1)).value()};
}

std::vector<double> parse_number_list(const std::string& text, const char* what) {
    std::vector<double> out;
    for (auto f : split_csv_line(text)) {
        const auto v = parse_double(f);
        if (!v) throw UsageError(std::string("bad ") + what + " '" + std::string(f) + "'");
        out.push_back(*v);
    }
    return out;
}

// Column values of a CSV, optionally restricted to one indicator of a long
// evaluation table. An indicator name in place of a column selects the
// `value` column of that indicator's rows.
struct ColumnPick {
    std::size_t column = 0;
    std::optional<Indicator> filter;
};

ColumnPick pick_column(const CsvDocument& doc, const std::string& name, std::optional<Indicator> filter) {
    if (auto c = doc.find_column(name)) return {*c, filter};
    if (auto ind = parse_indicator(name); ind && doc.find_column("indicator") && doc.find_column("value")) {
        if (filter && *filter != *ind) throw UsageError("conflicting indicator selections");
        return {doc.column("value"), ind};
    }
    throw UsageError("no column '" + name + "'");
}

bool row_selected(const CsvDocument& doc, const std::vector<std::string>& row, std::optional<Indicator> filter) {
    if (!filter) return true;
    const auto c = doc.column("indicator");
    return c < row.size() && parse_indicator(row[c]) == filter;
}

// ---- subcommands -------------------------------------------------------

struct CurveInfoArgs {
    std::string file;
    std::vector<std::string> at;
};

void cmd_curve_info(const CurveInfoArgs& a, std::ostream& out) {
    if (!fs::exists(a.file)) throw IoError("curve file not found: " + a.file);
    const auto curve = load_curve_file(a.file);
    out << "name=" << curve.name() << '\n'
        << "knots=" << curve.knots().size() << '\n'
        << "domain=" << format_double(curve.domain_min().value()) << ':' << format_double(curve.domain_max().value())
        << '\n';
    for (const auto& s : a.at) {
        const auto t = parse_calendar_date(s);
        const auto p = curve.at(t);
        out << "date=" << format_double(t.value()) << " mu=" << format_fixed(p.mu, 3)
            << " sigma=" << format_fixed(p.sigma, 3) << '\n';
    }
}

struct RefGenArgs {
    std::string label;
    std::optional<double> step;
    std::optional<int> per_slice;
    std::optional<double> sd;
    std::string span;
    std::string out = "ref.csv";
    bool with_hpd = false;
    std::string analysis;
};

RefTableSpec resolve_spec(const RefGenArgs& a, std::uint64_t seed) {
    RefTableSpec spec;
    bool preset = false;
    for (const auto& p : table1_presets()) {
        if (p.label == a.label) {
            spec = p;
            preset = true;
        }
    }
    if (!preset) {
        if (!a.step || !a.per_slice || !a.sd || a.span.empty()) {
            throw UsageError("custom table '" + a.label + "' needs --step, --per-slice, --sd and --span");
        }
        spec.label = a.label;
    }
    if (a.step) spec.year_interval = *a.step;
    if (a.per_slice) spec.per_slice = *a.per_slice;
    if (a.sd) spec.sd = *a.sd;
    if (!a.span.empty()) std::tie(spec.oldest, spec.youngest) = parse_span(a.span);
    spec.seed = seed;
    spec.validate();
    return spec;
}

// A table needs slack beyond the analysed range: ages simulated near the
// young edge have no partners on the far side of it.
void buffer_warning(const CalCurve& curve, const RefTable& table, const std::string& analysis, std::ostream& err) {
    const auto [lo, hi] = parse_span(analysis);
    for (const auto& spec : table.components) {
        const double sigma = curve.max_error(CalendarDate(spec.oldest), CalendarDate(spec.youngest));
        const double need = 3.0 * (spec.sd + sigma);
        if (spec.youngest - hi < need) {
            err << "warning: " << spec.label << " young edge " << format_double(spec.youngest) << " is within "
                << format_double(spec.youngest - hi) << " years of analysis end " << format_double(hi)
                << "; recommended buffer " << format_fixed(need, 1) << '\n';
        }
        if (lo - spec.oldest < need) {
            err << "warning: " << spec.label << " old edge " << format_double(spec.oldest) << " is within "
                << format_double(lo - spec.oldest) << " years of analysis start " << format_double(lo)
                << "; recommended buffer " << format_fixed(need, 1) << '\n';
        }
    }
}

void cmd_ref_gen(const RefGenArgs& a, const Globals& g, Run& run, std::ostream& out, std::ostream& err) {
    if (a.label.empty()) throw UsageError("--label is required");
    const auto curve = load_global_curve(g);
    run.set_curve(curve.name());
    const Simulator sim(curve, g.grid_step);
    RefTable table;
    if (a.label == "Combo") {
        auto specs = combo_components();
        for (auto& s : specs) s.seed = g.seed;
        table = build_combo_table(sim, specs, g.workers);
    } else {
        table = build_reference_table(sim, resolve_spec(a, g.seed), g.workers);
    }
    if (!a.analysis.empty()) buffer_warning(curve, table, a.analysis, err);

    TableWriteOptions opts;
    opts.extra_meta = run.provenance();
    if (a.with_hpd) opts.hpd_calibrator = &sim.calibrator();
    auto file = open_output(a.out);
    write_table(file, table, opts);
    finish(file, a.out);
    run.write_manifest(dir_of(a.out));
    out << "wrote " << table.records.size() << " records to " << a.out << '\n';
}

struct SimulateArgs {
    std::string dates;
    int per_date = 100;
    int group = 3;
    double sd = 20.0;
    std::string out = "tests.csv";
};

void cmd_simulate_tests(const SimulateArgs& a, const Globals& g, Run& run, std::ostream& out) {
    if (a.dates.empty()) throw UsageError("--dates is required");
    const auto curve = load_global_curve(g);
    run.set_curve(curve.name());
    TestSeriesParams p;
    p.dates = parse_date_range(a.dates);
    p.datasets_per_date = a.per_date;
    p.group_size = a.group;
    p.sd = a.sd;
    p.seed = g.seed;
    p.workers = g.workers;
    const auto datasets = generate_test_datasets(Simulator(curve, g.grid_step), p);
    auto file = open_output(a.out);
    write_tests_csv(file, datasets, run.provenance());
    finish(file, a.out);
    run.write_manifest(dir_of(a.out));
    out << "wrote " << datasets.size() << " datasets to " << a.out << '\n';
}

struct ConvertArgs {
    std::string in;
    int group = 3;
    std::string out = "tests.csv";
};

void cmd_convert(const ConvertArgs& a, Run& run, std::ostream& out, std::ostream& err) {
    auto in = open_input(a.in);
    const auto res = convert_rsim_to_tests(read_csv(in), a.group);
    auto meta = run.provenance();
    for (const auto& [date, n] : res.leftovers) {
        meta.emplace_back("leftover", format_double(date) + ":" + std::to_string(n));
        err << "warning: date " << format_double(date) << " leaves " << n << " row(s) outside any group\n";
    }
    auto file = open_output(a.out);
    write_tests_csv(file, res.datasets, meta);
    finish(file, a.out);
    run.write_manifest(dir_of(a.out));
    out << "wrote " << res.datasets.size() << " datasets to " << a.out << '\n';
}

struct FinedateArgs {
    std::string ref;
    std::string ages;
    std::string ages_file;
    std::string sd;
    std::string out = "finedate";
};

std::vector<Measurement> measurements_from(const FinedateArgs& a) {
    std::vector<double> ages;
    std::vector<double> sds;
    if (!a.ages.empty() && !a.ages_file.empty()) throw UsageError("use either --ages or --ages-file");
    if (!a.ages.empty()) {
        ages = parse_number_list(a.ages, "age");
    } else if (!a.ages_file.empty()) {
        auto in = open_input(a.ages_file);
        const auto doc = read_csv(in);
        const auto c_age = doc.find_column("age_bp") ? doc.find_column("age_bp") : doc.find_column("age");
        if (!c_age) throw DataError("ages file needs an age or age_bp column");
        const auto c_sd = doc.find_column("sd");
        for (std::size_t i = 0; i < doc.rows.size(); ++i) {
            const auto& row = doc.rows[i];
            const auto v = row.size() > *c_age ? parse_double(row[*c_age]) : std::nullopt;
            if (!v) throw DataError("line " + std::to_string(doc.row_lines[i]) + ": bad age");
            ages.push_back(*v);
            if (c_sd && row.size() > *c_sd && !row[*c_sd].empty()) {
                const auto s = parse_double(row[*c_sd]);
                if (!s) throw DataError("line " + std::to_string(doc.row_lines[i]) + ": bad sd");
                sds.push_back(*s);
            }
        }
        if (!sds.empty() && sds.size() != ages.size()) throw DataError("sd given for some ages only");
    } else {
        throw UsageError("--ages or --ages-file is required");
    }
    if (!a.sd.empty()) sds = parse_number_list(a.sd, "sd");
    if (sds.size() == 1) sds.assign(ages.size(), sds.front());
    if (!sds.empty() && sds.size() != ages.size()) throw UsageError("--sd needs one value or one per age");

    std::vector<Measurement> ms;
    for (std::size_t i = 0; i < ages.size(); ++i) {
        if (ages[i] != std::round(ages[i])) throw DataError("ages must be whole years BP");
        ms.push_back({static_cast<int>(ages[i]), sds.empty() ? 0.0 : sds[i]});
    }
    if (ms.empty()) throw UsageError("no ages given");
    return ms;
}

void cmd_finedate(const FinedateArgs& a, Run& run, std::ostream& out) {
    if (a.ref.empty()) throw UsageError("--ref is required");
    const auto ms = measurements_from(a);
    auto in = open_input(a.ref);
    const auto table = read_table(in);
    run.set_curve(table.curve_name);
    const auto matches = match_measurements(table, ms);
    const auto ind = compute_indicators(matches);

    auto meta = run.provenance();
    meta.emplace_back("reference", table.label);
    const fs::path overview = a.out + "_overview.csv";
    const fs::path summary = a.out + "_summary.csv";
    auto f1 = open_output(overview);
    write_overview(f1, matches, meta);
    finish(f1, overview);
    auto f2 = open_output(summary);
    write_summary(f2, matches, ind, meta);
    finish(f2, summary);
    run.write_manifest(dir_of(overview));

    out << "n_prime=" << matches.n_prime() << '\n';
    if (!matches.unmatched.empty()) {
        std::vector<std::string> u;
        for (int v : matches.unmatched) u.push_back(std::to_string(v));
        out << "unmatched=" << join(u, ";") << '\n';
    }
    for (auto i : kAllIndicators) out << indicator_name(i) << '=' << format_double(ind[i]) << '\n';
}

struct EvaluateArgs {
    std::string ref;
    std::string tests;
    std::string out = "eval";
    std::string mpd_ref;
};

void cmd_evaluate(const EvaluateArgs& a, const Globals& g, Run& run, std::ostream& out) {
    if (a.ref.empty() || a.tests.empty()) throw UsageError("--ref and --tests are required");
    auto rin = open_input(a.ref);
    const auto table = read_table(rin);
    run.set_curve(table.curve_name);
    auto tin = open_input(a.tests);
    const auto datasets = read_tests_csv(tin);
    const auto eval = evaluate_test_series(table, datasets, g.workers);

    EvalTable pool_owned;
    const EvalTable* pool = &eval;
    if (!a.mpd_ref.empty()) {
        auto pin = open_input(a.mpd_ref);
        pool_owned = read_eval_csv(pin);
        pool = &pool_owned;
    }

    auto meta = run.provenance();
    meta.emplace_back("reference", table.label);
    const fs::path dir = a.out;
    auto emit = [&](const char* name, auto&& writer) {
        const auto path = dir / name;
        auto f = open_output(path);
        writer(f);
        finish(f, path);
    };
    emit("eval_long.csv", [&](std::ostream& f) { write_eval_csv(f, eval, meta); });
    emit("performance_25.csv", [&](std::ostream& f) { write_performance_csv(f, performance_curves(eval, 25), meta); });
    emit("performance_35.csv", [&](std::ostream& f) { write_performance_csv(f, performance_curves(eval, 35), meta); });
    emit("avg_deviation.csv",
         [&](std::ostream& f) { write_avg_deviation_csv(f, average_deviation_analysis(eval), meta); });
    emit("normality_by_interval.csv",
         [&](std::ostream& f) { write_normality_csv(f, normality_by_interval(table, datasets), meta); });
    emit("mpd_report.csv", [&](std::ostream& f) { write_mpd_report_csv(f, mpd_report(eval, *pool), meta); });
    run.write_manifest(dir);

    out << "datasets=" << eval.dataset_count() << '\n'
        << "within25=" << format_fixed(fraction_within(eval, 25), 4) << '\n'
        << "within35=" << format_fixed(fraction_within(eval, 35), 4) << '\n';
}

struct LookupBuildArgs {
    std::string eval;
    std::string out = "lookup.csv";
    double width = 5.0;
    double tight = 12.0;
    double wide = 25.0;
};

void cmd_lookup_build(const LookupBuildArgs& a, Run& run, std::ostream& out) {
    if (a.eval.empty()) throw UsageError("--eval is required");
    auto in = open_input(a.eval);
    const auto table = build_lookup(read_eval_csv(in), a.width, a.tight, a.wide);
    auto f = open_output(a.out);
    write_lookup_csv(f, table, run.provenance());
    finish(f, a.out);
    run.write_manifest(dir_of(a.out));
    out << "wrote " << table.bucket_count() << " buckets to " << a.out << '\n';
}

struct LookupQueryArgs {
    std::string table;
    std::string indicator;
    double value = 0.0;
};

void cmd_lookup_query(const LookupQueryArgs& a, std::ostream& out) {
    const auto ind = parse_indicator(a.indicator);
    if (!ind) throw UsageError("unknown indicator '" + a.indicator + "'");
    auto in = open_input(a.table);
    const auto table = read_lookup_csv(in);
    const auto hit = table.query(*ind, a.value);
    auto pct = [](const std::optional<double>& v) { return v ? format_fixed(*v, 2) : std::string(); };
    out << "indicator=" << indicator_name(*ind) << " bucket_left=" << format_double(hit.bucket_left)
        << " total_count=" << hit.cell.total << " frac" << format_double(table.tight()) << '='
        << pct(hit.cell.frac_tight) << " frac" << format_double(table.wide()) << '=' << pct(hit.cell.frac_wide)
        << '\n';
}

struct HistArgs {
    std::string in;
    std::string col;
    std::string indicator;
    std::optional<std::size_t> bins;
    std::string out = "hist.csv";
};

std::optional<Indicator> indicator_option(const std::string& text) {
    if (text.empty()) return std::nullopt;
    auto ind = parse_indicator(text);
    if (!ind) throw UsageError("unknown indicator '" + text + "'");
    return ind;
}

void cmd_hist(const HistArgs& a, Run& run, std::ostream& out) {
    if (a.in.empty() || a.col.empty()) throw UsageError("--in and --col are required");
    auto in = open_input(a.in);
    const auto doc = read_csv(in);
    const auto pick = pick_column(doc, a.col, indicator_option(a.indicator));
    std::vector<double> values;
    for (std::size_t i = 0; i < doc.rows.size(); ++i) {
        const auto& row = doc.rows[i];
        if (!row_selected(doc, row, pick.filter) || pick.column >= row.size() || row[pick.column].empty()) continue;
        const auto v = parse_double(row[pick.column]);
        if (!v) throw DataError("line " + std::to_string(doc.row_lines[i]) + ": non-numeric " + a.col);
        values.push_back(*v);
    }
    if (values.empty()) throw DataError("no values in column " + a.col);
    const auto h = histogram(values, a.bins);

    auto meta = run.provenance();
    meta.emplace_back("n", std::to_string(values.size()));
    meta.emplace_back("bins", std::to_string(h.counts.size()));
    auto f = open_output(a.out);
    for (const auto& [k, v] : meta) f << "# " << k << '=' << v << '\n';
    f << "bin_left,bin_right,count\n";
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        f << format_double(h.edges[b]) << ',' << format_double(h.edges[b + 1]) << ',' << h.counts[b] << '\n';
    }
    finish(f, a.out);
    run.write_manifest(dir_of(a.out));
    out << "n=" << values.size() << " bins=" << h.counts.size() << '\n';
}

struct ScatterArgs {
    std::string in;
    std::string x;
    std::string y;
    std::string indicator;
    std::string out = "scatter.csv";
};

void cmd_scatter(const ScatterArgs& a, Run& run, std::ostream& out) {
    if (a.in.empty() || a.x.empty() || a.y.empty()) throw UsageError("--in, --x and --y are required");
    auto in = open_input(a.in);
    const auto doc = read_csv(in);
    auto filter = indicator_option(a.indicator);
    const auto px = pick_column(doc, a.x, filter);
    if (px.filter) filter = px.filter;
    const auto py = pick_column(doc, a.y, filter);
    if (px.filter && py.filter && px.filter != py.filter) throw UsageError("x and y select different indicators");
    if (py.filter) filter = py.filter;

    auto f = open_output(a.out);
    for (const auto& [k, v] : run.provenance()) f << "# " << k << '=' << v << '\n';
    f << a.x << ',' << a.y << '\n';
    std::size_t n = 0;
    for (std::size_t i = 0; i < doc.rows.size(); ++i) {
        const auto& row = doc.rows[i];
        if (!row_selected(doc, row, filter)) continue;
        if (px.column >= row.size() || py.column >= row.size()) continue;
        if (row[px.column].empty() || row[py.column].empty()) continue;
        const auto x = parse_double(row[px.column]);
        const auto y = parse_double(row[py.column]);
        if (!x || !y) throw DataError("line " + std::to_string(doc.row_lines[i]) + ": non-numeric value");
        f << format_double(*x) << ',' << format_double(*y) << '\n';
        ++n;
    }
    finish(f, a.out);
    run.write_manifest(dir_of(a.out));
    out << "points=" << n << '\n';
}

std::vector<CLI::App*> parsed_chain(CLI::App& app) {
    std::vector<CLI::App*> chain{&app};
    for (;;) {
        const auto subs = chain.back()->get_subcommands();
        if (subs.empty()) return chain;
        chain.push_back(subs.front());
    }
}

std::string chain_name(const std::vector<CLI::App*>& chain) {
    std::vector<std::string> names;
    for (std::size_t i = 1; i < chain.size(); ++i) names.push_back(chain[i]->get_name());
    return join(names, " ");
}

int fail(std::ostream& err, const char* kind, int code, const std::string& msg) {
    err << "error kind=" << kind << " exit=" << code << " message=" << msg << '\n';
    return code;
}

}  // namespace

ConvertResult convert_rsim_to_tests(const CsvDocument& doc, int group_size) {
    if (group_size < 1) throw UsageError("group size must be >= 1");
    auto col = [&](std::initializer_list<const char*> names) -> std::optional<std::size_t> {
        for (const char* n : names) {
            if (auto c = doc.find_column(n)) return c;
        }
        return std::nullopt;
    };
    const auto c_date = col({"cal_date", "original_cal_date", "base_date"});
    const auto c_age = col({"age_bp", "age"});
    const auto c_sd = col({"sd"});
    if (!c_date || !c_age || !c_sd) throw DataError("simulation rows need cal_date, age and sd columns");
    const auto c_mean = col({"cal_mean"});
    const auto c_median = col({"cal_median"});
    const auto c_sigma = col({"cal_sigma"});

    std::map<double, std::vector<SimRecord>> by_date;
    for (std::size_t i = 0; i < doc.rows.size(); ++i) {
        const auto& row = doc.rows[i];
        const auto where = "line " + std::to_string(doc.row_lines[i]);
        auto field = [&](std::optional<std::size_t> c) -> std::optional<double> {
            if (!c) return 0.0;
            if (*c >= row.size()) throw DataError(where + ": short row");
            if (row[*c].empty()) return 0.0;
            return parse_double(row[*c]);
        };
        const auto date = field(c_date);
        const auto age = field(c_age);
        const auto sd = field(c_sd);
        if (!date || !age || !sd || row[*c_date].empty() || row[*c_age].empty()) {
            throw DataError(where + ": malformed row");
        }
        if (*age != std::round(*age)) throw DataError(where + ": age must be whole years");
        const auto mean = field(c_mean);
        const auto median = field(c_median);
        const auto sigma = field(c_sigma);
        if (!mean || !median || !sigma) throw DataError(where + ": malformed calibration fields");
        SimRecord r;
        r.base_date = *date;
        r.age = static_cast<int>(*age);
        r.sd = *sd;
        r.cal_mean = *mean;
        r.cal_median = *median;
        r.cal_sigma = *sigma;
        by_date[*date].push_back(r);
    }

    ConvertResult res;
    const auto g = static_cast<std::size_t>(group_size);
    std::int64_t next_id = 1;
    for (auto& [date, rows] : by_date) {
        const std::size_t full = rows.size() / g;
        for (std::size_t k = 0; k < full; ++k) {
            TestDataset ds;
            ds.data_id = next_id++;
            ds.original_date = date;
            ds.draws.assign(rows.begin() + static_cast<std::ptrdiff_t>(k * g),
                            rows.begin() + static_cast<std::ptrdiff_t>((k + 1) * g));
            res.datasets.push_back(std::move(ds));
        }
        if (rows.size() % g) res.leftovers.emplace_back(date, rows.size() % g);
    }
    return res;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulation-based radiocarbon fine dating", kToolName};
    app.option_defaults()->always_capture_default();
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
    app.require_subcommand(1);

    Globals g;
    app.add_option("--config", g.config, "flat key = value file; flags take precedence");
    app.add_option("--seed", g.seed, "master seed");
    app.add_option("--workers", g.workers, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--curve", g.curve, "calibration curve file")->default_str(RADIOFINE_DEFAULT_CURVE);
    app.add_option("--grid-step", g.grid_step, "calibration grid step (years)")->check(CLI::PositiveNumber);

    auto sub = [&](CLI::App* parent, const char* name, const char* desc) {
        auto* s = parent->add_subcommand(name, desc);
        s->fallthrough();
        return s;
    };

    auto* curve_cmd = sub(&app, "curve", "inspect a calibration curve");
    curve_cmd->require_subcommand(1);
    CurveInfoArgs curve_args;
    auto* curve_info = sub(curve_cmd, "info", "summary and interpolated values");
    curve_info->add_option("file", curve_args.file, "curve file")->required();
    curve_info->add_option("--at", curve_args.at, "calendar dates to interpolate")->delimiter(',');

    RefGenArgs ref_args;
    auto* ref_gen = sub(&app, "ref-gen", "generate a reference table");
    ref_gen->add_option("--label", ref_args.label, "preset label, Combo, or a custom name");
    ref_gen->add_option("--step", ref_args.step, "year interval");
    ref_gen->add_option("--per-slice", ref_args.per_slice, "simulations per time step");
    ref_gen->add_option("--sd", ref_args.sd, "measurement sd (years)");
    ref_gen->add_option("--span", ref_args.span, "OLDEST:YOUNGEST calendar dates");
    ref_gen->add_option("--out", ref_args.out, "output CSV");
    ref_gen->add_flag("--with-hpd", ref_args.with_hpd, "emit 68/95 HPD segment lists");
    ref_gen->add_option("--analysis", ref_args.analysis, "START:END range to check the buffer against");

    auto* simulate_cmd = sub(&app, "simulate", "simulate measurement series");
    simulate_cmd->require_subcommand(1);
    SimulateArgs sim_args;
    auto* sim_tests = sub(simulate_cmd, "tests", "grouped test datasets per date");
    sim_tests->add_option("--dates", sim_args.dates, "START:END[:STEP]");
    sim_tests->add_option("--per-date", sim_args.per_date, "datasets per date")->check(CLI::PositiveNumber);
    sim_tests->add_option("--group", sim_args.group, "ages per dataset")->check(CLI::PositiveNumber);
    sim_tests->add_option("--sd", sim_args.sd, "measurement sd (years)");
    sim_tests->add_option("--out", sim_args.out, "output CSV");

    ConvertArgs conv_args;
    auto* convert = sub(&app, "convert", "group simulation rows into test datasets");
    convert->add_option("--in", conv_args.in, "simulation rows CSV")->required();
    convert->add_option("--group", conv_args.group, "rows per dataset")->check(CLI::PositiveNumber);
    convert->add_option("--out", conv_args.out, "output CSV");

    FinedateArgs fd_args;
    auto* finedate = sub(&app, "finedate", "fine-date measured ages against a reference table");
    finedate->add_option("--ref", fd_args.ref, "reference table CSV");
    finedate->add_option("--ages", fd_args.ages, "comma-separated ages BP");
    finedate->add_option("--ages-file", fd_args.ages_file, "CSV with age_bp[,sd]");
    finedate->add_option("--sd", fd_args.sd, "one sd or one per age");
    finedate->add_option("--out", fd_args.out, "output prefix");

    EvaluateArgs ev_args;
    auto* evaluate = sub(&app, "evaluate", "evaluate a test series against a reference table");
    evaluate->add_option("--ref", ev_args.ref, "reference table CSV");
    evaluate->add_option("--tests", ev_args.tests, "test datasets CSV");
    evaluate->add_option("--out", ev_args.out, "output directory");
    evaluate->add_option("--mpd-ref", ev_args.mpd_ref, "eval_long.csv used as MPD pool (default: this run)");

    auto* lookup = sub(&app, "lookup", "indicator quality lookup table");
    lookup->require_subcommand(1);
    LookupBuildArgs lb_args;
    auto* lookup_build = sub(lookup, "build", "build from eval_long.csv");
    lookup_build->add_option("--eval", lb_args.eval, "eval_long.csv");
    lookup_build->add_option("--out", lb_args.out, "output CSV");
    lookup_build->add_option("--width", lb_args.width, "bucket width (years)")->check(CLI::PositiveNumber);
    lookup_build->add_option("--tight", lb_args.tight, "tight tolerance (years)");
    lookup_build->add_option("--wide", lb_args.wide, "wide tolerance (years)");
    LookupQueryArgs lq_args;
    auto* lookup_query = sub(lookup, "query", "look up an indicator value");
    lookup_query->add_option("--table", lq_args.table, "lookup CSV")->required();
    lookup_query->add_option("--indicator", lq_args.indicator, "indicator name")->required();
    lookup_query->add_option("--value", lq_args.value, "indicator value (calendar year)")->required();

    HistArgs hist_args;
    auto* hist = sub(&app, "hist", "histogram data for a column");
    hist->add_option("--in", hist_args.in, "input CSV");
    hist->add_option("--col", hist_args.col, "column or indicator name");
    hist->add_option("--indicator", hist_args.indicator, "restrict long tables to one indicator");
    hist->add_option("--bins", hist_args.bins, "bin count (default: Rice rule)")->check(CLI::PositiveNumber);
    hist->add_option("--out", hist_args.out, "output CSV");

    ScatterArgs sc_args;
    auto* scatter = sub(&app, "scatter", "paired column data");
    scatter->add_option("--in", sc_args.in, "input CSV");
    scatter->add_option("--x", sc_args.x, "x column or indicator");
    scatter->add_option("--y", sc_args.y, "y column or indicator");
    scatter->add_option("--indicator", sc_args.indicator, "restrict long tables to one indicator");
    scatter->add_option("--out", sc_args.out, "output CSV");

    if (raw_args.empty()) {
        err << app.help();
        return kExitUsage;
    }

    try {
        auto args = merge_config(app, raw_args, err);
        std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
        try {
            app.parse(args);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e, out, err);
        } catch (const CLI::CallForAllHelp& e) {
            return app.exit(e, out, err);
        } catch (const CLI::CallForVersion& e) {
            return app.exit(e, out, err);
        } catch (const CLI::ParseError& e) {
            return fail(err, "usage", kExitUsage, e.what());
        }

        const auto chain = parsed_chain(app);
        Run run(chain_name(chain), chain, g);
        auto* leaf = chain.back();
        if (leaf == curve_info) {
            cmd_curve_info(curve_args, out);
        } else if (leaf == ref_gen) {
            cmd_ref_gen(ref_args, g, run, out, err);
        } else if (leaf == sim_tests) {
            cmd_simulate_tests(sim_args, g, run, out);
        } else if (leaf == convert) {
            cmd_convert(conv_args, run, out, err);
        } else if (leaf == finedate) {
            cmd_finedate(fd_args, run, out);
        } else if (leaf == evaluate) {
            cmd_evaluate(ev_args, g, run, out);
        } else if (leaf == lookup_build) {
            cmd_lookup_build(lb_args, run, out);
        } else if (leaf == lookup_query) {
            cmd_lookup_query(lq_args, out);
        } else if (leaf == hist) {
            cmd_hist(hist_args, run, out);
        } else if (leaf == scatter) {
            cmd_scatter(sc_args, run, out);
        } else {
            return fail(err, "usage", kExitUsage, "incomplete command");
        }
    } catch (const UsageError& e) {
        return fail(err, "usage", kExitUsage, e.what());
    } catch (const IoError& e) {
        return fail(err, "io", kExitIo, e.what());
    } catch (const DataError& e) {
        return fail(err, "data", kExitData, e.what());
    } catch (const std::exception& e) {
        return fail(err, "data", kExitData, e.what());
    }
    return kExitOk;
}

}  // namespace radiofine::cli
