#pragma once

#include "diskmix/harness/config.hpp"
#include "diskmix/metrics/fit.hpp"
#include "diskmix/metrics/geometric_scale.hpp"
#include "diskmix/metrics/h_minus_one.hpp"
#include "diskmix/metrics/inequalities.hpp"
#include "diskmix/tiling.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace diskmix {

/// One (t, kappa) line of the report. Meters that are switched off or beyond
/// their t_max are left empty.
struct ReportRow {
    double t = 0.0;
    double kappa = 0.0;
    std::optional<GeometricScaleResult> geometric;
    std::optional<double> hminus1;
    std::optional<double> tile_M4;
    std::optional<double> tile_M6;
};

struct SlopeEntry {
    std::string metric;
    std::optional<double> kappa;
    TimeWindow window;
    std::optional<DecayFit> fit;
    std::optional<std::pair<double, double>> expected;
    /// Earliest t from which the trailing fit lies in the expected window.
    std::optional<double> earliest_entry;
    /// pass | fail | reported | insufficient
    std::string status;
};

struct ConstantEntry {
    std::string name;
    std::optional<double> kappa;
    std::optional<double> value;
    std::string note;
};

struct CheckEntry {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct MixingReport {
    ExperimentConfig config;
    std::string datum_label;
    double sup_norm = 0.0;
    std::vector<ReportRow> rows;
    std::vector<SlopeEntry> slopes;
    std::vector<ConstantEntry> constants;
    std::vector<CheckEntry> checks;

    [[nodiscard]] bool passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
};

/// Shortest round-trip-safe text for report values; "inf" marks the unmixed
/// state and "nan" a value that was not computed.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string format_number(const std::optional<double>& v) { return v ? format_number(*v) : "nan"; }

inline GeometricScaleOptions geometric_options(const GeometricSettings& s) {
    GeometricScaleOptions o;
    o.eps_max = s.eps_max;
    o.eps_min = s.eps_min;
    o.steps_per_octave = s.steps_per_octave;
    o.center_spacing = s.center_spacing;
    o.method = s.method == "raster" ? BallMethod::Raster : BallMethod::Exact;
    o.raster.n = s.raster;
    return o;
}

inline HMinusOneOptions h_minus_one_options(const HMinusOneSettings& s) {
    HMinusOneOptions o;
    o.radial_resolution = s.radial_resolution;
    o.mode_count = s.mode_count;
    return o;
}

namespace detail {

inline bool within(const std::optional<double>& limit, double t) { return !limit || t <= *limit * (1.0 + 1e-12); }

inline bool same_kappa(double a, double b) { return std::abs(a - b) <= 1e-12; }

/// (t, value) series of one metric, one point per t, positive finite values only.
inline std::vector<std::pair<double, double>> metric_series(const MixingReport& rep, const std::string& metric, std::optional<double> kappa) {
    std::vector<std::pair<double, double>> out;
    const double k = kappa.value_or(rep.config.kappas.front());
    for (const auto& row : rep.rows) {
        if (!same_kappa(row.kappa, k)) continue;
        std::optional<double> v;
        if (metric == "geometric" && row.geometric) v = row.geometric->epsilon_upper;
        if (metric == "eps_upper" && row.geometric) v = row.geometric->epsilon_upper;
        if (metric == "hminus1") v = row.hminus1;
        if (metric == "tile_M4") v = row.tile_M4;
        if (metric == "tile_M6") v = row.tile_M6;
        if (v && *v > 0.0 && std::isfinite(*v)) out.emplace_back(row.t, *v);
    }
    return out;
}

inline std::optional<double> metric_value(const ReportRow& row, const std::string& metric) {
    if (metric == "eps_upper") return row.geometric ? std::optional<double>(row.geometric->epsilon_upper) : std::nullopt;
    if (metric == "hminus1") return row.hminus1;
    if (metric == "tile_M4") return row.tile_M4;
    if (metric == "tile_M6") return row.tile_M6;
    return std::nullopt;
}

inline void fit_slopes(MixingReport& rep) {
    for (const auto& spec : rep.config.fits) {
        SlopeEntry e;
        e.metric = spec.metric;
        e.kappa = spec.metric == "geometric" ? spec.kappa : std::nullopt;
        e.window = spec.window;
        e.expected = spec.expected;
        const auto series = metric_series(rep, spec.metric, e.kappa);
        std::size_t inside = 0;
        for (const auto& p : series) inside += spec.window.contains(p.first) ? 1 : 0;
        if (inside >= 4) {
            e.fit = fit_decay_rate(series, spec.window);
            if (e.expected) e.earliest_entry = earliest_window_entry(series, spec.window, e.expected->first, e.expected->second);
        }
        if (!e.fit) {
            e.status = "insufficient";
        } else if (!e.expected) {
            e.status = "reported";
        } else {
            e.status = e.fit->slope >= e.expected->first && e.fit->slope <= e.expected->second ? "pass" : "fail";
        }
        if (e.expected) {
            std::string name = "fit:" + e.metric + (e.kappa ? "@" + format_number(*e.kappa) : "");
            std::string detail = e.fit ? "slope " + format_number(e.fit->slope) : "fewer than 4 valid rows";
            detail += " expected [" + format_number(e.expected->first) + ", " + format_number(e.expected->second) + "]";
            rep.checks.push_back({name, e.status == "pass", detail});
        }
        rep.slopes.push_back(std::move(e));
    }
}

inline void run_expectations(MixingReport& rep) {
    const auto& ex = rep.config.expectations;
    for (double k : ex.unmixed_kappas) {
        std::size_t computed = 0, unmixed = 0;
        for (const auto& row : rep.rows) {
            if (!same_kappa(row.kappa, k) || !row.geometric) continue;
            ++computed;
            unmixed += row.geometric->unmixed() ? 1 : 0;
        }
        rep.checks.push_back({"unmixed@" + format_number(k), computed > 0 && computed == unmixed,
                              std::to_string(unmixed) + " of " + std::to_string(computed) + " rows unmixed"});
    }
    for (const auto& c : ex.constant_metrics) {
        for (double k : rep.config.kappas) {
            std::optional<double> first;
            double worst = 0.0;
            std::size_t n = 0;
            for (const auto& row : rep.rows) {
                if (!same_kappa(row.kappa, k)) continue;
                const auto v = metric_value(row, c.metric);
                if (!v) continue;
                ++n;
                if (!first) {
                    first = v;
                } else if (*v != *first) {
                    worst = std::max(worst, std::abs(*v - *first));
                }
            }
            rep.checks.push_back({"constant:" + c.metric + "@" + format_number(k), n >= 2 && worst <= c.tolerance,
                                  "max deviation " + format_number(worst) + " over " + std::to_string(n) + " rows"});
            if (c.metric != "eps_upper") break; // the other columns do not depend on kappa
        }
    }
    if (rep.config.kappas.size() > 1) {
        bool ok = true;
        std::string detail = "eps_upper nonincreasing in kappa at every t";
        for (const auto& a : rep.rows)
            for (const auto& b : rep.rows) {
                if (a.t != b.t || !(a.kappa < b.kappa) || !a.geometric || !b.geometric) continue;
                if (b.geometric->epsilon_upper > a.geometric->epsilon_upper) {
                    ok = false;
                    detail = "violated at t = " + format_number(a.t);
                }
            }
        rep.checks.push_back({"kappa_monotone", ok, detail});
    }
}

/// First grid time from which `holds` is true at every later row.
inline std::optional<double> first_lasting_time(const std::vector<std::pair<double, bool>>& seq) {
    std::optional<double> first;
    for (std::size_t k = seq.size(); k-- > 0;) {
        if (!seq[k].second) break;
        first = seq[k].first;
    }
    return first;
}

inline void collect_constants(MixingReport& rep) {
    const double sup = rep.sup_norm;
    rep.constants.push_back({"tile_diameter_c", std::nullopt, tile_diameter_constant(8), "max over M <= 8 of 2^M diam Q"});
    for (double k : rep.config.kappas) {
        std::optional<double> c;
        for (const auto& row : rep.rows)
            if (same_kappa(row.kappa, k) && row.geometric && !row.geometric->unmixed())
                c = std::max(c.value_or(0.0), row.geometric->epsilon_upper * k * k * row.t);
        rep.constants.push_back({"geometric_C", k, c, "max eps_upper kappa^2 t"});
    }
    const double k0 = rep.config.kappas.front();
    std::optional<double> hc;
    for (const auto& row : rep.rows)
        if (same_kappa(row.kappa, k0) && row.hminus1 && sup > 0.0) hc = std::max(hc.value_or(0.0), *row.hminus1 * std::sqrt(row.t) / sup);
    rep.constants.push_back({"hminus1_C", std::nullopt, hc, "max hminus1 sqrt(t) / sup"});

    for (int M : {4, 6}) {
        std::optional<double> c;
        for (const auto& row : rep.rows) {
            const auto avg = M == 4 ? row.tile_M4 : row.tile_M6;
            if (same_kappa(row.kappa, k0) && avg && row.hminus1 && *avg <= 2.0 * sup * std::ldexp(1.0, -M))
                c = std::max(c.value_or(0.0), *row.hminus1 / (sup * std::ldexp(1.0, -M)));
        }
        rep.constants.push_back({"mpc2_C_M" + std::to_string(M), std::nullopt, c, "max hminus1 / (sup 2^-M) where tile averages <= 2 sup 2^-M"});
    }

    if (rep.config.datum.kind != "step-radial") return;
    const int N = rep.config.datum.level;
    for (int M : {4, 6}) {
        std::vector<std::pair<double, bool>> fine;
        for (const auto& row : rep.rows) {
            const auto avg = M == 4 ? row.tile_M4 : row.tile_M6;
            if (same_kappa(row.kappa, k0) && avg) fine.emplace_back(row.t, *avg <= std::ldexp(sup, -M));
        }
        const double fine_scale = std::ldexp(1.0, M > N ? 2 * M : M + N);
        const auto tf = first_lasting_time(fine);
        rep.constants.push_back({"fine_threshold_C_M" + std::to_string(M), std::nullopt, tf ? std::optional<double>(*tf / fine_scale) : std::nullopt,
                                 "first lasting t with tile averages <= 2^-M sup, over its threshold scale"});
        for (double k : rep.config.kappas) {
            std::vector<std::pair<double, bool>> coarse;
            for (const auto& row : rep.rows) {
                const auto avg = M == 4 ? row.tile_M4 : row.tile_M6;
                if (same_kappa(row.kappa, k) && avg) coarse.emplace_back(row.t, *avg <= 0.25 * k * sup);
            }
            const double kappa_scale = std::ldexp(1.0, M > N ? M : N) / k;
            const auto tk = first_lasting_time(coarse);
            rep.constants.push_back({"kappa_threshold_C_M" + std::to_string(M), k, tk ? std::optional<double>(*tk / kappa_scale) : std::nullopt,
                                     "first lasting t with tile averages <= kappa sup / 4, over its threshold scale"});
        }
    }
}

} // namespace detail

using ProgressSink = std::function<void(const std::string&)>;

/// Evaluates both meters and the tile diagnostics on every grid time, then fits
/// slopes and runs the configured expectations. Times are processed in order;
/// the meters parallelize internally.
inline MixingReport run_experiment(const ExperimentConfig& config, const ProgressSink& progress = {}) {
    MixingReport rep;
    rep.config = config;
    const ScalarDatum datum = build_datum(config.datum, config.seed);
    rep.datum_label = datum.label();
    rep.sup_norm = datum.sup_norm();
    const auto times = config.time_grid.values();
    if (times.empty()) throw ConfigError("time grid is empty");
    const auto gopt = geometric_options(config.geometric);
    const auto hopt = h_minus_one_options(config.hminus1);
    for (double t : times) {
        const FieldSnapshot snap(datum, FlowTime(t));
        std::optional<double> h, m4, m6;
        if (config.hminus1.enabled && detail::within(config.hminus1.t_max, t)) h = h_minus_one_norm(snap, hopt).norm_value;
        if (config.tiles.enabled && detail::within(config.tiles.t_max, t)) {
            m4 = max_abs(snapshot_tile_averages(snap, 4));
            m6 = max_abs(snapshot_tile_averages(snap, 6));
        }
        for (double k : config.kappas) {
            ReportRow row{t, k, std::nullopt, h, m4, m6};
            if (config.geometric.enabled && detail::within(config.geometric.t_max, t)) row.geometric = geometric_scale(snap, k, gopt);
            if (progress) {
                progress("t=" + format_number(t) + " kappa=" + format_number(k) +
                         " eps_upper=" + (row.geometric ? format_number(row.geometric->epsilon_upper) : std::string("nan")) +
                         " hminus1=" + format_number(h));
            }
            rep.rows.push_back(std::move(row));
        }
    }
    detail::fit_slopes(rep);
    detail::run_expectations(rep);
    detail::collect_constants(rep);
    return rep;
}

// ---------------------------------------------------------------------------
// Report emission

inline void write_report_csv(std::ostream& out, const MixingReport& rep) {
    out << "t,kappa,eps_lower,eps_upper,hminus1,max_tile_avg_M4,max_tile_avg_M6\n";
    for (const auto& r : rep.rows) {
        out << format_number(r.t) << ',' << format_number(r.kappa) << ','
            << (r.geometric ? format_number(r.geometric->epsilon_lower) : "nan") << ','
            << (r.geometric ? format_number(r.geometric->epsilon_upper) : "nan") << ',' << format_number(r.hminus1) << ','
            << format_number(r.tile_M4) << ',' << format_number(r.tile_M6) << '\n';
    }
}

inline void write_slopes_csv(std::ostream& out, const MixingReport& rep) {
    out << "metric,kappa,window_lo,window_hi,points,slope,intercept,residual,expected_lo,expected_hi,earliest_entry_t,status\n";
    for (const auto& s : rep.slopes) {
        out << s.metric << ',' << format_number(s.kappa) << ',' << format_number(s.window.lo) << ',' << format_number(s.window.hi) << ','
            << (s.fit ? std::to_string(s.fit->points) : "0") << ',' << (s.fit ? format_number(s.fit->slope) : "nan") << ','
            << (s.fit ? format_number(s.fit->intercept) : "nan") << ',' << (s.fit ? format_number(s.fit->residual) : "nan") << ','
            << (s.expected ? format_number(s.expected->first) : "nan") << ',' << (s.expected ? format_number(s.expected->second) : "nan")
            << ',' << format_number(s.earliest_entry) << ',' << s.status << '\n';
    }
}

inline void write_constants_csv(std::ostream& out, const MixingReport& rep) {
    out << "name,kappa,value,note\n";
    for (const auto& c : rep.constants)
        out << c.name << ',' << format_number(c.kappa) << ',' << format_number(c.value) << ",\"" << c.note << "\"\n";
}

inline void write_checks_csv(std::ostream& out, const MixingReport& rep) {
    out << "check,status,detail\n";
    for (const auto& c : rep.checks) out << c.name << ',' << (c.passed ? "pass" : "fail") << ",\"" << c.detail << "\"\n";
}

/// Full pass/fail vector over the radius grid for every row.
inline void write_epsilon_tests_csv(std::ostream& out, const MixingReport& rep) {
    out << "t,kappa,epsilon,passes,max_abs_average\n";
    for (const auto& r : rep.rows) {
        if (!r.geometric) continue;
        for (const auto& e : r.geometric->tests)
            out << format_number(r.t) << ',' << format_number(r.kappa) << ',' << format_number(e.epsilon) << ',' << (e.passes ? 1 : 0) << ','
                << format_number(e.max_abs_average) << '\n';
    }
}

/// Log-log gnuplot script over report.csv with reference slopes -1 and -1/2
/// anchored at the first plotted point of each curve.
inline void write_plot_script(std::ostream& out, const MixingReport& rep) {
    const auto& cfg = rep.config;
    out << "# " << cfg.experiment_id << (cfg.description.empty() ? "" : ": " + cfg.description) << "\n";
    out << "set terminal svg size 900,640 dynamic\n";
    out << "set output 'decay.svg'\n";
    out << "set datafile separator ','\n";
    out << "set logscale xy\n";
    out << "set key bottom left\n";
    out << "set xlabel 't'\n";
    out << "set ylabel 'mixing scale'\n";
    out << "set title '" << cfg.experiment_id << " (" << rep.datum_label << ")'\n";
    out << "finite(x) = (x == x && abs(x) < 1e300) ? x : NaN\n";

    std::vector<std::string> curves;
    std::optional<std::pair<double, double>> geo_anchor, h_anchor;
    for (double k : cfg.kappas) {
        const auto s = detail::metric_series(rep, "geometric", k);
        if (s.empty()) continue;
        if (!geo_anchor) geo_anchor = s.front();
        const std::string ks = format_number(k);
        curves.push_back("'report.csv' skip 1 using 1:(abs($2 - " + ks + ") < 1e-12 ? finite($4) : NaN) with linespoints title 'eps_upper, kappa = " +
                         ks + "'");
    }
    const std::string k0 = format_number(cfg.kappas.front());
    const auto hs = detail::metric_series(rep, "hminus1", std::nullopt);
    if (!hs.empty()) {
        h_anchor = hs.front();
        curves.push_back("'report.csv' skip 1 using 1:(abs($2 - " + k0 + ") < 1e-12 ? finite($5) : NaN) with linespoints title 'H^-1 norm'");
    }
    if (geo_anchor) {
        out << "geo_ref(t) = " << format_number(geo_anchor->second * geo_anchor->first) << " / t\n";
        curves.emplace_back("geo_ref(x) with lines dashtype 2 title 'slope -1'");
    }
    if (h_anchor) {
        out << "h_ref(t) = " << format_number(h_anchor->second * std::sqrt(h_anchor->first)) << " / sqrt(t)\n";
        curves.emplace_back("h_ref(x) with lines dashtype 3 title 'slope -1/2'");
    }
    const auto times = cfg.time_grid.values();
    out << "set xrange [" << format_number(times.front()) << ":" << format_number(times.back()) << "]\n";
    if (curves.empty()) {
        out << "# no finite values to plot\n";
        return;
    }
    out << "plot ";
    for (std::size_t k = 0; k < curves.size(); ++k) out << (k ? ", \\\n     " : "") << curves[k];
    out << "\n";
}

/// Writes report.csv, slopes.csv, constants.csv, checks.csv,
/// epsilon_tests.csv and plot.gp into `dir`.
inline void emit_report(const MixingReport& rep, const std::filesystem::path& dir) {
    if (rep.rows.empty()) throw DomainError("emit_report: the report has no rows");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
    const auto write = [&](const char* name, void (*fn)(std::ostream&, const MixingReport&)) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw Error("cannot write " + (dir / name).string());
        fn(out, rep);
        if (!out) throw Error("write failed for " + (dir / name).string());
    };
    write("report.csv", write_report_csv);
    write("slopes.csv", write_slopes_csv);
    write("constants.csv", write_constants_csv);
    write("checks.csv", write_checks_csv);
    write("epsilon_tests.csv", write_epsilon_tests_csv);
    write("plot.gp", write_plot_script);
}

} // namespace diskmix
