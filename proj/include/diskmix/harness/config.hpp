#pragma once

#include "diskmix/core.hpp"
#include "diskmix/metrics/fit.hpp"
#include "diskmix/scalar_data.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace diskmix {

struct ModeSpec {
    int m = 1;
    std::string profile = "linear"; // linear | cubic-bump | holder
    double alpha = 1.0;
    double phase = 0.0;
};

struct DatumSpec {
    /// half-disk | step-radial | modal | holder | stationary-annulus |
    /// kappa-pathology | zero | sampled
    std::string kind = "half-disk";
    int level = 0;
    std::vector<ModeSpec> modes;
    double alpha = 0.5;
    double kappa = 0.3;
    std::string path;
    bool project = true;
};

struct TimeGrid {
    double t_min = 8.0;
    double t_max = 256.0;
    /// Number of geometric points; 0 means ratio 2 from t_min up to t_max.
    int points = 0;

    [[nodiscard]] std::vector<double> values() const {
        std::vector<double> out;
        if (points == 0) {
            for (double t = t_min; t <= t_max * (1.0 + 1e-12); t *= 2.0) out.push_back(t);
        } else if (points == 1) {
            out.push_back(t_min);
        } else {
            const double ratio = std::pow(t_max / t_min, 1.0 / (points - 1));
            for (int k = 0; k < points; ++k) out.push_back(k + 1 == points ? t_max : t_min * std::pow(ratio, k));
        }
        return out;
    }
};

struct GeometricSettings {
    bool enabled = true;
    double eps_max = 2.0;
    double eps_min = 1.0 / 256.0;
    int steps_per_octave = 4;
    double center_spacing = 0.25;
    std::string method = "exact"; // exact | raster
    int raster = 1024;
    std::optional<double> t_max;
};

struct HMinusOneSettings {
    bool enabled = true;
    int radial_resolution = 512;
    int mode_count = 64;
    std::optional<double> t_max;
};

struct TileSettings {
    bool enabled = true;
    std::optional<double> t_max;
};

/// Slope fit of one report column; `expected` turns it into an acceptance
/// window.
struct FitSpec {
    std::string metric = "geometric"; // geometric | hminus1 | tile_M4 | tile_M6
    std::optional<double> kappa;
    TimeWindow window;
    std::optional<std::pair<double, double>> expected;
};

struct ConstantSpec {
    std::string metric;
    double tolerance = 1e-10;
};

struct Expectations {
    /// Accuracies at which every computed row must report the unmixed marker.
    std::vector<double> unmixed_kappas;
    /// Columns that must not change over the time grid.
    std::vector<ConstantSpec> constant_metrics;
};

struct ExperimentConfig {
    std::string experiment_id;
    std::string description;
    DatumSpec datum;
    std::vector<double> kappas{0.2};
    TimeGrid time_grid;
    GeometricSettings geometric;
    HMinusOneSettings hminus1;
    TileSettings tiles;
    std::vector<FitSpec> fits;
    Expectations expectations;
    std::string output_dir = "out";
    std::uint64_t seed = 1;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!known.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

inline std::optional<double> optional_number(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    if (!j.at(key).is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return j.at(key).get<double>();
}

inline std::pair<double, double> number_pair(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigError(where + ": expected [lo, hi]");
    const double lo = j[0].get<double>(), hi = j[1].get<double>();
    if (!(lo <= hi)) throw ConfigError(where + ": lo must not exceed hi");
    return {lo, hi};
}

inline void check_kappa(double k, const std::string& where) {
    if (!(k > 0.0 && k < 1.0)) throw ConfigError(where + ": accuracy must lie in (0, 1)");
}

} // namespace detail

inline DatumSpec parse_datum_spec(const nlohmann::json& j) {
    using detail::get_or;
    const std::string w = "datum";
    detail::reject_unknown(j, {"kind", "level", "modes", "alpha", "kappa", "path", "project"}, w);
    DatumSpec d;
    d.kind = get_or<std::string>(j, "kind", d.kind, w);
    d.level = get_or<int>(j, "level", d.level, w);
    d.alpha = get_or<double>(j, "alpha", d.alpha, w);
    d.kappa = get_or<double>(j, "kappa", d.kappa, w);
    d.path = get_or<std::string>(j, "path", d.path, w);
    d.project = get_or<bool>(j, "project", d.project, w);
    if (j.contains("modes")) {
        if (!j.at("modes").is_array()) throw ConfigError("datum.modes: expected an array");
        for (const auto& mj : j.at("modes")) {
            detail::reject_unknown(mj, {"m", "profile", "alpha", "phase"}, "datum.modes[]");
            ModeSpec m;
            m.m = get_or<int>(mj, "m", m.m, "datum.modes[]");
            m.profile = get_or<std::string>(mj, "profile", m.profile, "datum.modes[]");
            m.alpha = get_or<double>(mj, "alpha", m.alpha, "datum.modes[]");
            m.phase = get_or<double>(mj, "phase", m.phase, "datum.modes[]");
            if (m.m < 1) throw ConfigError("datum.modes[].m must be at least 1");
            if (m.profile != "linear" && m.profile != "cubic-bump" && m.profile != "holder")
                throw ConfigError("datum.modes[].profile must be linear, cubic-bump or holder");
            d.modes.push_back(m);
        }
    }
    static const std::set<std::string> kinds{"half-disk",          "step-radial",     "modal", "holder",
                                              "stationary-annulus", "kappa-pathology", "zero",  "sampled"};
    if (!kinds.count(d.kind)) throw ConfigError("datum.kind: unknown kind '" + d.kind + "'");
    if (d.kind == "step-radial" && (d.level < 0 || d.level > 10)) throw ConfigError("datum.level must lie in [0, 10]");
    if (d.kind == "modal" && d.modes.empty()) throw ConfigError("datum.modes: a modal datum needs at least one mode");
    if (d.kind == "holder" && !(d.alpha > 0.0 && d.alpha <= 1.0)) throw ConfigError("datum.alpha must lie in (0, 1]");
    if (d.kind == "kappa-pathology") detail::check_kappa(d.kappa, "datum.kappa");
    if (d.kind == "sampled" && d.path.empty()) throw ConfigError("datum.path: a sampled datum needs a CSV path");
    return d;
}

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    using detail::get_or;
    detail::reject_unknown(j, {"$schema", "experiment_id", "description", "datum", "kappas", "time_grid", "geometric", "hminus1", "tiles",
                               "fits", "expectations", "output_dir", "seed"},
                           "config");
    ExperimentConfig c;
    c.experiment_id = get_or<std::string>(j, "experiment_id", "", "config");
    if (c.experiment_id.empty()) throw ConfigError("config.experiment_id is required");
    c.description = get_or<std::string>(j, "description", "", "config");
    if (!j.contains("datum")) throw ConfigError("config.datum is required");
    c.datum = parse_datum_spec(j.at("datum"));
    c.kappas = get_or<std::vector<double>>(j, "kappas", c.kappas, "config");
    if (c.kappas.empty()) throw ConfigError("config.kappas must not be empty");
    for (double k : c.kappas) detail::check_kappa(k, "config.kappas");

    if (!j.contains("time_grid")) throw ConfigError("config.time_grid is required");
    {
        const auto& tj = j.at("time_grid");
        detail::reject_unknown(tj, {"t_min", "t_max", "points"}, "time_grid");
        c.time_grid.t_min = get_or<double>(tj, "t_min", c.time_grid.t_min, "time_grid");
        c.time_grid.t_max = get_or<double>(tj, "t_max", c.time_grid.t_max, "time_grid");
        c.time_grid.points = get_or<int>(tj, "points", c.time_grid.points, "time_grid");
        if (!(c.time_grid.t_min > 0.0)) throw ConfigError("time_grid.t_min must be positive");
        if (!(c.time_grid.t_max >= c.time_grid.t_min)) throw ConfigError("time_grid.t_max must be at least t_min");
        if (c.time_grid.points < 0) throw ConfigError("time_grid.points must be nonnegative");
    }
    if (j.contains("geometric")) {
        const auto& g = j.at("geometric");
        const std::string w = "geometric";
        detail::reject_unknown(g, {"enabled", "eps_max", "eps_min", "steps_per_octave", "center_spacing", "method", "raster", "t_max"}, w);
        auto& s = c.geometric;
        s.enabled = get_or<bool>(g, "enabled", s.enabled, w);
        s.eps_max = get_or<double>(g, "eps_max", s.eps_max, w);
        s.eps_min = get_or<double>(g, "eps_min", s.eps_min, w);
        s.steps_per_octave = get_or<int>(g, "steps_per_octave", s.steps_per_octave, w);
        s.center_spacing = get_or<double>(g, "center_spacing", s.center_spacing, w);
        s.method = get_or<std::string>(g, "method", s.method, w);
        s.raster = get_or<int>(g, "raster", s.raster, w);
        s.t_max = detail::optional_number(g, "t_max", w);
        if (!(s.eps_min > 0.0 && s.eps_max >= s.eps_min)) throw ConfigError("geometric: need 0 < eps_min <= eps_max");
        if (s.steps_per_octave < 1) throw ConfigError("geometric.steps_per_octave must be positive");
        if (!(s.center_spacing > 0.0 && s.center_spacing <= 1.0)) throw ConfigError("geometric.center_spacing must lie in (0, 1]");
        if (s.method != "exact" && s.method != "raster") throw ConfigError("geometric.method must be exact or raster");
        if (!is_power_of_two(s.raster)) throw ConfigError("geometric.raster must be a power of two");
    }
    if (j.contains("hminus1")) {
        const auto& h = j.at("hminus1");
        const std::string w = "hminus1";
        detail::reject_unknown(h, {"enabled", "radial_resolution", "mode_count", "t_max"}, w);
        auto& s = c.hminus1;
        s.enabled = get_or<bool>(h, "enabled", s.enabled, w);
        s.radial_resolution = get_or<int>(h, "radial_resolution", s.radial_resolution, w);
        s.mode_count = get_or<int>(h, "mode_count", s.mode_count, w);
        s.t_max = detail::optional_number(h, "t_max", w);
        if (!is_power_of_two(s.radial_resolution) || s.radial_resolution < 64)
            throw ConfigError("hminus1.radial_resolution must be a power of two >= 64");
        if (!is_power_of_two(s.mode_count) || s.mode_count < 32) throw ConfigError("hminus1.mode_count must be a power of two >= 32");
    }
    if (j.contains("tiles")) {
        const auto& tj = j.at("tiles");
        detail::reject_unknown(tj, {"enabled", "t_max"}, "tiles");
        c.tiles.enabled = get_or<bool>(tj, "enabled", c.tiles.enabled, "tiles");
        c.tiles.t_max = detail::optional_number(tj, "t_max", "tiles");
    }
    if (j.contains("fits")) {
        if (!j.at("fits").is_array()) throw ConfigError("config.fits: expected an array");
        for (const auto& fj : j.at("fits")) {
            const std::string w = "fits[]";
            detail::reject_unknown(fj, {"metric", "kappa", "window", "expected_slope"}, w);
            FitSpec f;
            f.metric = get_or<std::string>(fj, "metric", f.metric, w);
            if (f.metric != "geometric" && f.metric != "hminus1" && f.metric != "tile_M4" && f.metric != "tile_M6")
                throw ConfigError("fits[].metric must be geometric, hminus1, tile_M4 or tile_M6");
            f.kappa = detail::optional_number(fj, "kappa", w);
            if (f.metric == "geometric") {
                if (!f.kappa) f.kappa = c.kappas.front();
                detail::check_kappa(*f.kappa, "fits[].kappa");
            }
            if (fj.contains("window")) {
                const auto [lo, hi] = detail::number_pair(fj.at("window"), "fits[].window");
                f.window = {lo, hi};
            }
            if (fj.contains("expected_slope")) f.expected = detail::number_pair(fj.at("expected_slope"), "fits[].expected_slope");
            c.fits.push_back(f);
        }
    }
    if (j.contains("expectations")) {
        const auto& ej = j.at("expectations");
        detail::reject_unknown(ej, {"unmixed_kappas", "constant_metrics"}, "expectations");
        c.expectations.unmixed_kappas = get_or<std::vector<double>>(ej, "unmixed_kappas", {}, "expectations");
        for (double k : c.expectations.unmixed_kappas) {
            detail::check_kappa(k, "expectations.unmixed_kappas");
            if (std::find(c.kappas.begin(), c.kappas.end(), k) == c.kappas.end())
                throw ConfigError("expectations.unmixed_kappas must be listed in kappas");
        }
        if (ej.contains("constant_metrics")) {
            for (const auto& cj : ej.at("constant_metrics")) {
                detail::reject_unknown(cj, {"metric", "tolerance"}, "expectations.constant_metrics[]");
                ConstantSpec s;
                s.metric = get_or<std::string>(cj, "metric", "", "expectations.constant_metrics[]");
                s.tolerance = get_or<double>(cj, "tolerance", s.tolerance, "expectations.constant_metrics[]");
                if (s.metric != "eps_upper" && s.metric != "hminus1" && s.metric != "tile_M4" && s.metric != "tile_M6")
                    throw ConfigError("expectations.constant_metrics[].metric must be eps_upper, hminus1, tile_M4 or tile_M6");
                c.expectations.constant_metrics.push_back(s);
            }
        }
    }
    c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir, "config");
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed, "config");
    return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

// ---------------------------------------------------------------------------
// Datum construction

/// Portable uniform draw in [0, 1) from a 64-bit engine.
inline double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Random mean-free step profile with 2 to 4 pieces and sup norm 1.
inline StepProfile random_mean_free_profile(std::mt19937_64& rng) {
    const int pieces = 2 + static_cast<int>(rng() % 3);
    std::vector<double> cuts;
    while (static_cast<int>(cuts.size()) < pieces - 1) {
        const double c = two_pi * (0.05 + 0.9 * unit_draw(rng));
        bool close = false;
        for (double x : cuts) close = close || std::abs(x - c) < 0.2;
        if (!close) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> b{0.0};
    b.insert(b.end(), cuts.begin(), cuts.end());
    b.push_back(two_pi);
    std::vector<double> v;
    for (int k = 0; k < pieces; ++k) v.push_back(2.0 * unit_draw(rng) - 1.0);
    StepProfile p = StepProfile(b, v).minus_mean();
    std::vector<double> scaled = p.values();
    const double s = p.sup_abs();
    for (double& x : scaled) x /= s;
    return StepProfile(p.breakpoints(), std::move(scaled));
}

inline RadialProfile make_radial_profile(const ModeSpec& m) {
    if (m.profile == "linear") return radial::linear();
    if (m.profile == "cubic-bump") return radial::cubic_bump();
    return radial::holder(m.alpha);
}

inline ScalarDatum build_datum(const DatumSpec& spec, std::uint64_t seed) {
    if (spec.kind == "half-disk") return half_disk_datum();
    if (spec.kind == "zero") return zero_datum();
    if (spec.kind == "stationary-annulus") return stationary_annulus_datum();
    if (spec.kind == "kappa-pathology") return kappa_pathology_datum(spec.kappa);
    if (spec.kind == "step-radial") {
        std::mt19937_64 rng(seed);
        std::vector<StepProfile> profiles;
        for (int l = 0; l < (1 << spec.level); ++l) profiles.push_back(random_mean_free_profile(rng));
        return make_step_radial(spec.level, std::move(profiles), "step-radial-N" + std::to_string(spec.level));
    }
    if (spec.kind == "holder") return modal_datum({{1, radial::holder(spec.alpha), 0.0}}, "holder");
    if (spec.kind == "modal") {
        std::vector<ModalTerm> terms;
        for (const auto& m : spec.modes) terms.push_back({m.m, make_radial_profile(m), m.phase});
        return modal_datum(std::move(terms));
    }
    ScalarDatum d = sampled_datum(read_samples_csv(spec.path), spec.path);
    return spec.project ? project_zero_circular_mean(d) : d;
}

} // namespace diskmix
