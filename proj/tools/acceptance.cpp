// Acceptance suite: runs criteria 1-12 and prints one PASS/FAIL line each.
//
//   diskmix_acceptance                 all criteria
//   diskmix_acceptance --criterion 4   one criterion (repeatable)
//
// Exit code 0 when every selected criterion passes, 2 otherwise.

#include "diskmix/diskmix.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace diskmix;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string num(double v) { return format_number(v); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void progress_line(const std::string& line) { std::cerr << "  " << line << '\n'; }

std::vector<std::pair<double, double>> slope_series_for(const MixingReport& rep, const std::string& metric, std::optional<double> kappa) {
    return detail::metric_series(rep, metric, kappa);
}

/// A registered experiment restricted to the meters a criterion needs.
ExperimentConfig restricted(const std::string& id, bool geometric, bool hminus1) {
    ExperimentConfig c = registered_config(id);
    c.geometric.enabled = geometric;
    c.hminus1.enabled = hminus1;
    c.tiles.enabled = false;
    c.expectations = {};
    return c;
}

Outcome slope_in_window(const std::vector<std::pair<double, double>>& series, TimeWindow w, double lo, double hi, const std::string& what) {
    std::ostringstream os;
    for (const auto& [t, v] : series) os << " (" << num(t) << ", " << num(v) << ")";
    progress_line(what + " series:" + os.str());
    std::size_t inside = 0;
    for (const auto& p : series) inside += w.contains(p.first) ? 1 : 0;
    if (inside < 4) return {false, what + ": only " + std::to_string(inside) + " finite points"};
    const DecayFit f = fit_decay_rate(series, w);
    return {f.slope >= lo && f.slope <= hi,
            what + " slope " + num(f.slope) + " over t in [" + num(f.t_min) + ", " + num(f.t_max) + "], window [" + num(lo) + ", " + num(hi) + "]"};
}

// 1 -------------------------------------------------------------------------
Outcome advection_exactness() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1);
    DatumSpec spec;
    spec.kind = "step-radial";
    spec.level = 3;
    const ScalarDatum d = build_datum(spec, 5);
    const auto& step = *d.as_step();
    double err = 0.0;
    for (int k = 0; k < 100000; ++k) {
        const double r = unit_draw(rng), th = two_pi * unit_draw(rng) - pi, t = 1000.0 * unit_draw(rng);
        const double got = evaluate_solution(d, FlowTime(t), {r, th});
        // Independent lookup: annulus by ceil(r 2^N) - 1, angle reduced by floored fmod.
        const int band = std::max(0, static_cast<int>(std::ceil(r * 8.0)) - 1);
        double y = std::fmod(th - two_pi * t * r, two_pi);
        if (y < 0.0) y += two_pi;
        const double want = step.profiles[band](y);
        err = std::max(err, std::abs(got - want));
    }
    const double secs = seconds_since(t0);
    return {err <= 1e-12 && secs < 1.0, "max error " + num(err) + " over 1e5 points (limit 1e-12), " + num(secs) + " s (limit 1 s)"};
}

// 2 -------------------------------------------------------------------------
Outcome oracle_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        DatumSpec spec;
        spec.kind = "step-radial";
        spec.level = static_cast<int>(rng() % 4);
        const ScalarDatum d = build_datum(spec, rng());
        const int M = 1 + static_cast<int>(rng() % 5);
        const auto tiles = build_tiling(M);
        const auto& q = tiles[rng() % tiles.size()];
        const FlowTime t(std::array<double, 3>{0.5, 5.0, 50.0}[k % 3]);
        const double exact = exact_tile_average(d, q, t);
        const double quad = tile_average_quadrature(FieldSnapshot(d, t), q);
        worst = std::max(worst, std::abs(exact - quad) / d.sup_norm());
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-8 && secs < 10.0,
            "max |exact - quadrature| / sup = " + num(worst) + " over 200 cases (limit 1e-8), " + num(secs) + " s (limit 10 s)"};
}

// 3 -------------------------------------------------------------------------
Outcome neumann_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    struct Eigen {
        int m;
        double root;
    };
    const Eigen cases[] = {{1, 1.8411837813406595}, {2, 3.0542369282271404}, {1, 5.3314427735250325}};
    double worst = 0.0;
    std::string detail;
    for (const auto& e : cases) {
        const auto g = [e](double r) { return std::cyl_bessel_j(static_cast<double>(e.m), e.root * r); };
        const ScalarDatum d = modal_datum({{e.m, g, 0.0}}, "neumann-eigenfunction");
        const double l2 = std::sqrt(pi * integrate_gauss([&](double r) { return g(r) * g(r) * r; }, 0.0, 1.0, 96));
        HMinusOneOptions opt;
        opt.radial_resolution = 512;
        const double h = h_minus_one_norm(d, FlowTime(0.0), opt).norm_value;
        const double rel = std::abs(h - l2 / e.root) / (l2 / e.root);
        worst = std::max(worst, rel);
        detail += " m=" + std::to_string(e.m) + ":" + num(rel);
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-4 && secs < 5.0, "relative errors" + detail + " (limit 1e-4), " + num(secs) + " s (limit 5 s)"};
}

// 4 -------------------------------------------------------------------------
Outcome geometric_rate_half_disk() {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig c = restricted("E1", true, false);
    c.time_grid.t_max = 256.0;
    const auto rep = run_experiment(c, progress_line);
    auto out = slope_in_window(slope_series_for(rep, "geometric", 0.2), {8.0, 256.0}, -1.25, -0.80, "eps_upper");
    const double secs = seconds_since(t0);
    out.passed = out.passed && secs <= 600.0;
    out.detail += ", " + num(secs) + " s (limit 600 s)";
    return out;
}

// 5 -------------------------------------------------------------------------
Outcome functional_rate_half_disk() {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig c = restricted("E1", false, true);
    c.time_grid.t_min = 16.0;
    c.time_grid.t_max = 1024.0;
    const auto rep = run_experiment(c, progress_line);
    auto out = slope_in_window(slope_series_for(rep, "hminus1", std::nullopt), {16.0, 1024.0}, -0.65, -0.40, "H^-1 norm");
    const double secs = seconds_since(t0);
    out.passed = out.passed && secs <= 900.0;
    out.detail += ", " + num(secs) + " s (limit 900 s)";
    return out;
}

// 6 -------------------------------------------------------------------------
Outcome rate_independent_of_level() {
    std::vector<double> slopes;
    std::string detail;
    for (int N = 1; N <= 3; ++N) {
        const std::string id = "E2-N" + std::to_string(N);
        const auto rep = run_experiment(restricted(id, true, false), progress_line);
        const auto series = slope_series_for(rep, "geometric", 0.2);
        if (series.size() < 4) return {false, id + ": fewer than 4 finite eps_upper values"};
        // Per-level threshold: first t from which the trailing fit shows the 1/t rate.
        const TimeWindow all{series.front().first, series.back().first};
        const auto entry = earliest_window_entry(series, all, -1.25, -0.80);
        const TimeWindow w{entry.value_or(all.lo), all.hi};
        const DecayFit f = fit_decay_rate(series, w);
        slopes.push_back(f.slope);
        detail += " N=" + std::to_string(N) + ": " + num(f.slope) + " from t=" + num(w.lo) + (entry ? "" : " (rate window never entered)") + ";";
    }
    double spread = 0.0;
    for (double a : slopes)
        for (double b : slopes) spread = std::max(spread, std::abs(a - b));
    return {spread <= 0.2, "slopes" + detail + " max pairwise difference " + num(spread) + " (limit 0.2)"};
}

// 7 -------------------------------------------------------------------------
Outcome geometric_rate_modal() {
    const auto rep = run_experiment(restricted("E3", true, false), progress_line);
    return slope_in_window(slope_series_for(rep, "geometric", 0.2), {}, -1.25, -0.75, "eps_upper");
}

// 8 -------------------------------------------------------------------------
Outcome stationary_counterexample() {
    const ScalarDatum d = stationary_annulus_datum();
    const FieldSnapshot s0(d, FlowTime(0.0)), s1(d, FlowTime(256.0));
    const auto g0 = geometric_scale(s0, 0.2), g1 = geometric_scale(s1, 0.2);
    const double h0 = h_minus_one_norm(s0).norm_value, h1 = h_minus_one_norm(s1).norm_value;
    const double r0 = stationary_annulus_radius;
    const auto bump = [r0](double x, double y) {
        const double s = (x * x + y * y) / (r0 * r0);
        return s < 1.0 ? (1.0 - s) * (1.0 - s) : 0.0;
    };
    double smallest = std::numeric_limits<double>::infinity();
    std::string pairings;
    for (double t : {0.0, 50.0, 256.0}) {
        const double p = weak_pairing(FieldSnapshot(d, FlowTime(t)), bump);
        smallest = std::min(smallest, std::abs(p));
        pairings += " " + num(p);
    }
    const double geo_gap = g0.epsilon_upper == g1.epsilon_upper ? 0.0 : std::abs(g0.epsilon_upper - g1.epsilon_upper);
    const double h_gap = std::abs(h0 - h1);
    // The pairing with the bump is -pi r0^2 / 3 at every time.
    const bool ok = geo_gap <= 1e-10 && h_gap <= 1e-10 && smallest >= 0.5 * pi * r0 * r0 / 3.0;
    return {ok, "eps_upper " + num(g0.epsilon_upper) + " vs " + num(g1.epsilon_upper) + ", H^-1 " + num(h0) + " vs " + num(h1) +
                    " (gap " + num(h_gap) + "), pairings at t = 0, 50, 256:" + pairings};
}

// 9 -------------------------------------------------------------------------
Outcome accuracy_pathology() {
    ExperimentConfig c = registered_config("E6");
    c.hminus1.enabled = false;
    c.tiles.enabled = false;
    const auto rep = run_experiment(c, progress_line);
    bool ok = !rep.checks.empty();
    std::string detail;
    for (const auto& ch : rep.checks) {
        ok = ok && ch.passed;
        detail += std::string(detail.empty() ? "" : "; ") + (ch.passed ? "pass " : "fail ") + ch.name + " (" + ch.detail + ")";
    }
    return {ok, detail};
}

// 10 ------------------------------------------------------------------------
Outcome inequality_suites() {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;

    // Poincare: convex-domain L1 constant diam / 2 with diam <= c 2^-M gives c / 2.
    const double poincare_ceiling = 0.5 * tile_diameter_c;
    const std::vector<TestFunction> xis = {
        {[](double x, double) { return x; }, [](double, double) { return CartesianVector{1.0, 0.0}; }},
        {[](double x, double y) { return x * x - y * y; }, [](double x, double y) { return CartesianVector{2.0 * x, -2.0 * y}; }},
        {[](double x, double y) { return std::sin(3.0 * x) * std::cos(2.0 * y); },
         [](double x, double y) { return CartesianVector{3.0 * std::cos(3.0 * x) * std::cos(2.0 * y), -2.0 * std::sin(3.0 * x) * std::sin(2.0 * y)}; }},
        {[](double x, double y) { return std::exp(x) * y; }, [](double x, double y) { return CartesianVector{std::exp(x) * y, std::exp(x)}; }},
        {[](double x, double y) { return std::atan2(y, x + 2.0); },
         [](double x, double y) {
             const double d = (x + 2.0) * (x + 2.0) + y * y;
             return CartesianVector{-y / d, (x + 2.0) / d};
         }},
    };
    double poincare = 0.0;
    for (int M = 2; M <= 6; ++M)
        for (const auto& xi : xis) poincare = std::max(poincare, poincare_ratio(xi, M).max_ratio);
    const bool poincare_ok = poincare <= poincare_ceiling;
    detail += "Poincare max ratio " + num(poincare) + " (ceiling " + num(poincare_ceiling) + ")";
    ok = ok && poincare_ok;

    // Tile hypothesis at level M implies the ball bound at eps = 8 c 2^-M / kappa.
    std::mt19937_64 rng(10);
    int qualifying = 0, violations = 0;
    for (int k = 0; k < 50; ++k) {
        DatumSpec spec;
        spec.kind = "step-radial";
        spec.level = static_cast<int>(rng() % 3);
        const ScalarDatum d = build_datum(spec, rng());
        const double t = 200.0 + 800.0 * unit_draw(rng);
        const double kappa = 0.3 + 0.6 * unit_draw(rng);
        const FieldSnapshot snap(d, FlowTime(t));
        const auto bound = tile_upper_bound_scale(snap, kappa, 2, 8);
        if (!bound.level) continue;
        ++qualifying;
        const double eps = bound.epsilon_bound;
        if (eps >= 2.0) continue; // a ball of radius 2 around any centre of interest averages a mean-free field to 0
        const auto scan = max_ball_average(snap, eps, {}, std::nullopt);
        if (scan.max_abs_average > kappa * snap.sup_norm() * (1.0 + 1e-9)) ++violations;
    }
    detail += "; tile-to-ball implication: " + std::to_string(violations) + " violations over " + std::to_string(qualifying) +
              " qualifying snapshots of 50";
    ok = ok && violations == 0 && qualifying > 0;

    // H^-1 <= C sup 2^-M under the tile hypothesis; ceiling sqrt(pi) (C_P + 2 / j'_{1,1}).
    const double mpc2_ceiling = std::sqrt(pi) * (poincare_ceiling + 2.0 / 1.8411837813406595);
    double mpc2 = 0.0;
    int mpc2_cases = 0;
    std::mt19937_64 rng2(11);
    std::vector<ScalarDatum> data{half_disk_datum()};
    for (int k = 0; k < 3; ++k) {
        DatumSpec spec;
        spec.kind = "step-radial";
        spec.level = k;
        data.push_back(build_datum(spec, rng2()));
    }
    for (const auto& d : data)
        for (double t : {16.0, 64.0, 256.0})
            for (int M = 2; M <= 4; ++M) {
                const auto rep = mpc2_bound_check(FieldSnapshot(d, FlowTime(t)), M);
                if (!rep.hypothesis_holds) continue;
                ++mpc2_cases;
                mpc2 = std::max(mpc2, rep.empirical_constant);
            }
    detail += "; mpc2 max C " + num(mpc2) + " over " + std::to_string(mpc2_cases) + " cases (ceiling " + num(mpc2_ceiling) + ")";
    ok = ok && mpc2_cases > 0 && mpc2 <= mpc2_ceiling;

    const double secs = seconds_since(t0);
    ok = ok && secs < 300.0;
    detail += ", " + num(secs) + " s (limit 300 s)";
    return {ok, detail};
}

// 11 ------------------------------------------------------------------------
Outcome lipschitz_growth() {
    std::vector<std::pair<double, double>> series;
    for (double t : {10.0, 20.0, 40.0, 80.0}) series.emplace_back(t, lipschitz_estimate(FlowTime(t)));
    return slope_in_window(series, {}, 0.9, 1.1, "Lipschitz estimate");
}

// 12 ------------------------------------------------------------------------
Outcome approximation_rates() {
    bool ok = true;
    std::string detail;
    for (double alpha : {0.5, 1.0}) {
        const ScalarDatum d = modal_datum({{1, radial::holder(alpha), 0.0}}, "holder");
        std::vector<std::pair<double, double>> l1, linf;
        for (int N = 2; N <= 6; ++N) {
            const auto e = approximation_error(d, N);
            l1.emplace_back(std::ldexp(1.0, N), e.l1);
            linf.emplace_back(std::ldexp(1.0, N), e.linf);
        }
        // log of 2^N against log of the error: slope per unit of N in log2.
        const auto a = slope_in_window(l1, {}, -10.0, -alpha + 0.2, "L1 alpha=" + num(alpha));
        const auto b = slope_in_window(linf, {}, -10.0, -alpha + 0.2, "Linf alpha=" + num(alpha));
        ok = ok && a.passed && b.passed;
        detail += std::string(detail.empty() ? "" : "; ") + a.detail + "; " + b.detail;
    }
    return {ok, detail};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria for the disk mixing diagnostics"};
    std::vector<int> selected;
    app.add_option("--criterion", selected, "Criterion number 1-12 (repeatable; default all)")->check(CLI::Range(1, 12));
    CLI11_PARSE(app, argc, argv);

    const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria = {
        {1, {"advection exactness", advection_exactness}},
        {2, {"exact tile averages match quadrature", oracle_equivalence}},
        {3, {"H^-1 solver on Neumann eigenfunctions", neumann_oracle}},
        {4, {"geometric rate, half-disk", geometric_rate_half_disk}},
        {5, {"H^-1 rate, half-disk", functional_rate_half_disk}},
        {6, {"geometric rate independent of level", rate_independent_of_level}},
        {7, {"geometric rate, continuous modal datum", geometric_rate_modal}},
        {8, {"stationary annulus does not mix", stationary_counterexample}},
        {9, {"accuracy pathology", accuracy_pathology}},
        {10, {"inequality suites", inequality_suites}},
        {11, {"Lipschitz growth", lipschitz_growth}},
        {12, {"approximation rates", approximation_rates}},
    };
    if (selected.empty())
        for (const auto& [k, v] : criteria) selected.push_back(k);

    bool all = true;
    for (int k : selected) {
        const auto& [name, fn] = criteria.at(k);
        std::cerr << "criterion " << k << ": " << name << '\n';
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << k << " (" << name << "): " << o.detail << std::endl;
        all = all && o.passed;
    }
    return all ? 0 : 2;
}
