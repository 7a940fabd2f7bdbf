#pragma once

#include "diskmix/core.hpp"

#include <complex>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace diskmix {

/// Piecewise-constant function on the circle. Breakpoints run from 0 to 2pi;
/// value k is taken on the half-open interval (b_k, b_{k+1}], and the angle 0
/// is identified with 2pi.
class StepProfile {
public:
    StepProfile(std::vector<double> breakpoints, std::vector<double> values)
        : breaks_(std::move(breakpoints)), values_(std::move(values)) {
        if (breaks_.size() < 2 || values_.size() + 1 != breaks_.size())
            throw DomainError("step profile needs n+1 breakpoints for n values");
        if (breaks_.front() != 0.0 || std::abs(breaks_.back() - two_pi) > 1e-12)
            throw DomainError("step profile breakpoints must start at 0 and end at 2pi");
        breaks_.back() = two_pi;
        for (std::size_t k = 0; k + 1 < breaks_.size(); ++k)
            if (!(breaks_[k + 1] > breaks_[k])) throw DomainError("step profile breakpoints must be strictly increasing");
        primitive_.assign(breaks_.size(), 0.0);
        moment_.assign(breaks_.size(), 0.0);
        for (std::size_t k = 0; k < values_.size(); ++k) {
            const double a = breaks_[k], b = breaks_[k + 1];
            primitive_[k + 1] = primitive_[k] + values_[k] * (b - a);
            moment_[k + 1] = moment_[k] + values_[k] * 0.5 * (b * b - a * a);
        }
    }

    static StepProfile constant(double value) { return StepProfile({0.0, two_pi}, {value}); }

    /// `upper` on (0, pi], `lower` on (pi, 2pi].
    static StepProfile halves(double upper, double lower) { return StepProfile({0.0, pi, two_pi}, {upper, lower}); }

    /// Equal-width steps; value k lives on 2pi(k/n, (k+1)/n].
    static StepProfile equal_steps(std::vector<double> values) {
        const std::size_t n = values.size();
        if (n == 0) throw DomainError("equal_steps needs at least one value");
        std::vector<double> b(n + 1);
        for (std::size_t k = 0; k <= n; ++k) b[k] = two_pi * static_cast<double>(k) / static_cast<double>(n);
        return StepProfile(std::move(b), std::move(values));
    }

    [[nodiscard]] const std::vector<double>& breakpoints() const { return breaks_; }
    [[nodiscard]] const std::vector<double>& values() const { return values_; }
    [[nodiscard]] std::size_t piece_count() const { return values_.size(); }

    [[nodiscard]] std::size_t piece_index(double theta) const {
        double u = normalize_angle(theta);
        if (u == 0.0) u = two_pi;
        const auto it = std::lower_bound(breaks_.begin(), breaks_.end(), u);
        const auto idx = static_cast<std::size_t>(it - breaks_.begin());
        return idx == 0 ? 0 : std::min(idx - 1, values_.size() - 1);
    }

    double operator()(double theta) const { return values_[piece_index(theta)]; }

    [[nodiscard]] double integral() const { return primitive_.back(); }
    [[nodiscard]] double mean() const { return integral() / two_pi; }

    [[nodiscard]] double sup_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    /// F(y) = integral of f over [0, y], for y in [0, 2pi].
    [[nodiscard]] double antiderivative(double y) const {
        const std::size_t k = segment_of(y);
        return primitive_[k] + values_[k] * (y - breaks_[k]);
    }

    /// G(y) = integral of f(z) z over [0, y], for y in [0, 2pi].
    [[nodiscard]] double moment_antiderivative(double y) const {
        const std::size_t k = segment_of(y);
        return moment_[k] + values_[k] * 0.5 * (y * y - breaks_[k] * breaks_[k]);
    }

    /// Integral of the periodic extension over [a, b], any reals.
    [[nodiscard]] double integral_over(double a, double b) const { return periodic_primitive(b) - periodic_primitive(a); }

    /// (1/2pi) * integral of f(theta) exp(-i m theta).
    [[nodiscard]] std::complex<double> fourier_coefficient(int m) const {
        if (m == 0) return mean();
        using namespace std::complex_literals;
        std::complex<double> acc = 0.0;
        const double md = static_cast<double>(m);
        for (std::size_t k = 0; k < values_.size(); ++k)
            acc += values_[k] * (std::exp(-1i * md * breaks_[k + 1]) - std::exp(-1i * md * breaks_[k]));
        return acc / (-1i * md * two_pi);
    }

    [[nodiscard]] StepProfile minus_mean() const {
        std::vector<double> v = values_;
        const double mu = mean();
        for (double& x : v) x -= mu;
        return StepProfile(breaks_, std::move(v));
    }

private:
    [[nodiscard]] std::size_t segment_of(double y) const {
        const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), y);
        const auto idx = static_cast<std::size_t>(it - breaks_.begin());
        if (idx == 0) return 0;
        return std::min(idx - 1, values_.size() - 1);
    }

    [[nodiscard]] double periodic_primitive(double y) const {
        double n = std::floor(y / two_pi);
        double u = y - two_pi * n;
        if (u >= two_pi) {
            u = 0.0;
            n += 1.0;
        }
        return n * integral() + antiderivative(std::clamp(u, 0.0, two_pi));
    }

    std::vector<double> breaks_;
    std::vector<double> values_;
    std::vector<double> primitive_;
    std::vector<double> moment_;
};

using RadialProfile = std::function<double(double)>;

/// One angular mode g(r) cos(m theta + phase).
struct ModalTerm {
    int m = 1;
    RadialProfile profile;
    double phase = 0.0;
};

/// Values on a rectangular polar grid, row-major with radius outermost.
struct PolarSamples {
    std::vector<double> radii;
    std::vector<double> angles;
    std::vector<double> values;

    [[nodiscard]] double at(std::size_t ir, std::size_t jt) const { return values[ir * angles.size() + jt]; }
};

enum class DatumKind { StepRadial, Modal, Radial, Sampled };

inline const char* to_string(DatumKind k) {
    switch (k) {
    case DatumKind::StepRadial: return "step-radial";
    case DatumKind::Modal: return "modal";
    case DatumKind::Radial: return "radial-only";
    case DatumKind::Sampled: return "sampled";
    }
    return "?";
}

/// Tolerance on the mean of a profile accepted as mean-free.
inline constexpr double mean_free_tolerance = 1e-12;

/// An initial datum rho_0 supported in the closed unit disk. Immutable and
/// cheap to copy.
class ScalarDatum {
public:
    struct StepRadial {
        std::vector<double> edges; // 0 = e_0 < ... < e_n = 1, annulus k is (e_k, e_{k+1}]
        std::vector<StepProfile> profiles;
        std::optional<int> level;
    };
    struct Modal {
        std::vector<ModalTerm> terms;
    };
    struct Radial {
        RadialProfile profile;
        std::vector<double> breakpoints;
    };
    struct Sampled {
        PolarSamples samples;
        std::vector<std::vector<double>> row_primitive; // cumulative integral from angles[0]
        std::vector<double> row_total;
    };
    using Storage = std::variant<StepRadial, Modal, Radial, Sampled>;

    explicit ScalarDatum(Storage storage, std::string label = {}) {
        auto impl = std::make_shared<Impl>(Impl{std::move(storage), std::move(label), 0.0, false});
        impl_ = impl;
        impl->sup_norm = compute_sup_norm();
        impl->zero_circular_mean = compute_zero_circular_mean();
    }

    [[nodiscard]] DatumKind kind() const { return static_cast<DatumKind>(impl_->storage.index()); }
    [[nodiscard]] const std::string& label() const { return impl_->label; }
    [[nodiscard]] double sup_norm() const { return impl_->sup_norm; }
    [[nodiscard]] bool zero_circular_mean() const { return impl_->zero_circular_mean; }
    [[nodiscard]] const Storage& storage() const { return impl_->storage; }

    [[nodiscard]] const StepRadial* as_step() const { return std::get_if<StepRadial>(&impl_->storage); }
    [[nodiscard]] const Modal* as_modal() const { return std::get_if<Modal>(&impl_->storage); }
    [[nodiscard]] const Radial* as_radial() const { return std::get_if<Radial>(&impl_->storage); }
    [[nodiscard]] const Sampled* as_sampled() const { return std::get_if<Sampled>(&impl_->storage); }

    /// Index of the annulus (e_k, e_{k+1}] containing r; r = 0 maps to 0.
    [[nodiscard]] std::size_t annulus_index(double r) const {
        const auto& e = step().edges;
        const auto it = std::lower_bound(e.begin(), e.end(), r);
        const auto idx = static_cast<std::size_t>(it - e.begin());
        if (idx == 0) return 0;
        return std::min(idx - 1, step().profiles.size() - 1);
    }

    double operator()(PolarPoint p) const { return value(p.r, p.theta); }

    [[nodiscard]] double value(double r, double theta) const {
        if (r > 1.0 || r < 0.0) return 0.0;
        return std::visit(
            [&](const auto& d) -> double {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, StepRadial>) {
                    return d.profiles[annulus_index(r)](theta);
                } else if constexpr (std::is_same_v<T, Modal>) {
                    double s = 0.0;
                    for (const auto& term : d.terms) s += term.profile(r) * std::cos(term.m * theta + term.phase);
                    return s;
                } else if constexpr (std::is_same_v<T, Radial>) {
                    return d.profile(r);
                } else {
                    return sampled_value(d, r, theta);
                }
            },
            impl_->storage);
    }

    /// Integral of rho_0(r, .) over the angle interval [a, b], any reals.
    [[nodiscard]] double angular_integral(double r, double a, double b) const {
        if (r > 1.0 || r < 0.0) return 0.0;
        return std::visit(
            [&](const auto& d) -> double {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, StepRadial>) {
                    return d.profiles[annulus_index(r)].integral_over(a, b);
                } else if constexpr (std::is_same_v<T, Modal>) {
                    double s = 0.0;
                    for (const auto& term : d.terms)
                        s += term.profile(r) * (std::sin(term.m * b + term.phase) - std::sin(term.m * a + term.phase)) / term.m;
                    return s;
                } else if constexpr (std::is_same_v<T, Radial>) {
                    return d.profile(r) * (b - a);
                } else {
                    return sampled_angular_integral(d, r, a, b);
                }
            },
            impl_->storage);
    }

    /// (1/2pi) * integral of rho_0(r, theta) exp(-i m theta) d theta.
    [[nodiscard]] std::complex<double> angular_mode(double r, int m) const {
        if (r > 1.0 || r < 0.0) return 0.0;
        return std::visit(
            [&](const auto& d) -> std::complex<double> {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, StepRadial>) {
                    return d.profiles[annulus_index(r)].fourier_coefficient(m);
                } else if constexpr (std::is_same_v<T, Modal>) {
                    std::complex<double> s = 0.0;
                    for (const auto& term : d.terms) {
                        if (term.m == m) s += 0.5 * term.profile(r) * std::polar(1.0, term.phase);
                        if (term.m == -m) s += 0.5 * term.profile(r) * std::polar(1.0, -term.phase);
                    }
                    return s;
                } else if constexpr (std::is_same_v<T, Radial>) {
                    return m == 0 ? std::complex<double>(d.profile(r)) : std::complex<double>(0.0);
                } else {
                    return sampled_angular_mode(d, r, m);
                }
            },
            impl_->storage);
    }

    /// Radii in (0, 1) across which the datum may jump.
    [[nodiscard]] std::vector<double> radial_breakpoints() const {
        if (const auto* s = as_step()) return {s->edges.begin() + 1, s->edges.end() - 1};
        if (const auto* rd = as_radial()) return rd->breakpoints;
        return {};
    }

    /// Highest angular frequency present, used to size angular quadrature;
    /// zero for radial data.
    [[nodiscard]] int angular_bandwidth() const {
        if (const auto* md = as_modal()) {
            int m = 0;
            for (const auto& t : md->terms) m = std::max(m, std::abs(t.m));
            return m;
        }
        if (const auto* sd = as_sampled()) return static_cast<int>(sd->samples.angles.size() / 2);
        if (as_radial()) return 0;
        return 1;
    }

    /// True when every annulus profile integrates to zero (step data only).
    [[nodiscard]] bool profiles_mean_free() const {
        const auto* s = as_step();
        if (s == nullptr) return false;
        for (const auto& p : s->profiles)
            if (std::abs(p.mean()) > mean_free_tolerance * std::max(1.0, p.sup_abs())) return false;
        return true;
    }

private:
    struct Impl {
        Storage storage;
        std::string label;
        double sup_norm;
        bool zero_circular_mean;
    };

    [[nodiscard]] const StepRadial& step() const { return std::get<StepRadial>(impl_->storage); }

    static std::pair<std::size_t, double> radial_bracket(const PolarSamples& s, double r) {
        const auto& R = s.radii;
        if (R.size() == 1 || r <= R.front()) return {0, 0.0};
        if (r >= R.back()) return {R.size() - 2, 1.0};
        const auto it = std::upper_bound(R.begin(), R.end(), r);
        const std::size_t k = static_cast<std::size_t>(it - R.begin()) - 1;
        return {k, (r - R[k]) / (R[k + 1] - R[k])};
    }

    // Segment index and local offset for the periodic angle grid.
    static std::pair<std::size_t, double> angular_segment(const PolarSamples& s, double theta, double& turns) {
        const auto& A = s.angles;
        const double shifted = theta - A.front();
        turns = std::floor(shifted / two_pi);
        double u = shifted - two_pi * turns + A.front();
        if (u >= A.front() + two_pi) u -= two_pi, turns += 1.0;
        const auto it = std::upper_bound(A.begin(), A.end(), u);
        const std::size_t j = static_cast<std::size_t>(it - A.begin()) - 1;
        return {j, u - A[j]};
    }

    static double segment_end(const PolarSamples& s, std::size_t j) {
        return j + 1 < s.angles.size() ? s.angles[j + 1] : s.angles.front() + two_pi;
    }

    static double row_value(const PolarSamples& s, std::size_t ir, double theta) {
        double turns = 0.0;
        const auto [j, off] = angular_segment(s, theta, turns);
        const std::size_t jn = (j + 1) % s.angles.size();
        const double len = segment_end(s, j) - s.angles[j];
        const double w = off / len;
        return (1.0 - w) * s.at(ir, j) + w * s.at(ir, jn);
    }

    static double row_primitive(const Sampled& d, std::size_t ir, double y) {
        const auto& s = d.samples;
        double turns = 0.0;
        const auto [j, off] = angular_segment(s, y, turns);
        const std::size_t jn = (j + 1) % s.angles.size();
        const double len = segment_end(s, j) - s.angles[j];
        const double v0 = s.at(ir, j);
        const double v1 = s.at(ir, jn);
        const double partial = off * (v0 + 0.5 * (v1 - v0) * off / len);
        return turns * d.row_total[ir] + d.row_primitive[ir][j] + partial;
    }

    static double sampled_value(const Sampled& d, double r, double theta) {
        const auto& s = d.samples;
        const auto [k, w] = radial_bracket(s, r);
        if (s.radii.size() == 1) return row_value(s, 0, theta);
        return (1.0 - w) * row_value(s, k, theta) + w * row_value(s, k + 1, theta);
    }

    static double sampled_angular_integral(const Sampled& d, double r, double a, double b) {
        const auto& s = d.samples;
        const auto [k, w] = radial_bracket(s, r);
        auto row = [&](std::size_t ir) { return row_primitive(d, ir, b) - row_primitive(d, ir, a); };
        if (s.radii.size() == 1) return row(0);
        return (1.0 - w) * row(k) + w * row(k + 1);
    }

    static std::complex<double> sampled_angular_mode(const Sampled& d, double r, int m) {
        const auto& s = d.samples;
        const std::size_t nt = s.angles.size();
        const auto [k, w] = radial_bracket(s, r);
        std::complex<double> acc = 0.0;
        for (std::size_t j = 0; j < nt; ++j) {
            const double a = s.angles[j];
            const double b = segment_end(s, j);
            const std::size_t jn = (j + 1) % nt;
            auto val = [&](std::size_t ir, double th) {
                const double t = (th - a) / (b - a);
                return (1.0 - t) * s.at(ir, j) + t * s.at(ir, jn);
            };
            const auto& rule = gauss_legendre(4);
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const double th = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[q];
                double v = val(k, th);
                if (s.radii.size() > 1) v = (1.0 - w) * v + w * val(k + 1, th);
                acc += 0.5 * (b - a) * rule.weights[q] * v * std::polar(1.0, -m * th);
            }
        }
        return acc / two_pi;
    }

    [[nodiscard]] double compute_sup_norm() const {
        return std::visit(
            [&](const auto& d) -> double {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, StepRadial>) {
                    double m = 0.0;
                    for (const auto& p : d.profiles) m = std::max(m, p.sup_abs());
                    return m;
                } else if constexpr (std::is_same_v<T, Sampled>) {
                    double m = 0.0;
                    for (double v : d.samples.values) m = std::max(m, std::abs(v));
                    return m;
                } else {
                    // Sampled sup over a fine polar grid plus the radial breakpoints.
                    constexpr int nr = 512;
                    constexpr int nt = 1024;
                    double m = 0.0;
                    std::vector<double> radii;
                    for (int i = 0; i <= nr; ++i) radii.push_back(static_cast<double>(i) / nr);
                    if constexpr (std::is_same_v<T, Radial>) {
                        for (double b : d.breakpoints) {
                            radii.push_back(b);
                            radii.push_back(std::nextafter(b, 2.0));
                        }
                        for (double r : radii) m = std::max(m, std::abs(d.profile(r)));
                    } else {
                        for (double r : radii)
                            for (int j = 0; j < nt; ++j) m = std::max(m, std::abs(value(r, two_pi * j / nt)));
                    }
                    return m;
                }
            },
            impl_->storage);
    }

    [[nodiscard]] bool compute_zero_circular_mean() const {
        return std::visit(
            [&](const auto& d) -> bool {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, StepRadial>) {
                    return profiles_mean_free();
                } else if constexpr (std::is_same_v<T, Modal>) {
                    return true;
                } else if constexpr (std::is_same_v<T, Radial>) {
                    return impl_->sup_norm == 0.0;
                } else {
                    const double tol = 1e-10 * std::max(1.0, impl_->sup_norm);
                    for (std::size_t ir = 0; ir < d.samples.radii.size(); ++ir)
                        if (std::abs(d.row_total[ir]) > tol * two_pi) return false;
                    return true;
                }
            },
            impl_->storage);
    }

    std::shared_ptr<const Impl> impl_;
};

// ---------------------------------------------------------------------------
// Constructors

/// Piecewise-constant radial datum with 2^N equal annuli and one mean-free
/// angular profile per annulus.
inline ScalarDatum make_step_radial(int level, std::vector<StepProfile> profiles, std::string label = "step-radial") {
    if (level < 0 || level > 20) throw DomainError("step-radial level out of range");
    const std::size_t count = std::size_t{1} << level;
    if (profiles.size() != count)
        throw DomainError("step-radial datum at level " + std::to_string(level) + " needs " + std::to_string(count) +
                          " profiles, got " + std::to_string(profiles.size()));
    for (std::size_t l = 0; l < profiles.size(); ++l) {
        const auto& p = profiles[l];
        if (std::abs(p.mean()) > mean_free_tolerance * std::max(1.0, p.sup_abs()))
            throw DomainError("profile " + std::to_string(l) + " is not mean-free (mean " + std::to_string(p.mean()) + ")");
    }
    std::vector<double> edges(count + 1);
    for (std::size_t k = 0; k <= count; ++k) edges[k] = std::ldexp(static_cast<double>(k), -level);
    return ScalarDatum(ScalarDatum::StepRadial{std::move(edges), std::move(profiles), level}, std::move(label));
}

/// Piecewise-constant radial datum on arbitrary annuli; profiles need not be
/// mean-free.
inline ScalarDatum make_annular_step(std::vector<double> edges, std::vector<StepProfile> profiles, std::string label = "annular-step") {
    if (edges.size() < 2 || profiles.size() + 1 != edges.size())
        throw DomainError("annular step datum needs n+1 edges for n profiles");
    if (edges.front() != 0.0 || edges.back() != 1.0) throw DomainError("annulus edges must run from 0 to 1");
    for (std::size_t k = 0; k + 1 < edges.size(); ++k)
        if (!(edges[k + 1] > edges[k])) throw DomainError("annulus edges must be strictly increasing");
    return ScalarDatum(ScalarDatum::StepRadial{std::move(edges), std::move(profiles), std::nullopt}, std::move(label));
}

inline ScalarDatum zero_datum() { return make_step_radial(0, {StepProfile::constant(0.0)}, "zero"); }

/// +1 on the upper half disk, -1 on the lower half.
inline ScalarDatum half_disk_datum() { return make_step_radial(0, {StepProfile::halves(1.0, -1.0)}, "half-disk"); }

inline ScalarDatum radial_datum(RadialProfile profile, std::vector<double> breakpoints = {}, std::string label = "radial") {
    return ScalarDatum(ScalarDatum::Radial{std::move(profile), std::move(breakpoints)}, std::move(label));
}

/// Radius of the stationary annulus datum; balances the global mean.
inline const double stationary_annulus_radius = 1.0 / std::sqrt(2.0);

/// -1 on the inner disk, +1 on the outer annulus. Stationary under the flow.
inline ScalarDatum stationary_annulus_datum() {
    const double r0 = stationary_annulus_radius;
    return radial_datum([r0](double r) { return r <= r0 ? -1.0 : 1.0; }, {r0}, "stationary-annulus");
}

inline const double pathology_inner_radius = 1.0 / (2.0 * std::sqrt(2.0));
inline const double pathology_outer_radius = 0.5;

/// kappa on the inner disk, -kappa on the middle annulus, +-1 on the upper and
/// lower halves of the outer annulus r > 1/2.
inline ScalarDatum kappa_pathology_datum(double kappa) {
    if (!(kappa > 0.0 && kappa < 1.0)) throw DomainError("pathology accuracy must lie in (0, 1)");
    return make_annular_step({0.0, pathology_inner_radius, pathology_outer_radius, 1.0},
                             {StepProfile::constant(kappa), StepProfile::constant(-kappa), StepProfile::halves(1.0, -1.0)},
                             "kappa-pathology");
}

/// Sum of g_m(r) cos(m theta + phase_m); every m must be at least 1.
inline ScalarDatum modal_datum(std::vector<ModalTerm> terms, std::string label = "modal") {
    if (terms.empty()) return zero_datum();
    for (const auto& t : terms) {
        if (t.m < 1) throw DomainError("modal datum rejects angular mode m = " + std::to_string(t.m) + " (needs m >= 1)");
        if (!t.profile) throw DomainError("modal term without a radial profile");
    }
    return ScalarDatum(ScalarDatum::Modal{std::move(terms)}, std::move(label));
}

inline ScalarDatum sampled_datum(PolarSamples samples, std::string label = "sampled") {
    const std::size_t nr = samples.radii.size();
    const std::size_t nt = samples.angles.size();
    if (nr == 0 || nt < 2 || samples.values.size() != nr * nt) throw DomainError("sampled datum: grid shape mismatch");
    for (std::size_t k = 0; k + 1 < nr; ++k)
        if (!(samples.radii[k + 1] > samples.radii[k])) throw DomainError("sampled datum: radii must increase");
    if (samples.radii.front() < 0.0 || samples.radii.back() > 1.0) throw DomainError("sampled datum: radii outside [0, 1]");
    for (std::size_t j = 0; j + 1 < nt; ++j)
        if (!(samples.angles[j + 1] > samples.angles[j])) throw DomainError("sampled datum: angles must increase");
    if (samples.angles.front() < 0.0 || samples.angles.back() >= samples.angles.front() + two_pi)
        throw DomainError("sampled datum: angles must span less than one turn");
    ScalarDatum::Sampled d{std::move(samples), {}, {}};
    const auto& s = d.samples;
    d.row_primitive.assign(nr, std::vector<double>(nt, 0.0));
    d.row_total.assign(nr, 0.0);
    for (std::size_t ir = 0; ir < nr; ++ir) {
        double acc = 0.0;
        for (std::size_t j = 0; j < nt; ++j) {
            d.row_primitive[ir][j] = acc;
            const double end = j + 1 < nt ? s.angles[j + 1] : s.angles.front() + two_pi;
            acc += 0.5 * (end - s.angles[j]) * (s.at(ir, j) + s.at(ir, (j + 1) % nt));
        }
        d.row_total[ir] = acc;
    }
    return ScalarDatum(std::move(d), std::move(label));
}

namespace radial {

inline RadialProfile linear() {
    return [](double r) { return r; };
}

inline RadialProfile cubic_bump() {
    return [](double r) { return r * r * r * (1.0 - r); };
}

/// r |2r - 1|^alpha: Hoelder exponent alpha at r = 1/2, vanishing at the centre.
inline RadialProfile holder(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("Hoelder exponent must lie in (0, 1]");
    return [alpha](double r) { return r * std::pow(std::abs(2.0 * r - 1.0), alpha); };
}

} // namespace radial

// ---------------------------------------------------------------------------
// Zero circular mean

/// Integral of rho_0 over the circle of radius r (arc-length measure).
inline double circular_integral(const ScalarDatum& datum, double r, int angular_samples = 256) {
    if (datum.kind() == DatumKind::Modal) {
        double s = 0.0;
        for (int j = 0; j < angular_samples; ++j) s += datum.value(r, two_pi * j / angular_samples);
        return r * s * two_pi / angular_samples;
    }
    return r * datum.angular_integral(r, 0.0, two_pi);
}

struct CircularMeanCheck {
    bool holds = true;
    double max_violation = 0.0;
    double worst_radius = 0.0;
};

/// Checks that the circle integrals vanish at sampled radii. Step data are
/// summed exactly over the profile intervals; modal data use the trapezoidal
/// rule in theta.
inline CircularMeanCheck check_zero_circular_mean(const ScalarDatum& datum, int radial_samples = 64, int angular_samples = 256,
                                                  double tolerance = 1e-9) {
    if (radial_samples < 16 || angular_samples < 16) throw DomainError("circular mean check needs at least 16 samples per axis");
    CircularMeanCheck out;
    for (int k = 0; k < radial_samples; ++k) {
        const double r = (k + 0.5) / radial_samples;
        const double v = std::abs(circular_integral(datum, r, angular_samples));
        if (v > out.max_violation) {
            out.max_violation = v;
            out.worst_radius = r;
        }
    }
    out.holds = out.max_violation <= tolerance * two_pi * std::max(datum.sup_norm(), std::numeric_limits<double>::min());
    if (datum.sup_norm() == 0.0) out.holds = out.max_violation == 0.0;
    return out;
}

struct PolarGridSpec {
    int radial = 129;
    int angular = 256;
};

/// Values of `datum` on a uniform polar grid (radii from 0 to 1 inclusive,
/// angles 2pi j / n).
inline PolarSamples sample_on_grid(const ScalarDatum& datum, PolarGridSpec grid) {
    if (grid.radial < 2 || grid.angular < 2) throw DomainError("polar grid needs at least 2 points per axis");
    PolarSamples s;
    for (int i = 0; i < grid.radial; ++i) s.radii.push_back(static_cast<double>(i) / (grid.radial - 1));
    for (int j = 0; j < grid.angular; ++j) s.angles.push_back(two_pi * j / grid.angular);
    s.values.reserve(s.radii.size() * s.angles.size());
    for (double r : s.radii)
        for (double th : s.angles) s.values.push_back(datum.value(r, th));
    return s;
}

/// Subtracts the average over every circle. Step and radial data stay
/// analytic; sampled data are projected row by row; anything else is sampled
/// on `grid` first.
inline ScalarDatum project_zero_circular_mean(const ScalarDatum& datum, PolarGridSpec grid = {}) {
    if (const auto* s = datum.as_step()) {
        std::vector<StepProfile> profiles;
        for (const auto& p : s->profiles) profiles.push_back(p.minus_mean());
        return ScalarDatum(ScalarDatum::StepRadial{s->edges, std::move(profiles), s->level}, datum.label());
    }
    if (datum.as_radial() != nullptr) return zero_datum();
    if (datum.kind() == DatumKind::Modal) return datum;
    PolarSamples samples = datum.as_sampled() ? datum.as_sampled()->samples : sample_on_grid(datum, grid);
    const auto& sd = datum.as_sampled();
    const std::size_t nt = samples.angles.size();
    for (std::size_t ir = 0; ir < samples.radii.size(); ++ir) {
        // Exact mean of the periodic piecewise-linear row.
        double total = 0.0;
        if (sd != nullptr) {
            total = sd->row_total[ir];
        } else {
            for (std::size_t j = 0; j < nt; ++j) {
                const double end = j + 1 < nt ? samples.angles[j + 1] : samples.angles.front() + two_pi;
                total += 0.5 * (end - samples.angles[j]) * (samples.at(ir, j) + samples.at(ir, (j + 1) % nt));
            }
        }
        const double mu = total / two_pi;
        for (std::size_t j = 0; j < nt; ++j) samples.values[ir * nt + j] -= mu;
    }
    return sampled_datum(std::move(samples), datum.label() + "-projected");
}

// ---------------------------------------------------------------------------
// CSV exchange: header `r,theta,value`, rows ordered radius-major.

inline void write_samples_csv(std::ostream& out, const PolarSamples& s) {
    out << "r,theta,value\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < s.radii.size(); ++i)
        for (std::size_t j = 0; j < s.angles.size(); ++j) out << s.radii[i] << ',' << s.angles[j] << ',' << s.at(i, j) << '\n';
}

inline void write_samples_csv(const std::string& path, const PolarSamples& s) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    write_samples_csv(out, s);
}

inline PolarSamples read_samples_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error("samples csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "r,theta,value") throw Error("samples csv: expected header 'r,theta,value', got '" + line + "'");
    std::vector<double> rs, ts, vs;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::istringstream row(line);
        double v[3];
        char c1 = 0, c2 = 0;
        if (!(row >> v[0] >> c1 >> v[1] >> c2 >> v[2]) || c1 != ',' || c2 != ',')
            throw Error("samples csv: malformed row " + std::to_string(lineno));
        rs.push_back(v[0]);
        ts.push_back(v[1]);
        vs.push_back(v[2]);
    }
    if (rs.empty()) throw Error("samples csv: no data rows");
    PolarSamples s;
    std::size_t nt = 0;
    while (nt < rs.size() && rs[nt] == rs[0]) ++nt;
    if (rs.size() % nt != 0) throw Error("samples csv: rows do not form a rectangular grid");
    const std::size_t nr = rs.size() / nt;
    for (std::size_t j = 0; j < nt; ++j) s.angles.push_back(ts[j]);
    for (std::size_t i = 0; i < nr; ++i) {
        s.radii.push_back(rs[i * nt]);
        for (std::size_t j = 0; j < nt; ++j) {
            const std::size_t k = i * nt + j;
            if (rs[k] != s.radii.back() || ts[k] != s.angles[j])
                throw Error("samples csv: row " + std::to_string(k + 2) + " breaks the radius-major grid order");
        }
    }
    s.values = std::move(vs);
    return s;
}

inline PolarSamples read_samples_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return read_samples_csv(in);
}

} // namespace diskmix
