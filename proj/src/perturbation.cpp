// Copyright 2026-present the lincoup authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lincoup/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "lincoup/numerics.hpp"

namespace lincoup {

std::string_view interpretation_name(Interpretation interp) {
    return interp == Interpretation::X1Density ? "x1-density" : "z-density";
}

Interpretation parse_interpretation(std::string_view name) {
    if (name == "z" || name == "z-density") return Interpretation::ZDensity;
    if (name == "x1" || name == "x1-density") return Interpretation::X1Density;
    throw std::invalid_argument("unknown interpretation '" + std::string(name) +
                                "' (expected z, z-density, x1 or x1-density)");
}

PerturbationSpec derive_spec(const MonotoneCurve& curve, double a, double b, double delta,
                             double epsilon, double nu) {
    if (!(a > 0.0) || !(b > a)) throw std::invalid_argument("derive_spec: need 0 < a < b");
    if (!(delta > 0.0)) throw std::invalid_argument("derive_spec: delta must be > 0");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("derive_spec: epsilon must be >= 0");
    if (!(nu > 0.0)) throw std::invalid_argument("derive_spec: nu must be > 0");

    PerturbationSpec spec;
    spec.a = a;
    spec.b = b;
    spec.delta = delta;
    spec.epsilon = epsilon;
    spec.nu = nu;
    spec.phi_a = curve.phi(a);
    spec.phi_b = curve.phi(b);
    spec.s = a * spec.phi_a;
    spec.t = b * spec.phi_b;

    std::ostringstream os;
    os.precision(17);
    if (!(spec.window_lo() > spec.s)) {
        os << "delta too large: t - 3 delta = " << spec.window_lo() << " <= s = " << spec.s;
        throw InfeasibleSpecError(os.str());
    }
    spec.b_prime = solve_rho(curve, spec.window_lo());
    spec.phi_b_prime = curve.phi(spec.b_prime);
    spec.d = spec.phi_b_prime - spec.phi_a;
    const double rise = spec.phi_b - spec.phi_b_prime;
    if (!(rise < spec.d)) {
        os << "delta too large: phi(b) - phi(b') = " << rise << " >= d = " << spec.d;
        throw InfeasibleSpecError(os.str());
    }
    spec.phi_a_prime = spec.phi_a + rise;
    spec.a_prime = curve.inverse(spec.phi_a_prime);
    if (!(spec.a_prime < spec.b_prime)) {
        os << "arcs overlap: a' = " << spec.a_prime << " >= b' = " << spec.b_prime;
        throw InfeasibleSpecError(os.str());
    }
    return spec;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

// base(z): density of Q along the curve in the chosen reading.
// transfer(z): f2 at the mu3 point matched to z, divided by the x2-density
// per unit tau there.
double base_factor(const ProductDensityModel& p, Interpretation interp, double z) {
    return interp == Interpretation::ZDensity ? p.density(z) : p.f1().pdf(p.rho(z));
}

double transfer_factor(const ProductDensityModel& p, const PerturbationSpec& spec, Interpretation interp,
                       double z) {
    const double x = p.rho(z);
    const double y = p.curve().phi(x) - spec.d;
    const double slope = p.curve().phi_prime(x);
    const double f2 = p.f2().pdf(y);
    return interp == Interpretation::ZDensity ? f2 * slope * p.rho_derivative(z) : f2 * slope;
}

std::size_t scan_points(const PerturbationSpec& spec, double points_per_period, double width) {
    const double periods = width * spec.nu / kPi;
    const double n = std::ceil(points_per_period * periods);
    return static_cast<std::size_t>(std::clamp(n, 2000.0, 4.0e6));
}

// Golden-section refinement of a maximum located at grid index i.
template <class F>
numerics::Extremum refine_max(F&& f, const std::vector<double>& grid, std::size_t i) {
    const double lo = grid[i == 0 ? 0 : i - 1];
    const double hi = grid[std::min(i + 1, grid.size() - 1)];
    const double tol = 1e-13 * std::max(1.0, std::fabs(grid[i]));
    auto neg = [&](double z) { return -f(z); };
    numerics::Extremum e = numerics::golden_minimize(neg, lo, hi, tol);
    e.value = -e.value;
    const double at_grid = f(grid[i]);
    if (at_grid > e.value) return {grid[i], at_grid};
    return e;
}

}  // namespace

FeasibilityReport validate_spec(const PerturbationSpec& spec, const ProductDensityModel& product,
                                Interpretation interp) {
    FeasibilityReport report;
    report.epsilon = spec.epsilon;
    const BumpFunction shape(spec.t, spec.delta, 1.0, spec.nu);
    const double lo = spec.window_lo();
    const double hi = spec.t;

    // The factors are smooth, so they are tabulated coarsely in log space and
    // only the oscillating shape is scanned at full resolution.
    constexpr std::size_t kCoarse = 513;
    const std::vector<double> coarse = numerics::lin_space(lo, hi, kCoarse);
    std::vector<double> lb(kCoarse), lt(kCoarse);
    for (std::size_t i = 0; i < kCoarse; ++i) {
        lb[i] = std::log(base_factor(product, interp, coarse[i]));
        lt[i] = std::log(transfer_factor(product, spec, interp, coarse[i]));
    }
    const numerics::MonotoneCubic log_base(coarse, lb);
    const numerics::MonotoneCubic log_transfer(coarse, lt);

    // Uniform bounds: minima of the smooth factors themselves.
    auto base_exact = [&](double z) { return base_factor(product, interp, z); };
    auto transfer_exact = [&](double z) { return transfer_factor(product, spec, interp, z); };
    const auto min_index = [](const std::vector<double>& v) {
        return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
    };
    const numerics::Extremum base_min = refine_max(
        [&](double z) { return 1.0 / base_exact(z); }, coarse, min_index(lb));
    const numerics::Extremum transfer_min = refine_max(
        [&](double z) { return 1.0 / transfer_exact(z); }, coarse, min_index(lt));
    report.min_q_window = 1.0 / base_min.value;
    report.argmin_q_window = base_min.x;
    report.epsilon_max_uniform = std::min(report.min_q_window, 1.0 / transfer_min.value);

    // nu-dependent bounds: sup of shape / factor over the window.
    const std::vector<double> fine = numerics::lin_space(lo, hi, scan_points(spec, 32.0, hi - lo));
    std::size_t best_curve = 0, best_transfer = 0;
    double r_curve = -1.0, r_transfer = -1.0;
    for (std::size_t i = 0; i < fine.size(); ++i) {
        const double sh = shape.shape(fine[i]);
        if (sh == 0.0) continue;
        const double rc = sh * std::exp(-log_base(fine[i]));
        const double rt = sh * std::exp(-log_transfer(fine[i]));
        if (rc > r_curve) {
            r_curve = rc;
            best_curve = i;
        }
        if (rt > r_transfer) {
            r_transfer = rt;
            best_transfer = i;
        }
    }
    const auto sup_curve = refine_max([&](double z) { return shape.shape(z) / base_exact(z); }, fine, best_curve);
    const auto sup_transfer =
        refine_max([&](double z) { return shape.shape(z) / transfer_exact(z); }, fine, best_transfer);
    report.epsilon_max_curve = sup_curve.value > 0.0 ? 1.0 / sup_curve.value : numerics::kInf;
    report.epsilon_max_transfer = sup_transfer.value > 0.0 ? 1.0 / sup_transfer.value : numerics::kInf;
    report.epsilon_max = std::min(report.epsilon_max_curve, report.epsilon_max_transfer);
    report.feasible = spec.epsilon == 0.0 || spec.epsilon <= report.epsilon_max;
    return report;
}

// ---------------------------------------------------------------------------

PerturbedMeasure::PerturbedMeasure(const PerturbationSpec& spec,
                                   std::shared_ptr<const ProductDensityModel> product, Interpretation interp)
    : spec_(spec), product_(std::move(product)), interp_(interp), bump_(spec) {
    if (!product_) throw std::invalid_argument("PerturbedMeasure: null product model");
    feasibility_ = validate_spec(spec_, *product_, interp_);
    if (!feasibility_.feasible) {
        std::ostringstream os;
        os.precision(6);
        os << "epsilon = " << spec_.epsilon << " exceeds the positivity bound " << feasibility_.epsilon_max
           << " (curve " << feasibility_.epsilon_max_curve << ", transfer "
           << feasibility_.epsilon_max_transfer << ")";
        throw InfeasibleSpecError(os.str());
    }

    mu3_hi_ = spec_.a_prime * spec_.phi_a_prime;
    down_lo_ = spec_.b_prime * spec_.phi_a;
    down_hi_ = spec_.b * spec_.phi_a_prime;
    up_lo_ = spec_.a * spec_.phi_b_prime;
    up_hi_ = spec_.a_prime * spec_.phi_b;

    const double lo = spec_.window_lo();
    const double hi = spec_.t;
    const double periods = (hi - lo) * spec_.nu / kPi;
    const std::size_t cells =
        static_cast<std::size_t>(std::clamp(std::ceil(4.0 * periods), 4096.0, 16.0 * 1024 * 1024));
    nodes_ = numerics::lin_space(lo, hi, cells + 1);
    cum_.assign(cells + 1, 0.0);
    if (spec_.epsilon > 0.0) {
        const auto& rule = numerics::gauss_legendre(8);
        auto dens = [this](double z) { return removed_density(z); };
        for (std::size_t i = 0; i < cells; ++i) {
            cum_[i + 1] = cum_[i] + numerics::gauss_legendre_panel(dens, nodes_[i], nodes_[i + 1], rule);
        }
    }
    mass_ = cum_.back();
}

double PerturbedMeasure::removed_density(double z) const {
    const double tau = bump_.value(z);
    if (tau == 0.0) return 0.0;
    return interp_ == Interpretation::ZDensity ? tau : tau * product_->rho_derivative(z);
}

double PerturbedMeasure::cell_integral(std::size_t cell, double z) const {
    if (!(z > nodes_[cell])) return 0.0;
    auto dens = [this](double w) { return removed_density(w); };
    return numerics::gauss_legendre_panel(dens, nodes_[cell], z, numerics::gauss_legendre(8));
}

double PerturbedMeasure::cumulative(double z) const {
    if (mass_ == 0.0 || !(z > nodes_.front())) return 0.0;
    if (!(z < nodes_.back())) return mass_;
    const double h = (nodes_.back() - nodes_.front()) / static_cast<double>(nodes_.size() - 1);
    std::size_t i = static_cast<std::size_t>((z - nodes_.front()) / h);
    i = std::min(i, nodes_.size() - 2);
    // lin_space rounding can put z just left of nodes_[i].
    while (i > 0 && z < nodes_[i]) --i;
    while (i + 2 < nodes_.size() && z >= nodes_[i + 1]) ++i;
    return std::min(cum_[i] + cell_integral(i, z), mass_);
}

double PerturbedMeasure::inverse_cumulative(double m) const {
    if (!(m > 0.0)) return nodes_.front();
    if (!(m < mass_)) return nodes_.back();
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), m);
    const std::size_t i =
        std::min(static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cum_.begin() - 1, 0)), nodes_.size() - 2);
    const double lo = nodes_[i], hi = nodes_[i + 1];
    if (cum_[i + 1] == cum_[i]) return lo;
    auto f = [&](double z) { return cum_[i] + cell_integral(i, z) - m; };
    const double flo = cum_[i] - m;
    const double fhi = cum_[i + 1] - m;
    if (!(fhi > 0.0)) return hi;
    return numerics::brent(f, lo, hi, flo, fhi);
}

double PerturbedMeasure::w1(double x1) const {
    if (!(x1 >= spec_.b_prime && x1 <= spec_.b)) return 0.0;
    const MonotoneCurve& c = product_->curve();
    const double y = c.phi(x1);
    const double tau = bump_.value(x1 * y);
    if (tau == 0.0) return 0.0;
    return interp_ == Interpretation::ZDensity ? tau * (y + x1 * c.phi_prime(x1)) : tau;
}

double PerturbedMeasure::w2(double x1) const { return w1(x1); }

double PerturbedMeasure::h1(double x2) const {
    if (!(x2 >= spec_.phi_b_prime && x2 <= spec_.phi_b)) return 0.0;
    const MonotoneCurve& c = product_->curve();
    const double x = c.inverse(x2);
    const double w = w1(x);
    return w == 0.0 ? 0.0 : w / c.phi_prime(x);
}

double PerturbedMeasure::h2(double x2) const {
    if (!(x2 >= spec_.phi_a && x2 <= spec_.phi_a_prime)) return 0.0;
    return h1(x2 + spec_.d);
}

double PerturbedMeasure::h3(double x2) const { return h2(x2); }

double PerturbedMeasure::h4(double x2) const {
    if (!(x2 >= spec_.phi_b_prime && x2 <= spec_.phi_b)) return 0.0;
    return h3(x2 - spec_.d);
}

double PerturbedMeasure::w3(double x1) const {
    if (!(x1 >= spec_.a && x1 <= spec_.a_prime)) return 0.0;
    const MonotoneCurve& c = product_->curve();
    const double h = h3(c.phi(x1));
    return h == 0.0 ? 0.0 : h * c.phi_prime(x1);
}

double PerturbedMeasure::w4(double x1) const { return w3(x1); }

double PerturbedMeasure::x1_projection(double x1) const {
    return product_->f1().pdf(x1) - w1(x1) + w2(x1) - w3(x1) + w4(x1);
}

double PerturbedMeasure::x2_projection(double x2) const {
    return product_->f2().pdf(x2) - h1(x2) + h2(x2) - h3(x2) + h4(x2);
}

double PerturbedMeasure::transfer_partner(double x) const {
    const MonotoneCurve& c = product_->curve();
    return c.inverse(c.phi(x) - spec_.d);
}

std::optional<double> PerturbedMeasure::solve_shifted(double z, bool down) const {
    const double lo = down ? spec_.b_prime : spec_.a;
    const double hi = down ? spec_.b : spec_.a_prime;
    const double zlo = down ? down_lo_ : up_lo_;
    const double zhi = down ? down_hi_ : up_hi_;
    if (!(z >= zlo && z <= zhi)) return std::nullopt;
    const MonotoneCurve& c = product_->curve();
    const double shift = down ? -spec_.d : spec_.d;
    auto f = [&](double x) { return x * (c.phi(x) + shift) - z; };
    return numerics::brent(f, lo, hi, zlo - z, zhi - z);
}

double PerturbedMeasure::shifted_density(double z, bool down) const {
    if (mass_ == 0.0) return 0.0;
    const auto x = solve_shifted(z, down);
    if (!x) return 0.0;
    const double w = down ? w2(*x) : w4(*x);
    if (w == 0.0) return 0.0;
    const double slope = product_->curve().phi_prime(*x);
    return w * *x / (z + slope * *x * *x);
}

double PerturbedMeasure::mu3_density(double z) const {
    if (mass_ == 0.0 || !(z >= spec_.s && z <= mu3_hi_)) return 0.0;
    const double x = product_->rho(z);
    const double w = w3(x);
    return w == 0.0 ? 0.0 : w * product_->rho_derivative(z);
}

double PerturbedMeasure::density_change(double z) const {
    return -removed_density(z) - mu3_density(z) + shifted_down(z) + shifted_up(z);
}

double PerturbedMeasure::term_derivative(double (PerturbedMeasure::*term)(double) const, double z, double lo,
                                         double hi) const {
    if (mass_ == 0.0 || !(z > lo && z < hi)) return 0.0;
    // The arc terms oscillate at a rate comparable to nu; the step resolves that.
    const double h = std::min(1e-3 * (hi - lo), 1e-3 / spec_.nu);
    auto f = [&](double w) { return (this->*term)(w); };
    return numerics::derivative_five_point_richardson(f, z, h);
}

double PerturbedMeasure::density_change_derivative(double z) const {
    double removed = 0.0;
    const double tau_prime = bump_.derivative(z);
    if (interp_ == Interpretation::ZDensity) {
        removed = tau_prime;
    } else {
        const double tau = bump_.value(z);
        if (tau != 0.0 || tau_prime != 0.0) {
            removed = tau_prime * product_->rho_derivative(z) + tau * product_->rho_second_derivative(z);
        }
    }
    return -removed - term_derivative(&PerturbedMeasure::mu3_density, z, spec_.s, mu3_hi_) +
           term_derivative(&PerturbedMeasure::shifted_down, z, down_lo_, down_hi_) +
           term_derivative(&PerturbedMeasure::shifted_up, z, up_lo_, up_hi_);
}

double PerturbedMeasure::density_derivative(double z) const {
    return product_->density_derivative(z) + density_change_derivative(z);
}

double PerturbedMeasure::lin(double z) const {
    const double dg = density_change_derivative(z);
    const double g = density_change(z);
    if (dg == 0.0 && g == 0.0) return product_->lin(z);
    return -z * (product_->density_derivative(z) + dg) / (product_->density(z) + g);
}

double PerturbedMeasure::cdf_change(double z) const {
    if (mass_ == 0.0) return 0.0;
    const MonotoneCurve& c = product_->curve();
    // Mass of mu1 on the part of l1 matched to the transfer-arc point x.
    auto matched = [&](double x) {
        const double xbar = c.inverse(c.phi(x) + spec_.d);
        return cumulative(xbar * c.phi(xbar));
    };
    const double m1 = cumulative(z);

    double m3 = 0.0;
    if (z >= mu3_hi_) {
        m3 = mass_;
    } else if (z > spec_.s) {
        m3 = matched(product_->rho(z));
    }

    double m2 = 0.0;
    if (z >= down_hi_) {
        m2 = mass_;
    } else if (z > down_lo_) {
        const double x = *solve_shifted(z, true);
        m2 = cumulative(x * c.phi(x));
    }

    double m4 = 0.0;
    if (z >= up_hi_) {
        m4 = mass_;
    } else if (z > up_lo_) {
        m4 = matched(*solve_shifted(z, false));
    }
    return -m1 - m3 + m2 + m4;
}

ArcIntersections PerturbedMeasure::arc_hyperbola_intersection(double z) const {
    ArcIntersections out;
    const MonotoneCurve& c = product_->curve();
    if (z >= spec_.window_lo() && z <= spec_.t) {
        const double x = std::clamp(product_->rho(z), spec_.b_prime, spec_.b);
        out.l1 = {true, x, c.phi(x)};
    }
    if (z >= spec_.s && z <= mu3_hi_) {
        const double x = std::clamp(product_->rho(z), spec_.a, spec_.a_prime);
        out.l3 = {true, x, c.phi(x)};
    }
    if (const auto x = solve_shifted(z, true)) out.l2 = {true, *x, c.phi(*x) - spec_.d};
    if (const auto x = solve_shifted(z, false)) out.l4 = {true, *x, c.phi(*x) + spec_.d};
    return out;
}

// ---------------------------------------------------------------------------

OscillationExtrema oscillation_extrema(const PerturbedMeasure& measure, double points_per_period) {
    const PerturbationSpec& spec = measure.spec();
    const double lo = spec.plateau_lo();
    const double hi = spec.plateau_hi();
    const double periods = (hi - lo) * spec.nu / kPi;
    const std::size_t n = static_cast<std::size_t>(std::max(16.0, std::ceil(points_per_period * periods))) + 1;
    const std::vector<double> grid = numerics::lin_space(lo, hi, n);

    OscillationExtrema out;
    out.grid_points = n;
    out.undersampled = points_per_period < 10.0;
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = measure.lin(grid[i]);
    const std::size_t imin = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    const std::size_t imax = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());

    auto lin = [&](double z) { return measure.lin(z); };
    const auto top = refine_max(lin, grid, imax);
    const auto bottom = refine_max([&](double z) { return -measure.lin(z); }, grid, imin);
    out.max = top.value;
    out.argmax = top.x;
    out.min = -bottom.value;
    out.argmin = bottom.x;
    return out;
}

}  // namespace lincoup
