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

#pragma once

// Mass surgery on one rectangle of the coupling curve.
//
// For a rectangle [a, b] x [phi(a), phi(b)] with s = a phi(a), t = b phi(b),
// a bump tau supported on [t - 3 delta, t] is removed from the curve along the
// arc l1 (x1 in [b', b], b' = rho(t - 3 delta)) and put back d = phi(b') - phi(a)
// lower on l2. To keep the x2 marginal, a matching mass is removed from the
// arc l3 (x1 in [a, a']) and put back d higher on l4:
//
//     Q~ = Q - mu1 + mu2 - mu3 + mu4.
//
// mu1 and mu2 share their x1 projection, mu3 and mu4 theirs, while
// proj2(mu2) = proj2(mu3) and proj2(mu4) = proj2(mu1), so both marginals of Q
// survive unchanged. The product density does not: on the plateau of tau it
// loses tau, and the derivative of the loss carries a factor nu.

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lincoup/coupling_curve.hpp"
#include "lincoup/product_density.hpp"

namespace lincoup {

/// How the density of mu1 is read. ZDensity: tau is the density of mu1's
/// image under (x1, x2) -> x1 x2, so g~ = g - tau on the window. X1Density:
/// tau(x1 phi(x1)) is the density of mu1 with respect to x1, giving
/// g~ = (f1(rho) - tau) rho'.
enum class Interpretation { ZDensity, X1Density };

std::string_view interpretation_name(Interpretation interp);
/// Accepts "z", "z-density", "x1", "x1-density".
Interpretation parse_interpretation(std::string_view name);

class InfeasibleSpecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PerturbationSpec {
    double a = 0.0, b = 0.0;
    double delta = 0.0, epsilon = 0.0, nu = 0.0;
    // Derived geometry.
    double s = 0.0, t = 0.0;
    double b_prime = 0.0, d = 0.0, a_prime = 0.0;
    double phi_a = 0.0, phi_b = 0.0, phi_b_prime = 0.0, phi_a_prime = 0.0;

    double window_lo() const { return t - 3.0 * delta; }
    double plateau_lo() const { return t - 2.0 * delta; }
    double plateau_hi() const { return t - delta; }

    bool operator==(const PerturbationSpec&) const = default;
};

/// Geometry of the surgery. epsilon may be 0; its upper bound is checked by
/// validate_spec. Throws InfeasibleSpecError when t - 3 delta <= s, when
/// phi(b) - phi(b') >= phi(b') - phi(a), or when a' >= b'.
PerturbationSpec derive_spec(const MonotoneCurve& curve, double a, double b, double delta,
                             double epsilon, double nu);

/// C-infinity step: 0 for x <= 0, 1 for x >= 1, e^{-1/x}-based in between.
double smooth_step(double x);
double smooth_step_derivative(double x);

/// tau(z) = epsilon sin^2(nu z) sigma(z), where sigma rises across
/// [t - 3 delta, t - 2 delta], equals 1 on the plateau [t - 2 delta, t - delta]
/// and falls across [t - delta, t].
class BumpFunction {
public:
    BumpFunction(double t, double delta, double epsilon, double nu);
    explicit BumpFunction(const PerturbationSpec& spec)
        : BumpFunction(spec.t, spec.delta, spec.epsilon, spec.nu) {}

    double envelope(double z) const;
    double envelope_derivative(double z) const;
    /// sin^2(nu z) sigma(z): tau with epsilon = 1.
    double shape(double z) const;
    double value(double z) const { return epsilon_ * shape(z); }
    double derivative(double z) const;

    double support_lo() const { return t_ - 3.0 * delta_; }
    double support_hi() const { return t_; }
    double epsilon() const { return epsilon_; }
    double nu() const { return nu_; }

private:
    double t_, delta_, epsilon_, nu_;
};

struct FeasibilityReport {
    /// Largest epsilon keeping Q - mu1 >= 0, for this nu.
    double epsilon_max_curve = 0.0;
    /// Largest epsilon keeping Q - mu3 >= 0, for this nu.
    double epsilon_max_transfer = 0.0;
    double epsilon_max = 0.0;
    /// The same bounds with sin^2 sigma replaced by 1; valid for every nu.
    double epsilon_max_uniform = 0.0;
    /// Minimum over [t - 3 delta, t] of the curve's density in the chosen
    /// reading (g for z-density, f1(rho) for x1-density).
    double min_q_window = 0.0;
    double argmin_q_window = 0.0;
    double epsilon = 0.0;
    bool feasible = false;
};

FeasibilityReport validate_spec(const PerturbationSpec& spec, const ProductDensityModel& product,
                                Interpretation interp = Interpretation::ZDensity);

struct ArcHit {
    bool hit = false;
    double x1 = 0.0;
    double x2 = 0.0;
};

/// Where the hyperbola x1 x2 = z meets each arc.
struct ArcIntersections {
    ArcHit l1, l2, l3, l4;
    bool shifted_arcs_hit() const { return l2.hit || l4.hit; }
};

/// Q~ for one rectangle. Immutable; evaluators are safe for concurrent use.
class PerturbedMeasure {
public:
    /// Throws InfeasibleSpecError if epsilon exceeds the bound of validate_spec.
    PerturbedMeasure(const PerturbationSpec& spec, std::shared_ptr<const ProductDensityModel> product,
                     Interpretation interp = Interpretation::ZDensity);

    const PerturbationSpec& spec() const { return spec_; }
    Interpretation interpretation() const { return interp_; }
    const FeasibilityReport& feasibility() const { return feasibility_; }
    const BumpFunction& bump() const { return bump_; }
    const ProductDensityModel& product() const { return *product_; }
    const std::shared_ptr<const ProductDensityModel>& product_ptr() const { return product_; }

    /// Mass of each of mu1..mu4.
    double component_mass() const { return mass_; }
    /// mu1 mass on products in [t - 3 delta, z].
    double cumulative(double z) const;
    /// Smallest z with cumulative(z) = m, for m in [0, component_mass()].
    double inverse_cumulative(double m) const;
    /// z-density of mu1 (tau or tau rho').
    double removed_density(double z) const;

    // x1-densities of the components; zero off their arcs.
    double w1(double x1) const;
    double w2(double x1) const;
    double w3(double x1) const;
    double w4(double x1) const;
    // x2-densities of the components.
    double h1(double x2) const;
    double h2(double x2) const;
    double h3(double x2) const;
    double h4(double x2) const;

    /// x1 projection of Q~ (equals f1 when the surgery balances).
    double x1_projection(double x1) const;
    double x2_projection(double x2) const;

    ArcIntersections arc_hyperbola_intersection(double z) const;

    /// g~ - g: the signed product-density change contributed by the surgery.
    double density_change(double z) const;
    double density_change_derivative(double z) const;
    double cdf_change(double z) const;

    double density(double z) const { return product_->density(z) + density_change(z); }
    double density_derivative(double z) const;
    double lin(double z) const;
    double cdf(double z) const { return product_->cdf(z) + cdf_change(z); }

    /// Products where the surgery changes anything.
    double z_lo() const { return spec_.s; }
    double z_hi() const { return spec_.t; }

    // Arc maps used by the sampler.
    /// mu3 point paired with the mu1 point at x1 = x (same x2 after the shift).
    double transfer_partner(double x) const;

private:
    double mu3_density(double z) const;
    double shifted_density(double z, bool down) const;
    double term_derivative(double (PerturbedMeasure::*term)(double) const, double z, double lo,
                           double hi) const;
    double shifted_down(double z) const { return shifted_density(z, true); }
    double shifted_up(double z) const { return shifted_density(z, false); }
    std::optional<double> solve_shifted(double z, bool down) const;
    double cell_integral(std::size_t cell, double z) const;

    PerturbationSpec spec_;
    std::shared_ptr<const ProductDensityModel> product_;
    Interpretation interp_;
    BumpFunction bump_;
    FeasibilityReport feasibility_;
    // Cumulative table of the removed z-density on [t - 3 delta, t].
    std::vector<double> nodes_;
    std::vector<double> cum_;
    double mass_ = 0.0;
    // z-ranges of the mu3, mu2 and mu4 product images.
    double mu3_hi_ = 0.0, down_lo_ = 0.0, down_hi_ = 0.0, up_lo_ = 0.0, up_hi_ = 0.0;
};

struct OscillationExtrema {
    double min = 0.0, max = 0.0;
    double argmin = 0.0, argmax = 0.0;
    std::size_t grid_points = 0;
    bool undersampled = false;
};

/// Extrema of the perturbed Lin function over the plateau [t - 2 delta, t - delta]:
/// a uniform scan at points_per_period per period pi / nu, refined by golden
/// section around the best grid points. Fewer than 10 points per period sets
/// `undersampled`.
OscillationExtrema oscillation_extrema(const PerturbedMeasure& measure, double points_per_period = 32.0);

struct RectangleSchedule {
    std::size_t count = 5;
    /// Empty: a_n = 2^n. Otherwise one entry per rectangle.
    std::vector<double> a;
    /// Empty: b_n = width_factor a_n.
    std::vector<double> b;
    double width_factor = 1.5;
    /// delta_n = delta_fraction (t_n - s_n) unless overridden.
    double delta_fraction = 0.05;
    /// epsilon_n = epsilon_fraction * epsilon_max_uniform unless overridden.
    double epsilon_fraction = 0.5;
    /// Empty: M_n = 10 n.
    std::vector<double> magnitudes;
    std::optional<double> delta_override;
    std::optional<double> epsilon_override;
    /// Fixes nu_n and disables the search.
    std::optional<double> nu_override;
    int max_doublings = 40;
    double points_per_period = 32.0;
    Interpretation interpretation = Interpretation::ZDensity;

    double magnitude(std::size_t n) const;
    bool operator==(const RectangleSchedule&) const = default;
};

struct RectangleResult {
    std::size_t n = 0;  // 1-based
    PerturbationSpec spec;
    FeasibilityReport feasibility;
    OscillationExtrema extrema;
    double target = 0.0;
    int doublings = 0;
    bool met = false;
    std::shared_ptr<const PerturbedMeasure> measure;
};

struct RectangleSequence {
    std::vector<RectangleResult> rectangles;
    Interpretation interpretation = Interpretation::ZDensity;
    bool all_met() const;
    /// |min| and max strictly increase with n.
    bool strictly_growing() const;
};

/// Builds the rectangles in order. nu_n starts at 10 pi / delta_n and doubles
/// until min L <= -M_n, max L >= M_n and both magnitudes exceed those of the
/// previous rectangle. Throws InfeasibleSpecError naming the rectangle.
RectangleSequence build_rectangle_sequence(std::shared_ptr<const ProductDensityModel> product,
                                           const RectangleSchedule& schedule);

}  // namespace lincoup
