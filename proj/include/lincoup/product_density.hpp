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

#include <iosfwd>
#include <span>
#include <utility>

#include "lincoup/coupling_curve.hpp"
#include "lincoup/marginal_models.hpp"

namespace lincoup {

/// x1-coordinate of the point where the curve meets the hyperbola x1 x2 = z:
/// the unique x with x * phi(x) = z. Bracketing from sqrt(z), Brent, then a
/// Newton polish with (x phi)' = phi + x phi'. Throws
/// numerics::RootFindingError naming z if no bracket exists on the curve's
/// domain.
double solve_rho(const MonotoneCurve& curve, double z);

/// Law of the product x1 * x2 when (x1, x2) is spread along the coupling
/// curve with x1-density f1. Immutable; evaluators are pure.
class ProductDensityModel {
public:
    ProductDensityModel(DensityModel f1, DensityModel f2, CurvePtr curve);

    const DensityModel& f1() const { return f1_; }
    const DensityModel& f2() const { return f2_; }
    const MonotoneCurve& curve() const { return *curve_; }
    const CurvePtr& curve_ptr() const { return curve_; }

    double rho(double z) const { return solve_rho(*curve_, z); }
    /// phi(rho) / (z phi'(rho) + phi(rho)^2).
    double rho_derivative(double z) const;
    double rho_second_derivative(double z) const;

    /// f1(rho) rho / (z + phi'(rho) rho^2).
    double density(double z) const;
    /// The same density written from the f2 side:
    /// f2(x2) x2 / (z + (phi^-1)'(x2) x2^2), x2 = phi(rho(z)).
    double density_via_f2(double z) const;
    /// g'(z) / g(z); analytic when both marginals have analytic derivatives,
    /// otherwise Richardson-extrapolated five-point differences of log g.
    double log_density_derivative(double z) const;
    double density_derivative(double z) const { return density(z) * log_density_derivative(z); }

    /// F1(rho(z)): mass of the curve below the hyperbola through z.
    double cdf(double z) const;
    double survival(double z) const;

    /// Lin's function of the product density, -z g'(z) / g(z).
    double lin(double z) const { return -z * log_density_derivative(z); }

    /// Product values at the lower and upper f1-quantile levels `tail`.
    std::pair<double, double> z_range(double tail) const;

private:
    DensityModel f1_, f2_;
    CurvePtr curve_;
    bool analytic_;
};

struct NormalizationReport {
    double integral = 0.0;
    double z_lo = 0.0;
    double z_hi = 0.0;
    double tail_level = 0.0;
};

/// Integral of g over [z_lo, z_hi] bounded by f1-quantiles at the tail level,
/// computed by adaptive quadrature in log z.
NormalizationReport product_normalization(const ProductDensityModel& model, double tail_level = 1e-12);

/// CSV with header z,rho,g,L_g.
void write_product_csv(std::ostream& os, const ProductDensityModel& model, std::span<const double> zs);

}  // namespace lincoup
