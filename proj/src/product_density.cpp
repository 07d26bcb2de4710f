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

#include "lincoup/product_density.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "lincoup/numerics.hpp"

namespace lincoup {

double solve_rho(const MonotoneCurve& curve, double z) {
    if (!(z > 0.0)) throw std::domain_error("rho: z must be > 0");
    const double lo = curve.domain_lo();
    const double hi = curve.domain_hi();
    auto f = [&](double x) { return x * curve.phi(x) - z; };
    auto df = [&](double x) { return curve.phi(x) + x * curve.phi_prime(x); };
    try {
        return numerics::solve_increasing(f, df, std::sqrt(z), lo, hi);
    } catch (const numerics::RootFindingError&) {
        std::ostringstream os;
        os << "rho: no curve point with x * phi(x) = " << z;
        throw numerics::RootFindingError(os.str());
    }
}

ProductDensityModel::ProductDensityModel(DensityModel f1, DensityModel f2, CurvePtr curve)
    : f1_(std::move(f1)),
      f2_(std::move(f2)),
      curve_(std::move(curve)),
      analytic_(f1_.has_analytic_derivative() && f2_.has_analytic_derivative()) {
    if (!curve_) throw std::invalid_argument("ProductDensityModel: null curve");
}

double ProductDensityModel::rho_derivative(double z) const {
    const double x = rho(z);
    const double y = curve_->phi(x);
    return y / (z * curve_->phi_prime(x) + y * y);
}

double ProductDensityModel::rho_second_derivative(double z) const {
    const double x = rho(z);
    const double y = curve_->phi(x);
    const double yp = curve_->phi_prime(x);
    const double ypp = curve_->phi_second(x);
    const double den = z * yp + y * y;
    const double r1 = y / den;
    const double den_prime = yp + z * ypp * r1 + 2.0 * y * yp * r1;
    return r1 * (yp * r1 / y - den_prime / den);
}

double ProductDensityModel::density(double z) const {
    const double x = rho(z);
    return f1_.pdf(x) * x / (z + curve_->phi_prime(x) * x * x);
}

double ProductDensityModel::density_via_f2(double z) const {
    const double x2 = curve_->phi(rho(z));
    return f2_.pdf(x2) * x2 / (z + curve_->inverse_prime(x2) * x2 * x2);
}

double ProductDensityModel::log_density_derivative(double z) const {
    if (!analytic_) {
        const double h = std::min(std::max(1e-6, 1e-6 * z), 0.25 * z);
        auto log_g = [this](double w) { return std::log(density(w)); };
        return numerics::derivative_five_point_richardson(log_g, z, h);
    }
    // g = f1(rho) rho', so (log g)' = (f1'/f1)(rho) rho' + rho''/rho', with
    // rho' = y / D, D = z phi'(x) + phi(x)^2 and rho''/rho' = phi' rho' / y - D'/D.
    const double x = rho(z);
    const double y = curve_->phi(x);
    const double yp = curve_->phi_prime(x);
    const double ypp = curve_->phi_second(x);
    const double den = z * yp + y * y;
    const double r1 = y / den;
    const double den_prime = yp + z * ypp * r1 + 2.0 * y * yp * r1;
    return f1_.log_pdf_derivative(x) * r1 + yp * r1 / y - den_prime / den;
}

double ProductDensityModel::cdf(double z) const { return f1_.cdf(rho(z)); }

double ProductDensityModel::survival(double z) const { return f1_.survival(rho(z)); }

std::pair<double, double> ProductDensityModel::z_range(double tail) const {
    const double lo = std::max(f1_.quantile(tail), curve_->domain_lo());
    const double hi = std::min(f1_.upper_quantile(tail), curve_->domain_hi());
    return {lo * curve_->phi(lo), hi * curve_->phi(hi)};
}

NormalizationReport product_normalization(const ProductDensityModel& model, double tail_level) {
    NormalizationReport report;
    report.tail_level = tail_level;
    const auto [z_lo, z_hi] = model.z_range(tail_level);
    report.z_lo = z_lo;
    report.z_hi = z_hi;
    auto integrand = [&](double u) {
        const double z = std::exp(u);
        return model.density(z) * z;
    };
    report.integral = numerics::integrate_pieces(integrand, std::log(z_lo), std::log(z_hi), 64, 1e-16, 1e-13);
    return report;
}

void write_product_csv(std::ostream& os, const ProductDensityModel& model, std::span<const double> zs) {
    os << "z,rho,g,L_g\n" << std::setprecision(17);
    for (double z : zs) {
        os << z << ',' << model.rho(z) << ',' << model.density(z) << ',' << model.lin(z) << '\n';
    }
}

}  // namespace lincoup
