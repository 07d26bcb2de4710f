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

#include "lincoup/coupling_curve.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

namespace lincoup {

namespace detail {
CurvePtr make_ode_curve(const DensityModel& f1, const DensityModel& f2, const OdeOptions& options);
}

QuantileGrid build_quantile_grid(const DensityModel& f1, const DensityModel& f2, int level) {
    if (level < 0 || level > 30) throw std::invalid_argument("quantile grid level must be in [0, 30]");
    const std::size_t cells = std::size_t{1} << level;
    QuantileGrid grid;
    grid.level = level;
    grid.u.resize(cells + 1);
    grid.v.resize(cells + 1);
    grid.u.front() = grid.v.front() = 0.0;
    grid.u.back() = grid.v.back() = QuantileGrid::kInfinity;
    const double scale = std::ldexp(1.0, -level);
    for (std::size_t j = 1; j < cells; ++j) {
        const double p = static_cast<double>(j) * scale;
        try {
            grid.u[j] = f1.quantile(p);
            grid.v[j] = f2.quantile(p);
        } catch (const std::exception& e) {
            throw CurveConstructionError("quantile grid failed at (i=" + std::to_string(level) +
                                         ", j=" + std::to_string(j) + "): " + e.what());
        }
    }
    return grid;
}

DyadicApproximation::DyadicApproximation(DensityModel f1, DensityModel f2, int level)
    : f1_(std::move(f1)), f2_(std::move(f2)), grid_(build_quantile_grid(f1_, f2_, level)) {}

std::optional<std::size_t> DyadicApproximation::rectangle_of(double x1, double x2) const {
    if (!(x1 > 0.0) || !(x2 > 0.0)) return std::nullopt;
    const auto it = std::upper_bound(grid_.u.begin(), grid_.u.end(), x1);
    if (it == grid_.u.end()) return std::nullopt;
    const std::size_t j = static_cast<std::size_t>(it - grid_.u.begin()) - 1;
    if (!(x1 > grid_.u[j])) return std::nullopt;
    if (x2 > grid_.v[j] && x2 < grid_.v[j + 1]) return j;
    return std::nullopt;
}

double DyadicApproximation::density(double x1, double x2) const {
    if (!rectangle_of(x1, x2)) return 0.0;
    return std::ldexp(f1_.pdf(x1) * f2_.pdf(x2), grid_.level);
}

namespace {

// Maps x through F_from then the inverse of F_to, using the lower tail below
// the median and the upper tail above it so both ends keep full precision.
double transport(const DensityModel& from, const DensityModel& to, double x) {
    const double p = from.cdf(x);
    if (p <= 0.5) {
        if (!(p > 0.0)) throw std::domain_error("coupling curve: argument below representable range");
        return to.quantile(p);
    }
    const double q = from.survival(x);
    if (!(q > 0.0)) throw std::domain_error("coupling curve: argument beyond representable range");
    return to.upper_quantile(q);
}

class QuantileTransportCurve final : public MonotoneCurve {
public:
    QuantileTransportCurve(DensityModel f1, DensityModel f2) : f1_(std::move(f1)), f2_(std::move(f2)) {}

    double phi(double x) const override { return transport(f1_, f2_, x); }
    double phi_prime(double x) const override {
        return std::exp(f1_.log_pdf(x) - f2_.log_pdf(phi(x)));
    }
    double phi_second(double x) const override {
        const double y = phi(x);
        const double slope = std::exp(f1_.log_pdf(x) - f2_.log_pdf(y));
        return slope * (f1_.log_pdf_derivative(x) - f2_.log_pdf_derivative(y) * slope);
    }
    double inverse(double y) const override { return transport(f2_, f1_, y); }
    double inverse_prime(double y) const override {
        return std::exp(f2_.log_pdf(y) - f1_.log_pdf(inverse(y)));
    }
    std::string_view method() const override { return "quantile-transport"; }

private:
    DensityModel f1_, f2_;
};

}  // namespace

std::string_view curve_method_name(CurveMethod method) {
    return method == CurveMethod::Ode ? "ode" : "quantile-transport";
}

CurveMethod parse_curve_method(std::string_view name) {
    if (name == "ode") return CurveMethod::Ode;
    if (name == "quantile-transport") return CurveMethod::QuantileTransport;
    throw std::invalid_argument("unknown curve method '" + std::string(name) + "'");
}

CurvePtr build_curve(const DensityModel& f1, const DensityModel& f2, CurveMethod method,
                     const OdeOptions& ode) {
    if (method == CurveMethod::Ode) return detail::make_ode_curve(f1, f2, ode);
    return std::make_shared<QuantileTransportCurve>(f1, f2);
}

CurveResiduals verify_curve(const MonotoneCurve& curve, const DensityModel& f1, const DensityModel& f2,
                            std::span<const double> points) {
    CurveResiduals r;
    for (double x : points) {
        const double y = curve.phi(x);
        const double slope = std::fabs(curve.phi_prime(x) - std::exp(f1.log_pdf(x) - f2.log_pdf(y)));
        // Compare in whichever tail keeps precision.
        const double quant = f1.cdf(x) <= 0.5 ? std::fabs(f2.cdf(y) - f1.cdf(x))
                                              : std::fabs(f2.survival(y) - f1.survival(x));
        if (slope > r.max_slope_residual) {
            r.max_slope_residual = slope;
            r.worst_slope_x = x;
        }
        if (quant > r.max_quantile_residual) {
            r.max_quantile_residual = quant;
            r.worst_quantile_x = x;
        }
    }
    return r;
}

void write_curve_csv(std::ostream& os, const MonotoneCurve& curve, std::span<const double> xs) {
    os << "x1,phi,phi_prime\n" << std::setprecision(17);
    for (double x : xs) {
        os << x << ',' << curve.phi(x) << ',' << curve.phi_prime(x) << '\n';
    }
}

void write_quantile_grid_csv(std::ostream& os, const DensityModel& f1, const DensityModel& f2,
                             int max_level) {
    os << "level,j,u,v\n" << std::setprecision(17);
    for (int level = 1; level <= max_level; ++level) {
        const QuantileGrid grid = build_quantile_grid(f1, f2, level);
        for (std::size_t j = 0; j < grid.u.size(); ++j) {
            os << level << ',' << j << ',';
            if (grid.is_infinite(j)) {
                os << "inf,inf\n";
            } else {
                os << grid.u[j] << ',' << grid.v[j] << '\n';
            }
        }
    }
}

}  // namespace lincoup
