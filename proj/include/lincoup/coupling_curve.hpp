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

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "lincoup/marginal_models.hpp"

namespace lincoup {

class CurveConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dyadic quantiles of both marginals at one level: u[j] = F1^-1(j / 2^level),
/// v[j] = F2^-1(j / 2^level). The endpoints are 0 and +inf; the infinite
/// endpoint is a sentinel and is only ever compared, never computed with.
struct QuantileGrid {
    static constexpr double kInfinity = std::numeric_limits<double>::infinity();

    int level = 0;
    std::vector<double> u;
    std::vector<double> v;

    std::size_t cells() const { return u.size() - 1; }
    bool is_infinite(std::size_t j) const { return j + 1 == u.size(); }
};

/// Throws CurveConstructionError naming (level, j) if a quantile fails.
QuantileGrid build_quantile_grid(const DensityModel& f1, const DensityModel& f2, int level);

/// The set K_m (union of the diagonal grid rectangles) with the density
/// 2^m f1(x1) f2(x2) on it. Rectangles are kept as indices into the grid.
class DyadicApproximation {
public:
    DyadicApproximation(DensityModel f1, DensityModel f2, int level);

    int level() const { return grid_.level; }
    const QuantileGrid& grid() const { return grid_; }

    /// Index j of the open rectangle (u_j, u_j+1) x (v_j, v_j+1) holding the point.
    std::optional<std::size_t> rectangle_of(double x1, double x2) const;
    double density(double x1, double x2) const;

private:
    DensityModel f1_, f2_;
    QuantileGrid grid_;
};

/// Strictly increasing coupling curve x2 = phi(x1) with F2(phi(x)) = F1(x).
class MonotoneCurve {
public:
    virtual ~MonotoneCurve() = default;

    virtual double phi(double x) const = 0;
    virtual double phi_prime(double x) const = 0;
    virtual double phi_second(double x) const = 0;
    virtual double inverse(double y) const = 0;
    /// d/dy phi^-1(y).
    virtual double inverse_prime(double y) const = 0;

    /// Open interval of x1 on which the curve is available.
    virtual double domain_lo() const { return 0.0; }
    virtual double domain_hi() const { return std::numeric_limits<double>::infinity(); }
    virtual std::string_view method() const = 0;
};

using CurvePtr = std::shared_ptr<const MonotoneCurve>;

enum class CurveMethod { QuantileTransport, Ode };

std::string_view curve_method_name(CurveMethod method);
CurveMethod parse_curve_method(std::string_view name);

struct OdeOptions {
    double rel_tol = 3e-14;
    double abs_tol = 3e-14;
    /// The integration starts at F1^-1(start_level) and stops at the upper
    /// quantile of level end_level.
    double start_level = 1e-10;
    double end_level = 1e-10;
    std::size_t max_steps = 2'000'000;
};

/// Quantile transport: phi = F2^-1 o F1, switching to survival functions in
/// the upper tail. ODE: adaptive Dormand-Prince integration of
/// x2' = f1(x1) / f2(x2) in log coordinates with dense output.
CurvePtr build_curve(const DensityModel& f1, const DensityModel& f2, CurveMethod method,
                     const OdeOptions& ode = {});

struct CurveResiduals {
    double max_slope_residual = 0.0;     // |phi'(x) - f1(x) / f2(phi(x))|
    double max_quantile_residual = 0.0;  // |F2(phi(x)) - F1(x)|
    double worst_slope_x = 0.0;
    double worst_quantile_x = 0.0;
};

CurveResiduals verify_curve(const MonotoneCurve& curve, const DensityModel& f1, const DensityModel& f2,
                            std::span<const double> points);

/// CSV with header x1,phi,phi_prime.
void write_curve_csv(std::ostream& os, const MonotoneCurve& curve, std::span<const double> xs);

/// CSV with header level,j,u,v for levels 1..max_level; infinite endpoints are written as inf.
void write_quantile_grid_csv(std::ostream& os, const DensityModel& f1, const DensityModel& f2,
                             int max_level);

}  // namespace lincoup
