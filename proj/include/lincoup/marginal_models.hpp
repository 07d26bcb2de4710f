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

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lincoup {

enum class Family { Exponential, Gamma, Weibull, Lognormal, HalfNormal, User };

std::string_view family_name(Family family);
/// Accepts the names produced by family_name(); throws std::invalid_argument otherwise.
Family parse_family(std::string_view name);

/// Serializable description of a built-in density: {"family": ..., "params": [...]}.
struct FamilySpec {
    Family family = Family::Exponential;
    std::vector<double> params;

    bool operator==(const FamilySpec&) const = default;
};

/// Probability density on (0, inf) with the accessors the coupling
/// construction needs. Cheap to copy; immutable after construction and safe
/// for concurrent use.
///
/// Parameterisations:
///   exponential  [rate]
///   gamma        [shape, rate]
///   weibull      [shape, scale]
///   lognormal    [mu, sigma]        (of log x)
///   half-normal  [sigma]
///
/// User densities supply f only, and need not be normalised: the model divides
/// by the numerically integrated mass. CDF, survival and quantiles then come
/// from adaptive quadrature over cached geometric panels, and f' from
/// Ridders-extrapolated central differences.
class DensityModel {
public:
    static DensityModel exponential(double rate = 1.0);
    static DensityModel gamma(double shape, double rate = 1.0);
    static DensityModel weibull(double shape, double scale = 1.0);
    static DensityModel lognormal(double mu = 0.0, double sigma = 1.0);
    static DensityModel half_normal(double sigma = 1.0);
    static DensityModel user(std::function<double(double)> density, std::string label = "user");
    static DensityModel from_spec(const FamilySpec& spec);

    Family family() const;
    std::span<const double> params() const;
    /// Throws std::logic_error for user densities, which have no record form.
    FamilySpec spec() const;
    std::string name() const;
    bool has_analytic_derivative() const { return family() != Family::User; }

    // All accessors below throw std::domain_error for x <= 0 or p outside (0, 1).
    double pdf(double x) const;
    double log_pdf(double x) const;
    double pdf_derivative(double x) const;
    /// f'(x) / f(x), computed without forming f in the tails.
    double log_pdf_derivative(double x) const;
    double cdf(double x) const;
    /// 1 - F(x) without cancellation.
    double survival(double x) const;
    double quantile(double p) const;
    /// x with survival(x) == q.
    double upper_quantile(double q) const;
    /// Lin's function -x f'(x) / f(x).
    double lin(double x) const;

    class Impl;

private:
    explicit DensityModel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

struct LinGrid {
    double x_max = 50.0;
    std::size_t points = 2000;
    /// Relative slack allowed before a decrease counts as a violation.
    double tolerance = 1e-12;
};

struct LinConditionReport {
    bool monotone = true;
    /// Consecutive grid values equal within tolerance (weakly monotone steps).
    std::size_t ties = 0;
    std::size_t violations = 0;
    double first_violation_x = 0.0;
    double x0 = 0.0;
    double x_max = 0.0;
    double lin_at_x_max = 0.0;
    std::string note;
};

/// Grid heuristic for Lin's condition on (x0, x_max]: nondecreasing within
/// tolerance, plus the end value as evidence of divergence. Not a proof.
LinConditionReport check_lin_condition(const DensityModel& model, double x0,
                                       const LinGrid& grid = {});

}  // namespace lincoup
