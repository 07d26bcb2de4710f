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

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "lincoup/coupling_curve.hpp"
#include "lincoup/marginal_models.hpp"
#include "lincoup/perturbation.hpp"
#include "lincoup/product_density.hpp"

namespace lincoup {

/// One of the four arc measures of a rectangle, as placed in the plane:
/// the curve over [x1_lo, x1_hi] moved vertically by `shift`, carrying `mass`
/// with sign `sign` (-1 removed, +1 added).
struct ComponentDescription {
    std::string name;  // mu1 .. mu4
    double x1_lo = 0.0, x1_hi = 0.0;
    double shift = 0.0;
    int sign = 0;
    double mass = 0.0;

    bool operator==(const ComponentDescription&) const = default;
};

struct RectangleDescription {
    PerturbationSpec spec;
    std::vector<ComponentDescription> components;

    bool operator==(const RectangleDescription&) const = default;
};

/// Serializable form of P = P~ - sum Q_n + sum Q~_n: the marginals, the curve
/// construction, and per rectangle its parameters and arc components.
struct MeasureDescription {
    FamilySpec marginal1;
    FamilySpec marginal2;
    CurveMethod curve_method = CurveMethod::QuantileTransport;
    Interpretation interpretation = Interpretation::ZDensity;
    std::vector<RectangleDescription> rectangles;

    bool operator==(const MeasureDescription&) const = default;
};

/// JSON text; doubles are written with round-trip precision.
std::string serialize(const MeasureDescription& desc);
/// Throws std::invalid_argument on malformed input.
MeasureDescription parse_measure_description(std::string_view text);

/// The curve measure with any number of disjoint rectangle surgeries applied.
class AssembledMeasure {
public:
    AssembledMeasure(std::shared_ptr<const ProductDensityModel> product, Interpretation interp,
                     std::vector<std::shared_ptr<const PerturbedMeasure>> rectangles);
    AssembledMeasure(std::shared_ptr<const ProductDensityModel> product, const RectangleSequence& seq);

    /// Rebuilds the curve and every rectangle from the recorded parameters.
    static AssembledMeasure from_description(const MeasureDescription& desc);
    /// Throws std::logic_error for user-supplied marginals, which have no record form.
    MeasureDescription describe() const;

    const ProductDensityModel& product() const { return *product_; }
    const std::shared_ptr<const ProductDensityModel>& product_ptr() const { return product_; }
    Interpretation interpretation() const { return interp_; }
    const std::vector<std::shared_ptr<const PerturbedMeasure>>& rectangles() const { return rects_; }

    double density(double z) const;
    double density_derivative(double z) const;
    double lin(double z) const;
    double cdf(double z) const;
    double x1_projection(double x1) const;
    double x2_projection(double x2) const;

private:
    const PerturbedMeasure* owner(double z) const;

    std::shared_ptr<const ProductDensityModel> product_;
    Interpretation interp_;
    std::vector<std::shared_ptr<const PerturbedMeasure>> rects_;
};

}  // namespace lincoup
