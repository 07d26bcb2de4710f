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

#include <algorithm>
#include <stdexcept>

#include "json.hpp"
#include "lincoup/measure.hpp"

namespace lincoup {

using nlohmann::json;

namespace {

json family_to_json(const FamilySpec& f) {
    return json{{"family", std::string(family_name(f.family))}, {"params", f.params}};
}

FamilySpec family_from_json(const json& j) {
    FamilySpec f;
    f.family = parse_family(j.at("family").get<std::string>());
    f.params = j.at("params").get<std::vector<double>>();
    return f;
}

json spec_to_json(const PerturbationSpec& s) {
    return json{{"a", s.a},           {"b", s.b},
                {"delta", s.delta},   {"epsilon", s.epsilon},
                {"nu", s.nu},         {"s", s.s},
                {"t", s.t},           {"b_prime", s.b_prime},
                {"d", s.d},           {"a_prime", s.a_prime},
                {"phi_a", s.phi_a},   {"phi_b", s.phi_b},
                {"phi_b_prime", s.phi_b_prime}, {"phi_a_prime", s.phi_a_prime}};
}

PerturbationSpec spec_from_json(const json& j) {
    PerturbationSpec s;
    s.a = j.at("a").get<double>();
    s.b = j.at("b").get<double>();
    s.delta = j.at("delta").get<double>();
    s.epsilon = j.at("epsilon").get<double>();
    s.nu = j.at("nu").get<double>();
    s.s = j.at("s").get<double>();
    s.t = j.at("t").get<double>();
    s.b_prime = j.at("b_prime").get<double>();
    s.d = j.at("d").get<double>();
    s.a_prime = j.at("a_prime").get<double>();
    s.phi_a = j.at("phi_a").get<double>();
    s.phi_b = j.at("phi_b").get<double>();
    s.phi_b_prime = j.at("phi_b_prime").get<double>();
    s.phi_a_prime = j.at("phi_a_prime").get<double>();
    return s;
}

std::vector<ComponentDescription> components_of(const PerturbedMeasure& m) {
    const PerturbationSpec& s = m.spec();
    const double mass = m.component_mass();
    return {
        {"mu1", s.b_prime, s.b, 0.0, -1, mass},
        {"mu2", s.b_prime, s.b, -s.d, +1, mass},
        {"mu3", s.a, s.a_prime, 0.0, -1, mass},
        {"mu4", s.a, s.a_prime, s.d, +1, mass},
    };
}

}  // namespace

std::string serialize(const MeasureDescription& desc) {
    json rects = json::array();
    for (const auto& r : desc.rectangles) {
        json comps = json::array();
        for (const auto& c : r.components) {
            comps.push_back(json{{"name", c.name},   {"x1_lo", c.x1_lo}, {"x1_hi", c.x1_hi},
                                 {"shift", c.shift}, {"sign", c.sign},   {"mass", c.mass}});
        }
        rects.push_back(json{{"spec", spec_to_json(r.spec)}, {"components", comps}});
    }
    const json j{{"marginal1", family_to_json(desc.marginal1)},
                 {"marginal2", family_to_json(desc.marginal2)},
                 {"curve_method", std::string(curve_method_name(desc.curve_method))},
                 {"interpretation", std::string(interpretation_name(desc.interpretation))},
                 {"rectangles", rects}};
    return j.dump(2);
}

MeasureDescription parse_measure_description(std::string_view text) {
    try {
        const json j = json::parse(text);
        MeasureDescription desc;
        desc.marginal1 = family_from_json(j.at("marginal1"));
        desc.marginal2 = family_from_json(j.at("marginal2"));
        desc.curve_method = parse_curve_method(j.at("curve_method").get<std::string>());
        desc.interpretation = parse_interpretation(j.at("interpretation").get<std::string>());
        for (const auto& r : j.at("rectangles")) {
            RectangleDescription rd;
            rd.spec = spec_from_json(r.at("spec"));
            for (const auto& c : r.at("components")) {
                rd.components.push_back({c.at("name").get<std::string>(), c.at("x1_lo").get<double>(),
                                         c.at("x1_hi").get<double>(), c.at("shift").get<double>(),
                                         c.at("sign").get<int>(), c.at("mass").get<double>()});
            }
            desc.rectangles.push_back(std::move(rd));
        }
        return desc;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("measure description: ") + e.what());
    }
}

// ---------------------------------------------------------------------------

AssembledMeasure::AssembledMeasure(std::shared_ptr<const ProductDensityModel> product, Interpretation interp,
                                   std::vector<std::shared_ptr<const PerturbedMeasure>> rectangles)
    : product_(std::move(product)), interp_(interp), rects_(std::move(rectangles)) {
    if (!product_) throw std::invalid_argument("AssembledMeasure: null product model");
    std::sort(rects_.begin(), rects_.end(), [](const auto& l, const auto& r) { return l->spec().a < r->spec().a; });
    for (std::size_t i = 1; i < rects_.size(); ++i) {
        if (!(rects_[i]->spec().a > rects_[i - 1]->spec().b)) {
            throw std::invalid_argument("AssembledMeasure: rectangles must be disjoint");
        }
    }
}

AssembledMeasure::AssembledMeasure(std::shared_ptr<const ProductDensityModel> product, const RectangleSequence& seq)
    : AssembledMeasure(std::move(product), seq.interpretation, [&] {
          std::vector<std::shared_ptr<const PerturbedMeasure>> v;
          for (const auto& r : seq.rectangles) v.push_back(r.measure);
          return v;
      }()) {}

AssembledMeasure AssembledMeasure::from_description(const MeasureDescription& desc) {
    const DensityModel f1 = DensityModel::from_spec(desc.marginal1);
    const DensityModel f2 = DensityModel::from_spec(desc.marginal2);
    auto product = std::make_shared<const ProductDensityModel>(f1, f2, build_curve(f1, f2, desc.curve_method));
    std::vector<std::shared_ptr<const PerturbedMeasure>> rects;
    for (const auto& r : desc.rectangles) {
        const PerturbationSpec spec =
            derive_spec(product->curve(), r.spec.a, r.spec.b, r.spec.delta, r.spec.epsilon, r.spec.nu);
        rects.push_back(std::make_shared<const PerturbedMeasure>(spec, product, desc.interpretation));
    }
    return AssembledMeasure(product, desc.interpretation, std::move(rects));
}

MeasureDescription AssembledMeasure::describe() const {
    MeasureDescription desc;
    desc.marginal1 = product_->f1().spec();
    desc.marginal2 = product_->f2().spec();
    desc.curve_method = product_->curve().method() == "ode" ? CurveMethod::Ode : CurveMethod::QuantileTransport;
    desc.interpretation = interp_;
    for (const auto& r : rects_) desc.rectangles.push_back({r->spec(), components_of(*r)});
    return desc;
}

const PerturbedMeasure* AssembledMeasure::owner(double z) const {
    for (const auto& r : rects_) {
        if (z >= r->z_lo() && z <= r->z_hi()) return r.get();
    }
    return nullptr;
}

double AssembledMeasure::density(double z) const {
    const PerturbedMeasure* r = owner(z);
    return r ? r->density(z) : product_->density(z);
}

double AssembledMeasure::density_derivative(double z) const {
    const PerturbedMeasure* r = owner(z);
    return r ? r->density_derivative(z) : product_->density_derivative(z);
}

double AssembledMeasure::lin(double z) const { return -z * density_derivative(z) / density(z); }

double AssembledMeasure::cdf(double z) const {
    // Rectangles wholly below z have a net zero cdf change.
    const PerturbedMeasure* r = owner(z);
    return r ? r->cdf(z) : product_->cdf(z);
}

double AssembledMeasure::x1_projection(double x1) const {
    for (const auto& r : rects_) {
        if (x1 >= r->spec().a && x1 <= r->spec().b) return r->x1_projection(x1);
    }
    return product_->f1().pdf(x1);
}

double AssembledMeasure::x2_projection(double x2) const {
    for (const auto& r : rects_) {
        if (x2 >= r->spec().phi_a && x2 <= r->spec().phi_b) return r->x2_projection(x2);
    }
    return product_->f2().pdf(x2);
}

}  // namespace lincoup
