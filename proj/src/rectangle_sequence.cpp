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

#include <cmath>
#include <sstream>
#include <string>

#include "lincoup/perturbation.hpp"

namespace lincoup {

double RectangleSchedule::magnitude(std::size_t n) const {
    if (magnitudes.empty()) return 10.0 * static_cast<double>(n);
    if (n == 0 || n > magnitudes.size()) {
        throw std::invalid_argument("magnitude schedule has no entry for rectangle " + std::to_string(n));
    }
    return magnitudes[n - 1];
}

bool RectangleSequence::all_met() const {
    for (const auto& r : rectangles) {
        if (!r.met) return false;
    }
    return true;
}

bool RectangleSequence::strictly_growing() const {
    for (std::size_t i = 1; i < rectangles.size(); ++i) {
        const auto& prev = rectangles[i - 1].extrema;
        const auto& cur = rectangles[i].extrema;
        if (!(cur.max > prev.max) || !(-cur.min > -prev.min)) return false;
    }
    return true;
}

namespace {

[[noreturn]] void rethrow_for(std::size_t n, const std::exception& e) {
    std::ostringstream os;
    os << "rectangle " << n << ": " << e.what();
    throw InfeasibleSpecError(os.str());
}

}  // namespace

RectangleSequence build_rectangle_sequence(std::shared_ptr<const ProductDensityModel> product,
                                           const RectangleSchedule& schedule) {
    if (!product) throw std::invalid_argument("build_rectangle_sequence: null product model");
    if (schedule.count == 0) throw std::invalid_argument("build_rectangle_sequence: count must be >= 1");
    if (!schedule.a.empty() && schedule.a.size() != schedule.count) {
        throw std::invalid_argument("rectangle schedule: need one a per rectangle");
    }
    if (!schedule.b.empty() && schedule.b.size() != schedule.count) {
        throw std::invalid_argument("rectangle schedule: need one b per rectangle");
    }

    constexpr double kPi = 3.14159265358979323846;
    const MonotoneCurve& curve = product->curve();
    RectangleSequence seq;
    seq.interpretation = schedule.interpretation;
    double prev_b = 0.0;

    for (std::size_t n = 1; n <= schedule.count; ++n) {
        const double a = schedule.a.empty() ? std::ldexp(1.0, static_cast<int>(n)) : schedule.a[n - 1];
        const double b = schedule.b.empty() ? schedule.width_factor * a : schedule.b[n - 1];
        if (!(a > prev_b)) {
            throw std::invalid_argument("rectangle " + std::to_string(n) + " overlaps its predecessor");
        }
        prev_b = b;

        RectangleResult result;
        result.n = n;
        result.target = schedule.magnitude(n);
        double nu = 0.0;
        double epsilon = 0.0;
        try {
            const double s = a * curve.phi(a);
            const double t = b * curve.phi(b);
            const double delta = schedule.delta_override.value_or(schedule.delta_fraction * (t - s));
            nu = schedule.nu_override.value_or(10.0 * kPi / delta);
            const PerturbationSpec probe = derive_spec(curve, a, b, delta, 0.0, nu);
            epsilon = schedule.epsilon_override.value_or(
                schedule.epsilon_fraction * validate_spec(probe, *product, schedule.interpretation).epsilon_max_uniform);

            const bool search = !schedule.nu_override && epsilon > 0.0;
            const RectangleResult* prev = seq.rectangles.empty() ? nullptr : &seq.rectangles.back();
            for (;;) {
                result.spec = derive_spec(curve, a, b, delta, epsilon, nu);
                result.measure = std::make_shared<const PerturbedMeasure>(result.spec, product, schedule.interpretation);
                result.feasibility = result.measure->feasibility();
                result.extrema = oscillation_extrema(*result.measure, schedule.points_per_period);
                const bool reached = result.extrema.min <= -result.target && result.extrema.max >= result.target;
                const bool grows = prev == nullptr || (result.extrema.max > prev->extrema.max &&
                                                       -result.extrema.min > -prev->extrema.min);
                result.met = reached && grows;
                if (result.met || !search || result.doublings >= schedule.max_doublings) break;
                nu *= 2.0;
                ++result.doublings;
            }
        } catch (const InfeasibleSpecError& e) {
            rethrow_for(n, e);
        } catch (const std::domain_error& e) {
            rethrow_for(n, e);
        }
        seq.rectangles.push_back(std::move(result));
    }
    return seq;
}

}  // namespace lincoup
