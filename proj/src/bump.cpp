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
#include <stdexcept>

#include "lincoup/perturbation.hpp"

namespace lincoup {

// S(x) = psi(x) / (psi(x) + psi(1 - x)) with psi(x) = e^{-1/x}, written as a
// logistic in 1/x - 1/(1 - x) so neither end underflows to 0/0.
double smooth_step(double x) {
    if (!(x > 0.0)) return 0.0;
    if (!(x < 1.0)) return 1.0;
    return 1.0 / (1.0 + std::exp(1.0 / x - 1.0 / (1.0 - x)));
}

double smooth_step_derivative(double x) {
    if (!(x > 0.0) || !(x < 1.0)) return 0.0;
    const double s = smooth_step(x);
    const double y = 1.0 - x;
    return s * (1.0 - s) * (1.0 / (x * x) + 1.0 / (y * y));
}

BumpFunction::BumpFunction(double t, double delta, double epsilon, double nu)
    : t_(t), delta_(delta), epsilon_(epsilon), nu_(nu) {
    if (!(delta > 0.0)) throw std::invalid_argument("bump: delta must be > 0");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("bump: epsilon must be >= 0");
    if (!(nu > 0.0)) throw std::invalid_argument("bump: nu must be > 0");
}

double BumpFunction::envelope(double z) const {
    const double lo = t_ - 3.0 * delta_;
    if (!(z > lo) || !(z < t_)) return 0.0;
    if (z < t_ - 2.0 * delta_) return smooth_step((z - lo) / delta_);
    if (z <= t_ - delta_) return 1.0;
    return smooth_step((t_ - z) / delta_);
}

double BumpFunction::envelope_derivative(double z) const {
    const double lo = t_ - 3.0 * delta_;
    if (!(z > lo) || !(z < t_)) return 0.0;
    if (z < t_ - 2.0 * delta_) return smooth_step_derivative((z - lo) / delta_) / delta_;
    if (z <= t_ - delta_) return 0.0;
    return -smooth_step_derivative((t_ - z) / delta_) / delta_;
}

double BumpFunction::shape(double z) const {
    const double e = envelope(z);
    if (e == 0.0) return 0.0;
    const double sn = std::sin(nu_ * z);
    return sn * sn * e;
}

double BumpFunction::derivative(double z) const {
    const double e = envelope(z);
    if (e == 0.0) return 0.0;
    const double sn = std::sin(nu_ * z);
    return epsilon_ * (nu_ * std::sin(2.0 * nu_ * z) * e + sn * sn * envelope_derivative(z));
}

}  // namespace lincoup
