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

// Coupling curve from the initial value problem x2' = f1(x1) / f2(x2).
//
// The literal initial point x2(0) = 0 is singular for most densities, so the
// integration starts at x_eps = F1^-1(start_level) with x2 = F2^-1(start_level).
// We integrate y = ln x2 against s = ln x1, where the equation reads
//
//     dy/ds = (x1 f1(x1)) / (x2 f2(x2)),
//
// which keeps step sizes uniform across the many decades the curve spans.
// Dormand-Prince 5(4) with its native fourth-order dense output.

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "lincoup/coupling_curve.hpp"
#include "lincoup/numerics.hpp"

namespace lincoup::detail {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

struct Step {
    double s0;
    double h;
    std::array<double, 5> r;  // dense output coefficients

    double value(double theta) const {
        const double t1 = 1.0 - theta;
        return r[0] + theta * (r[1] + t1 * (r[2] + theta * (r[3] + t1 * r[4])));
    }
    // d/dtheta of value().
    double slope(double theta) const {
        const double t1 = 1.0 - theta;
        return r[1] + (1.0 - 2.0 * theta) * r[2] + theta * (2.0 - 3.0 * theta) * r[3] +
               2.0 * theta * t1 * (1.0 - 2.0 * theta) * r[4];
    }
};

class OdeCurve final : public MonotoneCurve {
public:
    OdeCurve(DensityModel f1, DensityModel f2, const OdeOptions& options)
        : f1_(std::move(f1)), f2_(std::move(f2)) {
        integrate(options);
    }

    double phi(double x) const override {
        const auto [k, theta] = locate(x);
        return std::exp(steps_[k].value(theta));
    }
    double phi_prime(double x) const override {
        const auto [k, theta] = locate(x);
        const Step& st = steps_[k];
        const double y = std::exp(st.value(theta));
        return st.slope(theta) / st.h * y / x;
    }
    double phi_second(double x) const override {
        const double y = phi(x);
        const double slope = phi_prime(x);
        return slope * (f1_.log_pdf_derivative(x) - f2_.log_pdf_derivative(y) * slope);
    }
    double inverse(double y) const override {
        const double t = std::log(y);
        if (!(t >= y_start_.front() && t <= y_end_)) {
            throw std::domain_error("ode curve inverse: argument outside integrated range");
        }
        const auto it = std::upper_bound(y_start_.begin(), y_start_.end(), t);
        const std::size_t k = static_cast<std::size_t>(it - y_start_.begin()) - 1;
        const Step& st = steps_[k];
        auto g = [&](double theta) { return st.value(theta) - t; };
        const double glo = g(0.0), ghi = g(1.0);
        double theta = 0.0;
        if (glo >= 0.0) {
            theta = 0.0;
        } else if (ghi <= 0.0) {
            theta = 1.0;
        } else {
            theta = numerics::brent(g, 0.0, 1.0, glo, ghi);
        }
        return std::exp(st.s0 + theta * st.h);
    }
    double inverse_prime(double y) const override { return 1.0 / phi_prime(inverse(y)); }
    double domain_lo() const override { return std::exp(s_start_); }
    double domain_hi() const override { return std::exp(s_end_); }
    std::string_view method() const override { return "ode"; }

    std::size_t step_count() const { return steps_.size(); }

private:
    double rhs(double s, double y) const {
        return std::exp(s - y + f1_.log_pdf(std::exp(s)) - f2_.log_pdf(std::exp(y)));
    }

    std::pair<std::size_t, double> locate(double x) const {
        const double s = std::log(x);
        if (!(s >= s_start_ && s <= s_end_)) {
            std::ostringstream os;
            os << "ode curve: x1 = " << x << " outside integrated range [" << std::exp(s_start_)
               << ", " << std::exp(s_end_) << "]";
            throw std::domain_error(os.str());
        }
        const auto it = std::upper_bound(s_start_list_.begin(), s_start_list_.end(), s);
        const std::size_t k =
            std::min(static_cast<std::size_t>(it - s_start_list_.begin()) - 1, steps_.size() - 1);
        const Step& st = steps_[k];
        return {k, std::clamp((s - st.s0) / st.h, 0.0, 1.0)};
    }

    void integrate(const OdeOptions& opt) {
        const double x_start = f1_.quantile(opt.start_level);
        s_start_ = std::log(x_start);
        s_end_ = std::log(f1_.upper_quantile(opt.end_level));
        double s = s_start_;
        double y = std::log(f2_.quantile(f1_.cdf(x_start)));
        double h = 1e-3 * (s_end_ - s_start_);
        double k1 = rhs(s, y);
        double err_prev = 1e-4;

        while (s < s_end_) {
            if (steps_.size() >= opt.max_steps) fail("step budget exhausted", s);
            if (s + h > s_end_) h = s_end_ - s;
            if (h < 1e-13 * std::max(1.0, std::fabs(s))) fail("step size underflow", s);

            const double k2 = rhs(s + c2 * h, y + h * a21 * k1);
            const double k3 = rhs(s + c3 * h, y + h * (a31 * k1 + a32 * k2));
            const double k4 = rhs(s + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
            const double k5 = rhs(s + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            const double k6 =
                rhs(s + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            const double y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
            const double k7 = rhs(s + h, y1);

            const double err_abs = std::fabs(h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));
            const double scale = opt.abs_tol + opt.rel_tol * std::max(std::fabs(y), std::fabs(y1));
            const double err = err_abs / scale;
            if (!std::isfinite(y1) || !std::isfinite(err)) {
                h *= 0.25;
                continue;
            }

            if (err <= 1.0) {
                Step st;
                st.s0 = s;
                st.h = h;
                const double ydiff = y1 - y;
                const double bspl = h * k1 - ydiff;
                st.r = {y, ydiff, bspl, ydiff - h * k7 - bspl,
                        h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7)};
                steps_.push_back(st);
                s_start_list_.push_back(s);
                y_start_.push_back(y);
                s = (s + h >= s_end_) ? s_end_ : s + h;
                y = y1;
                k1 = k7;
                // PI step-size controller.
                const double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) *
                                   std::pow(err_prev, 0.4 / 5.0);
                h *= std::clamp(fac, 0.2, 5.0);
                err_prev = std::max(err, 1e-4);
            } else {
                h *= std::max(0.2, 0.9 * std::pow(err, -1.0 / 5.0));
            }
        }
        y_end_ = y;
        if (steps_.empty()) fail("empty integration range", s_start_);
    }

    [[noreturn]] void fail(const char* what, double s) const {
        std::ostringstream os;
        os << "ode curve construction failed: " << what << " at x1 = " << std::exp(s);
        throw CurveConstructionError(os.str());
    }

    DensityModel f1_, f2_;
    std::vector<Step> steps_;
    std::vector<double> s_start_list_;
    std::vector<double> y_start_;
    double s_start_ = 0.0, s_end_ = 0.0, y_end_ = 0.0;
};

}  // namespace

CurvePtr make_ode_curve(const DensityModel& f1, const DensityModel& f2, const OdeOptions& options) {
    return std::make_shared<OdeCurve>(f1, f2, options);
}

}  // namespace lincoup::detail
