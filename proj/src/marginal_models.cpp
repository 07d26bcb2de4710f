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

#include "lincoup/marginal_models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "lincoup/numerics.hpp"

namespace lincoup {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

void require_positive_x(double x) {
    if (!(x > 0.0)) throw std::domain_error("density argument must be > 0");
}

void require_probability(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("probability must lie in (0, 1)");
}

void require_param(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

std::string format_params(std::string_view family, std::span<const double> params) {
    std::ostringstream os;
    os << family << '(';
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i) os << ", ";
        os << params[i];
    }
    os << ')';
    return os.str();
}

}  // namespace

std::string_view family_name(Family family) {
    switch (family) {
        case Family::Exponential:
            return "exponential";
        case Family::Gamma:
            return "gamma";
        case Family::Weibull:
            return "weibull";
        case Family::Lognormal:
            return "lognormal";
        case Family::HalfNormal:
            return "half-normal";
        case Family::User:
            return "user";
    }
    return "user";
}

Family parse_family(std::string_view name) {
    for (Family f : {Family::Exponential, Family::Gamma, Family::Weibull, Family::Lognormal,
                     Family::HalfNormal}) {
        if (name == family_name(f)) return f;
    }
    throw std::invalid_argument("unknown density family '" + std::string(name) + "'");
}

class DensityModel::Impl {
public:
    Impl(Family family, std::vector<double> params) : family(family), params(std::move(params)) {}
    virtual ~Impl() = default;

    virtual double log_pdf(double x) const = 0;
    virtual double pdf(double x) const { return std::exp(log_pdf(x)); }
    virtual double dlog(double x) const = 0;
    virtual double cdf(double x) const = 0;
    virtual double sf(double x) const = 0;
    virtual double quantile(double p) const = 0;
    virtual double upper_quantile(double q) const = 0;
    virtual double lin(double x) const { return -x * dlog(x); }
    virtual std::string name() const { return format_params(family_name(family), params); }

    Family family;
    std::vector<double> params;
};

namespace {

class Exponential final : public DensityModel::Impl {
public:
    explicit Exponential(double rate) : Impl(Family::Exponential, {rate}), rate_(rate) {
        require_param(rate > 0.0, "exponential rate must be > 0");
    }
    double log_pdf(double x) const override { return std::log(rate_) - rate_ * x; }
    double dlog(double) const override { return -rate_; }
    double cdf(double x) const override { return -std::expm1(-rate_ * x); }
    double sf(double x) const override { return std::exp(-rate_ * x); }
    double quantile(double p) const override { return -std::log1p(-p) / rate_; }
    double upper_quantile(double q) const override { return -std::log(q) / rate_; }
    double lin(double x) const override { return rate_ * x; }

private:
    double rate_;
};

class Gamma final : public DensityModel::Impl {
public:
    Gamma(double shape, double rate) : Impl(Family::Gamma, {shape, rate}), shape_(shape), rate_(rate) {
        require_param(shape > 0.0 && rate > 0.0, "gamma shape and rate must be > 0");
        log_norm_ = shape_ * std::log(rate_) - std::lgamma(shape_);
    }
    double log_pdf(double x) const override {
        return log_norm_ + (shape_ - 1.0) * std::log(x) - rate_ * x;
    }
    double dlog(double x) const override { return (shape_ - 1.0) / x - rate_; }
    double cdf(double x) const override { return boost::math::gamma_p(shape_, rate_ * x); }
    double sf(double x) const override { return boost::math::gamma_q(shape_, rate_ * x); }
    double quantile(double p) const override { return boost::math::gamma_p_inv(shape_, p) / rate_; }
    double upper_quantile(double q) const override {
        return boost::math::gamma_q_inv(shape_, q) / rate_;
    }
    double lin(double x) const override { return rate_ * x - shape_ + 1.0; }

private:
    double shape_, rate_, log_norm_;
};

class Weibull final : public DensityModel::Impl {
public:
    Weibull(double shape, double scale)
        : Impl(Family::Weibull, {shape, scale}), shape_(shape), scale_(scale) {
        require_param(shape > 0.0 && scale > 0.0, "weibull shape and scale must be > 0");
    }
    double log_pdf(double x) const override {
        const double u = x / scale_;
        return std::log(shape_ / scale_) + (shape_ - 1.0) * std::log(u) - std::pow(u, shape_);
    }
    double dlog(double x) const override {
        return ((shape_ - 1.0) - shape_ * std::pow(x / scale_, shape_)) / x;
    }
    double cdf(double x) const override { return -std::expm1(-std::pow(x / scale_, shape_)); }
    double sf(double x) const override { return std::exp(-std::pow(x / scale_, shape_)); }
    double quantile(double p) const override {
        return scale_ * std::pow(-std::log1p(-p), 1.0 / shape_);
    }
    double upper_quantile(double q) const override {
        return scale_ * std::pow(-std::log(q), 1.0 / shape_);
    }
    double lin(double x) const override {
        return -(shape_ - 1.0) + shape_ * std::pow(x / scale_, shape_);
    }

private:
    double shape_, scale_;
};

class Lognormal final : public DensityModel::Impl {
public:
    Lognormal(double mu, double sigma) : Impl(Family::Lognormal, {mu, sigma}), mu_(mu), sigma_(sigma) {
        require_param(sigma > 0.0 && std::isfinite(mu), "lognormal sigma must be > 0");
    }
    double log_pdf(double x) const override {
        const double lx = std::log(x);
        const double u = (lx - mu_) / sigma_;
        return -lx - std::log(sigma_) - 0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * u * u;
    }
    double dlog(double x) const override {
        return -(1.0 + (std::log(x) - mu_) / (sigma_ * sigma_)) / x;
    }
    double cdf(double x) const override {
        return 0.5 * std::erfc(-(std::log(x) - mu_) / (sigma_ * kSqrt2));
    }
    double sf(double x) const override {
        return 0.5 * std::erfc((std::log(x) - mu_) / (sigma_ * kSqrt2));
    }
    double quantile(double p) const override {
        return std::exp(mu_ - sigma_ * kSqrt2 * boost::math::erfc_inv(2.0 * p));
    }
    double upper_quantile(double q) const override {
        return std::exp(mu_ + sigma_ * kSqrt2 * boost::math::erfc_inv(2.0 * q));
    }
    double lin(double x) const override { return 1.0 + (std::log(x) - mu_) / (sigma_ * sigma_); }

private:
    double mu_, sigma_;
};

class HalfNormal final : public DensityModel::Impl {
public:
    explicit HalfNormal(double sigma) : Impl(Family::HalfNormal, {sigma}), sigma_(sigma) {
        require_param(sigma > 0.0, "half-normal sigma must be > 0");
    }
    double log_pdf(double x) const override {
        const double u = x / sigma_;
        return 0.5 * std::log(2.0 / std::numbers::pi) - std::log(sigma_) - 0.5 * u * u;
    }
    double dlog(double x) const override { return -x / (sigma_ * sigma_); }
    double cdf(double x) const override { return std::erf(x / (sigma_ * kSqrt2)); }
    double sf(double x) const override { return std::erfc(x / (sigma_ * kSqrt2)); }
    double quantile(double p) const override {
        return p <= 0.5 ? sigma_ * kSqrt2 * boost::math::erf_inv(p)
                        : sigma_ * kSqrt2 * boost::math::erfc_inv(1.0 - p);
    }
    double upper_quantile(double q) const override {
        return sigma_ * kSqrt2 * boost::math::erfc_inv(q);
    }
    double lin(double x) const override { return (x * x) / (sigma_ * sigma_); }

private:
    double sigma_;
};

// Panels [0, 2^kMinExp], [2^k, 2^(k+1)], ... out to where the remaining mass
// is negligible. Panel integrals and both cumulative sums are computed once.
class UserDensity final : public DensityModel::Impl {
public:
    UserDensity(std::function<double(double)> f, std::string label)
        : Impl(Family::User, {}), f_(std::move(f)), label_(std::move(label)) {
        if (!f_) throw std::invalid_argument("user density function is empty");
        edges_.push_back(0.0);
        edges_.push_back(std::ldexp(1.0, kMinExp));
        panel_.push_back(raw_integral(0.0, edges_.back()));
        double total = panel_.back();
        int small_run = 0;
        for (int k = kMinExp; k < kMaxExp; ++k) {
            const double lo = std::ldexp(1.0, k);
            const double hi = std::ldexp(1.0, k + 1);
            const double mass = raw_integral(lo, hi);
            edges_.push_back(hi);
            panel_.push_back(mass);
            total += mass;
            small_run = (k >= 2 && mass <= 1e-18 * total) ? small_run + 1 : 0;
            if (small_run >= 3) break;
        }
        if (!(total > 0.0) || !std::isfinite(total)) {
            throw std::invalid_argument("user density has no finite positive mass");
        }
        mass_ = total;
        const std::size_t n = panel_.size();
        cum_left_.assign(n + 1, 0.0);
        cum_right_.assign(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) cum_left_[i + 1] = cum_left_[i] + panel_[i] / mass_;
        for (std::size_t i = n; i-- > 0;) cum_right_[i] = cum_right_[i + 1] + panel_[i] / mass_;
    }

    double pdf(double x) const override {
        const double v = f_(x);
        if (!(v > 0.0)) throw std::domain_error("user density must be positive on (0, inf)");
        return v / mass_;
    }
    double log_pdf(double x) const override { return std::log(pdf(x)); }
    double dlog(double x) const override {
        const double h = 0.1 * x;
        const double df = numerics::derivative_ridders(f_, x, h);
        return df / f_(x);
    }
    double cdf(double x) const override {
        const std::size_t i = panel_index(x);
        if (i >= panel_.size()) return 1.0;
        return std::min(1.0, cum_left_[i] + raw_integral(edges_[i], x) / mass_);
    }
    double sf(double x) const override {
        const std::size_t i = panel_index(x);
        if (i >= panel_.size()) return 0.0;
        return std::min(1.0, cum_right_[i + 1] + raw_integral(x, edges_[i + 1]) / mass_);
    }
    double quantile(double p) const override {
        if (p > 0.5) return upper_quantile(1.0 - p);
        const auto it = std::upper_bound(cum_left_.begin(), cum_left_.end(), p);
        const std::size_t i = std::min<std::size_t>(
            static_cast<std::size_t>(it - cum_left_.begin()) - 1, panel_.size() - 1);
        auto g = [&](double x) { return cdf(x) - p; };
        return numerics::brent(g, std::max(edges_[i], 1e-300), edges_[i + 1]);
    }
    double upper_quantile(double q) const override {
        // cum_right_ is decreasing; find the last panel whose right tail mass is >= q.
        std::size_t i = 0;
        while (i + 1 < panel_.size() && cum_right_[i + 1] >= q) ++i;
        auto g = [&](double x) { return q - sf(x); };
        return numerics::brent(g, std::max(edges_[i], 1e-300), edges_[i + 1]);
    }
    std::string name() const override { return label_; }

private:
    static constexpr int kMinExp = -30;
    static constexpr int kMaxExp = 60;

    double raw_integral(double a, double b) const {
        return numerics::integrate(f_, a, b, 0.0, 1e-13);
    }
    std::size_t panel_index(double x) const {
        const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
        return static_cast<std::size_t>(it - edges_.begin()) - 1;
    }

    std::function<double(double)> f_;
    std::string label_;
    double mass_ = 1.0;
    std::vector<double> edges_, panel_, cum_left_, cum_right_;
};

}  // namespace

DensityModel DensityModel::exponential(double rate) {
    return DensityModel(std::make_shared<Exponential>(rate));
}
DensityModel DensityModel::gamma(double shape, double rate) {
    return DensityModel(std::make_shared<Gamma>(shape, rate));
}
DensityModel DensityModel::weibull(double shape, double scale) {
    return DensityModel(std::make_shared<Weibull>(shape, scale));
}
DensityModel DensityModel::lognormal(double mu, double sigma) {
    return DensityModel(std::make_shared<Lognormal>(mu, sigma));
}
DensityModel DensityModel::half_normal(double sigma) {
    return DensityModel(std::make_shared<HalfNormal>(sigma));
}
DensityModel DensityModel::user(std::function<double(double)> density, std::string label) {
    return DensityModel(std::make_shared<UserDensity>(std::move(density), std::move(label)));
}

DensityModel DensityModel::from_spec(const FamilySpec& spec) {
    const auto& p = spec.params;
    auto param = [&](std::size_t i, double fallback) { return i < p.size() ? p[i] : fallback; };
    auto require_count = [&](std::size_t lo, std::size_t hi) {
        if (p.size() < lo || p.size() > hi) {
            throw std::invalid_argument(std::string(family_name(spec.family)) +
                                        ": wrong number of parameters");
        }
    };
    switch (spec.family) {
        case Family::Exponential:
            require_count(0, 1);
            return exponential(param(0, 1.0));
        case Family::Gamma:
            require_count(1, 2);
            return gamma(param(0, 1.0), param(1, 1.0));
        case Family::Weibull:
            require_count(1, 2);
            return weibull(param(0, 1.0), param(1, 1.0));
        case Family::Lognormal:
            require_count(0, 2);
            return lognormal(param(0, 0.0), param(1, 1.0));
        case Family::HalfNormal:
            require_count(0, 1);
            return half_normal(param(0, 1.0));
        case Family::User:
            break;
    }
    throw std::invalid_argument("user densities cannot be built from a record");
}

Family DensityModel::family() const { return impl_->family; }
std::span<const double> DensityModel::params() const { return impl_->params; }

FamilySpec DensityModel::spec() const {
    if (family() == Family::User) throw std::logic_error("user densities have no record form");
    return {impl_->family, impl_->params};
}

std::string DensityModel::name() const { return impl_->name(); }

double DensityModel::pdf(double x) const {
    require_positive_x(x);
    return impl_->pdf(x);
}
double DensityModel::log_pdf(double x) const {
    require_positive_x(x);
    return impl_->log_pdf(x);
}
double DensityModel::pdf_derivative(double x) const {
    require_positive_x(x);
    return impl_->pdf(x) * impl_->dlog(x);
}
double DensityModel::log_pdf_derivative(double x) const {
    require_positive_x(x);
    return impl_->dlog(x);
}
double DensityModel::cdf(double x) const {
    require_positive_x(x);
    return impl_->cdf(x);
}
double DensityModel::survival(double x) const {
    require_positive_x(x);
    return impl_->sf(x);
}
double DensityModel::quantile(double p) const {
    require_probability(p);
    return impl_->quantile(p);
}
double DensityModel::upper_quantile(double q) const {
    require_probability(q);
    return impl_->upper_quantile(q);
}
double DensityModel::lin(double x) const {
    require_positive_x(x);
    return impl_->lin(x);
}

LinConditionReport check_lin_condition(const DensityModel& model, double x0, const LinGrid& grid) {
    if (!(x0 > 0.0) || !(grid.x_max > x0) || grid.points < 2) {
        throw std::domain_error("check_lin_condition: need 0 < x0 < x_max and >= 2 points");
    }
    LinConditionReport report;
    report.x0 = x0;
    report.x_max = grid.x_max;
    const auto xs = numerics::log_space(x0, grid.x_max, grid.points);
    double prev = model.lin(xs.front());
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const double cur = model.lin(xs[i]);
        const double slack = grid.tolerance * (1.0 + std::fabs(prev));
        if (cur < prev - slack) {
            if (report.violations++ == 0) report.first_violation_x = xs[i];
            report.monotone = false;
        } else if (std::fabs(cur - prev) <= slack) {
            ++report.ties;
        }
        prev = cur;
    }
    report.lin_at_x_max = prev;
    report.note =
        "grid heuristic: checks a nondecreasing Lin function on sampled points and reports its "
        "value at x_max; it does not prove monotonicity or divergence";
    return report;
}

}  // namespace lincoup
