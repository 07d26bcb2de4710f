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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "lincoup/marginal_models.hpp"
#include "lincoup/numerics.hpp"
#include "support/oracles.hpp"

namespace lincoup {
namespace {

using testing::oracle;
using testing::rel_err;

std::vector<DensityModel> builtins() {
    return {DensityModel::exponential(1.0), DensityModel::gamma(2.0, 1.0), DensityModel::weibull(2.0, 1.0),
            DensityModel::lognormal(0.0, 1.0), DensityModel::half_normal(1.0)};
}

DensityModel wavy() {
    return DensityModel::user([](double x) { return std::exp(-x) * (2.0 + std::sin(x)); }, "wavy");
}

TEST(Marginals, OracleValues) {
    EXPECT_LT(rel_err(DensityModel::exponential(1).pdf(0.693147), oracle("marginals", "exp1_pdf_ln2")), 1e-14);
    EXPECT_LT(rel_err(DensityModel::weibull(2, 1).pdf(1.0), oracle("marginals", "weibull2_pdf_1")), 1e-14);
    EXPECT_LT(rel_err(DensityModel::gamma(2, 1).pdf(1.0), oracle("marginals", "gamma2_pdf_1")), 1e-14);
    EXPECT_LT(rel_err(DensityModel::exponential(1).cdf(std::log(2.0)), oracle("marginals", "exp1_cdf_ln2")), 1e-14);
    EXPECT_LT(rel_err(DensityModel::weibull(2, 1).cdf(1.0), oracle("marginals", "weibull2_cdf_1")), 1e-14);
    EXPECT_LT(rel_err(DensityModel::exponential(1).quantile(0.5), oracle("marginals", "exp1_quantile_half")), 1e-14);
    EXPECT_LT(rel_err(DensityModel::exponential(1).quantile(0.25), oracle("marginals", "exp1_quantile_quarter")),
              1e-14);
    EXPECT_LT(rel_err(DensityModel::weibull(2, 1).quantile(0.5), oracle("marginals", "weibull2_quantile_half")),
              1e-14);
}

TEST(Marginals, LinFunction) {
    EXPECT_NEAR(DensityModel::exponential(1).lin(3.0), oracle("marginals", "exp1_lin_3"), 1e-13);
    EXPECT_NEAR(DensityModel::gamma(2, 1).lin(1.0), oracle("marginals", "gamma2_lin_1"), 1e-13);
    EXPECT_NEAR(DensityModel::lognormal(0, 1).lin(std::numbers::e), oracle("marginals", "lognormal01_lin_e"), 1e-13);
}

TEST(Marginals, QuantileInvertsCdfForAllFamilies) {
    for (const auto& m : builtins()) {
        for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.9, 0.999999}) {
            const double x = m.quantile(p);
            EXPECT_LT(rel_err(m.cdf(x), p), 1e-11) << m.name() << " p=" << p;
        }
        for (double q : {1e-14, 1e-8, 1e-3}) {
            const double x = m.upper_quantile(q);
            EXPECT_LT(rel_err(m.survival(x), q), 1e-10) << m.name() << " q=" << q;
        }
    }
}

TEST(Marginals, DerivativesAgreeWithFiniteDifferences) {
    for (const auto& m : builtins()) {
        for (double x : {0.3, 1.0, 2.5}) {
            const double fd = numerics::derivative_five_point_richardson([&](double t) { return m.pdf(t); }, x, 1e-3);
            EXPECT_NEAR(m.pdf_derivative(x), fd, 1e-8 * (1.0 + std::fabs(fd))) << m.name() << " x=" << x;
            EXPECT_NEAR(m.log_pdf_derivative(x) * m.pdf(x), m.pdf_derivative(x), 1e-12) << m.name();
        }
    }
}

TEST(Marginals, DensitiesIntegrateToOne) {
    for (const auto& m : builtins()) {
        const double lo = m.quantile(1e-15), hi = m.upper_quantile(1e-15);
        auto f = [&](double u) { return m.pdf(std::exp(u)) * std::exp(u); };
        EXPECT_NEAR(numerics::integrate_pieces(f, std::log(lo), std::log(hi), 32), 1.0, 1e-10) << m.name();
    }
}

TEST(Marginals, UserDensityIsNormalised) {
    const DensityModel w = wavy();
    EXPECT_LT(rel_err(w.cdf(1.0), oracle("marginals", "user_wavy_cdf_1")), 1e-9);
    EXPECT_NEAR(w.cdf(w.quantile(0.7)), 0.7, 1e-10);
    EXPECT_FALSE(w.has_analytic_derivative());
    EXPECT_THROW(w.spec(), std::logic_error);
}

TEST(Marginals, DomainErrors) {
    const auto e = DensityModel::exponential(1.0);
    EXPECT_THROW(e.pdf(0.0), std::domain_error);
    EXPECT_THROW(e.pdf(-1.0), std::domain_error);
    EXPECT_THROW(e.quantile(0.0), std::domain_error);
    EXPECT_THROW(e.quantile(1.0), std::domain_error);
    EXPECT_THROW(DensityModel::gamma(-1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(DensityModel::from_spec({Family::Weibull, {2.0, 1.0, 3.0}}), std::invalid_argument);
}

TEST(Marginals, SpecRoundTrip) {
    for (const auto& m : builtins()) {
        const FamilySpec s = m.spec();
        EXPECT_EQ(parse_family(family_name(s.family)), s.family);
        const DensityModel back = DensityModel::from_spec(s);
        EXPECT_EQ(back.pdf(1.3), m.pdf(1.3));
    }
    EXPECT_THROW(parse_family("cauchy"), std::invalid_argument);
}

TEST(Marginals, LinConditionHeuristic) {
    const LinConditionReport exp_report = check_lin_condition(DensityModel::exponential(1.0), 0.1);
    EXPECT_TRUE(exp_report.monotone);
    EXPECT_EQ(exp_report.violations, 0u);
    // L = x (1 - cos x / (2 + sin x)) falls near x = 3 pi / 2 + 2 pi k.
    const LinConditionReport wavy_report = check_lin_condition(wavy(), 1.0, LinGrid{30.0, 3000, 1e-12});
    EXPECT_FALSE(wavy_report.monotone);
    EXPECT_GT(wavy_report.violations, 0u);
}

}  // namespace
}  // namespace lincoup
