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
#include <memory>
#include <numbers>

#include "lincoup/numerics.hpp"
#include "lincoup/perturbation.hpp"
#include "support/oracles.hpp"

namespace lincoup {
namespace {

using testing::oracle;
using testing::rel_err;
constexpr double kPi = std::numbers::pi;

const nlohmann::json& pert() { return testing::oracles().at("perturbation"); }

std::shared_ptr<const ProductDensityModel> product(const DensityModel& a, const DensityModel& b) {
    return std::make_shared<const ProductDensityModel>(a, b, build_curve(a, b, CurveMethod::QuantileTransport));
}

const DensityModel kExp = DensityModel::exponential(1.0);

// Identical exponentials, a = 1, b = 2, delta = 0.1, epsilon = 0.01, nu = 200 pi.
struct Reference : ::testing::Test {
    std::shared_ptr<const ProductDensityModel> prod = product(kExp, kExp);
    PerturbationSpec spec = derive_spec(prod->curve(), 1.0, 2.0, 0.1, 0.01, 200 * kPi);
};

TEST(SmoothStep, Properties) {
    EXPECT_EQ(smooth_step(-0.1), 0.0);
    EXPECT_EQ(smooth_step(0.0), 0.0);
    EXPECT_EQ(smooth_step(1.0), 1.0);
    EXPECT_NEAR(smooth_step(0.5), 0.5, 1e-16);
    for (double x : {0.05, 0.2, 0.37, 0.8, 0.99}) {
        EXPECT_NEAR(smooth_step(x) + smooth_step(1.0 - x), 1.0, 1e-15);
        const double fd = numerics::derivative_five_point_richardson(smooth_step, x, 1e-4);
        EXPECT_NEAR(smooth_step_derivative(x), fd, 1e-8 * (1.0 + fd)) << x;
    }
    EXPECT_EQ(smooth_step_derivative(0.0), 0.0);
    EXPECT_EQ(smooth_step_derivative(1.0), 0.0);
}

TEST(Bump, OracleValuesAndSupport) {
    const BumpFunction tau(4.0, 0.1, 0.01, 200 * kPi);
    EXPECT_NEAR(tau.value(3.85), pert()["tau_3p85"].get<double>(), 1e-20);
    EXPECT_LT(rel_err(tau.value(3.85 + 1.0 / 800), pert()["tau_3p85_eighth"].get<double>()), 1e-10);
    EXPECT_LT(rel_err(tau.value(3.7213), pert()["tau_bridge_3p7213"].get<double>()), 1e-9);
    EXPECT_LT(rel_err(tau.value(3.9687), pert()["tau_bridge_3p9687"].get<double>()), 1e-9);
    EXPECT_EQ(tau.value(3.7), 0.0);
    EXPECT_EQ(tau.value(4.0), 0.0);
    EXPECT_EQ(tau.value(3.5), 0.0);
    EXPECT_EQ(tau.envelope(3.82), 1.0);
    for (double z : {3.71, 3.75, 3.85, 3.95, 3.99}) {
        const double fd = numerics::derivative_five_point_richardson([&](double w) { return tau.value(w); }, z, 1e-6);
        EXPECT_NEAR(tau.derivative(z), fd, 1e-7 * (1.0 + std::fabs(fd))) << z;
    }
    EXPECT_THROW(BumpFunction(4.0, 0.0, 0.01, 1.0), std::invalid_argument);
    EXPECT_THROW(BumpFunction(4.0, 0.1, -0.01, 1.0), std::invalid_argument);
}

TEST_F(Reference, Geometry) {
    const auto& ee = pert()["ee_spec"];
    EXPECT_DOUBLE_EQ(spec.s, ee["s"].get<double>());
    EXPECT_DOUBLE_EQ(spec.t, ee["t"].get<double>());
    EXPECT_NEAR(spec.b_prime, ee["b_prime"].get<double>(), 1e-13);
    EXPECT_NEAR(spec.d, ee["d"].get<double>(), 1e-13);
    EXPECT_NEAR(spec.a_prime, ee["a_prime"].get<double>(), 1e-13);
    EXPECT_DOUBLE_EQ(spec.window_lo(), 3.7);

    const DensityModel w = DensityModel::weibull(2.0, 1.0);
    const auto ew_prod = product(kExp, w);
    const PerturbationSpec ew = derive_spec(ew_prod->curve(), 1.0, 4.0, 0.1, 0.0, 1.0);
    const auto& o = pert()["ew_spec"];
    EXPECT_NEAR(ew.t, o["t"].get<double>(), 1e-12);
    EXPECT_NEAR(ew.b_prime, o["b_prime"].get<double>(), 1e-10);
    EXPECT_NEAR(ew.d, o["d"].get<double>(), 1e-10);
    EXPECT_NEAR(ew.a_prime, o["a_prime"].get<double>(), 1e-10);
}

TEST_F(Reference, DeriveSpecRejectsBadRectangles) {
    EXPECT_THROW(derive_spec(prod->curve(), 1.0, 2.0, 1.1, 0.01, 1.0), InfeasibleSpecError);
    EXPECT_THROW(derive_spec(prod->curve(), 2.0, 1.0, 0.1, 0.01, 1.0), std::invalid_argument);
    EXPECT_THROW(derive_spec(prod->curve(), 1.0, 2.0, -0.1, 0.01, 1.0), std::invalid_argument);
    EXPECT_THROW(derive_spec(prod->curve(), 1.0, 2.0, 0.1, 0.01, 0.0), std::invalid_argument);
}

TEST_F(Reference, FeasibilityBounds) {
    const FeasibilityReport z = validate_spec(spec, *prod, Interpretation::ZDensity);
    EXPECT_LT(rel_err(z.epsilon_max_uniform, pert()["eps_uniform_z"].get<double>()), 1e-9);
    EXPECT_LT(rel_err(z.epsilon_max_curve, pert()["eps_exact_z"].get<double>()), 1e-9);
    EXPECT_LT(rel_err(z.epsilon_max_transfer, pert()["eps_mu3_z"].get<double>()), 1e-9);
    EXPECT_DOUBLE_EQ(z.epsilon_max, std::min(z.epsilon_max_curve, z.epsilon_max_transfer));
    EXPECT_TRUE(z.feasible);

    const FeasibilityReport x = validate_spec(spec, *prod, Interpretation::X1Density);
    EXPECT_LT(rel_err(x.epsilon_max_uniform, pert()["eps_uniform_x1"].get<double>()), 1e-9);
    EXPECT_LT(rel_err(x.epsilon_max_curve, pert()["eps_exact_x1"].get<double>()), 1e-9);
    EXPECT_LT(rel_err(x.epsilon_max_transfer, pert()["eps_mu3_x1"].get<double>()), 1e-9);

    PerturbationSpec big = spec;
    big.epsilon = 2.0 * z.epsilon_max;
    EXPECT_FALSE(validate_spec(big, *prod, Interpretation::ZDensity).feasible);
    EXPECT_THROW(PerturbedMeasure(big, prod, Interpretation::ZDensity), InfeasibleSpecError);
}

TEST_F(Reference, PlateauLinValues) {
    const auto& lp = pert()["lin_points"];
    const double zp = lp["z_plus"].get<double>(), zm = lp["z_minus"].get<double>();
    for (auto [interp, key] : {std::pair{Interpretation::ZDensity, "z_density"},
                               std::pair{Interpretation::X1Density, "x1_density"}}) {
        const PerturbedMeasure m(spec, prod, interp);
        EXPECT_LT(rel_err(m.density(zp), lp[key]["g_plus"].get<double>()), 1e-10) << key;
        EXPECT_LT(rel_err(m.lin(zp), lp[key]["L_plus"].get<double>()), 1e-7) << key;
        EXPECT_LT(rel_err(m.lin(zm), lp[key]["L_minus"].get<double>()), 1e-7) << key;
    }
}

TEST_F(Reference, MassAndCdf) {
    const PerturbedMeasure z(spec, prod, Interpretation::ZDensity);
    EXPECT_LT(rel_err(z.component_mass(), pert()["mass_z"].get<double>()), 1e-10);
    EXPECT_LT(rel_err(z.cdf(3.0), pert()["G1_3_z"].get<double>()), 1e-12);
    EXPECT_LT(rel_err(z.cdf(3.85), pert()["G1_3p85_z"].get<double>()), 1e-12);
    EXPECT_NEAR(z.cdf_change(z.z_lo()), 0.0, 1e-16);
    EXPECT_NEAR(z.cdf_change(z.z_hi()), 0.0, 1e-15);
    // Away from the zeros of sin^2, where the cumulative table is flat to third order.
    EXPECT_NEAR(z.inverse_cumulative(z.cumulative(3.8013)), 3.8013, 1e-12);

    const PerturbedMeasure x(spec, prod, Interpretation::X1Density);
    EXPECT_LT(rel_err(x.component_mass(), pert()["mass_x1"].get<double>()), 1e-10);
}

TEST_F(Reference, CdfDerivativeIsDensity) {
    for (auto interp : {Interpretation::ZDensity, Interpretation::X1Density}) {
        const PerturbedMeasure m(spec, prod, interp);
        for (double z : {1.05, 1.5, 2.0, 2.1, 3.75, 3.85, 3.97}) {
            const double fd = numerics::derivative_five_point_richardson([&](double w) { return m.cdf(w); }, z, 1e-5);
            EXPECT_LT(rel_err(fd, m.density(z)), 1e-6) << z;
        }
    }
}

TEST_F(Reference, ChangeCarriesNoMass) {
    for (auto interp : {Interpretation::ZDensity, Interpretation::X1Density}) {
        const PerturbedMeasure m(spec, prod, interp);
        const double total = numerics::integrate_pieces([&](double z) { return m.density_change(z); }, spec.s,
                                                        spec.t, 3000, 1e-16, 1e-10);
        EXPECT_NEAR(total, 0.0, 1e-12);
        EXPECT_EQ(m.density_change(0.9), 0.0);
        EXPECT_EQ(m.density_change(4.1), 0.0);
    }
}

TEST_F(Reference, MarginalsArePreserved) {
    const PerturbedMeasure m(spec, prod, Interpretation::ZDensity);
    // Matched projections of the components.
    for (double y : numerics::lin_space(1.0, 2.0, 41)) {
        EXPECT_NEAR(m.h2(y), m.h3(y), 1e-14) << y;
        EXPECT_NEAR(m.h4(y), m.h1(y), 1e-14) << y;
    }
    for (double x : numerics::lin_space(1.0, 2.0, 41)) {
        EXPECT_NEAR(m.w2(x), m.w1(x), 1e-14) << x;
        EXPECT_NEAR(m.w4(x), m.w3(x), 1e-14) << x;
        EXPECT_NEAR(m.x1_projection(x), kExp.pdf(x), 1e-14) << x;
        EXPECT_NEAR(m.x2_projection(x), kExp.pdf(x), 1e-14) << x;
    }
    auto integral = [&](auto f, double lo, double hi) { return numerics::integrate_pieces(f, lo, hi, 64, 1e-15, 1e-11); };
    const double mass = m.component_mass();
    EXPECT_LT(rel_err(integral([&](double x) { return m.w1(x); }, spec.b_prime, spec.b), mass), 1e-9);
    EXPECT_LT(rel_err(integral([&](double x) { return m.w3(x); }, spec.a, spec.a_prime), mass), 1e-9);
    EXPECT_LT(rel_err(integral([&](double y) { return m.h1(y); }, spec.phi_b_prime, spec.phi_b), mass), 1e-9);
    EXPECT_LT(rel_err(integral([&](double y) { return m.h2(y); }, spec.phi_a, spec.phi_a_prime), mass), 1e-9);
}

TEST_F(Reference, ArcIntersections) {
    const PerturbedMeasure m(spec, prod, Interpretation::ZDensity);
    const ArcIntersections on_window = m.arc_hyperbola_intersection(3.85);
    EXPECT_TRUE(on_window.l1.hit);
    EXPECT_NEAR(on_window.l1.x1, std::sqrt(3.85), 1e-13);
    EXPECT_FALSE(on_window.shifted_arcs_hit());
    const ArcIntersections low = m.arc_hyperbola_intersection(2.0);
    EXPECT_TRUE(low.l2.hit);
    EXPECT_TRUE(low.l4.hit);
    EXPECT_NEAR(low.l2.x1 * low.l2.x2, 2.0, 1e-12);
    EXPECT_NEAR(low.l4.x1 * low.l4.x2, 2.0, 1e-12);
    EXPECT_NEAR(low.l2.x2, low.l2.x1 - spec.d, 1e-12);
}

TEST_F(Reference, ZeroEpsilonCollapses) {
    PerturbationSpec flat = spec;
    flat.epsilon = 0.0;
    for (auto interp : {Interpretation::ZDensity, Interpretation::X1Density}) {
        const PerturbedMeasure m(flat, prod, interp);
        EXPECT_EQ(m.component_mass(), 0.0);
        for (double z : numerics::lin_space(0.8, 4.2, 301)) {
            EXPECT_EQ(m.density(z), prod->density(z)) << z;
            EXPECT_EQ(m.lin(z), prod->lin(z)) << z;
            EXPECT_EQ(m.cdf(z), prod->cdf(z)) << z;
        }
    }
}

TEST_F(Reference, ExtremaMatchDenseScan) {
    const PerturbedMeasure m(spec, prod, Interpretation::ZDensity);
    const OscillationExtrema ex = oscillation_extrema(m);
    EXPECT_FALSE(ex.undersampled);
    double lo = 1e300, hi = -1e300;
    for (double z : numerics::lin_space(spec.plateau_lo(), spec.plateau_hi(), 20001)) {
        lo = std::min(lo, m.lin(z));
        hi = std::max(hi, m.lin(z));
    }
    EXPECT_LE(ex.min, lo + 1e-9 * std::fabs(lo));
    EXPECT_GE(ex.max, hi - 1e-9 * std::fabs(hi));
    EXPECT_NEAR(ex.min, lo, 1e-3 * std::fabs(lo));
    EXPECT_NEAR(ex.max, hi, 1e-3 * std::fabs(hi));
    EXPECT_NEAR(m.lin(ex.argmin), ex.min, 1e-9 * std::fabs(ex.min));
}

TEST(RectangleSequence, MeetsTargetsInBothReadings) {
    const auto prod = product(kExp, kExp);
    for (auto interp : {Interpretation::ZDensity, Interpretation::X1Density}) {
        RectangleSchedule s;
        s.count = 3;
        s.interpretation = interp;
        const RectangleSequence seq = build_rectangle_sequence(prod, s);
        ASSERT_EQ(seq.rectangles.size(), 3u);
        EXPECT_TRUE(seq.all_met());
        EXPECT_TRUE(seq.strictly_growing());
        for (const auto& r : seq.rectangles) {
            EXPECT_DOUBLE_EQ(r.spec.a, std::ldexp(1.0, static_cast<int>(r.n)));
            EXPECT_DOUBLE_EQ(r.target, 10.0 * static_cast<double>(r.n));
            EXPECT_LE(r.extrema.min, -r.target);
            EXPECT_GE(r.extrema.max, r.target);
            EXPECT_LE(r.spec.epsilon, r.feasibility.epsilon_max);
        }
    }
}

TEST(RectangleSequence, OverridesAndFailures) {
    const auto prod = product(kExp, kExp);
    RectangleSchedule s;
    s.count = 2;
    s.epsilon_override = 0.0;
    const RectangleSequence flat = build_rectangle_sequence(prod, s);
    EXPECT_FALSE(flat.all_met());
    for (const auto& r : flat.rectangles) {
        EXPECT_EQ(r.doublings, 0);
        // Without surgery the window only sees the unperturbed, bounded Lin function.
        EXPECT_NEAR(r.extrema.max, prod->lin(r.spec.plateau_hi()), 1e-6);
    }

    RectangleSchedule fixed;
    fixed.count = 1;
    fixed.nu_override = 40 * kPi;
    const RectangleSequence one = build_rectangle_sequence(prod, fixed);
    EXPECT_EQ(one.rectangles[0].spec.nu, 40 * kPi);
    EXPECT_EQ(one.rectangles[0].doublings, 0);

    RectangleSchedule overlap;
    overlap.count = 2;
    overlap.a = {1.0, 1.2};
    overlap.b = {2.0, 2.5};
    EXPECT_THROW(build_rectangle_sequence(prod, overlap), std::invalid_argument);

    RectangleSchedule too_big;
    too_big.count = 1;
    too_big.epsilon_override = 1.0;
    EXPECT_THROW(build_rectangle_sequence(prod, too_big), InfeasibleSpecError);
}

TEST(Interpretation, Names) {
    EXPECT_EQ(parse_interpretation("z"), Interpretation::ZDensity);
    EXPECT_EQ(parse_interpretation("x1-density"), Interpretation::X1Density);
    EXPECT_EQ(parse_interpretation(interpretation_name(Interpretation::ZDensity)), Interpretation::ZDensity);
    EXPECT_THROW(parse_interpretation("x2"), std::invalid_argument);
}

}  // namespace
}  // namespace lincoup
