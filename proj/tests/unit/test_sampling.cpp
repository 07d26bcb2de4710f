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
#include <cstdio>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "lincoup/measure.hpp"
#include "lincoup/sampling.hpp"
#include "lincoup/verification.hpp"
#include "support/oracles.hpp"

namespace lincoup {
namespace {

constexpr double kPi = std::numbers::pi;
const DensityModel kExp = DensityModel::exponential(1.0);
const DensityModel kWeib = DensityModel::weibull(2.0, 1.0);

std::shared_ptr<const ProductDensityModel> product(const DensityModel& a, const DensityModel& b) {
    return std::make_shared<const ProductDensityModel>(a, b, build_curve(a, b, CurveMethod::QuantileTransport));
}

AssembledMeasure one_rectangle(Interpretation interp, double eps_fraction = 0.9) {
    const auto prod = product(kExp, kExp);
    PerturbationSpec spec = derive_spec(prod->curve(), 1.0, 2.0, 0.1, 0.0, 40 * kPi);
    spec.epsilon = eps_fraction * validate_spec(spec, *prod, interp).epsilon_max;
    auto m = std::make_shared<const PerturbedMeasure>(spec, prod, interp);
    return AssembledMeasure(prod, interp, {m});
}

TEST(Kolmogorov, LimitingDistribution) {
    const auto& ks = testing::oracles().at("ks");
    EXPECT_NEAR(1.0 - kolmogorov_survival(1.0), ks["K_of_1"].get<double>(), 1e-14);
    EXPECT_NEAR(ks_critical_value(1, 0.01), ks["critical_1pct"].get<double>(), 1e-12);
    EXPECT_NEAR(ks_critical_value(10000, 0.01), ks["critical_1pct"].get<double>() / 100.0, 1e-14);
    // Both branches of the series meet smoothly.
    EXPECT_NEAR(kolmogorov_survival(1.18 - 1e-12), kolmogorov_survival(1.18 + 1e-12), 1e-11);
    EXPECT_NEAR(kolmogorov_survival(0.1), 1.0, 1e-15);
}

TEST(Sampling, DeterministicAndThreadIndependent) {
    const auto prod = product(kExp, kWeib);
    const SampleBatch a = sample_base(prod->curve(), kExp, 50000, 42, {4096, 1});
    const SampleBatch b = sample_base(prod->curve(), kExp, 50000, 42, {4096, 8});
    EXPECT_EQ(a.x1, b.x1);
    EXPECT_EQ(a.x2, b.x2);
    const SampleBatch c = sample_base(prod->curve(), kExp, 50000, 43, {4096, 8});
    EXPECT_NE(a.x1, c.x1);

    const AssembledMeasure m = one_rectangle(Interpretation::ZDensity);
    const SampleBatch p1 = sample_perturbed(m, 30000, 7, {1024, 1});
    const SampleBatch p2 = sample_perturbed(m, 30000, 7, {1024, 6});
    EXPECT_EQ(p1.x1, p2.x1);
    EXPECT_EQ(p1.x2, p2.x2);
    EXPECT_EQ(p1.component, p2.component);
}

TEST(Sampling, BaseDrawsLieOnTheCurve) {
    const auto prod = product(kExp, kWeib);
    const SampleBatch s = sample_base(prod->curve(), kExp, 2000, 1);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(s.x2[i], std::sqrt(s.x1[i]), 1e-8);
    const auto z = s.products();
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(z[i], s.x1[i] * s.x2[i]);
}

TEST(Sampling, PerturbedComponentsSitOnTheirArcs) {
    const AssembledMeasure m = one_rectangle(Interpretation::ZDensity);
    const PerturbationSpec& sp = m.rectangles()[0]->spec();
    const SampleBatch s = sample_perturbed(m, 200000, 3);
    std::size_t down = 0, up = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        switch (s.component[i]) {
            case SampleComponent::ShiftedDown:
                ++down;
                EXPECT_GE(s.x1[i], sp.b_prime - 1e-12);
                EXPECT_LE(s.x1[i], sp.b + 1e-12);
                EXPECT_NEAR(s.x2[i], s.x1[i] - sp.d, 1e-10);
                break;
            case SampleComponent::ShiftedUp:
                ++up;
                EXPECT_GE(s.x1[i], sp.a - 1e-12);
                EXPECT_LE(s.x1[i], sp.a_prime + 1e-12);
                EXPECT_NEAR(s.x2[i], s.x1[i] + sp.d, 1e-10);
                break;
            case SampleComponent::Curve:
                EXPECT_NEAR(s.x2[i], s.x1[i], 1e-10 * (1.0 + s.x1[i]));
                break;
        }
    }
    // Binomial counts around n * mass.
    const double mass = m.rectangles()[0]->component_mass();
    const double expect = 200000.0 * mass;
    EXPECT_NEAR(static_cast<double>(down), expect, 5.0 * std::sqrt(expect));
    EXPECT_NEAR(static_cast<double>(up), expect, 5.0 * std::sqrt(expect));
}

TEST(Verification, BaseAndPerturbedPass) {
    for (auto interp : {Interpretation::ZDensity, Interpretation::X1Density}) {
        const AssembledMeasure m = one_rectangle(interp);
        const SampleBatch s = sample_perturbed(m, 100000, 11);
        EXPECT_TRUE(ks_marginal_test(s, Axis::X1, kExp).pass);
        EXPECT_TRUE(ks_marginal_test(s, Axis::X2, kExp).pass);
        const ProductLawReport law = product_law_test(s, m);
        EXPECT_TRUE(law.ks.pass) << law.ks.statistic;
        EXPECT_TRUE(law.binned.pass) << law.binned.relative_l1;
        EXPECT_GT(law.binned.bins_used, 50u);
    }
}

TEST(Verification, StableAcrossSeeds) {
    // At the 1% level, 20 seeds may produce a couple of rejections by chance.
    const AssembledMeasure m = one_rectangle(Interpretation::ZDensity);
    int failing_seeds = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const SampleBatch s = sample_perturbed(m, 100000, seed);
        const bool pass = ks_marginal_test(s, Axis::X1, kExp).pass && ks_marginal_test(s, Axis::X2, kExp).pass &&
                          product_law_test(s, m).ks.pass;
        failing_seeds += pass ? 0 : 1;
    }
    EXPECT_LE(failing_seeds, 2);
}

TEST(Verification, BaseSamplerAcrossAllFamilyPairs) {
    // x2 = phi(x1) and x1 x2 are increasing in x1, so for a base batch the three
    // KS statistics coincide and each pair is one test at the 1% level. Over 25
    // pairs, three or more rejections has probability 0.002 under a correct sampler.
    const std::vector<DensityModel> fam = {DensityModel::exponential(1.0), DensityModel::gamma(2.0, 1.0),
                                           DensityModel::weibull(2.0, 1.0), DensityModel::lognormal(0.0, 1.0),
                                           DensityModel::half_normal(1.0)};
    std::uint64_t seed = 100;
    int rejected = 0;
    for (const auto& a : fam) {
        for (const auto& b : fam) {
            const auto prod = product(a, b);
            const SampleBatch s = sample_base(prod->curve(), a, 100000, ++seed);
            for (std::size_t i = 0; i < s.size(); i += 97) {
                EXPECT_NEAR(s.x2[i], prod->curve().phi(s.x1[i]), 1e-10 * (1.0 + s.x2[i]));
            }
            const KsReport k1 = ks_marginal_test(s, Axis::X1, a);
            const KsReport k2 = ks_marginal_test(s, Axis::X2, b);
            const KsReport kz = product_law_test(s, *prod).ks;
            EXPECT_NEAR(k2.statistic, k1.statistic, 1e-9) << a.name() << " / " << b.name();
            EXPECT_NEAR(kz.statistic, k1.statistic, 1e-9) << a.name() << " / " << b.name();
            if (!(k1.pass && k2.pass && kz.pass)) {
                ++rejected;
                std::printf("rejected: %s / %s, seed %llu, p = %.4f\n", a.name().c_str(), b.name().c_str(),
                            static_cast<unsigned long long>(seed), k1.p_value);
            }
        }
    }
    EXPECT_LE(rejected, 2);
}

TEST(Verification, ZeroEpsilonMatchesBaseLaw) {
    const auto prod = product(kExp, kWeib);
    PerturbationSpec spec = derive_spec(prod->curve(), 1.0, 4.0, 0.1, 0.0, 40 * kPi);
    const AssembledMeasure m(prod, Interpretation::ZDensity, {std::make_shared<const PerturbedMeasure>(spec, prod)});
    const SampleBatch s = sample_perturbed(m, 100000, 17);
    for (auto c : s.component) EXPECT_EQ(c, SampleComponent::Curve);
    EXPECT_TRUE(ks_marginal_test(s, Axis::X1, kExp).pass);
    EXPECT_TRUE(ks_marginal_test(s, Axis::X2, kWeib).pass);
    // G(z) = 1 - exp(-z^{2/3}) for this pair.
    const KsReport law = ks_test(s.products(), [](double z) { return -std::expm1(-std::cbrt(z * z)); });
    EXPECT_TRUE(law.pass) << law.statistic;
}

TEST(Verification, DetectsWrongModels) {
    const auto prod = product(kExp, kExp);
    const SampleBatch s = sample_base(prod->curve(), kExp, 20000, 5);
    EXPECT_FALSE(ks_marginal_test(s, Axis::X1, DensityModel::exponential(1.05)).pass);
    const SampleBatch ew = sample_base(product(kExp, kWeib)->curve(), kExp, 20000, 6);
    EXPECT_FALSE(ks_marginal_test(ew, Axis::X1, kWeib).pass);
    // Product law of the independent coupling instead of the curve.
    const auto other = product(kExp, kWeib);
    EXPECT_FALSE(product_law_test(s, *other).pass());
}

TEST(Verification, PerturbationIsVisibleToTheProductTest) {
    // Draws from the unperturbed curve against a heavily perturbed law.
    const AssembledMeasure m = one_rectangle(Interpretation::X1Density, 0.99);
    const SampleBatch base = sample_base(m.product().curve(), kExp, 1000000, 9);
    const ProductLawReport vs_perturbed = product_law_test(base, m);
    const ProductLawReport vs_base = product_law_test(base, m.product());
    EXPECT_GT(vs_perturbed.ks.statistic, vs_base.ks.statistic);
}

TEST(Verification, MinimumSampleSizes) {
    const auto prod = product(kExp, kExp);
    const SampleBatch small = sample_base(prod->curve(), kExp, 99, 1);
    EXPECT_THROW(ks_marginal_test(small, Axis::X1, kExp), std::invalid_argument);
    const SampleBatch mid = sample_base(prod->curve(), kExp, 999, 1);
    EXPECT_THROW(product_law_test(mid, *prod), std::invalid_argument);
}

TEST(Sampling, DescriptionRoundTripReproducesDraws) {
    const AssembledMeasure m = one_rectangle(Interpretation::ZDensity);
    const MeasureDescription desc = m.describe();
    const MeasureDescription back = parse_measure_description(serialize(desc));
    EXPECT_EQ(back, desc);
    const SampleBatch a = sample_perturbed(m, 10000, 99);
    const SampleBatch b = sample_perturbed(back, 10000, 99);
    EXPECT_EQ(a.x1, b.x1);
    EXPECT_EQ(a.x2, b.x2);
}

TEST(Sampling, CsvSchema) {
    const auto prod = product(kExp, kExp);
    const SampleBatch s = sample_base(prod->curve(), kExp, 3, 1);
    std::ostringstream os;
    write_sample_csv(os, s);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "x1,x2,product");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 3u);
}

}  // namespace
}  // namespace lincoup
