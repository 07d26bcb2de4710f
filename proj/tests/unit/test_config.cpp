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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lincoup/commands.hpp"
#include "lincoup/experiment_config.hpp"
#include "lincoup/measure.hpp"

namespace lincoup {
namespace {

TEST(Config, DefaultsAndRoundTrip) {
    const ExperimentConfig d = parse_config("{}");
    EXPECT_EQ(d, ExperimentConfig{});
    EXPECT_EQ(parse_config(serialize_config(d)), d);

    ExperimentConfig c;
    c.marginal1 = {Family::Gamma, {2.0, 1.5}};
    c.marginal2 = {Family::Lognormal, {0.1, 0.7}};
    c.curve_method = CurveMethod::Ode;
    c.interpretation = Interpretation::X1Density;
    c.schedule.interpretation = Interpretation::X1Density;
    c.schedule.count = 3;
    c.schedule.a = {1.0, 3.0, 9.0};
    c.schedule.magnitudes = {5.0, 6.0, 7.0};
    c.schedule.nu_override = 123.0;
    c.seed = 0xFFFFFFFFFFFFFFFFull;
    c.output_dir = "x/y";
    c.grids.z_points = 17;
    c.export_samples = true;
    EXPECT_EQ(parse_config(serialize_config(c)), c);
}

TEST(Config, RejectsUnknownAndMalformed) {
    EXPECT_THROW(parse_config("{\"sead\": 1}"), ConfigError);
    EXPECT_THROW(parse_config("{\"grids\": {\"z_pts\": 3}}"), ConfigError);
    EXPECT_THROW(parse_config("{\"rectangles\": {\"frequency\": 3}}"), ConfigError);
    EXPECT_THROW(parse_config("{\"marginal1\": {\"family\": \"exponential\", \"scale\": 1}}"), ConfigError);
    EXPECT_THROW(parse_config("{\"seed\": }"), ConfigError);
    EXPECT_THROW(parse_config("[1, 2]"), ConfigError);
    EXPECT_THROW(parse_config("{\"seed\": \"abc\"}"), ConfigError);
    EXPECT_THROW(parse_config("{\"marginal1\": {\"family\": \"cauchy\", \"params\": []}}"), ConfigError);
    EXPECT_THROW(parse_config("{\"interpretation\": \"x2\"}"), ConfigError);
}

TEST(Config, Validation) {
    EXPECT_THROW(parse_config("{\"grids\": {\"z_points\": 0}}"), ConfigError);
    EXPECT_THROW(parse_config("{\"grids\": {\"z_min\": 5, \"z_max\": 1}}"), ConfigError);
    EXPECT_THROW(parse_config("{\"samples\": 10}"), ConfigError);
    EXPECT_THROW(parse_config("{\"alpha\": 1.5}"), ConfigError);
    EXPECT_THROW(parse_config("{\"rectangles\": {\"count\": 0}}"), ConfigError);
    EXPECT_THROW(parse_config("{\"marginal1\": {\"family\": \"gamma\", \"params\": [-1, 1]}}"), ConfigError);
    ExperimentConfig c;
    c.samples = 5;
    EXPECT_THROW(validate_config(c), ConfigError);
}

TEST(Config, LoadFromFile) {
    const auto path = std::filesystem::temp_directory_path() / "lincoup_config_test.json";
    std::ofstream(path) << "{\"seed\": 5, \"rectangles\": {\"count\": 2, \"epsilon\": null}}";
    const ExperimentConfig c = load_config(path.string());
    EXPECT_EQ(c.seed, 5u);
    EXPECT_EQ(c.schedule.count, 2u);
    EXPECT_FALSE(c.schedule.epsilon_override.has_value());
    std::filesystem::remove(path);
    EXPECT_THROW(load_config(path.string()), ConfigError);
}

TEST(MeasureDescription, RejectsMalformed) {
    EXPECT_THROW(parse_measure_description("{"), std::invalid_argument);
    EXPECT_THROW(parse_measure_description("{\"marginal1\": 3}"), std::invalid_argument);
}

TEST(Commands, CurveAndProductWriteFiles) {
    const auto dir = std::filesystem::temp_directory_path() / "lincoup_cmd_test";
    std::filesystem::remove_all(dir);
    ExperimentConfig c;
    c.output_dir = dir.string();
    c.grids.z_points = 20;
    c.grids.x_points = 20;
    std::ostringstream log;
    EXPECT_EQ(cmd_curve(c, log), kExitOk);
    EXPECT_EQ(cmd_product(c, log), kExitOk);
    for (const char* f : {"curve.csv", "quantile_grid.csv", "curve_report.txt", "curve_summary.json", "product.csv",
                          "normalization.txt", "product_summary.json"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    }
    std::filesystem::remove_all(dir);
}

TEST(Commands, PerturbWithoutSurgeryMissesTargets) {
    const auto dir = std::filesystem::temp_directory_path() / "lincoup_cmd_test_eps0";
    ExperimentConfig c;
    c.output_dir = dir.string();
    c.schedule.count = 2;
    c.schedule.epsilon_override = 0.0;
    std::ostringstream log;
    EXPECT_EQ(cmd_perturb(c, log), kExitTargetFailed);
    EXPECT_NE(log.str().find("rectangle 1 missed"), std::string::npos);
    std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace lincoup
