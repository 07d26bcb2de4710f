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

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "lincoup/coupling_curve.hpp"
#include "lincoup/marginal_models.hpp"
#include "lincoup/perturbation.hpp"

namespace lincoup {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GridConfig {
    double z_min = 1e-3;
    double z_max = 1e3;
    std::size_t z_points = 200;
    double x_min = 1e-3;
    double x_max = 10.0;
    std::size_t x_points = 200;
    int quantile_levels = 10;

    bool operator==(const GridConfig&) const = default;
};

/// Everything a run needs. Parsed from JSON; unknown keys are rejected at
/// every level and absent keys keep the defaults below.
struct ExperimentConfig {
    FamilySpec marginal1{Family::Exponential, {1.0}};
    FamilySpec marginal2{Family::Exponential, {1.0}};
    CurveMethod curve_method = CurveMethod::QuantileTransport;
    /// Its interpretation field is kept equal to `interpretation`.
    RectangleSchedule schedule;
    Interpretation interpretation = Interpretation::ZDensity;
    std::uint64_t seed = 20260101;
    std::string output_dir = "lincoup-out";
    GridConfig grids;
    std::size_t samples = 100000;
    /// Draws for the binned comparison of the perturbed product law.
    std::size_t binned_samples = 1000000;
    double alpha = 0.01;
    bool export_samples = false;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Throws ConfigError with the offending key on malformed or invalid input.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);
/// Range checks shared by the parser and the flag overrides.
void validate_config(const ExperimentConfig& config);

}  // namespace lincoup
