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

#include <iosfwd>

#include "lincoup/experiment_config.hpp"

namespace lincoup {

/// Process exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitTargetFailed = 1, kExitUsage = 2 };

// Each command writes its files under config.output_dir (created if needed),
// logs one line per artifact to `log`, and returns an ExitCode. Errors caused
// by the configuration (including infeasible rectangles and curve construction
// failures) propagate as exceptions; the CLI maps them to kExitUsage.
//
// curve:   curve.csv (x1,phi,phi_prime), quantile_grid.csv (level,j,u,v),
//          curve_report.txt, curve_summary.json
// product: product.csv (z,rho,g,L_g), normalization.txt, product_summary.json
// perturb: window_<n>.csv (z,g0,g1,L0,L1), summary.csv
//          (n,a,b,delta,epsilon,nu,Lmin,Lmax), measure.json, perturb_summary.json
// verify:  verify_report.txt, verify_summary.json, and with export_samples
//          samples_base.csv / samples_perturbed.csv (x1,x2,product)
int cmd_curve(const ExperimentConfig& config, std::ostream& log);
int cmd_product(const ExperimentConfig& config, std::ostream& log);
int cmd_perturb(const ExperimentConfig& config, std::ostream& log);
int cmd_verify(const ExperimentConfig& config, std::ostream& log);
/// All four in order; returns the largest exit code.
int cmd_all(const ExperimentConfig& config, std::ostream& log);

}  // namespace lincoup
