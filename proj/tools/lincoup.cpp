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

// lincoup: curve | product | perturb | verify | all, driven by one JSON
// config with flag overrides.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lincoup/commands.hpp"
#include "lincoup/experiment_config.hpp"

namespace {

using namespace lincoup;

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> rects;
    std::optional<std::string> interpretation;
    std::optional<double> nu;
    std::optional<double> epsilon;
    std::optional<std::size_t> samples;
};

ExperimentConfig resolve(const Overrides& o) {
    ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
    if (o.seed) c.seed = *o.seed;
    if (o.out) c.output_dir = *o.out;
    if (o.rects) c.schedule.count = *o.rects;
    if (o.interpretation) c.interpretation = parse_interpretation(*o.interpretation);
    if (o.nu) c.schedule.nu_override = *o.nu;
    if (o.epsilon) c.schedule.epsilon_override = *o.epsilon;
    if (o.samples) c.samples = *o.samples;
    c.schedule.interpretation = c.interpretation;
    validate_config(c);
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Singular couplings, product densities and Lin-function oscillation"};
    app.require_subcommand(1);
    Overrides o;
    app.add_option("--config", o.config_path, "JSON experiment config")->check(CLI::ExistingFile);
    app.add_option("--seed", o.seed, "64-bit sampling seed");
    app.add_option("--out", o.out, "output directory");
    app.add_option("--rects", o.rects, "number of rectangles");
    app.add_option("--interpretation", o.interpretation, "density reading of the removed mass")
        ->check(CLI::IsMember({"z", "x1", "z-density", "x1-density"}));
    app.add_option("--nu-override", o.nu, "fixed frequency for every rectangle");
    app.add_option("--epsilon-override", o.epsilon, "fixed amplitude for every rectangle");
    app.add_option("--samples", o.samples, "draws per KS test");

    using Command = int (*)(const ExperimentConfig&, std::ostream&);
    Command command = nullptr;
    auto add = [&](const char* name, const char* help, Command fn) {
        app.add_subcommand(name, help)->fallthrough()->callback([&command, fn] { command = fn; });
    };
    add("curve", "coupling curve, quantile grids and residuals", cmd_curve);
    add("product", "product density and Lin function on the z grid", cmd_product);
    add("perturb", "rectangle sequence with the frequency search", cmd_perturb);
    add("verify", "Monte Carlo checks of marginals and the product law", cmd_verify);
    add("all", "every command in order", cmd_all);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    ExperimentConfig config;
    try {
        config = resolve(o);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        return command(config, std::cout);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
    } catch (const InfeasibleSpecError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
    } catch (const CurveConstructionError& e) {
        std::cerr << "curve construction failed: " << e.what() << '\n';
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitTargetFailed;
    }
    return kExitUsage;
}
