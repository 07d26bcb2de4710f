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

#include "lincoup/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "json.hpp"
#include "lincoup/coupling_curve.hpp"
#include "lincoup/measure.hpp"
#include "lincoup/numerics.hpp"
#include "lincoup/perturbation.hpp"
#include "lincoup/product_density.hpp"
#include "lincoup/sampling.hpp"
#include "lincoup/verification.hpp"

namespace lincoup {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

class Output {
public:
    Output(const ExperimentConfig& config, std::ostream& log) : dir_(config.output_dir), log_(log) {
        fs::create_directories(dir_);
    }

    std::ofstream open(const std::string& name) {
        const fs::path path = dir_ / name;
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << std::setprecision(17);
        log_ << "wrote " << path.string() << '\n';
        return out;
    }

    void json_file(const std::string& name, const json& j) { open(name) << j.dump(2) << '\n'; }

private:
    fs::path dir_;
    std::ostream& log_;
};

struct Models {
    DensityModel f1, f2;
    std::shared_ptr<const ProductDensityModel> product;
};

Models build_models(const ExperimentConfig& c) {
    Models m{DensityModel::from_spec(c.marginal1), DensityModel::from_spec(c.marginal2), nullptr};
    m.product = std::make_shared<const ProductDensityModel>(m.f1, m.f2, build_curve(m.f1, m.f2, c.curve_method));
    return m;
}

RectangleSchedule schedule_of(const ExperimentConfig& c) {
    RectangleSchedule s = c.schedule;
    s.interpretation = c.interpretation;
    return s;
}

json family_json(const FamilySpec& f) { return json{{"family", family_name(f.family)}, {"params", f.params}}; }

json config_header(const ExperimentConfig& c, const char* command) {
    return json{{"command", command},
                {"marginal1", family_json(c.marginal1)},
                {"marginal2", family_json(c.marginal2)},
                {"curve_method", curve_method_name(c.curve_method)},
                {"interpretation", interpretation_name(c.interpretation)},
                {"seed", c.seed}};
}

json ks_json(const KsReport& r) {
    return json{{"test", r.label},         {"n", r.n},         {"statistic", r.statistic},
                {"critical_value", r.critical_value}, {"p_value", r.p_value}, {"pass", r.pass}};
}

}  // namespace

int cmd_curve(const ExperimentConfig& config, std::ostream& log) {
    Output out(config, log);
    const Models m = build_models(config);
    const MonotoneCurve& curve = m.product->curve();
    const std::vector<double> xs = numerics::log_space(config.grids.x_min, config.grids.x_max, config.grids.x_points);

    {
        auto f = out.open("curve.csv");
        write_curve_csv(f, curve, xs);
    }
    {
        auto f = out.open("quantile_grid.csv");
        write_quantile_grid_csv(f, m.f1, m.f2, config.grids.quantile_levels);
    }

    const CurveResiduals res = verify_curve(curve, m.f1, m.f2, xs);
    // The other construction as an independent check.
    const CurveMethod other =
        config.curve_method == CurveMethod::Ode ? CurveMethod::QuantileTransport : CurveMethod::Ode;
    const CurvePtr alt = build_curve(m.f1, m.f2, other);
    double gap = 0.0;
    for (double x : xs) {
        if (x >= alt->domain_lo() && x <= alt->domain_hi()) gap = std::max(gap, std::fabs(curve.phi(x) - alt->phi(x)));
    }
    {
        auto f = out.open("curve_report.txt");
        f << "method = " << curve.method() << '\n'
          << "points = " << xs.size() << '\n'
          << "max_slope_residual = " << res.max_slope_residual << '\n'
          << "worst_slope_x = " << res.worst_slope_x << '\n'
          << "max_quantile_residual = " << res.max_quantile_residual << '\n'
          << "worst_quantile_x = " << res.worst_quantile_x << '\n'
          << "cross_check_method = " << curve_method_name(other) << '\n'
          << "max_phi_gap = " << gap << '\n';
    }
    json summary = config_header(config, "curve");
    summary["max_slope_residual"] = res.max_slope_residual;
    summary["max_quantile_residual"] = res.max_quantile_residual;
    summary["max_phi_gap"] = gap;
    out.json_file("curve_summary.json", summary);
    return kExitOk;
}

int cmd_product(const ExperimentConfig& config, std::ostream& log) {
    Output out(config, log);
    const Models m = build_models(config);
    const std::vector<double> zs = numerics::log_space(config.grids.z_min, config.grids.z_max, config.grids.z_points);
    {
        auto f = out.open("product.csv");
        write_product_csv(f, *m.product, zs);
    }
    const NormalizationReport norm = product_normalization(*m.product);
    const bool ok = norm.integral >= 1.0 - 1e-6 && norm.integral <= 1.0 + 1e-12;
    {
        auto f = out.open("normalization.txt");
        f << "integral = " << norm.integral << '\n'
          << "z_lo = " << norm.z_lo << '\n'
          << "z_hi = " << norm.z_hi << '\n'
          << "tail_level = " << norm.tail_level << '\n'
          << "result = " << (ok ? "pass" : "fail") << '\n';
    }
    json summary = config_header(config, "product");
    summary["normalization"] = norm.integral;
    summary["normalization_pass"] = ok;
    out.json_file("product_summary.json", summary);
    if (!ok) log << "normalization outside [1 - 1e-6, 1]: " << norm.integral << '\n';
    return ok ? kExitOk : kExitTargetFailed;
}

int cmd_perturb(const ExperimentConfig& config, std::ostream& log) {
    Output out(config, log);
    const Models m = build_models(config);
    const RectangleSequence seq = build_rectangle_sequence(m.product, schedule_of(config));

    for (const auto& r : seq.rectangles) {
        const PerturbationSpec& s = r.spec;
        const double periods = 3.0 * s.delta * s.nu / kPi;
        const auto points = static_cast<std::size_t>(std::clamp(std::ceil(16.0 * periods), 1000.0, 200000.0));
        auto f = out.open("window_" + std::to_string(r.n) + ".csv");
        f << "z,g0,g1,L0,L1\n";
        for (double z : numerics::lin_space(s.window_lo(), s.t, points)) {
            f << z << ',' << m.product->density(z) << ',' << r.measure->density(z) << ',' << m.product->lin(z) << ','
              << r.measure->lin(z) << '\n';
        }
    }
    {
        auto f = out.open("summary.csv");
        f << "n,a,b,delta,epsilon,nu,Lmin,Lmax\n";
        for (const auto& r : seq.rectangles) {
            f << r.n << ',' << r.spec.a << ',' << r.spec.b << ',' << r.spec.delta << ',' << r.spec.epsilon << ','
              << r.spec.nu << ',' << r.extrema.min << ',' << r.extrema.max << '\n';
        }
    }
    const AssembledMeasure assembled(m.product, seq);
    out.open("measure.json") << serialize(assembled.describe()) << '\n';

    json rects = json::array();
    for (const auto& r : seq.rectangles) {
        rects.push_back(json{{"n", r.n},
                             {"a", r.spec.a},
                             {"b", r.spec.b},
                             {"delta", r.spec.delta},
                             {"epsilon", r.spec.epsilon},
                             {"epsilon_max", r.feasibility.epsilon_max},
                             {"epsilon_max_uniform", r.feasibility.epsilon_max_uniform},
                             {"nu", r.spec.nu},
                             {"doublings", r.doublings},
                             {"target", r.target},
                             {"Lmin", r.extrema.min},
                             {"Lmax", r.extrema.max},
                             {"argmin", r.extrema.argmin},
                             {"argmax", r.extrema.argmax},
                             {"met", r.met}});
    }
    json summary = config_header(config, "perturb");
    summary["rectangles"] = rects;
    summary["all_met"] = seq.all_met();
    summary["strictly_growing"] = seq.strictly_growing();
    out.json_file("perturb_summary.json", summary);

    for (const auto& r : seq.rectangles) {
        if (!r.met) {
            log << "rectangle " << r.n << " missed its target " << r.target << ": L in [" << r.extrema.min << ", "
                << r.extrema.max << "]\n";
        }
    }
    return seq.all_met() ? kExitOk : kExitTargetFailed;
}

int cmd_verify(const ExperimentConfig& config, std::ostream& log) {
    Output out(config, log);
    const Models m = build_models(config);
    const RectangleSequence seq = build_rectangle_sequence(m.product, schedule_of(config));
    const AssembledMeasure assembled(m.product, seq);

    const SampleBatch base = sample_base(m.product->curve(), m.f1, config.samples, config.seed);
    const SampleBatch pert = sample_perturbed(assembled, config.samples, config.seed);
    const SampleBatch pert_binned = sample_perturbed(assembled, config.binned_samples, config.seed + 1);

    struct Named {
        std::string name;
        KsReport ks;
    };
    std::vector<Named> ks_tests = {
        {"base x1 marginal", ks_marginal_test(base, Axis::X1, m.f1, config.alpha)},
        {"base x2 marginal", ks_marginal_test(base, Axis::X2, m.f2, config.alpha)},
        {"perturbed x1 marginal", ks_marginal_test(pert, Axis::X1, m.f1, config.alpha)},
        {"perturbed x2 marginal", ks_marginal_test(pert, Axis::X2, m.f2, config.alpha)},
    };
    const ProductLawReport base_law = product_law_test(base, *m.product, config.alpha);
    const ProductLawReport pert_law = product_law_test(pert, assembled, config.alpha);
    const ProductLawReport pert_binned_law = product_law_test(pert_binned, assembled, config.alpha);
    ks_tests.push_back({"base product law", base_law.ks});
    ks_tests.push_back({"perturbed product law", pert_law.ks});

    std::vector<std::string> failures;
    for (const auto& t : ks_tests) {
        if (!t.ks.pass) failures.push_back(t.name);
    }
    if (!base_law.binned.pass) failures.push_back("base product binned density");
    if (!pert_binned_law.binned.pass) failures.push_back("perturbed product binned density");

    {
        auto f = out.open("verify_report.txt");
        for (const auto& t : ks_tests) {
            f << "[" << t.name << "]\n";
            write_ks_report(f, t.ks);
            f << '\n';
        }
        f << "[base product binned density]\n";
        write_product_law_report(f, base_law);
        f << "\n[perturbed product binned density]\n";
        write_product_law_report(f, pert_binned_law);
    }
    if (config.export_samples) {
        auto fb = out.open("samples_base.csv");
        write_sample_csv(fb, base);
        auto fp = out.open("samples_perturbed.csv");
        write_sample_csv(fp, pert);
    }

    json tests = json::array();
    for (const auto& t : ks_tests) {
        json j = ks_json(t.ks);
        j["name"] = t.name;
        tests.push_back(j);
    }
    json summary = config_header(config, "verify");
    summary["samples"] = config.samples;
    summary["binned_samples"] = config.binned_samples;
    summary["ks_tests"] = tests;
    summary["base_binned_relative_l1"] = base_law.binned.relative_l1;
    summary["perturbed_binned_relative_l1"] = pert_binned_law.binned.relative_l1;
    summary["failures"] = failures;
    summary["pass"] = failures.empty();
    out.json_file("verify_summary.json", summary);

    for (const auto& name : failures) log << "FAILED: " << name << '\n';
    return failures.empty() ? kExitOk : kExitTargetFailed;
}

int cmd_all(const ExperimentConfig& config, std::ostream& log) {
    int code = cmd_curve(config, log);
    code = std::max(code, cmd_product(config, log));
    code = std::max(code, cmd_perturb(config, log));
    code = std::max(code, cmd_verify(config, log));
    return code;
}

}  // namespace lincoup
