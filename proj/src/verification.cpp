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

#include "lincoup/verification.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "lincoup/kernels.hpp"
#include "lincoup/numerics.hpp"

namespace lincoup {

double kolmogorov_survival(double x) {
    if (!(x > 0.0)) return 1.0;
    constexpr double kPi = 3.14159265358979323846;
    if (x < 1.18) {
        // Theta-function form of the CDF converges fast for small x.
        const double w = -kPi * kPi / (8.0 * x * x);
        double cdf = 0.0;
        for (int k = 1; k <= 20; ++k) {
            const double term = std::exp(w * (2 * k - 1) * (2 * k - 1));
            cdf += term;
            if (term < 1e-18 * cdf) break;
        }
        return 1.0 - std::sqrt(2.0 * kPi) / x * cdf;
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 == 1) ? term : -term;
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_critical_value(std::size_t n, double alpha) {
    if (n == 0) throw std::invalid_argument("ks_critical_value: n must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ks_critical_value: alpha must be in (0, 1)");
    const double x = numerics::brent([&](double v) { return kolmogorov_survival(v) - alpha; }, 0.2, 10.0);
    return x / std::sqrt(static_cast<double>(n));
}

KsReport ks_test(std::vector<double> sample, const std::function<double(double)>& cdf, double alpha,
                 std::string label) {
    if (sample.empty()) throw std::invalid_argument("ks_test: empty sample");
    std::sort(sample.begin(), sample.end());
    std::vector<double> values(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) values[i] = cdf(sample[i]);
    KsReport r;
    r.label = std::move(label);
    r.n = sample.size();
    r.alpha = alpha;
    r.statistic = kernels::ks_max_deviation(values);
    r.critical_value = ks_critical_value(r.n, alpha);
    r.p_value = kolmogorov_survival(std::sqrt(static_cast<double>(r.n)) * r.statistic);
    r.pass = r.statistic <= r.critical_value;
    return r;
}

KsReport ks_marginal_test(const SampleBatch& batch, Axis which, const DensityModel& model, double alpha) {
    if (batch.size() < 100) throw std::invalid_argument("ks_marginal_test: need at least 100 draws");
    const std::vector<double>& v = which == Axis::X1 ? batch.x1 : batch.x2;
    const std::string label = std::string(which == Axis::X1 ? "x1" : "x2") + " vs " + model.name();
    return ks_test(v, [&](double x) { return model.cdf(x); }, alpha, label);
}

ProductLawReport product_law_test(const SampleBatch& batch, const std::function<double(double)>& cdf,
                                  double alpha, const BinningOptions& binning) {
    if (batch.size() < 1000) throw std::invalid_argument("product_law_test: need at least 1000 draws");
    if (binning.bins == 0) throw std::invalid_argument("product_law_test: need at least one bin");
    std::vector<double> z = batch.products();
    ProductLawReport report;
    report.ks = ks_test(z, cdf, alpha, "x1*x2 vs product law");
    std::sort(z.begin(), z.end());

    const auto n = static_cast<double>(z.size());
    const auto quantile = [&](double p) { return z[static_cast<std::size_t>(p * (n - 1.0))]; };
    const double lo = quantile(0.001);
    const double hi = quantile(0.999);
    const std::vector<double> edges = numerics::log_space(lo, hi, binning.bins + 1);

    BinnedReport& b = report.binned;
    b.bins = binning.bins;
    b.threshold = binning.threshold;
    double diff = 0.0, expected_total = 0.0;
    double g_prev = cdf(edges.front());
    for (std::size_t k = 0; k < binning.bins; ++k) {
        const double g_next = cdf(edges[k + 1]);
        const double expected = n * (g_next - g_prev);
        g_prev = g_next;
        if (expected < binning.min_expected) continue;
        const auto first = std::lower_bound(z.begin(), z.end(), edges[k]);
        const auto last = std::lower_bound(z.begin(), z.end(), edges[k + 1]);
        const auto observed = static_cast<double>(last - first);
        diff += std::fabs(observed - expected);
        expected_total += expected;
        ++b.bins_used;
    }
    b.relative_l1 = expected_total > 0.0 ? diff / expected_total : numerics::kInf;
    b.pass = b.bins_used > 0 && b.relative_l1 <= b.threshold;
    return report;
}

ProductLawReport product_law_test(const SampleBatch& batch, const ProductDensityModel& model, double alpha,
                                  const BinningOptions& binning) {
    return product_law_test(batch, [&](double z) { return model.cdf(z); }, alpha, binning);
}

ProductLawReport product_law_test(const SampleBatch& batch, const AssembledMeasure& measure, double alpha,
                                  const BinningOptions& binning) {
    return product_law_test(batch, [&](double z) { return measure.cdf(z); }, alpha, binning);
}

void write_ks_report(std::ostream& os, const KsReport& r) {
    os << "test = " << r.label << '\n'
       << "n = " << r.n << '\n'
       << "statistic = " << r.statistic << '\n'
       << "critical_value = " << r.critical_value << '\n'
       << "alpha = " << r.alpha << '\n'
       << "p_value = " << r.p_value << '\n'
       << "result = " << (r.pass ? "pass" : "fail") << '\n';
}

void write_product_law_report(std::ostream& os, const ProductLawReport& r) {
    write_ks_report(os, r.ks);
    os << "bins = " << r.binned.bins << '\n'
       << "bins_used = " << r.binned.bins_used << '\n'
       << "relative_l1 = " << r.binned.relative_l1 << '\n'
       << "l1_threshold = " << r.binned.threshold << '\n'
       << "binned_result = " << (r.binned.pass ? "pass" : "fail") << '\n';
}

}  // namespace lincoup
