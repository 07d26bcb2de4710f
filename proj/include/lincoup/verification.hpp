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
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "lincoup/marginal_models.hpp"
#include "lincoup/measure.hpp"
#include "lincoup/product_density.hpp"
#include "lincoup/sampling.hpp"

namespace lincoup {

/// P(sqrt(n) D_n > x) in the large-n limit.
double kolmogorov_survival(double x);
/// Asymptotic critical value of D_n at level alpha.
double ks_critical_value(std::size_t n, double alpha = 0.01);

struct KsReport {
    std::string label;
    std::size_t n = 0;
    double statistic = 0.0;
    double critical_value = 0.0;
    double p_value = 0.0;
    double alpha = 0.01;
    bool pass = false;
};

/// One-sample KS test of `sample` against `cdf`.
KsReport ks_test(std::vector<double> sample, const std::function<double(double)>& cdf, double alpha = 0.01,
                 std::string label = {});

enum class Axis { X1, X2 };

/// Requires n >= 100.
KsReport ks_marginal_test(const SampleBatch& batch, Axis which, const DensityModel& model, double alpha = 0.01);

struct BinnedReport {
    std::size_t bins = 0;
    std::size_t bins_used = 0;
    double relative_l1 = 0.0;
    double threshold = 0.05;
    bool pass = false;
};

struct ProductLawReport {
    KsReport ks;
    BinnedReport binned;
    bool pass() const { return ks.pass && binned.pass; }
};

struct BinningOptions {
    std::size_t bins = 100;
    double min_expected = 20.0;
    double threshold = 0.05;
};

/// KS of the sampled products against `cdf`, plus a comparison of counts in
/// log-spaced bins between the 0.1% and 99.9% sample quantiles with the
/// expected counts n (G(e_k+1) - G(e_k)); bins expecting fewer than
/// min_expected draws are skipped. Requires n >= 1000.
ProductLawReport product_law_test(const SampleBatch& batch, const std::function<double(double)>& cdf,
                                  double alpha = 0.01, const BinningOptions& binning = {});
ProductLawReport product_law_test(const SampleBatch& batch, const ProductDensityModel& model,
                                  double alpha = 0.01, const BinningOptions& binning = {});
ProductLawReport product_law_test(const SampleBatch& batch, const AssembledMeasure& measure,
                                  double alpha = 0.01, const BinningOptions& binning = {});

/// Structured text: one `key = value` line per field.
void write_ks_report(std::ostream& os, const KsReport& report);
void write_product_law_report(std::ostream& os, const ProductLawReport& report);

}  // namespace lincoup
