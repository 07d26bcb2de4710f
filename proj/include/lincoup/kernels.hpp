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

#include <span>
#include <string_view>

// Data-parallel inner loops shared by quadrature, sampling and the KS tests.
// Each kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The public entry points dispatch once at first use based on the
// running CPU; set LINCOUP_SIMD=scalar in the environment to force the
// reference path.

namespace lincoup::kernels {

enum class Isa { Scalar, Avx2 };

/// ISA chosen by the dispatcher for this process.
Isa active_isa();
std::string_view isa_name(Isa isa);

/// sum_i a[i] * b[i]. Reduction order differs between variants.
double dot(std::span<const double> a, std::span<const double> b);

/// out[i] = a[i] * b[i]. Bit-identical across variants.
void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out);

/// One-sample Kolmogorov-Smirnov statistic for model CDF values taken at the
/// sorted sample: max_i max((i+1)/n - cdf[i], cdf[i] - i/n).
/// Bit-identical across variants.
double ks_max_deviation(std::span<const double> sorted_cdf);

/// max_i |a[i] - b[i]|. Bit-identical across variants.
double max_abs_diff(std::span<const double> a, std::span<const double> b);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out);
double ks_max_deviation(std::span<const double> sorted_cdf);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
}  // namespace scalar

namespace avx2 {
/// False when the AVX2 variants were not compiled in or the CPU lacks AVX2/FMA.
bool available();
double dot(std::span<const double> a, std::span<const double> b);
void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out);
double ks_max_deviation(std::span<const double> sorted_cdf);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
}  // namespace avx2

}  // namespace lincoup::kernels
