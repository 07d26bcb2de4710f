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

#include <cstdlib>
#include <cstring>

#include "lincoup/kernels.hpp"

namespace lincoup::kernels {

#if !defined(LINCOUP_WITH_AVX2)
namespace avx2 {
bool available() { return false; }
double dot(std::span<const double> a, std::span<const double> b) { return scalar::dot(a, b); }
void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    scalar::multiply(a, b, out);
}
double ks_max_deviation(std::span<const double> c) { return scalar::ks_max_deviation(c); }
double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    return scalar::max_abs_diff(a, b);
}
}  // namespace avx2
#else
namespace avx2 {
bool available() {
    static const bool ok = [] {
        __builtin_cpu_init();
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    }();
    return ok;
}
}  // namespace avx2
#endif

namespace {

struct Table {
    Isa isa;
    double (*dot)(std::span<const double>, std::span<const double>);
    void (*multiply)(std::span<const double>, std::span<const double>, std::span<double>);
    double (*ks_max_deviation)(std::span<const double>);
    double (*max_abs_diff)(std::span<const double>, std::span<const double>);
};

Table select() {
    const char* env = std::getenv("LINCOUP_SIMD");
    const bool force_scalar = env != nullptr && std::strcmp(env, "scalar") == 0;
    if (!force_scalar && avx2::available()) {
        return {Isa::Avx2, &avx2::dot, &avx2::multiply, &avx2::ks_max_deviation, &avx2::max_abs_diff};
    }
    return {Isa::Scalar, &scalar::dot, &scalar::multiply, &scalar::ks_max_deviation,
            &scalar::max_abs_diff};
}

const Table& table() {
    static const Table t = select();
    return t;
}

}  // namespace

Isa active_isa() { return table().isa; }

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::Avx2:
            return "avx2";
        case Isa::Scalar:
            break;
    }
    return "scalar";
}

double dot(std::span<const double> a, std::span<const double> b) { return table().dot(a, b); }

void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    table().multiply(a, b, out);
}

double ks_max_deviation(std::span<const double> sorted_cdf) {
    return table().ks_max_deviation(sorted_cdf);
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    return table().max_abs_diff(a, b);
}

}  // namespace lincoup::kernels
