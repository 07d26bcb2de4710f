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

// Compiled with -mavx2 -mfma. Only reached through the dispatcher after a
// cpuid check, or directly from the equivalence tests when available().

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "lincoup/kernels.hpp"

namespace lincoup::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sw = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sw));
}

inline double hmax(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_max_pd(lo, hi);
    __m128d sw = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_max_sd(lo, sw));
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = std::min(a.size(), b.size());
    const double* pa = a.data();
    const double* pb = b.data();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i + 4), _mm256_loadu_pd(pb + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
    }
    double sum = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        sum += pa[i] * pb[i];
    }
    return sum;
}

void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    const std::size_t n = std::min({a.size(), b.size(), out.size()});
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out.data() + i,
                         _mm256_mul_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i)));
    }
    for (; i < n; ++i) {
        out[i] = a[i] * b[i];
    }
}

double ks_max_deviation(std::span<const double> sorted_cdf) {
    const std::size_t n = sorted_cdf.size();
    if (n == 0) return 0.0;
    const double dn = static_cast<double>(n);
    const __m256d vdn = _mm256_set1_pd(dn);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d four = _mm256_set1_pd(4.0);
    __m256d idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d c = _mm256_loadu_pd(sorted_cdf.data() + i);
        const __m256d lo = _mm256_div_pd(idx, vdn);
        const __m256d hi = _mm256_div_pd(_mm256_add_pd(idx, one), vdn);
        acc = _mm256_max_pd(acc, _mm256_max_pd(_mm256_sub_pd(hi, c), _mm256_sub_pd(c, lo)));
        idx = _mm256_add_pd(idx, four);
    }
    double d = hmax(acc);
    for (; i < n; ++i) {
        const double lo = static_cast<double>(i) / dn;
        const double hi = static_cast<double>(i + 1) / dn;
        d = std::max(d, std::max(hi - sorted_cdf[i], sorted_cdf[i] - lo));
    }
    return d;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = std::min(a.size(), b.size());
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
        acc = _mm256_max_pd(acc, _mm256_andnot_pd(sign, diff));
    }
    double m = hmax(acc);
    for (; i < n; ++i) {
        m = std::max(m, std::fabs(a[i] - b[i]));
    }
    return m;
}

}  // namespace lincoup::kernels::avx2
