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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lincoup/kernels.hpp"

// Scalar numerical building blocks: bracketing root finding with Newton
// polish, adaptive Gauss-Legendre quadrature, Richardson-extrapolated finite
// differences, golden-section search and monotone cubic interpolation.

namespace lincoup::numerics {

class RootFindingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Brent's method on a sign-changing bracket [lo, hi]. Iterates until the
/// bracket is at machine resolution (or narrower than xtol) or f hits zero.
template <class F>
double brent(F&& f, double lo, double hi, double flo, double fhi, double xtol = 0.0,
             int max_iter = 300) {
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
        throw RootFindingError("brent: interval does not bracket a root");
    }
    double a = lo, b = hi, fa = flo, fb = fhi;
    double c = b, fc = fb, d = b - a, e = d;
    for (int iter = 0; iter < max_iter; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol = 2.0 * kEps * std::fabs(b) + 0.5 * xtol;
        const double m = 0.5 * (c - b);
        if (std::fabs(m) <= tol || fb == 0.0) return b;
        if (std::fabs(e) >= tol && std::fabs(fa) > std::fabs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::fabs(p);
            if (2.0 * p < std::min(3.0 * m * q - std::fabs(tol * q), std::fabs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::fabs(d) > tol) ? d : (m > 0.0 ? tol : -tol);
        fb = f(b);
    }
    throw RootFindingError("brent: iteration limit reached");
}

template <class F>
double brent(F&& f, double lo, double hi, double xtol = 0.0) {
    return brent(f, lo, hi, f(lo), f(hi), xtol);
}

struct Bracket {
    double lo, hi, flo, fhi;
};

/// Geometric bracket expansion for an increasing function on (lo_limit, hi_limit)
/// starting at `guess`. Returns lo < hi with f(lo) <= 0 <= f(hi).
template <class F>
Bracket bracket_increasing(F&& f, double guess, double lo_limit = 0.0, double hi_limit = kInf,
                           double factor = 2.0, int max_expansions = 2100) {
    double x = std::clamp(guess, lo_limit, hi_limit);
    double fx = f(x);
    if (fx == 0.0) return {x, x, 0.0, 0.0};
    double lo = x, hi = x, flo = fx, fhi = fx;
    for (int i = 0; i < max_expansions; ++i) {
        if (fx < 0.0) {
            lo = hi;
            flo = fhi;
            double next = hi * factor;
            if (next >= hi_limit) next = 0.5 * (hi + hi_limit);
            if (!(next > hi)) break;
            hi = next;
            fhi = f(hi);
            if (fhi >= 0.0) return {lo, hi, flo, fhi};
        } else {
            hi = lo;
            fhi = flo;
            double next = lo / factor;
            if (next <= lo_limit) next = 0.5 * (lo + lo_limit);
            if (!(next < lo)) break;
            lo = next;
            flo = f(lo);
            if (flo <= 0.0) return {lo, hi, flo, fhi};
        }
    }
    throw RootFindingError("bracket expansion failed from guess " + std::to_string(guess));
}

/// Root of an increasing function: geometric bracketing, Brent, then up to
/// two Newton steps that are accepted only if they stay inside the bracket and
/// reduce the residual.
template <class F, class DF>
double solve_increasing(F&& f, DF&& df, double guess, double lo_limit = 0.0,
                        double hi_limit = kInf) {
    const Bracket br = bracket_increasing(f, guess, lo_limit, hi_limit);
    if (br.lo == br.hi) return br.lo;
    double x = brent(f, br.lo, br.hi, br.flo, br.fhi);
    double fx = f(x);
    for (int i = 0; i < 2 && fx != 0.0; ++i) {
        const double slope = df(x);
        if (!(slope > 0.0) || !std::isfinite(slope)) break;
        const double cand = x - fx / slope;
        if (!(cand >= br.lo && cand <= br.hi)) break;
        const double fc = f(cand);
        if (!(std::fabs(fc) < std::fabs(fx))) break;
        x = cand;
        fx = fc;
    }
    return x;
}

// ---------------------------------------------------------------------------
// Quadrature

struct GaussLegendreRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule, computed once per n and cached.
const GaussLegendreRule& gauss_legendre(int n);

template <class F>
double gauss_legendre_panel(F&& f, double a, double b, const GaussLegendreRule& rule) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    std::array<double, 64> values{};
    const std::size_t n = rule.nodes.size();
    for (std::size_t i = 0; i < n; ++i) {
        values[i] = f(mid + half * rule.nodes[i]);
    }
    return half * kernels::dot(rule.weights, std::span<const double>(values.data(), n));
}

namespace detail {
template <class F>
double adaptive_gl(F& f, double a, double b, double whole, double tol, double rel_tol, int depth,
                   const GaussLegendreRule& rule) {
    const double mid = 0.5 * (a + b);
    const double left = gauss_legendre_panel(f, a, mid, rule);
    const double right = gauss_legendre_panel(f, mid, b, rule);
    const double refined = left + right;
    if (depth <= 0 || std::fabs(refined - whole) <= std::max(tol, rel_tol * std::fabs(refined))) {
        return refined;
    }
    return adaptive_gl(f, a, mid, left, 0.5 * tol, rel_tol, depth - 1, rule) +
           adaptive_gl(f, mid, b, right, 0.5 * tol, rel_tol, depth - 1, rule);
}
}  // namespace detail

/// Adaptive composite 15-point Gauss-Legendre on a finite interval.
template <class F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-14, double rel_tol = 1e-12,
                 int max_depth = 30) {
    if (a == b) return 0.0;
    if (a > b) return -integrate(f, b, a, abs_tol, rel_tol, max_depth);
    static const GaussLegendreRule& rule = gauss_legendre(15);
    const double whole = gauss_legendre_panel(f, a, b, rule);
    return detail::adaptive_gl(f, a, b, whole, abs_tol, rel_tol, max_depth, rule);
}

/// Integral over [a, b] split into `pieces` equal panels before adapting;
/// useful for rapidly oscillating integrands.
template <class F>
double integrate_pieces(F&& f, double a, double b, int pieces, double abs_tol = 1e-14,
                        double rel_tol = 1e-12) {
    double sum = 0.0;
    const double h = (b - a) / pieces;
    for (int i = 0; i < pieces; ++i) {
        const double lo = a + h * i;
        const double hi = (i + 1 == pieces) ? b : a + h * (i + 1);
        sum += integrate(f, lo, hi, abs_tol / pieces, rel_tol);
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Differentiation

/// Ridders' extrapolation of central differences starting from step h.
template <class F>
double derivative_ridders(F&& f, double x, double h, double* error_estimate = nullptr) {
    constexpr int kTab = 10;
    constexpr double kCon = 1.4;
    constexpr double kCon2 = kCon * kCon;
    constexpr double kSafe = 2.0;
    double a[kTab][kTab];
    double err = std::numeric_limits<double>::max();
    double ans = 0.0;
    a[0][0] = (f(x + h) - f(x - h)) / (2.0 * h);
    ans = a[0][0];
    for (int i = 1; i < kTab; ++i) {
        h /= kCon;
        a[0][i] = (f(x + h) - f(x - h)) / (2.0 * h);
        double fac = kCon2;
        for (int j = 1; j <= i; ++j) {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= kCon2;
            const double errt =
                std::max(std::fabs(a[j][i] - a[j - 1][i]), std::fabs(a[j][i] - a[j - 1][i - 1]));
            if (errt <= err) {
                err = errt;
                ans = a[j][i];
            }
        }
        if (std::fabs(a[i][i] - a[i - 1][i - 1]) >= kSafe * err) break;
    }
    if (error_estimate != nullptr) *error_estimate = err;
    return ans;
}

/// Five-point central difference combined with its half-step value by one
/// Richardson step (sixth order).
template <class F>
double derivative_five_point_richardson(F&& f, double x, double h) {
    auto five = [&](double s) {
        return (-f(x + 2.0 * s) + 8.0 * f(x + s) - 8.0 * f(x - s) + f(x - 2.0 * s)) / (12.0 * s);
    };
    const double coarse = five(h);
    const double fine = five(0.5 * h);
    return (16.0 * fine - coarse) / 15.0;
}

// ---------------------------------------------------------------------------
// Optimisation

struct Extremum {
    double x;
    double value;
};

/// Golden-section minimisation of a unimodal function on [a, b].
template <class F>
Extremum golden_minimize(F&& f, double a, double b, double xtol) {
    constexpr double kInvPhi = 0.6180339887498949;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c), fd = f(d);
    while (std::fabs(b - a) > xtol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    return fc < fd ? Extremum{c, fc} : Extremum{d, fd};
}

// ---------------------------------------------------------------------------
// Interpolation and grids

/// Piecewise cubic Hermite interpolant with Fritsch-Butland slopes; preserves
/// monotonicity of the data. Abscissae must be strictly increasing.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    double front_x() const { return x_.front(); }
    double back_x() const { return x_.back(); }
    std::size_t size() const { return x_.size(); }

private:
    std::vector<double> x_, y_, slope_;
};

std::vector<double> log_space(double lo, double hi, std::size_t n);
std::vector<double> lin_space(double lo, double hi, std::size_t n);

}  // namespace lincoup::numerics
