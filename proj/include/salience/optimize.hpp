/*
 * Copyright 2026 The salience-audit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

namespace salience {

struct Min1dResult {
    double x = 0.0;
    double fx = 0.0;
    bool converged = false;
};

/// Brent's derivative-free minimizer on [lo, hi].
inline Min1dResult brent_min(const std::function<double(double)>& f, double lo, double hi,
                             double xtol = 1e-10, int max_iter = 200) {
    const double gold = 0.3819660112501051;
    double a = lo, b = hi;
    double x = a + gold * (b - a);
    double w = x, v = x;
    double fx = f(x), fw = fx, fv = fx;
    double d = 0.0, e = 0.0;
    for (int iter = 0; iter < max_iter; ++iter) {
        const double xm = 0.5 * (a + b);
        const double tol1 = xtol * std::fabs(x) + 1e-12;
        const double tol2 = 2.0 * tol1;
        if (std::fabs(x - xm) <= tol2 - 0.5 * (b - a)) {
            return {x, fx, true};
        }
        bool parabolic = false;
        if (std::fabs(e) > tol1) {
            // Trial parabolic fit through (v, w, x).
            const double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::fabs(q);
            const double etemp = e;
            e = d;
            if (std::fabs(p) < std::fabs(0.5 * q * etemp) && p > q * (a - x) && p < q * (b - x)) {
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || b - u < tol2) d = (xm >= x) ? tol1 : -tol1;
                parabolic = true;
            }
        }
        if (!parabolic) {
            e = (x >= xm) ? a - x : b - x;
            d = gold * e;
        }
        const double u = (std::fabs(d) >= tol1) ? x + d : x + ((d >= 0.0) ? tol1 : -tol1);
        const double fu = f(u);
        if (fu <= fx) {
            if (u >= x) a = x; else b = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x) a = u; else b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    return {x, fx, false};
}

struct Min2dResult {
    std::array<double, 2> x{0.0, 0.0};
    double fx = 0.0;
    bool converged = false;
};

/// Nelder-Mead in two dimensions. Convergence is declared when the simplex
/// function-value spread falls below ftol.
inline Min2dResult nelder_mead_2d(const std::function<double(double, double)>& f,
                                  std::array<double, 2> start, std::array<double, 2> step,
                                  double ftol = 1e-10, int max_iter = 2000) {
    using P = std::array<double, 2>;
    std::array<P, 3> pts = {P{start[0], start[1]},
                            P{start[0] + step[0], start[1]},
                            P{start[0], start[1] + step[1]}};
    std::array<double, 3> fv;
    for (int i = 0; i < 3; ++i) fv[i] = f(pts[i][0], pts[i][1]);

    auto order = [&]() {
        for (int i = 0; i < 2; ++i)
            for (int j = i + 1; j < 3; ++j)
                if (fv[j] < fv[i]) { std::swap(fv[i], fv[j]); std::swap(pts[i], pts[j]); }
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        order();
        if (std::fabs(fv[2] - fv[0]) <= ftol * (std::fabs(fv[0]) + std::fabs(fv[2])) + 1e-15) {
            return {pts[0], fv[0], true};
        }
        const P centroid = {0.5 * (pts[0][0] + pts[1][0]), 0.5 * (pts[0][1] + pts[1][1])};
        auto at = [&](double t) {
            return P{centroid[0] + t * (pts[2][0] - centroid[0]),
                     centroid[1] + t * (pts[2][1] - centroid[1])};
        };
        const P xr = at(-1.0);
        const double fr = f(xr[0], xr[1]);
        if (fr < fv[0]) {
            const P xe = at(-2.0);
            const double fe = f(xe[0], xe[1]);
            if (fe < fr) { pts[2] = xe; fv[2] = fe; }
            else         { pts[2] = xr; fv[2] = fr; }
        } else if (fr < fv[1]) {
            pts[2] = xr; fv[2] = fr;
        } else {
            const P xc = at(fr < fv[2] ? -0.5 : 0.5);
            const double fc = f(xc[0], xc[1]);
            if (fc < std::min(fr, fv[2])) {
                pts[2] = xc; fv[2] = fc;
            } else {
                // Shrink toward the best vertex.
                for (int i = 1; i < 3; ++i) {
                    pts[i] = {pts[0][0] + 0.5 * (pts[i][0] - pts[0][0]),
                              pts[0][1] + 0.5 * (pts[i][1] - pts[0][1])};
                    fv[i] = f(pts[i][0], pts[i][1]);
                }
            }
        }
    }
    order();
    return {pts[0], fv[0], false};
}

}  // namespace salience
