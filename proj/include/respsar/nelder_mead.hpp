#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <vector>

#include "respsar/common.hpp"

namespace respsar {

struct NelderMeadOptions {
    double init_step = 0.25;  ///< initial simplex edge length
    double x_tol = 1e-3;      ///< stop when the simplex diameter falls below this
    int max_evals = 300;
};

struct NelderMeadResult {
    std::vector<double> x;
    double fx = 0.0;
    int evaluations = 0;
};

/// Derivative-free simplex minimization (reflection 1, expansion 2,
/// contraction 0.5, shrink 0.5). Deterministic for a given start point.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, const NelderMeadOptions& opts = {}) {
    const std::size_t n = x0.size();
    if (n == 0) throw DomainError("nelder_mead: empty start point");

    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += opts.init_step;

    int evals = 0;
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        fv[i] = f(simplex[i]);
        ++evals;
    }

    auto order = [&]() {
        std::vector<std::size_t> idx(n + 1);
        for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        std::vector<std::vector<double>> s2;
        std::vector<double> f2;
        for (std::size_t i : idx) {
            s2.push_back(simplex[i]);
            f2.push_back(fv[i]);
        }
        simplex = std::move(s2);
        fv = std::move(f2);
    };
    auto diameter = [&]() {
        double d = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                d = std::max(d, std::fabs(simplex[i][j] - simplex[0][j]));
            }
        }
        return d;
    };

    while (evals < opts.max_evals) {
        order();
        if (diameter() <= opts.x_tol) break;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        auto blend = [&](double coef) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j) {
                p[j] = centroid[j] + coef * (centroid[j] - simplex[n][j]);
            }
            return p;
        };

        const std::vector<double> xr = blend(1.0);
        const double fr = f(xr);
        ++evals;
        if (fr < fv[0]) {
            const std::vector<double> xe = blend(2.0);
            const double fe = f(xe);
            ++evals;
            if (fe < fr) {
                simplex[n] = xe;
                fv[n] = fe;
            } else {
                simplex[n] = xr;
                fv[n] = fr;
            }
        } else if (fr < fv[n - 1]) {
            simplex[n] = xr;
            fv[n] = fr;
        } else {
            const bool outside = fr < fv[n];
            const std::vector<double> xc = blend(outside ? 0.5 : -0.5);
            const double fc = f(xc);
            ++evals;
            if (fc < (outside ? fr : fv[n])) {
                simplex[n] = xc;
                fv[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n && evals < opts.max_evals; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
                    }
                    fv[i] = f(simplex[i]);
                    ++evals;
                }
            }
        }
    }
    order();
    return {simplex[0], fv[0], evals};
}

} // namespace respsar
