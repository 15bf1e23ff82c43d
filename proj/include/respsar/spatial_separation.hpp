#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "respsar/common.hpp"
#include "respsar/signal_cube.hpp"

namespace respsar {

/// Accumulated signal power per (range, angle) bin over one window.
struct PowerMap {
    std::vector<double> values; ///< row-major, range outermost
    std::size_t num_range_bins = 0;
    std::size_t num_angle_bins = 0;
    double range_bin_size = 0.0;
    double range_offset = 0.0;
    std::vector<double> angle_grid;

    double& at(std::size_t ir, std::size_t ia) { return values[ir * num_angle_bins + ia]; }
    const double& at(std::size_t ir, std::size_t ia) const { return values[ir * num_angle_bins + ia]; }
    double range_at(std::size_t ir) const { return range_offset + static_cast<double>(ir) * range_bin_size; }

    double max_value() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, v);
        return m;
    }
};

/// One entry of the local-maxima set P.
struct LocalMaximum {
    double range = 0.0; ///< r_n [m]
    double theta = 0.0; ///< theta_n [rad]
    double power = 0.0;
    std::size_t range_bin = 0;
    std::size_t angle_bin = 0;
};

/// s_p(r, theta) = sum_t |s(r, theta, t)|^2 / f_s over the window.
inline PowerMap power_map(const SignalCube& cube, const TimeWindow& window) {
    const WindowIndices w = window_indices(cube, window);
    PowerMap map;
    map.num_range_bins = cube.num_range_bins;
    map.num_angle_bins = cube.num_angle_bins;
    map.range_bin_size = cube.range_bin_size;
    map.range_offset = cube.range_offset;
    map.angle_grid = cube.angle_grid;
    map.values.assign(cube.num_range_bins * cube.num_angle_bins, 0.0);
    const double dt = 1.0 / cube.sample_rate;
    for (std::size_t ir = 0; ir < cube.num_range_bins; ++ir) {
        for (std::size_t ia = 0; ia < cube.num_angle_bins; ++ia) {
            const cplx* s = cube.series(ir, ia) + w.first;
            double acc = 0.0;
            for (std::size_t i = 0; i < w.count; ++i) acc += std::norm(s[i]);
            map.at(ir, ia) = acc * dt;
        }
    }
    return map;
}

/// Interior bins strictly greater than all 8 neighbors with power >= s_th,
/// sorted by descending power. The discrete surrogate of the gradient /
/// negative-definite-Hessian condition; boundary bins lack a full
/// neighborhood and cannot qualify.
inline std::vector<LocalMaximum> find_local_maxima(const PowerMap& map, double s_th) {
    if (!(s_th > 0.0)) throw DomainError("find_local_maxima: s_th must be > 0");
    std::vector<LocalMaximum> out;
    if (map.num_range_bins < 3 || map.num_angle_bins < 3) return out;
    for (std::size_t ir = 1; ir + 1 < map.num_range_bins; ++ir) {
        for (std::size_t ia = 1; ia + 1 < map.num_angle_bins; ++ia) {
            const double v = map.at(ir, ia);
            if (v < s_th) continue;
            bool dominant = true;
            for (int di = -1; di <= 1 && dominant; ++di) {
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const std::size_t ri = static_cast<std::size_t>(static_cast<long long>(ir) + di);
                    const std::size_t ai = static_cast<std::size_t>(static_cast<long long>(ia) + dj);
                    if (map.at(ri, ai) >= v) {
                        dominant = false;
                        break;
                    }
                }
            }
            if (dominant) {
                out.push_back({map.range_at(ir), map.angle_grid[ia], v, ir, ia});
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const LocalMaximum& a, const LocalMaximum& b) {
        if (a.power != b.power) return a.power > b.power;
        if (a.range_bin != b.range_bin) return a.range_bin < b.range_bin;
        return a.angle_bin < b.angle_bin;
    });
    return out;
}

/// Normalized Gaussian neighborhood weights w_n(r, theta); sums to 1 over n at
/// every point. Computed in the log domain so distant points degrade to a
/// hard nearest-maximum assignment instead of 0/0.
inline std::vector<double> spatial_weights(const std::vector<LocalMaximum>& maxima, double r,
                                           double theta, double sigma_r, double sigma_a) {
    if (maxima.empty()) throw DomainError("spatial_weights: empty maxima set");
    if (!(sigma_r > 0.0) || !(sigma_a > 0.0)) {
        throw DomainError("spatial_weights: sigmas must be > 0");
    }
    const std::size_t n = maxima.size();
    std::vector<double> logw(n);
    double best = -1e300;
    for (std::size_t i = 0; i < n; ++i) {
        const double dr = (r - maxima[i].range) / sigma_r;
        const double da = (theta - maxima[i].theta) / sigma_a;
        logw[i] = -0.5 * (dr * dr + da * da);
        best = std::max(best, logw[i]);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        logw[i] = std::exp(logw[i] - best);
        sum += logw[i];
    }
    for (std::size_t i = 0; i < n; ++i) logw[i] /= sum;
    return logw;
}

/// Per-bin soft separation s_n = w_n s. The last component is formed as the
/// residual s - sum of the others, which makes the partition of the cube
/// exact in floating point (and the N=1 case the identity).
inline std::vector<SignalCube> apply_spatial_separation(const SignalCube& cube,
                                                        const std::vector<LocalMaximum>& maxima,
                                                        double sigma_r, double sigma_a) {
    if (maxima.empty()) throw DomainError("apply_spatial_separation: empty maxima set");
    const std::size_t n = maxima.size();
    std::vector<SignalCube> parts;
    parts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) parts.push_back(cube.like_empty());

    for (std::size_t ir = 0; ir < cube.num_range_bins; ++ir) {
        const double r = cube.range_at(ir);
        for (std::size_t ia = 0; ia < cube.num_angle_bins; ++ia) {
            const std::vector<double> w = spatial_weights(maxima, r, cube.angle_grid[ia], sigma_r, sigma_a);
            const cplx* src = cube.series(ir, ia);
            for (std::size_t it = 0; it < cube.num_samples; ++it) {
                cplx partial(0.0, 0.0);
                for (std::size_t k = 0; k + 1 < n; ++k) {
                    const cplx v = w[k] * src[it];
                    parts[k].series(ir, ia)[it] = v;
                    partial += v;
                }
                parts[n - 1].series(ir, ia)[it] = src[it] - partial;
            }
        }
    }
    return parts;
}

} // namespace respsar
