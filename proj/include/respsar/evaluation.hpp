#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "respsar/autofocus.hpp"
#include "respsar/common.hpp"
#include "respsar/geometry.hpp"
#include "respsar/imaging.hpp"

namespace respsar {

struct PointCloud {
    std::vector<Vec3> points;

    bool empty() const { return points.empty(); }
    std::size_t size() const { return points.size(); }
};

/// Quantitative comparison of the proposed pipeline against the conventional
/// baseline. Sharpness values are MB sharpness of intensity volumes; RMSE is
/// against the reference cloud.
struct MetricsReport {
    double mb_sharpness_conventional = 0.0; ///< [1/m^3]
    double mb_sharpness_proposed = 0.0;     ///< [1/m^3]
    double rmse_conventional = 0.0;         ///< [m]
    double rmse_proposed = 0.0;             ///< [m]
    double correlation = 0.0;
    std::size_t window_count = 0;
};

/// Voxels strictly greater than all existing 26-neighbors with value >= I_th,
/// emitted at voxel-center coordinates.
inline PointCloud extract_scattering_points(const RealVolume& vol, double threshold) {
    if (!(threshold > 0.0)) throw DomainError("extract_scattering_points: I_th must be > 0");
    vol.grid.validate();
    const auto& d = vol.grid.dims;
    PointCloud cloud;
    for (std::size_t i = 0; i < d[0]; ++i) {
        for (std::size_t j = 0; j < d[1]; ++j) {
            for (std::size_t k = 0; k < d[2]; ++k) {
                const double v = vol.values[vol.grid.index(i, j, k)];
                if (v < threshold) continue;
                bool dominant = true;
                for (int di = -1; di <= 1 && dominant; ++di) {
                    for (int dj = -1; dj <= 1 && dominant; ++dj) {
                        for (int dk = -1; dk <= 1; ++dk) {
                            if (di == 0 && dj == 0 && dk == 0) continue;
                            const long long ni = static_cast<long long>(i) + di;
                            const long long nj = static_cast<long long>(j) + dj;
                            const long long nk = static_cast<long long>(k) + dk;
                            if (ni < 0 || nj < 0 || nk < 0 || ni >= static_cast<long long>(d[0]) ||
                                nj >= static_cast<long long>(d[1]) || nk >= static_cast<long long>(d[2])) {
                                continue;
                            }
                            if (vol.values[vol.grid.index(static_cast<std::size_t>(ni),
                                                          static_cast<std::size_t>(nj),
                                                          static_cast<std::size_t>(nk))] >= v) {
                                dominant = false;
                                break;
                            }
                        }
                    }
                }
                if (dominant) cloud.points.push_back(vol.grid.voxel_center(i, j, k));
            }
        }
    }
    return cloud;
}

/// Greedy clustering: points closer than `radius` collapse to their centroid.
/// Used to merge per-window detections of the same scattering center.
inline PointCloud merge_points(const PointCloud& cloud, double radius) {
    PointCloud out;
    std::vector<bool> used(cloud.points.size(), false);
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        if (used[i]) continue;
        Vec3 sum = cloud.points[i];
        std::size_t count = 1;
        used[i] = true;
        for (std::size_t j = i + 1; j < cloud.points.size(); ++j) {
            if (used[j]) continue;
            if ((cloud.points[j] - cloud.points[i]).norm() <= radius) {
                sum += cloud.points[j];
                count += 1;
                used[j] = true;
            }
        }
        out.points.push_back(sum / static_cast<double>(count));
    }
    return out;
}

/// RMS distance from each estimated point to its nearest reference point.
inline double rmse(const PointCloud& est, const PointCloud& ref) {
    if (est.empty() || ref.empty()) throw MetricError("rmse: empty point cloud");
    double acc = 0.0;
    for (const Vec3& p : est.points) {
        double best = 1e300;
        for (const Vec3& q : ref.points) {
            best = std::min(best, (p - q).dot(p - q));
        }
        acc += best;
    }
    return std::sqrt(acc / static_cast<double>(est.size()));
}

namespace detail {
inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) throw ShapeError("image_correlation: size mismatch");
    const double n = static_cast<double>(a.size());
    double ma = 0.0;
    double mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double saa = 0.0;
    double sbb = 0.0;
    double sab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) throw MetricError("image_correlation: zero-variance input");
    return sab / std::sqrt(saa * sbb);
}
} // namespace detail

/// Pearson correlation of voxelwise magnitudes of two images on one grid.
inline double image_correlation(const SarImage& a, const SarImage& b) {
    if (!a.grid.same_as(b.grid)) throw ShapeError("image_correlation: grids differ");
    std::vector<double> ma(a.values.size());
    std::vector<double> mb(b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) ma[i] = std::abs(a.values[i]);
    for (std::size_t i = 0; i < b.values.size(); ++i) mb[i] = std::abs(b.values[i]);
    return detail::pearson(ma, mb);
}

inline double image_correlation(const RealVolume& a, const RealVolume& b) {
    if (!a.grid.same_as(b.grid)) throw ShapeError("image_correlation: grids differ");
    return detail::pearson(a.values, b.values);
}

/// Single-pair report: MB sharpness of both intensity volumes.
inline MetricsReport sharpness_report(const RealVolume& conventional, const RealVolume& proposed) {
    MetricsReport r;
    r.mb_sharpness_conventional = mb_sharpness_intensity(conventional);
    r.mb_sharpness_proposed = mb_sharpness_intensity(proposed);
    r.window_count = 1;
    return r;
}

/// Multi-window report: per-window sharpness averaged across windows.
inline MetricsReport sharpness_report(const std::vector<RealVolume>& conventional,
                                      const std::vector<RealVolume>& proposed) {
    if (conventional.empty() || conventional.size() != proposed.size()) {
        throw ShapeError("sharpness_report: window lists must be nonempty and equal-length");
    }
    MetricsReport r;
    for (std::size_t i = 0; i < conventional.size(); ++i) {
        r.mb_sharpness_conventional += mb_sharpness_intensity(conventional[i]);
        r.mb_sharpness_proposed += mb_sharpness_intensity(proposed[i]);
    }
    const double n = static_cast<double>(conventional.size());
    r.mb_sharpness_conventional /= n;
    r.mb_sharpness_proposed /= n;
    r.window_count = conventional.size();
    return r;
}

} // namespace respsar
