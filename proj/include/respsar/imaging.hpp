#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "respsar/common.hpp"
#include "respsar/geometry.hpp"
#include "respsar/scene.hpp"
#include "respsar/signal_cube.hpp"

namespace respsar {

/// Regular voxel lattice; voxel (i,j,k) is centered at origin + (i sx, j sy, k sz).
struct ImageGrid {
    Vec3 origin;
    Vec3 spacing{0.01, 0.01, 0.01};
    std::array<std::size_t, 3> dims{1, 1, 1};

    std::size_t num_voxels() const { return dims[0] * dims[1] * dims[2]; }
    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
        return (i * dims[1] + j) * dims[2] + k;
    }
    Vec3 voxel_center(std::size_t i, std::size_t j, std::size_t k) const {
        return {origin.x + static_cast<double>(i) * spacing.x,
                origin.y + static_cast<double>(j) * spacing.y,
                origin.z + static_cast<double>(k) * spacing.z};
    }
    Vec3 voxel_center(std::size_t flat) const {
        const std::size_t i = flat / (dims[1] * dims[2]);
        const std::size_t j = (flat / dims[2]) % dims[1];
        const std::size_t k = flat % dims[2];
        return voxel_center(i, j, k);
    }
    double voxel_volume() const { return spacing.x * spacing.y * spacing.z; }

    void validate() const {
        if (!(spacing.x > 0.0 && spacing.y > 0.0 && spacing.z > 0.0)) {
            throw DomainError("ImageGrid: spacing components must be > 0");
        }
        if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1) {
            throw DomainError("ImageGrid: dims components must be >= 1");
        }
    }

    bool same_as(const ImageGrid& o) const {
        auto close = [](double a, double b) { return std::fabs(a - b) <= 1e-12 * std::max({1.0, std::fabs(a), std::fabs(b)}); };
        return dims == o.dims && close(origin.x, o.origin.x) && close(origin.y, o.origin.y) &&
               close(origin.z, o.origin.z) && close(spacing.x, o.spacing.x) &&
               close(spacing.y, o.spacing.y) && close(spacing.z, o.spacing.z);
    }
};

/// Complex voxel image I(x).
struct SarImage {
    ImageGrid grid;
    std::vector<cplx> values;
    std::size_t coverage_warnings = 0; ///< voxels with at least one out-of-coverage sample
};

/// Real nonnegative voxel volume (fused intensities, power maps in 3-D).
struct RealVolume {
    ImageGrid grid;
    std::vector<double> values;
};

/// Motion phase samples phi(t) on a window's slow-time grid; an empty vector
/// means phi = 0.
using PhaseFunction = std::vector<double>;

/// Radar-motion compensation phase, psi = 4 pi r / lambda.
inline double psi(double range, double wavelength) { return 4.0 * kPi * range / wavelength; }

namespace detail {

/// Bilinear read of s(r, theta, t) at fixed sample index. Returns false when
/// (r, theta) falls outside the cube's axes.
inline bool sample_cube(const SignalCube& cube, double r, double theta, std::size_t it, cplx& out) {
    const double u = (r - cube.range_offset) / cube.range_bin_size;
    if (u < 0.0 || u > static_cast<double>(cube.num_range_bins - 1)) return false;
    std::size_t i0 = static_cast<std::size_t>(u);
    if (i0 >= cube.num_range_bins - 1 && cube.num_range_bins > 1) i0 = cube.num_range_bins - 2;
    const double fr = (cube.num_range_bins > 1) ? u - static_cast<double>(i0) : 0.0;

    std::size_t q0 = 0;
    double fa = 0.0;
    if (cube.num_angle_bins > 1) {
        const auto& ang = cube.angle_grid;
        if (theta < ang.front() || theta > ang.back()) return false;
        std::size_t hi = 1;
        while (hi < ang.size() - 1 && ang[hi] < theta) ++hi;
        q0 = hi - 1;
        fa = (theta - ang[q0]) / (ang[q0 + 1] - ang[q0]);
    }

    const cplx v00 = cube.at(i0, q0, it);
    const cplx v10 = (cube.num_range_bins > 1) ? cube.at(i0 + 1, q0, it) : cplx(0.0, 0.0);
    if (cube.num_angle_bins > 1) {
        const cplx v01 = cube.at(i0, q0 + 1, it);
        const cplx v11 = (cube.num_range_bins > 1) ? cube.at(i0 + 1, q0 + 1, it) : cplx(0.0, 0.0);
        out = (1.0 - fr) * ((1.0 - fa) * v00 + fa * v01) + fr * ((1.0 - fa) * v10 + fa * v11);
    } else {
        out = (1.0 - fr) * v00 + fr * v10;
    }
    return true;
}

inline std::vector<cplx> phase_rotators(const PhaseFunction& phase, std::size_t count) {
    std::vector<cplx> u(count, cplx(1.0, 0.0));
    if (!phase.empty()) {
        if (phase.size() != count) {
            throw ShapeError("PhaseFunction sample count does not match the window");
        }
        for (std::size_t i = 0; i < count; ++i) u[i] = std::polar(1.0, -phase[i]);
    }
    return u;
}

} // namespace detail

/// Delay-and-sum image formation over one time window:
///   I(x) = sum_t s(r(x,t), theta(x,t), t) e^{-j(psi(x,t) + phi(t))} / f_s.
/// Voxels outside the cube's (range, angle) coverage contribute zero and are
/// tallied in coverage_warnings.
inline SarImage backproject(const SignalCube& cube, const ScanTrajectory& traj,
                            const ImageGrid& grid, const TimeWindow& window,
                            const PhaseFunction& phase = {}) {
    grid.validate();
    cube.validate();
    const WindowIndices w = window_indices(cube, window);
    const std::vector<cplx> rot = detail::phase_rotators(phase, w.count);
    const Vec3 axis = cube.array_axis.normalized();
    const double lam = cube.wavelength;
    if (!(lam > 0.0)) throw DomainError("backproject: cube wavelength not set");
    const double dt = 1.0 / cube.sample_rate;

    std::vector<Vec3> ant(w.count);
    for (std::size_t i = 0; i < w.count; ++i) {
        ant[i] = antenna_position(traj, cube.time_at(w.first + i));
    }

    SarImage img;
    img.grid = grid;
    img.values.assign(grid.num_voxels(), cplx(0.0, 0.0));
    const long long nvox = static_cast<long long>(grid.num_voxels());
    std::size_t warnings = 0;

#pragma omp parallel for schedule(static) reduction(+ : warnings)
    for (long long v = 0; v < nvox; ++v) {
        const Vec3 x = grid.voxel_center(static_cast<std::size_t>(v));
        cplx acc(0.0, 0.0);
        bool missed = false;
        for (std::size_t i = 0; i < w.count; ++i) {
            const Vec3 los = x - ant[i];
            const double r = los.norm();
            if (!(r > 0.0)) {
                missed = true;
                continue;
            }
            double c = axis.dot(los) / r;
            c = std::min(1.0, std::max(-1.0, c));
            const double theta = std::acos(c);
            cplx s;
            if (!detail::sample_cube(cube, r, theta, w.first + i, s)) {
                missed = true;
                continue;
            }
            acc += s * std::polar(1.0, -psi(r, lam)) * rot[i];
        }
        img.values[static_cast<std::size_t>(v)] = acc * dt;
        if (missed) warnings += 1;
    }
    img.coverage_warnings = warnings;
    return img;
}

/// Precomputed per-voxel backprojection contributions for one cube/grid/window,
/// so images for many candidate phase functions cost one inner product per
/// voxel instead of a full geometric pass. Stores single-precision terms; the
/// time accumulation runs in double.
class BackprojectionTable {
public:
    BackprojectionTable(const SignalCube& cube, const ScanTrajectory& traj, const ImageGrid& grid,
                        const TimeWindow& window)
        : grid_(grid) {
        grid.validate();
        const WindowIndices w = window_indices(cube, window);
        count_ = w.count;
        const std::vector<cplx> unit = detail::phase_rotators({}, w.count);
        const Vec3 axis = cube.array_axis.normalized();
        const double lam = cube.wavelength;
        const double dt = 1.0 / cube.sample_rate;

        std::vector<Vec3> ant(w.count);
        for (std::size_t i = 0; i < w.count; ++i) {
            ant[i] = antenna_position(traj, cube.time_at(w.first + i));
        }
        const std::size_t nvox = grid.num_voxels();
        terms_.assign(nvox * count_, std::complex<float>(0.0f, 0.0f));

#pragma omp parallel for schedule(static)
        for (long long v = 0; v < static_cast<long long>(nvox); ++v) {
            const Vec3 x = grid.voxel_center(static_cast<std::size_t>(v));
            std::complex<float>* row = terms_.data() + static_cast<std::size_t>(v) * count_;
            for (std::size_t i = 0; i < count_; ++i) {
                const Vec3 los = x - ant[i];
                const double r = los.norm();
                if (!(r > 0.0)) continue;
                double c = axis.dot(los) / r;
                c = std::min(1.0, std::max(-1.0, c));
                cplx s;
                if (!detail::sample_cube(cube, r, std::acos(c), w.first + i, s)) continue;
                const cplx term = s * std::polar(1.0, -psi(r, lam)) * dt;
                row[i] = std::complex<float>(static_cast<float>(term.real()), static_cast<float>(term.imag()));
            }
        }
    }

    std::size_t sample_count() const { return count_; }
    const ImageGrid& grid() const { return grid_; }

    /// |I(x)|^2 per voxel for the given compensation phase.
    void intensities(const PhaseFunction& phase, std::vector<double>& out) const {
        const std::vector<cplx> rot = detail::phase_rotators(phase, count_);
        const std::size_t nvox = grid_.num_voxels();
        out.resize(nvox);
#pragma omp parallel for schedule(static)
        for (long long v = 0; v < static_cast<long long>(nvox); ++v) {
            const std::complex<float>* row = terms_.data() + static_cast<std::size_t>(v) * count_;
            double re = 0.0;
            double im = 0.0;
            for (std::size_t i = 0; i < count_; ++i) {
                const cplx t(row[i].real(), row[i].imag());
                const cplx p = t * rot[i];
                re += p.real();
                im += p.imag();
            }
            out[static_cast<std::size_t>(v)] = re * re + im * im;
        }
    }

private:
    ImageGrid grid_;
    std::size_t count_ = 0;
    std::vector<std::complex<float>> terms_;
};

} // namespace respsar
