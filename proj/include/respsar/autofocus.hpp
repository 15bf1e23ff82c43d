#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "respsar/common.hpp"
#include "respsar/imaging.hpp"
#include "respsar/mixture.hpp"
#include "respsar/nelder_mead.hpp"
#include "respsar/signal_cube.hpp"

namespace respsar {

/// Muller-Buffington sharpness of a complex image, sum|I|^4 dV / (sum|I|^2 dV)^2.
inline double mb_sharpness(const SarImage& img) {
    const double dv = img.grid.voxel_volume();
    double p2 = 0.0;
    double p4 = 0.0;
    for (const cplx& v : img.values) {
        const double m2 = std::norm(v);
        p2 += m2;
        p4 += m2 * m2;
    }
    if (!(p2 > 0.0)) throw MetricError("mb_sharpness: image is all zero");
    return (p4 * dv) / ((p2 * dv) * (p2 * dv));
}

/// MB sharpness of an intensity volume whose values carry |I|^2.
inline double mb_sharpness_intensity(const RealVolume& vol) {
    const double dv = vol.grid.voxel_volume();
    double p2 = 0.0;
    double p4 = 0.0;
    for (double v : vol.values) {
        p2 += v;
        p4 += v * v;
    }
    if (!(p2 > 0.0)) throw MetricError("mb_sharpness: volume is all zero");
    return (p4 * dv) / ((p2 * dv) * (p2 * dv));
}

/// Harmonic phase-error coefficients: phi(t) = sum_{n=1,2} Re[b_n e^{j n w_r t}].
struct PhaseCoeffs {
    cplx b1{0.0, 0.0};
    cplx b2{0.0, 0.0};
};

/// Evaluate the harmonic phase model on explicit sample times.
inline PhaseFunction sample_phase(const PhaseCoeffs& coeffs, double omega_r,
                                  const std::vector<double>& times) {
    PhaseFunction phase(times.size(), 0.0);
    for (std::size_t i = 0; i < times.size(); ++i) {
        phase[i] = std::real(coeffs.b1 * std::polar(1.0, omega_r * times[i])) +
                   std::real(coeffs.b2 * std::polar(1.0, 2.0 * omega_r * times[i]));
    }
    return phase;
}

/// Window sample times of a cube, for building phase functions.
inline std::vector<double> window_times(const SignalCube& cube, const TimeWindow& window) {
    const WindowIndices w = window_indices(cube, window);
    std::vector<double> t(w.count);
    for (std::size_t i = 0; i < w.count; ++i) t[i] = cube.time_at(w.first + i);
    return t;
}

/// Convert the respiratory harmonics of a fitted Doppler trajectory into
/// phase-error coefficients, b_n = 2 pi c_n / (j n w_r). The constant and
/// linear trajectory terms carry no periodic motion and are dropped. Used to
/// initialize the sharpness optimizer.
inline PhaseCoeffs phase_from_trajectory(const MixtureParams& params, int component) {
    params.validate();
    if (component < 0 || component >= params.num_components) {
        throw DomainError("phase_from_trajectory: component index out of range");
    }
    PhaseCoeffs out;
    if (params.omega_r == 0.0) return out;
    const auto& c = params.coeffs[static_cast<std::size_t>(component)];
    const cplx c1(c[1], c[2]);
    const cplx c2(c[3], c[4]);
    const cplx j(0.0, 1.0);
    out.b1 = 2.0 * kPi * c1 / (j * params.omega_r);
    out.b2 = 2.0 * kPi * c2 / (j * 2.0 * params.omega_r);
    return out;
}

struct FocusResult {
    SarImage image;        ///< final compensated image on the full grid
    PhaseFunction phase;   ///< estimated phi(t) on the window grid
    PhaseCoeffs coeffs;
    double sharpness_before = 0.0; ///< objective at the initial coefficients
    double sharpness_after = 0.0;  ///< objective at the optimum (>= before)
};

namespace detail {

struct PowerBin {
    std::size_t range_bin;
    std::size_t angle_bin;
    double power;
};

/// Tight sub-box of `grid` around the separated echo's footprint: voxels whose
/// range at the window center lies within +-10 range bins of the cube's peak
/// power bin and whose azimuth lies near the peak angle bin.
inline ImageGrid crop_grid_around_echo(const SignalCube& cube, const ScanTrajectory& traj,
                                       const ImageGrid& grid, const TimeWindow& window) {
    // Peak power bin of the echo cube.
    const PowerBin peak = [&] {
        PowerBin best{0, 0, -1.0};
        for (std::size_t ir = 0; ir < cube.num_range_bins; ++ir) {
            for (std::size_t ia = 0; ia < cube.num_angle_bins; ++ia) {
                const cplx* s = cube.series(ir, ia);
                double acc = 0.0;
                for (std::size_t it = 0; it < cube.num_samples; ++it) acc += std::norm(s[it]);
                if (acc > best.power) best = {ir, ia, acc};
            }
        }
        return best;
    }();
    if (!(peak.power > 0.0)) throw FitError("optimize_phase: separated cube is all zero");

    const double r_peak = cube.range_at(peak.range_bin);
    const double th_peak = cube.angle_grid[peak.angle_bin];
    const double r_half = 10.0 * cube.range_bin_size;
    const double th_half = (cube.num_angle_bins > 1)
                               ? 1.5 * (cube.angle_grid.back() - cube.angle_grid.front()) /
                                     static_cast<double>(cube.num_angle_bins - 1)
                               : kPi;
    const Vec3 xa = antenna_position(traj, window.center);
    const Vec3 axis = cube.array_axis.normalized();

    std::array<std::size_t, 3> lo{grid.dims[0], grid.dims[1], grid.dims[2]};
    std::array<std::size_t, 3> hi{0, 0, 0};
    bool any = false;
    for (std::size_t i = 0; i < grid.dims[0]; ++i) {
        for (std::size_t j = 0; j < grid.dims[1]; ++j) {
            for (std::size_t k = 0; k < grid.dims[2]; ++k) {
                const Vec3 x = grid.voxel_center(i, j, k);
                const Vec3 los = x - xa;
                const double r = los.norm();
                if (!(r > 0.0) || std::fabs(r - r_peak) > r_half) continue;
                double c = axis.dot(los) / r;
                c = std::min(1.0, std::max(-1.0, c));
                if (std::fabs(std::acos(c) - th_peak) > th_half) continue;
                lo[0] = std::min(lo[0], i);
                lo[1] = std::min(lo[1], j);
                lo[2] = std::min(lo[2], k);
                hi[0] = std::max(hi[0], i);
                hi[1] = std::max(hi[1], j);
                hi[2] = std::max(hi[2], k);
                any = true;
            }
        }
    }
    if (!any) return grid; // footprint misses the grid; fall back to the full grid

    ImageGrid crop;
    crop.spacing = grid.spacing;
    crop.origin = grid.voxel_center(lo[0], lo[1], lo[2]);
    crop.dims = {hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1};
    return crop;
}

} // namespace detail

/// Estimate the phase error of one separated echo by maximizing MB sharpness
/// over the 4 real harmonic coefficients (Nelder-Mead from the trajectory
/// initialization plus a restart from zero). Sharpness is evaluated on a
/// cropped sub-grid around the echo footprint; the returned image is rendered
/// on the full grid with the best phase.
inline FocusResult optimize_phase(const SignalCube& cube, const ScanTrajectory& traj,
                                  const ImageGrid& grid, const TimeWindow& window,
                                  const PhaseCoeffs& init, double omega_r) {
    const std::vector<double> times = window_times(cube, window);
    const ImageGrid crop = detail::crop_grid_around_echo(cube, traj, grid, window);
    const BackprojectionTable table(cube, traj, crop, window);
    const double dv = crop.voxel_volume();

    std::vector<double> intens;
    auto sharpness_of = [&](const std::vector<double>& b) {
        const PhaseCoeffs pc{{b[0], b[1]}, {b[2], b[3]}};
        table.intensities(sample_phase(pc, omega_r, times), intens);
        double p2 = 0.0;
        double p4 = 0.0;
        for (double v : intens) {
            p2 += v;
            p4 += v * v;
        }
        if (!(p2 > 0.0)) return 0.0;
        return (p4 * dv) / ((p2 * dv) * (p2 * dv));
    };
    auto objective = [&](const std::vector<double>& b) { return -sharpness_of(b); };

    const std::vector<double> b_init{init.b1.real(), init.b1.imag(), init.b2.real(), init.b2.imag()};
    const double before = sharpness_of(b_init);
    if (!(before > 0.0)) throw FitError("optimize_phase: zero image energy on the echo footprint");

    NelderMeadOptions opts;
    opts.init_step = 0.25;
    opts.x_tol = 1e-3;
    opts.max_evals = 300;
    NelderMeadResult best = nelder_mead(objective, b_init, opts);
    const NelderMeadResult from_zero = nelder_mead(objective, {0.0, 0.0, 0.0, 0.0}, opts);
    if (from_zero.fx < best.fx) best = from_zero;

    FocusResult result;
    result.coeffs = PhaseCoeffs{{best.x[0], best.x[1]}, {best.x[2], best.x[3]}};
    result.sharpness_before = before;
    result.sharpness_after = std::max(-best.fx, before);
    if (-best.fx < before) result.coeffs = PhaseCoeffs{{b_init[0], b_init[1]}, {b_init[2], b_init[3]}};
    result.phase = sample_phase(result.coeffs, omega_r, times);
    result.image = backproject(cube, traj, grid, window, result.phase);
    return result;
}

/// Incoherent fusion I_p(x) = sum |I_k(x)|^2 over images on one grid.
inline RealVolume integrate_images(const std::vector<SarImage>& images) {
    if (images.empty()) throw DomainError("integrate_images: need at least one image");
    for (const auto& img : images) {
        if (!img.grid.same_as(images.front().grid)) {
            throw ShapeError("integrate_images: image grids differ");
        }
        if (img.values.size() != images.front().values.size()) {
            throw ShapeError("integrate_images: image sizes differ");
        }
    }
    RealVolume out;
    out.grid = images.front().grid;
    out.values.assign(images.front().values.size(), 0.0);
    for (const auto& img : images) {
        for (std::size_t i = 0; i < img.values.size(); ++i) {
            out.values[i] += std::norm(img.values[i]);
        }
    }
    return out;
}

} // namespace respsar
