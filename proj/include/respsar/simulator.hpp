#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "respsar/common.hpp"
#include "respsar/rng.hpp"
#include "respsar/scene.hpp"
#include "respsar/signal_cube.hpp"

namespace respsar {

/// Sampling lattice for a simulated cube.
struct CubeAxes {
    double range_offset = 0.0;   ///< range of bin 0 [m]
    double range_bin_size = 0.0; ///< [m]
    std::size_t num_range_bins = 0;
    std::vector<double> angle_grid; ///< strictly increasing [rad]
    double sample_rate = 0.0;    ///< [Hz]
    double t_start = 0.0;        ///< [s]
    std::size_t num_samples = 0;
};

/// The physical angle bins of an N_e-point spatial DFT on the line array:
/// cos(theta_k) = k lambda / (N_e d_e), k = -N_e/2 .. N_e/2 - 1, sorted ascending.
inline std::vector<double> dft_angle_grid(const RadarConfig& radar) {
    radar.validate();
    const int ne = radar.num_elements;
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(ne));
    for (int k = -ne / 2; k < ne - ne / 2; ++k) {
        double c = static_cast<double>(k) * radar.wavelength / (static_cast<double>(ne) * radar.element_spacing);
        if (c < -1.0 || c > 1.0) continue; // spatial frequency beyond visible space
        grid.push_back(std::acos(c));
    }
    std::sort(grid.begin(), grid.end());
    return grid;
}

/// Axes spanning every scatterer's range swath over the scan, with margin for
/// the range-response tails. Range pitch is half the range resolution; angles
/// are the DFT bins.
inline CubeAxes default_axes(const Scene& scene, const RadarConfig& radar, const ScanTrajectory& traj) {
    radar.validate();
    traj.validate();
    const double dr_res = radar.range_resolution();
    double rmin = 1e300;
    double rmax = -1e300;
    const int probes = 256;
    for (const auto& s : scene.scatterers) {
        double amp = 0.0;
        for (const auto& c : s.motion.coeffs) amp += std::abs(c);
        for (int i = 0; i <= probes; ++i) {
            const double t = traj.duration * static_cast<double>(i) / probes;
            const double r = (antenna_position(traj, t) - s.position).norm();
            rmin = std::min(rmin, r - amp);
            rmax = std::max(rmax, r + amp);
        }
    }
    if (scene.scatterers.empty()) {
        rmin = 0.5;
        rmax = 1.5;
    }
    const double margin = 5.0 * dr_res;
    CubeAxes axes;
    axes.range_bin_size = 0.5 * dr_res;
    axes.range_offset = std::max(axes.range_bin_size, rmin - margin);
    axes.num_range_bins =
        static_cast<std::size_t>(std::ceil((rmax + margin - axes.range_offset) / axes.range_bin_size)) + 1;
    axes.angle_grid = dft_angle_grid(radar);
    axes.sample_rate = radar.slow_time_rate;
    axes.t_start = 0.0;
    axes.num_samples = static_cast<std::size_t>(std::floor(traj.duration * radar.slow_time_rate - 1e-9)) + 1;
    return axes;
}

/// Synthesize the complex baseband cube for a scene.
///
/// Each scatterer contributes, per element of the uniform line array, a
/// sinc range response centered on the array-center range R(t) with a
/// per-element phase exp(+j 2pi (R_center + R_element) / lambda), i.e. the
/// center-transmit, per-element-receive path pair; the central element's
/// phase is exactly +4 pi R(t) / lambda. Element signals are combined onto
/// the angle grid by the spatial DFT with steering phases
/// (2 pi d_e / lambda) cos(theta). Additive circular complex white noise of
/// std noise_sigma is drawn from a counter-based stream keyed by rng_seed
/// and the sample's linear index, so the cube is reproducible across thread
/// counts.
inline SignalCube simulate_cube(const Scene& scene, const RadarConfig& radar,
                                const ScanTrajectory& traj, const CubeAxes& axes,
                                const Vec3& array_axis = Vec3{1.0, 0.0, 0.0}) {
    radar.validate();
    traj.validate();
    if (scene.noise_sigma < 0.0) throw DomainError("Scene: noise_sigma must be >= 0");
    if (std::fabs(axes.sample_rate - radar.slow_time_rate) > 1e-9 * radar.slow_time_rate) {
        throw DomainError("simulate_cube: axes sample rate must match radar slow_time_rate");
    }
    const Vec3 axis = array_axis.normalized();

    SignalCube cube;
    cube.num_range_bins = axes.num_range_bins;
    cube.num_angle_bins = axes.angle_grid.size();
    cube.num_samples = axes.num_samples;
    cube.range_bin_size = axes.range_bin_size;
    cube.range_offset = axes.range_offset;
    cube.angle_grid = axes.angle_grid;
    cube.sample_rate = axes.sample_rate;
    cube.t_start = axes.t_start;
    cube.wavelength = radar.wavelength;
    cube.array_axis = axis;
    cube.values.assign(cube.num_range_bins * cube.num_angle_bins * cube.num_samples, cplx(0.0, 0.0));
    cube.validate();

    const std::size_t ne = static_cast<std::size_t>(radar.num_elements);
    const std::size_t na = cube.num_angle_bins;
    const std::size_t nr = cube.num_range_bins;
    const std::size_t nt = cube.num_samples;
    const double dr_res = radar.range_resolution();
    const double lam = radar.wavelength;
    const double two_pi_over_lam = 2.0 * kPi / lam;

    // Steering matrix W[q][e] = exp(+j (2pi d_e/lambda) cos(theta_q) (e - (N_e-1)/2)) / sqrt(N_e).
    std::vector<cplx> steer(na * ne);
    const double norm = 1.0 / std::sqrt(static_cast<double>(ne));
    for (std::size_t q = 0; q < na; ++q) {
        const double k_cos = two_pi_over_lam * radar.element_spacing * std::cos(cube.angle_grid[q]);
        for (std::size_t e = 0; e < ne; ++e) {
            const double offset_idx = static_cast<double>(e) - 0.5 * static_cast<double>(ne - 1);
            steer[q * ne + e] = norm * std::polar(1.0, k_cos * offset_idx);
        }
    }

    // Coverage precheck: every scatterer's center range and azimuth must stay
    // on the grid for the whole sampled interval.
    const double r_lo = cube.range_offset;
    const double r_hi = cube.range_max();
    const double th_lo = cube.angle_grid.front() - 1e-9;
    const double th_hi = cube.angle_grid.back() + 1e-9;
    for (std::size_t k = 0; k < scene.scatterers.size(); ++k) {
        const auto& s = scene.scatterers[k];
        if (s.reflectivity < 0.0) throw DomainError("Scatterer: reflectivity must be >= 0");
        for (std::size_t it = 0; it < nt; ++it) {
            const double t = cube.time_at(it);
            const double r = range_to(traj, s, t);
            if (r < r_lo || r > r_hi) {
                throw CoverageError("simulate_cube: scatterer range outside grid span");
            }
            const double th = azimuth_to(traj, axis, s.position, t);
            if (th < th_lo || th > th_hi) {
                throw CoverageError("simulate_cube: scatterer azimuth outside grid span");
            }
        }
    }

#pragma omp parallel for schedule(static)
    for (long long it_s = 0; it_s < static_cast<long long>(nt); ++it_s) {
        const auto it = static_cast<std::size_t>(it_s);
        const double t = cube.time_at(it);
        const Vec3 xa = antenna_position(traj, t);

        // Per-element range profiles for this slow-time sample.
        std::vector<cplx> elem(ne * nr, cplx(0.0, 0.0));
        for (const auto& s : scene.scatterers) {
            const double d = s.motion.displacement(t);
            const double r_center = (xa - s.position).norm() + d;
            const long long i_lo =
                static_cast<long long>(std::ceil((r_center - 4.0 * dr_res - cube.range_offset) / cube.range_bin_size));
            const long long i_hi =
                static_cast<long long>(std::floor((r_center + 4.0 * dr_res - cube.range_offset) / cube.range_bin_size));
            const long long lo = std::max(i_lo, 0LL);
            const long long hi = std::min(i_hi, static_cast<long long>(nr) - 1);
            for (std::size_t e = 0; e < ne; ++e) {
                const double offset_idx = static_cast<double>(e) - 0.5 * static_cast<double>(ne - 1);
                const Vec3 pe = xa + offset_idx * radar.element_spacing * axis;
                const double r_elem = (pe - s.position).norm() + d;
                const cplx phase = std::polar(1.0, two_pi_over_lam * (r_center + r_elem));
                for (long long i = lo; i <= hi; ++i) {
                    const double r_bin = cube.range_at(static_cast<std::size_t>(i));
                    const double amp = s.reflectivity * sinc((r_bin - r_center) / dr_res);
                    elem[e * nr + static_cast<std::size_t>(i)] += amp * phase;
                }
            }
        }

        // Spatial DFT onto the angle grid, plus seeded per-sample noise.
        for (std::size_t ir = 0; ir < nr; ++ir) {
            for (std::size_t q = 0; q < na; ++q) {
                cplx acc(0.0, 0.0);
                for (std::size_t e = 0; e < ne; ++e) {
                    acc += steer[q * ne + e] * elem[e * nr + ir];
                }
                const std::size_t idx = cube.index(ir, q, it);
                if (scene.noise_sigma > 0.0) {
                    CounterRng rng(scene.rng_seed, idx);
                    acc += rng.complex_normal(scene.noise_sigma);
                }
                cube.values[idx] = acc;
            }
        }
    }
    return cube;
}

} // namespace respsar
