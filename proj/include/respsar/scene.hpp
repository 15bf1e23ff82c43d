#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "respsar/common.hpp"
#include "respsar/geometry.hpp"

namespace respsar {

/// FMCW array radar parameters.
struct RadarConfig {
    double wavelength = 0.0;      ///< carrier wavelength [m]
    double bandwidth = 0.0;       ///< sweep bandwidth [Hz]
    double slow_time_rate = 0.0;  ///< slow-time sampling frequency f_s [Hz]
    int num_elements = 1;         ///< receive elements in the line array
    double element_spacing = 0.0; ///< element pitch [m]

    /// c/(2B), the smallest resolvable range separation.
    double range_resolution() const { return kSpeedOfLight / (2.0 * bandwidth); }

    void validate() const {
        if (!(wavelength > 0.0)) throw DomainError("RadarConfig: wavelength must be > 0");
        if (!(bandwidth > 0.0)) throw DomainError("RadarConfig: bandwidth must be > 0");
        if (!(slow_time_rate > 0.0)) throw DomainError("RadarConfig: slow_time_rate must be > 0");
        if (num_elements < 1) throw DomainError("RadarConfig: num_elements must be >= 1");
        if (!(element_spacing > 0.0)) throw DomainError("RadarConfig: element_spacing must be > 0");
    }
};

/// Constant-velocity mechanical scan of the antenna.
struct ScanTrajectory {
    Vec3 origin;   ///< antenna position at t = 0 [m]
    Vec3 velocity; ///< scan velocity [m/s]
    double duration = 0.0; ///< scan length [s]

    void validate() const {
        if (!(duration > 0.0)) throw DomainError("ScanTrajectory: duration must be > 0");
        if (!(velocity.norm() > 0.0)) throw DomainError("ScanTrajectory: velocity must be nonzero");
    }
};

/// Periodic body-surface displacement, a truncated Fourier series in the
/// fundamental breathing frequency: d(t) = sum_n Re[c_n e^{j w_r n t}].
struct RespiratoryMotion {
    double omega_r = 0.0;     ///< fundamental angular frequency [rad/s]
    std::vector<cplx> coeffs; ///< c_0..c_K [m]

    static RespiratoryMotion none() { return {0.0, {}}; }

    /// d(t) [m].
    double displacement(double t) const {
        double d = 0.0;
        for (size_t n = 0; n < coeffs.size(); ++n) {
            d += std::real(coeffs[n] * std::polar(1.0, omega_r * static_cast<double>(n) * t));
        }
        return d;
    }

    /// d'(t) [m/s] = w_r * sum_n n Re[j c_n e^{j w_r n t}].
    double velocity(double t) const {
        double v = 0.0;
        for (size_t n = 1; n < coeffs.size(); ++n) {
            const cplx jc = cplx(0.0, 1.0) * coeffs[n];
            v += static_cast<double>(n) * std::real(jc * std::polar(1.0, omega_r * static_cast<double>(n) * t));
        }
        return omega_r * v;
    }
};

/// Point scatterer with a nominal position and breathing motion.
struct Scatterer {
    Vec3 position;             ///< nominal position [m]
    double reflectivity = 1.0; ///< nonnegative amplitude
    RespiratoryMotion motion;
};

/// Ground-truth scene consumed by the simulator.
struct Scene {
    std::vector<Scatterer> scatterers;
    double noise_sigma = 0.0; ///< per-sample complex noise std
    std::uint64_t rng_seed = 0;
};

namespace detail {
inline void check_scan_time(const ScanTrajectory& traj, double t) {
    const double slack = 1e-9 * std::max(1.0, traj.duration);
    if (t < -slack || t > traj.duration + slack) {
        throw DomainError("time outside scan interval [0, T]");
    }
}
} // namespace detail

/// Antenna position x_a(t) = x0 + t v.
inline Vec3 antenna_position(const ScanTrajectory& traj, double t) {
    detail::check_scan_time(traj, t);
    return traj.origin + t * traj.velocity;
}

/// Instantaneous range R(t) = ||x_a(t) - x_t|| + d(t).
inline double range_to(const ScanTrajectory& traj, const Scatterer& s, double t) {
    const Vec3 los = antenna_position(traj, t) - s.position;
    const double r = los.norm() + s.motion.displacement(t);
    if (!(r > 0.0)) throw GeometryError("range_to: nonpositive range (degenerate geometry)");
    return r;
}

/// Angle in [0, pi] between the array baseline axis and the line of sight to x.
/// Broadside corresponds to pi/2.
inline double azimuth_to(const ScanTrajectory& traj, const Vec3& array_axis, const Vec3& x, double t) {
    const Vec3 axis = array_axis.normalized();
    const Vec3 los = x - antenna_position(traj, t);
    const double n = los.norm();
    if (!(n > 0.0)) throw GeometryError("azimuth_to: zero-length line of sight");
    double c = axis.dot(los) / n;
    c = std::min(1.0, std::max(-1.0, c));
    return std::acos(c);
}

/// Instantaneous Doppler frequency (2/lambda) dR/dt, the sum of a
/// scan-induced and a respiration-induced component.
inline double instantaneous_doppler(const ScanTrajectory& traj, const Scatterer& s, double t,
                                    double wavelength) {
    detail::check_scan_time(traj, t);
    const Vec3 los = traj.origin + t * traj.velocity - s.position;
    const double n = los.norm();
    if (!(n > 0.0)) throw GeometryError("instantaneous_doppler: antenna coincides with scatterer");
    const double scan_term = traj.velocity.dot(los) / n;
    return (2.0 / wavelength) * (scan_term + s.motion.velocity(t));
}

} // namespace respsar
