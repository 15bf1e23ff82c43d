#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace respsar {

using cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0; // m/s
inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Argument outside its documented domain (time out of scan, empty sets, size mismatches).
struct DomainError : Error {
    using Error::Error;
};

/// Degenerate geometry (zero line of sight, nonpositive range).
struct GeometryError : Error {
    using Error::Error;
};

/// Scatterer or voxel falls outside the sampled range/angle span.
struct CoverageError : Error {
    using Error::Error;
};

/// Invalid processing configuration (window plan, overlap-add violation).
struct ConfigError : Error {
    using Error::Error;
};

/// Model fitting cannot proceed (degenerate spectrogram).
struct FitError : Error {
    using Error::Error;
};

/// Metric undefined for the given input (all-zero image, empty cloud).
struct MetricError : Error {
    using Error::Error;
};

/// Mismatched array/grid shapes.
struct ShapeError : Error {
    using Error::Error;
};

/// Round to `digits` significant decimal digits. Used when serializing metrics
/// so reports are byte-stable across runs.
inline double round_sig(double x, int digits) {
    if (x == 0.0 || !std::isfinite(x)) return x;
    const double mag = std::pow(10.0, digits - 1 - static_cast<int>(std::floor(std::log10(std::fabs(x)))));
    return std::round(x * mag) / mag;
}

/// sin(pi x)/(pi x), the normalized sinc with first null at |x| = 1.
inline double sinc(double x) {
    const double px = kPi * x;
    if (std::fabs(px) < 1e-8) return 1.0 - px * px / 6.0;
    return std::sin(px) / px;
}

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

} // namespace respsar
