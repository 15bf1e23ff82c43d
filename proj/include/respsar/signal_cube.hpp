#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "respsar/common.hpp"
#include "respsar/geometry.hpp"

namespace respsar {

/// Half-open slow-time window [center - length/2, center + length/2).
struct TimeWindow {
    double center = 0.0; ///< t' [s]
    double length = 0.0; ///< delta t [s]

    double start() const { return center - 0.5 * length; }
    double end() const { return center + 0.5 * length; }

    static TimeWindow from_start(double start, double length) {
        return {start + 0.5 * length, length};
    }

    void validate() const {
        if (!(length > 0.0)) throw DomainError("TimeWindow: length must be > 0");
    }
};

/// Complex baseband signal s(r, theta, t) on a (range x angle x slow-time)
/// grid. Layout: range outermost, then angle, then time, so each bin's
/// slow-time series is contiguous. Carries the carrier wavelength and array
/// axis so downstream imaging is self-contained.
struct SignalCube {
    std::vector<cplx> values;
    std::size_t num_range_bins = 0;
    std::size_t num_angle_bins = 0;
    std::size_t num_samples = 0;

    double range_bin_size = 0.0; ///< delta r [m]
    double range_offset = 0.0;   ///< range of bin 0 [m]
    std::vector<double> angle_grid; ///< strictly increasing [rad]
    double sample_rate = 0.0;    ///< f_s [Hz]
    double t_start = 0.0;        ///< time of sample 0 [s]
    double wavelength = 0.0;     ///< carrier wavelength [m]
    Vec3 array_axis{1.0, 0.0, 0.0};

    std::size_t index(std::size_t ir, std::size_t ia, std::size_t it) const {
        return (ir * num_angle_bins + ia) * num_samples + it;
    }
    cplx& at(std::size_t ir, std::size_t ia, std::size_t it) { return values[index(ir, ia, it)]; }
    const cplx& at(std::size_t ir, std::size_t ia, std::size_t it) const {
        return values[index(ir, ia, it)];
    }

    /// Pointer to the contiguous slow-time series of one (range, angle) bin.
    const cplx* series(std::size_t ir, std::size_t ia) const {
        return values.data() + index(ir, ia, 0);
    }
    cplx* series(std::size_t ir, std::size_t ia) { return values.data() + index(ir, ia, 0); }

    double range_at(std::size_t ir) const { return range_offset + static_cast<double>(ir) * range_bin_size; }
    double time_at(std::size_t it) const { return t_start + static_cast<double>(it) / sample_rate; }
    double range_max() const { return range_at(num_range_bins - 1); }
    double time_end() const { return t_start + static_cast<double>(num_samples) / sample_rate; }

    void validate() const {
        if (!(range_bin_size > 0.0)) throw DomainError("SignalCube: range_bin_size must be > 0");
        if (!(sample_rate > 0.0)) throw DomainError("SignalCube: sample_rate must be > 0");
        if (values.size() != num_range_bins * num_angle_bins * num_samples) {
            throw ShapeError("SignalCube: value count does not match dimensions");
        }
        if (angle_grid.size() != num_angle_bins) {
            throw ShapeError("SignalCube: angle grid size does not match dimensions");
        }
        for (std::size_t i = 1; i < angle_grid.size(); ++i) {
            if (!(angle_grid[i] > angle_grid[i - 1])) {
                throw DomainError("SignalCube: angle grid must be strictly increasing");
            }
        }
    }

    SignalCube like_empty() const {
        SignalCube out = *this;
        out.values.assign(values.size(), cplx(0.0, 0.0));
        return out;
    }
};

/// First sample index and count of the half-open window [t'-dt/2, t'+dt/2)
/// on the cube's slow-time grid.
struct WindowIndices {
    std::size_t first = 0;
    std::size_t count = 0;
};

inline WindowIndices window_indices(const SignalCube& cube, const TimeWindow& window) {
    window.validate();
    const double eps = 1e-9;
    if (window.start() < cube.t_start - eps || window.end() > cube.time_end() + eps) {
        throw DomainError("window outside the cube's slow-time span");
    }
    const double lo = (window.start() - cube.t_start) * cube.sample_rate;
    const double hi = (window.end() - cube.t_start) * cube.sample_rate;
    const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil(lo - eps)));
    auto last = static_cast<std::size_t>(std::max(0.0, std::ceil(hi - eps)));
    last = std::min(last, cube.num_samples);
    if (last <= first) throw DomainError("window contains no slow-time samples");
    return {first, last - first};
}

/// Sub-cube covering one time window; all other metadata carried over.
inline SignalCube cube_slice(const SignalCube& cube, const TimeWindow& window) {
    const WindowIndices w = window_indices(cube, window);
    SignalCube out;
    out.num_range_bins = cube.num_range_bins;
    out.num_angle_bins = cube.num_angle_bins;
    out.num_samples = w.count;
    out.range_bin_size = cube.range_bin_size;
    out.range_offset = cube.range_offset;
    out.angle_grid = cube.angle_grid;
    out.sample_rate = cube.sample_rate;
    out.t_start = cube.time_at(w.first);
    out.wavelength = cube.wavelength;
    out.array_axis = cube.array_axis;
    out.values.resize(cube.num_range_bins * cube.num_angle_bins * w.count);
    for (std::size_t ir = 0; ir < cube.num_range_bins; ++ir) {
        for (std::size_t ia = 0; ia < cube.num_angle_bins; ++ia) {
            const cplx* src = cube.series(ir, ia) + w.first;
            cplx* dst = out.series(ir, ia);
            std::copy(src, src + w.count, dst);
        }
    }
    return out;
}

} // namespace respsar
