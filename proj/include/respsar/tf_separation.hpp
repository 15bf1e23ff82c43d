#pragma once

#include <cstddef>
#include <vector>

#include "respsar/common.hpp"
#include "respsar/mixture.hpp"
#include "respsar/signal_cube.hpp"
#include "respsar/stft.hpp"

namespace respsar {

/// Split one spatially-separated cube into M component cubes by masking every
/// bin's slow-time series in the time-frequency domain with the mixture
/// weights w_{n,m}(t, f) fitted at the peak bin. The same mask grid applies
/// cube-wide; masks sum to 1 at every cell, so the component cubes sum back
/// to the input on the overlap-add interior.
inline std::vector<SignalCube> apply_tf_separation(const SignalCube& cube,
                                                   const MixtureParams& params,
                                                   const StftConfig& cfg) {
    params.validate();
    check_overlap_add(cfg);
    const int M = params.num_components;

    // Mask per (frame, bin), shared by all cube bins. Frame times depend only
    // on the cube's time base, so fit one probe spectrogram shape first.
    const Spectrogram probe =
        stft(cube.series(0, 0), cube.num_samples, cfg, cube.sample_rate, cube.t_start);
    std::vector<std::vector<double>> mask(static_cast<std::size_t>(M));
    for (auto& m : mask) m.assign(probe.num_frames * probe.fft_len, 0.0);
    for (std::size_t fr = 0; fr < probe.num_frames; ++fr) {
        for (std::size_t k = 0; k < probe.fft_len; ++k) {
            const std::vector<double> w = tf_weights(params, probe.frame_times[fr], probe.freqs[k]);
            for (int m = 0; m < M; ++m) {
                mask[static_cast<std::size_t>(m)][fr * probe.fft_len + k] = w[static_cast<std::size_t>(m)];
            }
        }
    }

    std::vector<SignalCube> parts;
    parts.reserve(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) parts.push_back(cube.like_empty());

    for (std::size_t ir = 0; ir < cube.num_range_bins; ++ir) {
        for (std::size_t ia = 0; ia < cube.num_angle_bins; ++ia) {
            const Spectrogram spec =
                stft(cube.series(ir, ia), cube.num_samples, cfg, cube.sample_rate, cube.t_start);
            Spectrogram masked = spec;
            for (int m = 0; m < M; ++m) {
                const auto& mk = mask[static_cast<std::size_t>(m)];
                for (std::size_t i = 0; i < spec.values.size(); ++i) {
                    masked.values[i] = spec.values[i] * mk[i];
                }
                const std::vector<cplx> series = istft(masked);
                std::copy(series.begin(), series.end(), parts[static_cast<std::size_t>(m)].series(ir, ia));
            }
        }
    }
    return parts;
}

} // namespace respsar
