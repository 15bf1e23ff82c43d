#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "respsar/common.hpp"
#include "respsar/fft.hpp"

namespace respsar {

/// Analysis parameters of the short-time Fourier transform, in samples.
struct StftConfig {
    std::size_t window_len = 100;
    std::size_t hop = 12;
    std::size_t fft_len = 256;
};

/// Short-time Fourier transform of one complex slow-time series. Frames are
/// stored frame-major with a two-sided frequency axis centered on 0 Hz.
struct Spectrogram {
    std::vector<cplx> values; ///< frame-major: values[frame * fft_len + bin]
    std::size_t num_frames = 0;
    std::size_t window_len = 0;
    std::size_t hop = 0;
    std::size_t fft_len = 0;
    std::vector<double> frame_times; ///< window-center times [s]
    std::vector<double> freqs;       ///< centered two-sided axis [Hz]
    std::size_t series_len = 0;
    double sample_rate = 1.0;
    double t_start = 0.0;

    cplx& at(std::size_t frame, std::size_t bin) { return values[frame * fft_len + bin]; }
    const cplx& at(std::size_t frame, std::size_t bin) const { return values[frame * fft_len + bin]; }

    double max_magnitude() const {
        double m = 0.0;
        for (const auto& v : values) m = std::max(m, std::abs(v));
        return m;
    }

    /// First sample reconstructable by overlap-add synthesis. Sample 0 is
    /// covered only by the zero-valued first Hann coefficient.
    std::size_t coverage_begin() const { return window_len > 1 ? 1 : 0; }
    /// One past the last covered sample.
    std::size_t coverage_end() const {
        if (num_frames == 0) return 0;
        return std::min(series_len, (num_frames - 1) * hop + window_len);
    }
};

namespace detail {
inline std::vector<double> hann_window(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n)));
    }
    return w;
}
} // namespace detail

/// Throws when the window/hop pair cannot support overlap-add reconstruction.
inline void check_overlap_add(const StftConfig& cfg) {
    if (cfg.window_len < 2) throw ConfigError("stft: window_len must be >= 2");
    if (cfg.hop < 1) throw ConfigError("stft: hop must be >= 1");
    if (cfg.hop > cfg.window_len) {
        throw ConfigError("stft: hop exceeds window length, overlap-add reconstruction impossible");
    }
    if (cfg.fft_len < cfg.window_len) throw ConfigError("stft: fft_len must be >= window_len");
}

inline Spectrogram stft(const cplx* series, std::size_t len, const StftConfig& cfg,
                        double sample_rate = 1.0, double t_start = 0.0) {
    check_overlap_add(cfg);
    if (len < cfg.window_len) throw DomainError("stft: series shorter than the analysis window");

    Spectrogram spec;
    spec.window_len = cfg.window_len;
    spec.hop = cfg.hop;
    spec.fft_len = cfg.fft_len;
    spec.series_len = len;
    spec.sample_rate = sample_rate;
    spec.t_start = t_start;
    spec.num_frames = (len - cfg.window_len) / cfg.hop + 1;

    spec.freqs.resize(cfg.fft_len);
    const std::size_t half = cfg.fft_len / 2;
    for (std::size_t k = 0; k < cfg.fft_len; ++k) {
        spec.freqs[k] = (static_cast<double>(k) - static_cast<double>(half)) * sample_rate /
                        static_cast<double>(cfg.fft_len);
    }
    spec.frame_times.resize(spec.num_frames);
    spec.values.assign(spec.num_frames * cfg.fft_len, cplx(0.0, 0.0));

    const std::vector<double> win = detail::hann_window(cfg.window_len);
    std::vector<cplx> frame(cfg.fft_len);
    for (std::size_t m = 0; m < spec.num_frames; ++m) {
        const std::size_t off = m * cfg.hop;
        spec.frame_times[m] =
            t_start + (static_cast<double>(off) + 0.5 * static_cast<double>(cfg.window_len - 1)) / sample_rate;
        std::fill(frame.begin(), frame.end(), cplx(0.0, 0.0));
        for (std::size_t i = 0; i < cfg.window_len; ++i) frame[i] = series[off + i] * win[i];
        Fft::forward(frame);
        // fftshift so bin 0 of the stored frame is -f_s/2.
        for (std::size_t k = 0; k < cfg.fft_len; ++k) {
            spec.at(m, k) = frame[(k + half) % cfg.fft_len];
        }
    }
    return spec;
}

inline Spectrogram stft(const std::vector<cplx>& series, const StftConfig& cfg,
                        double sample_rate = 1.0, double t_start = 0.0) {
    return stft(series.data(), series.size(), cfg, sample_rate, t_start);
}

/// Weighted overlap-add synthesis: exact inverse of stft on every covered
/// sample (the per-sample window-energy normalization handles partial overlap
/// at the edges). Uncovered samples come back as zero.
inline std::vector<cplx> istft(const Spectrogram& spec) {
    StftConfig cfg{spec.window_len, spec.hop, spec.fft_len};
    check_overlap_add(cfg);
    const std::size_t half = spec.fft_len / 2;
    const std::vector<double> win = detail::hann_window(spec.window_len);

    std::vector<cplx> num(spec.series_len, cplx(0.0, 0.0));
    std::vector<double> den(spec.series_len, 0.0);
    std::vector<cplx> frame(spec.fft_len);
    for (std::size_t m = 0; m < spec.num_frames; ++m) {
        for (std::size_t k = 0; k < spec.fft_len; ++k) {
            frame[(k + half) % spec.fft_len] = spec.at(m, k);
        }
        Fft::inverse(frame);
        const std::size_t off = m * spec.hop;
        for (std::size_t i = 0; i < spec.window_len && off + i < spec.series_len; ++i) {
            num[off + i] += frame[i] * win[i];
            den[off + i] += win[i] * win[i];
        }
    }
    for (std::size_t n = 0; n < spec.series_len; ++n) {
        if (den[n] > 1e-12) {
            num[n] /= den[n];
        } else {
            num[n] = cplx(0.0, 0.0);
        }
    }
    return num;
}

} // namespace respsar
