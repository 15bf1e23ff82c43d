#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "respsar/common.hpp"
#include "respsar/rng.hpp"
#include "respsar/stft.hpp"

namespace respsar {

/// Doppler-trajectory coefficients of one mixture component, in Hz:
/// [Re c0, Re c1, Im c1, Re c2, Im c2, c_lin].
using TrajectoryCoeffs = std::array<double, 6>;

/// Gaussian-ridge mixture fitted to a spectrogram: M components sharing one
/// respiratory frequency omega_r and one frequency spread sigma.
struct MixtureParams {
    int num_components = 1;
    std::vector<double> pi;              ///< nonnegative, sums to 1
    double omega_r = 0.0;                ///< [rad/s]
    std::vector<TrajectoryCoeffs> coeffs; ///< one per component
    double sigma = 0.3;                  ///< [Hz]

    void validate() const {
        if (num_components < 1 || pi.size() != static_cast<std::size_t>(num_components) ||
            coeffs.size() != static_cast<std::size_t>(num_components)) {
            throw ShapeError("MixtureParams: inconsistent component counts");
        }
        double sum = std::accumulate(pi.begin(), pi.end(), 0.0);
        if (std::fabs(sum - 1.0) > 1e-9) throw DomainError("MixtureParams: pi must sum to 1");
        if (!(sigma > 0.0)) throw DomainError("MixtureParams: sigma must be > 0");
    }
};

/// f_D(t) = sum_{n=0..2} Re[c_n e^{j omega_r n t}] + c_lin t, in Hz.
inline double doppler_trajectory(double omega_r, const TrajectoryCoeffs& c, double t) {
    const double w1 = omega_r * t;
    const double w2 = 2.0 * omega_r * t;
    return c[0] + c[1] * std::cos(w1) - c[2] * std::sin(w1) + c[3] * std::cos(w2) -
           c[4] * std::sin(w2) + c[5] * t;
}

/// Unit-area Gaussian ridge profile around the component's Doppler trajectory.
inline double gaussian_ridge(double t, double f, double omega_r, const TrajectoryCoeffs& c,
                             double sigma) {
    const double d = (f - doppler_trajectory(omega_r, c, t)) / sigma;
    return std::exp(-0.5 * d * d) / (std::sqrt(2.0 * kPi) * sigma);
}

/// Modified Bayesian information criterion, -2L + alpha N_p ln(N_s).
inline double mbic(double log_likelihood, int num_params, double num_samples, double alpha) {
    if (!(num_samples >= 1.0)) throw DomainError("mbic: N_s must be >= 1");
    return -2.0 * log_likelihood + alpha * static_cast<double>(num_params) * std::log(num_samples);
}

/// Mixture weights w_m(t, f) = pi_m G_m / sum pi G. Falls back to a hard
/// nearest-trajectory assignment when every component underflows.
inline std::vector<double> tf_weights(const MixtureParams& params, double t, double f) {
    const std::size_t m = static_cast<std::size_t>(params.num_components);
    std::vector<double> logw(m);
    double best = -1e300;
    for (std::size_t k = 0; k < m; ++k) {
        const double d = (f - doppler_trajectory(params.omega_r, params.coeffs[k], t)) / params.sigma;
        logw[k] = std::log(std::max(params.pi[k], 1e-300)) - 0.5 * d * d;
        best = std::max(best, logw[k]);
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        logw[k] = std::exp(logw[k] - best);
        sum += logw[k];
    }
    for (std::size_t k = 0; k < m; ++k) logw[k] /= sum;
    return logw;
}

struct EmFitResult {
    MixtureParams params;
    double log_likelihood = 0.0;
    bool converged = false;
    int iterations = 0;
};

namespace detail {

/// One spectrogram cell treated as a weighted sample.
struct Cell {
    double t;
    double f;
    double w;
};

/// Magnitude-weighted sample set. Weights are normalized so they sum to the
/// number of significant cells (those above 1% of the peak magnitude), which
/// keeps the log pseudo-likelihood on the scale of N_s proper samples.
struct CellSet {
    std::vector<Cell> cells;
    double total_weight = 0.0;
    std::size_t significant_count = 0; ///< N_s for the information criterion
};

inline CellSet collect_cells(const Spectrogram& spec) {
    const double peak = spec.max_magnitude();
    if (!(peak > 0.0)) throw FitError("em_fit: spectrogram is all zero");
    CellSet set;
    double mag_sum = 0.0;
    for (std::size_t m = 0; m < spec.num_frames; ++m) {
        for (std::size_t k = 0; k < spec.fft_len; ++k) {
            const double mag = std::abs(spec.at(m, k));
            if (mag <= 1e-6 * peak) continue; // numerically weightless
            set.cells.push_back({spec.frame_times[m], spec.freqs[k], mag});
            mag_sum += mag;
            if (mag > 0.01 * peak) set.significant_count += 1;
        }
    }
    const double scale = static_cast<double>(set.significant_count) / mag_sum;
    for (auto& c : set.cells) c.w *= scale;
    set.total_weight = static_cast<double>(set.significant_count);
    return set;
}

/// Design row of the trajectory model at time t for fixed omega_r.
inline std::array<double, 6> design_row(double omega_r, double t) {
    const double w1 = omega_r * t;
    const double w2 = 2.0 * omega_r * t;
    return {1.0, std::cos(w1), -std::sin(w1), std::cos(w2), -std::sin(w2), t};
}

/// Per-frame sufficient statistics of the responsibility-weighted frequency
/// data: for component m and frame tau, the weight mass, first and second
/// frequency moments. These are all the E-step carries into the M-step.
struct FrameMoments {
    std::vector<double> times;   // frame centers
    std::vector<double> w;       // [comp][frame] mass
    std::vector<double> wf;      // [comp][frame] sum w f
    std::vector<double> wff;     // [comp][frame] sum w f^2
    std::size_t frames = 0;
    int comps = 0;

    double& mass(int m, std::size_t tau) { return w[static_cast<std::size_t>(m) * frames + tau]; }
    double& mom1(int m, std::size_t tau) { return wf[static_cast<std::size_t>(m) * frames + tau]; }
    double& mom2(int m, std::size_t tau) { return wff[static_cast<std::size_t>(m) * frames + tau]; }
};

/// Weighted least squares for one component's trajectory at fixed omega_r,
/// from per-frame moments. Returns the weighted SSE of the solution.
inline double solve_trajectory(const FrameMoments& fm, int m, double omega_r, TrajectoryCoeffs& out) {
    Eigen::Matrix<double, 6, 6> ata = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> atb = Eigen::Matrix<double, 6, 1>::Zero();
    double f2 = 0.0;
    for (std::size_t tau = 0; tau < fm.frames; ++tau) {
        const double mass = fm.w[static_cast<std::size_t>(m) * fm.frames + tau];
        if (mass <= 0.0) continue;
        const auto a = design_row(omega_r, fm.times[tau]);
        Eigen::Matrix<double, 6, 1> av;
        for (int i = 0; i < 6; ++i) av(i) = a[static_cast<std::size_t>(i)];
        ata += mass * av * av.transpose();
        atb += fm.wf[static_cast<std::size_t>(m) * fm.frames + tau] * av;
        f2 += fm.wff[static_cast<std::size_t>(m) * fm.frames + tau];
    }
    ata += 1e-9 * Eigen::Matrix<double, 6, 6>::Identity();
    const Eigen::Matrix<double, 6, 1> theta = ata.ldlt().solve(atb);
    for (int i = 0; i < 6; ++i) out[static_cast<std::size_t>(i)] = theta(i);
    // SSE = f2 - 2 theta' atb + theta' ata theta
    return f2 - 2.0 * theta.dot(atb) + theta.dot(ata * theta);
}

/// Total weighted SSE across components when trajectories are re-solved for a
/// candidate omega_r. Minimizing this maximizes the expected complete-data
/// log-likelihood over (omega_r, C), so accepting an improvement preserves EM
/// monotonicity.
inline double profile_sse(const FrameMoments& fm, double omega_r,
                          std::vector<TrajectoryCoeffs>& scratch) {
    double sse = 0.0;
    scratch.resize(static_cast<std::size_t>(fm.comps));
    for (int m = 0; m < fm.comps; ++m) {
        sse += solve_trajectory(fm, m, omega_r, scratch[static_cast<std::size_t>(m)]);
    }
    return sse;
}

inline double observed_loglik(const CellSet& set, const MixtureParams& p) {
    const double log_gamma = std::log(std::sqrt(2.0 * kPi) * p.sigma);
    double ll = 0.0;
    for (const auto& c : set.cells) {
        double best = -1e300;
        std::array<double, 8> lg{};
        for (int m = 0; m < p.num_components; ++m) {
            const double d =
                (c.f - doppler_trajectory(p.omega_r, p.coeffs[static_cast<std::size_t>(m)], c.t)) / p.sigma;
            lg[static_cast<std::size_t>(m)] =
                std::log(std::max(p.pi[static_cast<std::size_t>(m)], 1e-300)) - 0.5 * d * d - log_gamma;
            best = std::max(best, lg[static_cast<std::size_t>(m)]);
        }
        double s = 0.0;
        for (int m = 0; m < p.num_components; ++m) s += std::exp(lg[static_cast<std::size_t>(m)] - best);
        ll += c.w * (best + std::log(s));
    }
    return ll;
}

constexpr double kOmegaLo = 2.0 * kPi * 0.05;
constexpr double kOmegaHi = 2.0 * kPi * 1.0;

/// Coarse scan then golden-section refinement of the profile SSE over the
/// respiratory-frequency bracket.
inline double search_omega(const FrameMoments& fm) {
    std::vector<TrajectoryCoeffs> scratch;
    const int grid = 64;
    double best_w = kOmegaLo;
    double best_v = 1e300;
    for (int i = 0; i <= grid; ++i) {
        const double w = kOmegaLo + (kOmegaHi - kOmegaLo) * static_cast<double>(i) / grid;
        const double v = profile_sse(fm, w, scratch);
        if (v < best_v) {
            best_v = v;
            best_w = w;
        }
    }
    const double step = (kOmegaHi - kOmegaLo) / grid;
    double a = std::max(kOmegaLo, best_w - step);
    double b = std::min(kOmegaHi, best_w + step);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = profile_sse(fm, x1, scratch);
    double f2 = profile_sse(fm, x2, scratch);
    for (int it = 0; it < 40; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = profile_sse(fm, x1, scratch);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = profile_sse(fm, x2, scratch);
        }
    }
    return f1 < f2 ? x1 : x2;
}

inline void sort_components_by_weight(MixtureParams& p) {
    std::vector<std::size_t> order(p.pi.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p.pi[a] > p.pi[b]; });
    std::vector<double> pi;
    std::vector<TrajectoryCoeffs> cs;
    for (std::size_t i : order) {
        pi.push_back(p.pi[i]);
        cs.push_back(p.coeffs[i]);
    }
    p.pi = std::move(pi);
    p.coeffs = std::move(cs);
}

/// EM iterations from one starting point. Returns the fit with the observed
/// weighted log pseudo-likelihood, non-decreasing across iterations.
inline EmFitResult em_run(const CellSet& set, MixtureParams start, int max_iters, double rel_tol) {
    const int M = start.num_components;
    const std::size_t nframes = [&] {
        std::vector<double> t;
        for (const auto& c : set.cells) {
            if (t.empty() || c.t != t.back()) t.push_back(c.t);
        }
        return t.size();
    }();

    FrameMoments fm;
    fm.comps = M;
    fm.frames = nframes;
    fm.times.clear();
    for (const auto& c : set.cells) {
        if (fm.times.empty() || c.t != fm.times.back()) fm.times.push_back(c.t);
    }
    fm.w.assign(static_cast<std::size_t>(M) * nframes, 0.0);
    fm.wf.assign(static_cast<std::size_t>(M) * nframes, 0.0);
    fm.wff.assign(static_cast<std::size_t>(M) * nframes, 0.0);

    MixtureParams p = std::move(start);
    double ll = observed_loglik(set, p);
    EmFitResult result;
    result.converged = false;
    const double log_pi_floor = 1e-8;

    int iter = 0;
    for (; iter < max_iters; ++iter) {
        // E-step: responsibilities, accumulated directly into frame moments.
        std::fill(fm.w.begin(), fm.w.end(), 0.0);
        std::fill(fm.wf.begin(), fm.wf.end(), 0.0);
        std::fill(fm.wff.begin(), fm.wff.end(), 0.0);
        std::vector<double> mass(static_cast<std::size_t>(M), 0.0);
        std::size_t tau = 0;
        double prev_t = set.cells.empty() ? 0.0 : set.cells.front().t;
        std::array<double, 8> lg{};
        for (const auto& c : set.cells) {
            if (c.t != prev_t) {
                prev_t = c.t;
                ++tau;
            }
            double best = -1e300;
            for (int m = 0; m < M; ++m) {
                const double d =
                    (c.f - doppler_trajectory(p.omega_r, p.coeffs[static_cast<std::size_t>(m)], c.t)) /
                    p.sigma;
                lg[static_cast<std::size_t>(m)] =
                    std::log(std::max(p.pi[static_cast<std::size_t>(m)], 1e-300)) - 0.5 * d * d;
                best = std::max(best, lg[static_cast<std::size_t>(m)]);
            }
            double denom = 0.0;
            for (int m = 0; m < M; ++m) {
                lg[static_cast<std::size_t>(m)] = std::exp(lg[static_cast<std::size_t>(m)] - best);
                denom += lg[static_cast<std::size_t>(m)];
            }
            for (int m = 0; m < M; ++m) {
                const double r = c.w * lg[static_cast<std::size_t>(m)] / denom;
                fm.mass(m, tau) += r;
                fm.mom1(m, tau) += r * c.f;
                fm.mom2(m, tau) += r * c.f * c.f;
                mass[static_cast<std::size_t>(m)] += r;
            }
        }

        // M-step: mixture weights, trajectories at current omega_r.
        for (int m = 0; m < M; ++m) {
            p.pi[static_cast<std::size_t>(m)] =
                std::max(mass[static_cast<std::size_t>(m)] / set.total_weight, log_pi_floor);
        }
        const double pi_sum = std::accumulate(p.pi.begin(), p.pi.end(), 0.0);
        for (auto& v : p.pi) v /= pi_sum;
        for (int m = 0; m < M; ++m) {
            solve_trajectory(fm, m, p.omega_r, p.coeffs[static_cast<std::size_t>(m)]);
        }

        // Shared omega_r by profile search; keep only if the observed
        // likelihood does not regress.
        MixtureParams cand = p;
        cand.omega_r = search_omega(fm);
        for (int m = 0; m < M; ++m) {
            solve_trajectory(fm, m, cand.omega_r, cand.coeffs[static_cast<std::size_t>(m)]);
        }
        double new_ll = observed_loglik(set, p);
        const double cand_ll = observed_loglik(set, cand);
        if (cand_ll >= new_ll) {
            p = std::move(cand);
            new_ll = cand_ll;
        }

        const bool done = std::fabs(new_ll - ll) <= rel_tol * std::fabs(ll);
        ll = new_ll;
        if (done) {
            result.converged = true;
            ++iter;
            break;
        }
    }

    sort_components_by_weight(p);
    result.params = std::move(p);
    result.log_likelihood = ll;
    result.iterations = iter;
    return result;
}

/// Deterministic default initialization: M=1 from the global weighted
/// centroid regression with a profile-searched omega_r; M=2 splits that
/// trajectory by +-sigma with a perturbed fundamental phase.
inline MixtureParams default_init(const CellSet& set, int M, double sigma, std::uint64_t salt) {
    FrameMoments fm;
    fm.comps = 1;
    fm.times.clear();
    for (const auto& c : set.cells) {
        if (fm.times.empty() || c.t != fm.times.back()) fm.times.push_back(c.t);
    }
    fm.frames = fm.times.size();
    fm.w.assign(fm.frames, 0.0);
    fm.wf.assign(fm.frames, 0.0);
    fm.wff.assign(fm.frames, 0.0);
    std::size_t tau = 0;
    double prev_t = set.cells.empty() ? 0.0 : set.cells.front().t;
    for (const auto& c : set.cells) {
        if (c.t != prev_t) {
            prev_t = c.t;
            ++tau;
        }
        fm.w[tau] += c.w;
        fm.wf[tau] += c.w * c.f;
        fm.wff[tau] += c.w * c.f * c.f;
    }
    const double omega = search_omega(fm);
    TrajectoryCoeffs base{};
    solve_trajectory(fm, 0, omega, base);

    MixtureParams p;
    p.num_components = M;
    p.omega_r = omega;
    p.sigma = sigma;
    p.pi.assign(static_cast<std::size_t>(M), 1.0 / M);
    if (M == 1) {
        p.coeffs = {base};
    } else {
        CounterRng rng(0x9d2c5680u, salt);
        const double split = sigma * (salt == 0 ? 1.0 : rng.uniform(0.5, 2.0));
        const double rot = (salt == 0) ? 0.5 : rng.uniform(-1.5, 1.5);
        p.coeffs.assign(static_cast<std::size_t>(M), base);
        for (int m = 0; m < M; ++m) {
            auto& c = p.coeffs[static_cast<std::size_t>(m)];
            c[0] += (m == 0 ? split : -split);
            const cplx c1(c[1], c[2]);
            const cplx rotated = c1 * std::polar(1.0, (m == 0 ? rot : -rot));
            c[1] = rotated.real();
            c[2] = rotated.imag();
        }
    }
    return p;
}

} // namespace detail

/// Weighted-sample EM fit of the Gaussian-ridge mixture. When no explicit
/// initialization is given, runs the deterministic default start plus five
/// seeded random restarts and keeps the best likelihood.
inline EmFitResult em_fit(const Spectrogram& spec, int num_components, double sigma,
                          const MixtureParams* init = nullptr, int max_iters = 200,
                          double rel_tol = 1e-6) {
    if (num_components < 1 || num_components > 8) throw DomainError("em_fit: M must be in [1, 8]");
    if (!(sigma > 0.0)) throw DomainError("em_fit: sigma must be > 0");
    const detail::CellSet set = detail::collect_cells(spec);

    if (init != nullptr) {
        MixtureParams start = *init;
        start.validate();
        if (start.num_components != num_components) {
            throw ShapeError("em_fit: init has wrong component count");
        }
        start.sigma = sigma;
        return detail::em_run(set, std::move(start), max_iters, rel_tol);
    }

    EmFitResult best;
    bool have = false;
    const int restarts = 5;
    for (int r = 0; r <= restarts; ++r) {
        MixtureParams start = detail::default_init(set, num_components, sigma, static_cast<std::uint64_t>(r));
        EmFitResult fit = detail::em_run(set, std::move(start), max_iters, rel_tol);
        if (!have || fit.log_likelihood > best.log_likelihood) {
            best = std::move(fit);
            have = true;
        }
    }
    return best;
}

/// Number of significant cells (above 1% of the peak magnitude), the N_s of
/// the information criterion.
inline std::size_t significant_cell_count(const Spectrogram& spec) {
    const double peak = spec.max_magnitude();
    if (!(peak > 0.0)) throw FitError("spectrogram is all zero");
    std::size_t n = 0;
    for (const auto& v : spec.values) {
        if (std::abs(v) > 0.01 * peak) ++n;
    }
    return n;
}

/// Free parameter count: 6 per trajectory, M-1 free mixture weights, one
/// shared omega_r.
inline int mixture_param_count(int num_components) { return 6 * num_components + (num_components - 1) + 1; }

struct ModelCandidate {
    int num_components = 0;
    double log_likelihood = 0.0;
    double mbic = 0.0;
    bool converged = false;
};

struct ModelSelection {
    MixtureParams params;
    double log_likelihood = 0.0;
    double mbic = 0.0;
    std::vector<ModelCandidate> candidates;
};

/// Fit M = 1..M_max and keep the MBIC minimizer.
inline ModelSelection select_model(const Spectrogram& spec, double sigma, int max_components = 2,
                                   double alpha = 32.0) {
    const auto ns = static_cast<double>(significant_cell_count(spec));
    ModelSelection sel;
    bool have = false;
    for (int m = 1; m <= max_components; ++m) {
        EmFitResult fit = em_fit(spec, m, sigma);
        const double crit = mbic(fit.log_likelihood, mixture_param_count(m), ns, alpha);
        sel.candidates.push_back({m, fit.log_likelihood, crit, fit.converged});
        if (!have || crit < sel.mbic) {
            sel.params = fit.params;
            sel.log_likelihood = fit.log_likelihood;
            sel.mbic = crit;
            have = true;
        }
    }
    return sel;
}

} // namespace respsar
