#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "respsar/common.hpp"

namespace respsar {

/// Thin FFTW3 front end. Plan creation is serialized behind a mutex (FFTW
/// planning is not thread-safe); execution uses fftw_execute_dft on caller
/// buffers, which is. Plans are cached per (size, direction).
class Fft {
public:
    static void forward(std::vector<cplx>& data) { run(data, FFTW_FORWARD); }
    static void inverse(std::vector<cplx>& data) {
        run(data, FFTW_BACKWARD);
        const double scale = 1.0 / static_cast<double>(data.size());
        for (auto& v : data) v *= scale;
    }

private:
    static void run(std::vector<cplx>& data, int direction) {
        if (data.empty()) throw DomainError("fft: empty input");
        fftw_plan plan = get_plan(static_cast<int>(data.size()), direction);
        auto* buf = reinterpret_cast<fftw_complex*>(data.data());
        fftw_execute_dft(plan, buf, buf);
    }

    static fftw_plan get_plan(int n, int direction) {
        static std::mutex mtx;
        static std::map<std::pair<int, int>, fftw_plan> cache;
        std::lock_guard<std::mutex> lock(mtx);
        auto key = std::make_pair(n, direction);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        // Plan on a scratch buffer so caller data is not clobbered by planning.
        std::vector<cplx> scratch(static_cast<size_t>(n));
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan plan = fftw_plan_dft_1d(n, buf, buf, direction, FFTW_ESTIMATE | FFTW_UNALIGNED);
        cache.emplace(key, plan);
        return plan;
    }
};

} // namespace respsar
