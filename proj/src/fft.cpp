#include "aplanc/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace aplanc {

namespace {

// FFTW planning is not thread-safe; execution via the new-array interface is.
class PlanCache {
public:
    fftw_plan acquire(std::size_t nfft) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(nfft);
        if (it != cache_.end()) return it->second;
        std::vector<fftw_complex> in(nfft), out(nfft);
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(nfft), in.data(), out.data(),
                                          FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        cache_[nfft] = plan;
        return plan;
    }

    ~PlanCache() {
        for (auto& [n, plan] : cache_) fftw_destroy_plan(plan);
    }

private:
    std::mutex mutex_;
    std::unordered_map<std::size_t, fftw_plan> cache_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

} // namespace

std::vector<std::complex<double>> dft_forward(const std::vector<std::complex<double>>& x,
                                              std::size_t nfft) {
    if (x.size() > nfft) throw std::invalid_argument("dft_forward: input longer than nfft");
    fftw_plan plan = plan_cache().acquire(nfft);
    std::vector<std::complex<double>> in(nfft, {0.0, 0.0});
    std::copy(x.begin(), x.end(), in.begin());
    std::vector<std::complex<double>> out(nfft);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

std::vector<std::complex<double>> dft_forward_real(const std::vector<double>& x,
                                                   std::size_t nfft) {
    std::vector<std::complex<double>> xc(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) xc[i] = {x[i], 0.0};
    return dft_forward(xc, nfft);
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

} // namespace aplanc
