#include "aplanc/sampling.hpp"

#include <cmath>
#include <string>

#include "aplanc/dsp.hpp"
#include "aplanc/errors.hpp"

namespace aplanc {
namespace sampling {

std::size_t sub_window_len(const TimeSeries& x, double sub_len_s) {
    if (x.rate_hz <= 0.0) throw ArgumentError("sub_window_len: signal has no sample rate");
    if (sub_len_s <= 0.0) throw ArgumentError("sub_window_len: sub_len_s must be positive");
    const auto n = static_cast<std::size_t>(std::llround(sub_len_s * x.rate_hz));
    if (n < 2 || n > x.size())
        throw ArgumentError("sub_window_len: " + std::to_string(sub_len_s) +
                            " s sub-window does not fit a " + std::to_string(x.duration_s()) +
                            " s signal");
    return n;
}

SampleSet random_temporal_sample(const TimeSeries& x, std::size_t K, double sub_len_s,
                                 Rng& rng, SourceTag tag, bool normalize) {
    if (K < 1) throw ArgumentError("random_temporal_sample: K must be at least 1");
    const std::size_t n_sub = sub_window_len(x, sub_len_s);
    const std::size_t max_start = x.size() - n_sub;

    SampleSet set;
    set.source_tag = tag;
    set.spectra.reserve(K);
    set.starts.reserve(K);
    for (std::size_t k = 0; k < K; ++k) {
        const std::size_t start =
            max_start == 0 ? 0 : static_cast<std::size_t>(rng.uniform_int(0, max_start));
        TimeSeries sub;
        sub.rate_hz = x.rate_hz;
        sub.samples.assign(x.samples.begin() + static_cast<std::ptrdiff_t>(start),
                           x.samples.begin() + static_cast<std::ptrdiff_t>(start + n_sub));
        set.spectra.push_back(
            dsp::psd(sub, dsp::kCardiacLoHz, dsp::kCardiacHiHz, dsp::kHrGridHz, normalize));
        set.starts.push_back(start);
    }
    return set;
}

} // namespace sampling
} // namespace aplanc
