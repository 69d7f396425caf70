#pragma once

#include <cstddef>
#include <vector>

#include "aplanc/rng.hpp"
#include "aplanc/types.hpp"

namespace aplanc {
namespace sampling {

enum class SourceTag { pseudo_label, positive, negative };

/// K cardiac-band spectra of random sub-windows of one signal. `starts`
/// keeps the sub-window origins so a training step can rerun the PSD with
/// gradient taping over exactly the same samples.
struct SampleSet {
    std::vector<BandSpectrum> spectra;
    std::vector<std::size_t> starts;
    SourceTag source_tag = SourceTag::pseudo_label;

    std::size_t size() const { return spectra.size(); }
};

/// Draw K uniformly placed sub-windows of sub_len_s seconds from x and take
/// the cardiac-band PSD of each. All spectra share one frequency grid.
/// Deterministic given the rng state. normalize=false keeps raw
/// periodogram values (raw-periodogram loss variant).
SampleSet random_temporal_sample(const TimeSeries& x, std::size_t K, double sub_len_s,
                                 Rng& rng, SourceTag tag, bool normalize = true);

/// Number of samples in one sub-window of x at sub_len_s seconds.
std::size_t sub_window_len(const TimeSeries& x, double sub_len_s);

} // namespace sampling
} // namespace aplanc
