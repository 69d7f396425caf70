#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "aplanc/io.hpp"
#include "aplanc/rng.hpp"
#include "aplanc/types.hpp"

namespace aplanc {
namespace model {

/// One 1-D convolution layer, same (zero) padding. Weights are out-major:
/// w[(o * in_ch + i) * kernel + t].
struct ConvLayer {
    std::size_t out_ch = 0;
    std::size_t in_ch = 0;
    std::size_t kernel = 0;
    std::vector<double> w;
    std::vector<double> b;
};

/// Weights of one extractor: three tanh convolutions (kernel 15, 16 hidden
/// channels) over 2*(2*delta_d+1) input channels, then a pointwise linear
/// head down to one channel. Doubles throughout. The same type doubles as
/// the container for parameter gradients.
struct ExtractorParams {
    std::vector<ConvLayer> layers;

    std::size_t input_channels() const { return layers.empty() ? 0 : layers.front().in_ch; }
    std::size_t param_count() const;

    /// Shape consistency, finiteness, and the parameter budget (< 50k).
    void validate() const;

    // Flat coordinate view, used by optimizer loops and gradient checks.
    double get_flat(std::size_t i) const;
    void set_flat(std::size_t i, double v);

    std::vector<io::RapwLayer> to_rapw() const;
    static ExtractorParams from_rapw(const std::vector<io::RapwLayer>& layers);
};

inline constexpr std::size_t kHiddenChannels = 16;
inline constexpr std::size_t kKernelLen = 15;
inline constexpr std::size_t kConvLayers = 3;

/// Fresh extractor for a given window half-width, Xavier-uniform weights,
/// zero biases. Deterministic given the rng state.
ExtractorParams make_extractor(std::size_t delta_d, Rng& rng);

/// Zero-filled gradient container shaped like p.
ExtractorParams zeros_like(const ExtractorParams& p);

/// Run the extractor over a windowed range matrix. The complex window is
/// split into interleaved real/imag channels, standardized (per-channel
/// mean removal, one global RMS scale), and pushed through the stack.
/// Output length equals the chirp count.
TimeSeries forward(const ExtractorParams& p, const WindowedMatrix& w);

/// Exact reverse-mode gradient of forward: upstream[n] = dL/d(output[n]),
/// returns dL/d(theta) in a params-shaped container.
ExtractorParams backward(const ExtractorParams& p, const WindowedMatrix& w,
                         const std::vector<double>& upstream);

struct OptimizerState {
    std::vector<ConvLayer> m; // first moments, same shapes as the params
    std::vector<ConvLayer> v; // second moments
    std::uint64_t step = 0;
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

OptimizerState make_optimizer(const ExtractorParams& p, double lr = 1e-4,
                              double weight_decay = 0.01);

/// One AdamW update with decoupled weight decay. Throws NumericError on
/// non-finite gradients; params and state are untouched in that case.
void adamw_step(OptimizerState& state, ExtractorParams& params,
                const ExtractorParams& grads);

} // namespace model
} // namespace aplanc
