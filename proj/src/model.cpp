#include "aplanc/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "aplanc/errors.hpp"

namespace aplanc {
namespace model {

namespace {

constexpr std::size_t kParamBudget = 50000;

/// Channel-major activation plane: rows[c] is one length-N signal.
struct Plane {
    std::vector<double> data; // channels * n
    std::size_t channels = 0;
    std::size_t n = 0;

    void resize(std::size_t c, std::size_t len, double fill = 0.0) {
        channels = c;
        n = len;
        data.assign(c * len, fill);
    }
    double* row(std::size_t c) { return data.data() + c * n; }
    const double* row(std::size_t c) const { return data.data() + c * n; }
};

/// Standardized real/imag channel split of a windowed matrix. The affine
/// constants come from the window itself, so this stage has no parameters
/// and needs no backward pass.
Plane standardize_input(const WindowedMatrix& w) {
    const std::size_t n = w.n_chirps;
    const std::size_t cols = w.n_cols;
    Plane x;
    x.resize(2 * cols, n);
    for (std::size_t c = 0; c < cols; ++c) {
        double* re = x.row(2 * c);
        double* im = x.row(2 * c + 1);
        for (std::size_t i = 0; i < n; ++i) {
            const cplx& z = w.at(i, c);
            re[i] = z.real();
            im[i] = z.imag();
        }
    }
    for (std::size_t c = 0; c < x.channels; ++c) {
        double* r = x.row(c);
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += r[i];
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) r[i] -= mean;
    }
    double ms = 0.0;
    for (double v : x.data) ms += v * v;
    ms /= static_cast<double>(x.data.size());
    const double scale = ms > 0.0 ? 1.0 / std::sqrt(ms) : 1.0;
    for (double& v : x.data) v *= scale;
    return x;
}

/// Same-padding convolution of a channel plane: out[o][i] = b[o] +
/// sum_{c,t} w[o,c,t] * in[c][i + t - pad], zeros outside.
void conv_forward(const ConvLayer& l, const Plane& in, Plane& out) {
    const std::size_t n = in.n;
    const std::size_t pad = (l.kernel - 1) / 2;
    out.resize(l.out_ch, n);
    for (std::size_t o = 0; o < l.out_ch; ++o) {
        double* dst = out.row(o);
        for (std::size_t i = 0; i < n; ++i) dst[i] = l.b[o];
        for (std::size_t c = 0; c < l.in_ch; ++c) {
            const double* src = in.row(c);
            const double* wk = l.w.data() + (o * l.in_ch + c) * l.kernel;
            const auto sn = static_cast<std::ptrdiff_t>(n);
            const auto spad = static_cast<std::ptrdiff_t>(pad);
            for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(l.kernel); ++t) {
                const double wt = wk[t];
                if (wt == 0.0) continue;
                // src index i + t - pad must land in [0, n)
                const std::ptrdiff_t i_lo = std::max<std::ptrdiff_t>(0, spad - t);
                const std::ptrdiff_t i_hi = std::min(sn, sn + spad - t);
                for (std::ptrdiff_t i = i_lo; i < i_hi; ++i) dst[i] += wt * src[i + t - spad];
            }
        }
    }
}

/// Reverse pass of conv_forward. d_out is consumed; d_in and layer grads
/// are accumulated into the provided containers.
void conv_backward(const ConvLayer& l, const Plane& in, const Plane& d_out,
                   Plane& d_in, ConvLayer& grad) {
    const std::size_t n = in.n;
    const std::size_t pad = (l.kernel - 1) / 2;
    d_in.resize(l.in_ch, n);
    for (std::size_t o = 0; o < l.out_ch; ++o) {
        const double* go = d_out.row(o);
        double gb = 0.0;
        for (std::size_t i = 0; i < n; ++i) gb += go[i];
        grad.b[o] += gb;
        for (std::size_t c = 0; c < l.in_ch; ++c) {
            const double* src = in.row(c);
            double* dsrc = d_in.row(c);
            const double* wk = l.w.data() + (o * l.in_ch + c) * l.kernel;
            double* gw = grad.w.data() + (o * l.in_ch + c) * l.kernel;
            const auto sn = static_cast<std::ptrdiff_t>(n);
            const auto spad = static_cast<std::ptrdiff_t>(pad);
            for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(l.kernel); ++t) {
                const std::ptrdiff_t i_lo = std::max<std::ptrdiff_t>(0, spad - t);
                const std::ptrdiff_t i_hi = std::min(sn, sn + spad - t);
                double acc = 0.0;
                const double wt = wk[t];
                for (std::ptrdiff_t i = i_lo; i < i_hi; ++i) {
                    acc += go[i] * src[i + t - spad];
                    dsrc[i + t - spad] += wt * go[i];
                }
                gw[t] += acc;
            }
        }
    }
}

void apply_tanh(Plane& p) {
    for (double& v : p.data) v = std::tanh(v);
}

ConvLayer zero_layer_like(const ConvLayer& l) {
    ConvLayer z;
    z.out_ch = l.out_ch;
    z.in_ch = l.in_ch;
    z.kernel = l.kernel;
    z.w.assign(l.w.size(), 0.0);
    z.b.assign(l.b.size(), 0.0);
    return z;
}

void check_input_shape(const ExtractorParams& p, const WindowedMatrix& w) {
    p.validate();
    if (w.n_chirps == 0) throw ArgumentError("extractor: empty input window");
    if (2 * w.n_cols != p.input_channels())
        throw ArgumentError("extractor: window has " + std::to_string(w.n_cols) +
                            " columns but the model expects " +
                            std::to_string(p.input_channels() / 2));
}

/// Shared forward machinery; keeps every layer activation when taping.
struct Activations {
    Plane input;                 // standardized channels
    std::vector<Plane> post;     // activation output of each layer
};

TimeSeries run_forward(const ExtractorParams& p, const WindowedMatrix& w,
                       Activations* tape) {
    check_input_shape(p, w);
    Plane cur = standardize_input(w);
    if (tape) tape->input = cur;
    Plane next;
    for (std::size_t li = 0; li < p.layers.size(); ++li) {
        conv_forward(p.layers[li], cur, next);
        const bool last = li + 1 == p.layers.size();
        if (!last) apply_tanh(next);
        std::swap(cur, next);
        if (tape && !last) tape->post.push_back(cur);
    }
    TimeSeries out;
    out.rate_hz = w.chirp_rate_hz;
    out.samples.assign(cur.row(0), cur.row(0) + cur.n);
    return out;
}

} // namespace

std::size_t ExtractorParams::param_count() const {
    std::size_t n = 0;
    for (const ConvLayer& l : layers) n += l.w.size() + l.b.size();
    return n;
}

void ExtractorParams::validate() const {
    if (layers.empty()) throw ArgumentError("extractor: no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const ConvLayer& l = layers[i];
        if (l.out_ch == 0 || l.in_ch == 0 || l.kernel == 0 || l.kernel % 2 == 0)
            throw ArgumentError("extractor: layer " + std::to_string(i) +
                                " has a degenerate shape (kernel must be odd)");
        if (l.w.size() != l.out_ch * l.in_ch * l.kernel || l.b.size() != l.out_ch)
            throw ArgumentError("extractor: layer " + std::to_string(i) +
                                " arrays do not match its declared shape");
        if (i > 0 && l.in_ch != layers[i - 1].out_ch)
            throw ArgumentError("extractor: layer " + std::to_string(i) +
                                " input channels do not chain");
        for (double v : l.w)
            if (!std::isfinite(v))
                throw NumericError("extractor: non-finite weight in layer " + std::to_string(i));
        for (double v : l.b)
            if (!std::isfinite(v))
                throw NumericError("extractor: non-finite bias in layer " + std::to_string(i));
    }
    if (layers.back().out_ch != 1)
        throw ArgumentError("extractor: final layer must emit one channel");
    if (param_count() >= kParamBudget)
        throw ArgumentError("extractor: " + std::to_string(param_count()) +
                            " parameters exceed the budget of " + std::to_string(kParamBudget));
}

double ExtractorParams::get_flat(std::size_t i) const {
    for (const ConvLayer& l : layers) {
        if (i < l.w.size()) return l.w[i];
        i -= l.w.size();
        if (i < l.b.size()) return l.b[i];
        i -= l.b.size();
    }
    throw ArgumentError("extractor: flat index out of range");
}

void ExtractorParams::set_flat(std::size_t i, double v) {
    for (ConvLayer& l : layers) {
        if (i < l.w.size()) {
            l.w[i] = v;
            return;
        }
        i -= l.w.size();
        if (i < l.b.size()) {
            l.b[i] = v;
            return;
        }
        i -= l.b.size();
    }
    throw ArgumentError("extractor: flat index out of range");
}

std::vector<io::RapwLayer> ExtractorParams::to_rapw() const {
    std::vector<io::RapwLayer> out;
    out.reserve(layers.size());
    for (const ConvLayer& l : layers) {
        io::RapwLayer r;
        r.out_ch = l.out_ch;
        r.in_ch = l.in_ch;
        r.kernel = l.kernel;
        r.weights = l.w;
        r.bias = l.b;
        out.push_back(std::move(r));
    }
    return out;
}

ExtractorParams ExtractorParams::from_rapw(const std::vector<io::RapwLayer>& layers) {
    ExtractorParams p;
    p.layers.reserve(layers.size());
    for (const io::RapwLayer& r : layers) {
        ConvLayer l;
        l.out_ch = r.out_ch;
        l.in_ch = r.in_ch;
        l.kernel = r.kernel;
        l.w = r.weights;
        l.b = r.bias;
        p.layers.push_back(std::move(l));
    }
    p.validate();
    return p;
}

ExtractorParams make_extractor(std::size_t delta_d, Rng& rng) {
    const std::size_t in0 = 2 * (2 * delta_d + 1);
    ExtractorParams p;
    auto add = [&](std::size_t out_ch, std::size_t in_ch, std::size_t kernel) {
        ConvLayer l;
        l.out_ch = out_ch;
        l.in_ch = in_ch;
        l.kernel = kernel;
        const double fan_in = static_cast<double>(in_ch * kernel);
        const double fan_out = static_cast<double>(out_ch * kernel);
        const double a = std::sqrt(6.0 / (fan_in + fan_out));
        l.w.resize(out_ch * in_ch * kernel);
        for (double& v : l.w) v = rng.uniform(-a, a);
        l.b.assign(out_ch, 0.0);
        p.layers.push_back(std::move(l));
    };
    add(kHiddenChannels, in0, kKernelLen);
    for (std::size_t i = 1; i < kConvLayers; ++i)
        add(kHiddenChannels, kHiddenChannels, kKernelLen);
    add(1, kHiddenChannels, 1); // linear head
    p.validate();
    return p;
}

ExtractorParams zeros_like(const ExtractorParams& p) {
    ExtractorParams z;
    z.layers.reserve(p.layers.size());
    for (const ConvLayer& l : p.layers) z.layers.push_back(zero_layer_like(l));
    return z;
}

TimeSeries forward(const ExtractorParams& p, const WindowedMatrix& w) {
    return run_forward(p, w, nullptr);
}

ExtractorParams backward(const ExtractorParams& p, const WindowedMatrix& w,
                         const std::vector<double>& upstream) {
    Activations acts;
    TimeSeries out = run_forward(p, w, &acts);
    if (upstream.size() != out.size())
        throw ArgumentError("extractor backward: upstream gradient length " +
                            std::to_string(upstream.size()) + " does not match output length " +
                            std::to_string(out.size()));

    ExtractorParams grads = zeros_like(p);
    const std::size_t L = p.layers.size();

    Plane d_cur;
    d_cur.resize(1, out.size());
    std::copy(upstream.begin(), upstream.end(), d_cur.row(0));

    Plane d_prev;
    for (std::size_t li = L; li-- > 0;) {
        const Plane& in = li == 0 ? acts.input : acts.post[li - 1];
        if (li + 1 != L) {
            // d_cur currently holds dL/d(activation); fold in tanh'.
            const Plane& a = acts.post[li];
            for (std::size_t i = 0; i < d_cur.data.size(); ++i)
                d_cur.data[i] *= 1.0 - a.data[i] * a.data[i];
        }
        conv_backward(p.layers[li], in, d_cur, d_prev, grads.layers[li]);
        std::swap(d_cur, d_prev);
    }
    return grads;
}

OptimizerState make_optimizer(const ExtractorParams& p, double lr, double weight_decay) {
    if (!(lr > 0.0) || !std::isfinite(lr))
        throw ArgumentError("optimizer: learning rate must be positive");
    if (weight_decay < 0.0 || !std::isfinite(weight_decay))
        throw ArgumentError("optimizer: weight decay must be nonnegative");
    OptimizerState st;
    st.lr = lr;
    st.weight_decay = weight_decay;
    for (const ConvLayer& l : p.layers) {
        st.m.push_back(zero_layer_like(l));
        st.v.push_back(zero_layer_like(l));
    }
    return st;
}

void adamw_step(OptimizerState& state, ExtractorParams& params,
                const ExtractorParams& grads) {
    if (state.m.size() != params.layers.size() || grads.layers.size() != params.layers.size())
        throw ArgumentError("adamw_step: state/grads do not match the params");
    for (const ConvLayer& g : grads.layers) {
        for (double v : g.w)
            if (!std::isfinite(v)) throw NumericError("adamw_step: non-finite weight gradient");
        for (double v : g.b)
            if (!std::isfinite(v)) throw NumericError("adamw_step: non-finite bias gradient");
    }

    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);

    auto update = [&](double& theta, double& m, double& v, double g) {
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g * g;
        const double mhat = m / bc1;
        const double vhat = v / bc2;
        theta -= state.lr * (mhat / (std::sqrt(vhat) + state.eps) +
                             state.weight_decay * theta);
    };
    for (std::size_t li = 0; li < params.layers.size(); ++li) {
        ConvLayer& l = params.layers[li];
        const ConvLayer& g = grads.layers[li];
        ConvLayer& m = state.m[li];
        ConvLayer& v = state.v[li];
        for (std::size_t i = 0; i < l.w.size(); ++i) update(l.w[i], m.w[i], v.w[i], g.w[i]);
        for (std::size_t i = 0; i < l.b.size(); ++i) update(l.b[i], m.b[i], v.b[i], g.b[i]);
    }
}

} // namespace model
} // namespace aplanc
