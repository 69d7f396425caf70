#include "aplanc/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "aplanc/fft.hpp"

namespace aplanc {
namespace dsp {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// Reflect an out-of-range index back into [0, n), bouncing off both ends.
std::size_t reflect_index(long long i, std::size_t n) {
    if (n == 1) return 0;
    const long long period = 2 * (static_cast<long long>(n) - 1);
    long long r = i % period;
    if (r < 0) r += period;
    if (r >= static_cast<long long>(n)) r = period - r;
    return static_cast<std::size_t>(r);
}

std::vector<double> hann_window(std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (n < 2) return w;
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n - 1)));
    return w;
}

} // namespace

TimeSeries phase_at_bin(const RangeMatrix& m, std::size_t bin) {
    if (bin >= m.n_bins) {
        std::ostringstream err;
        err << "phase_at_bin: bin " << bin << " out of range [0, " << m.n_bins << ")";
        throw ArgumentError(err.str());
    }
    TimeSeries out;
    out.rate_hz = m.chirp_rate_hz;
    out.samples.resize(m.n_chirps);
    for (std::size_t n = 0; n < m.n_chirps; ++n) {
        double a = std::arg(m.at(n, bin)); // [-pi, pi]
        if (a <= -kPi) a += kTwoPi;        // normalize to (-pi, pi]
        out.samples[n] = a;
    }
    return out;
}

TimeSeries unwrap(const TimeSeries& phase) {
    TimeSeries out = phase;
    for (std::size_t n = 1; n < out.samples.size(); ++n) {
        double d = phase.samples[n] - phase.samples[n - 1];
        d = std::remainder(d, kTwoPi); // [-pi, pi]
        if (d <= -kPi) d += kTwoPi;    // (-pi, pi]
        out.samples[n] = out.samples[n - 1] + d;
    }
    return out;
}

TimeSeries wrap(const TimeSeries& x) {
    TimeSeries out = x;
    for (double& v : out.samples) {
        v = std::remainder(v, kTwoPi);
        if (v <= -kPi) v += kTwoPi;
    }
    return out;
}

std::vector<double> bandpass_taps(double rate_hz, double f_lo_hz, double f_hi_hz) {
    std::size_t taps = static_cast<std::size_t>(std::llround(4.0 * rate_hz / f_lo_hz));
    if (taps % 2 == 0) ++taps;
    const double mid = static_cast<double>(taps - 1) / 2.0;
    std::vector<double> h(taps);
    for (std::size_t i = 0; i < taps; ++i) {
        const double m = static_cast<double>(i) - mid;
        // Ideal bandpass = lowpass(f_hi) - lowpass(f_lo).
        double ideal;
        if (m == 0.0) {
            ideal = 2.0 * (f_hi_hz - f_lo_hz) / rate_hz;
        } else {
            ideal = (std::sin(kTwoPi * f_hi_hz * m / rate_hz) -
                     std::sin(kTwoPi * f_lo_hz * m / rate_hz)) /
                    (kPi * m);
        }
        const double hamming = 0.54 - 0.46 * std::cos(kTwoPi * static_cast<double>(i) /
                                                      static_cast<double>(taps - 1));
        h[i] = ideal * hamming;
    }
    // Exact DC null: a constant input maps to exactly zero output.
    const double mean = std::accumulate(h.begin(), h.end(), 0.0) / static_cast<double>(taps);
    for (double& v : h) v -= mean;
    return h;
}

TimeSeries bandpass(const TimeSeries& x, double f_lo_hz, double f_hi_hz) {
    if (!(f_lo_hz > 0.0) || !(f_hi_hz > f_lo_hz) || !(f_hi_hz < x.rate_hz / 2.0)) {
        std::ostringstream err;
        err << "bandpass: band [" << f_lo_hz << ", " << f_hi_hz
            << "] Hz invalid for rate " << x.rate_hz << " Hz (need 0 < lo < hi < rate/2)";
        throw ArgumentError(err.str());
    }
    const std::size_t n = x.samples.size();
    TimeSeries out;
    out.rate_hz = x.rate_hz;
    out.samples.assign(n, 0.0);
    if (n == 0) return out;

    const std::vector<double> h = bandpass_taps(x.rate_hz, f_lo_hz, f_hi_hz);
    const long long half = static_cast<long long>(h.size() / 2);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        const long long base = static_cast<long long>(i) - half;
        for (std::size_t k = 0; k < h.size(); ++k) {
            const std::size_t j = reflect_index(base + static_cast<long long>(k), n);
            acc += h[k] * x.samples[j];
        }
        out.samples[i] = acc;
    }
    return out;
}

namespace {

BandSpectrum psd_impl(const TimeSeries& x, double f_lo_hz, double f_hi_hz, double df_hz,
                      bool normalize, PsdTape* tape) {
    if (x.samples.size() < 2) throw ArgumentError("psd: need at least 2 samples");
    if (!(f_lo_hz >= 0.0) || !(f_hi_hz > f_lo_hz) || !(df_hz > 0.0))
        throw ArgumentError("psd: degenerate band or grid step");
    if (f_hi_hz >= x.rate_hz / 2.0) throw ArgumentError("psd: band exceeds Nyquist");

    const std::size_t n = x.samples.size();
    const std::size_t nfft =
        next_pow2(std::max(n, static_cast<std::size_t>(std::ceil(x.rate_hz / df_hz))));
    const double bin_hz = x.rate_hz / static_cast<double>(nfft);

    const std::vector<double> w = hann_window(n);
    std::vector<double> windowed(n);
    for (std::size_t i = 0; i < n; ++i) windowed[i] = w[i] * x.samples[i];

    const auto spectrum = dft_forward_real(windowed, nfft);

    const std::size_t k_lo = static_cast<std::size_t>(std::ceil(f_lo_hz / bin_hz - 1e-9));
    const std::size_t k_hi = static_cast<std::size_t>(std::floor(f_hi_hz / bin_hz + 1e-9));
    if (k_hi < k_lo) throw ArgumentError("psd: band narrower than one grid bin");

    BandSpectrum out;
    out.df_hz = bin_hz;
    out.f_lo_hz = static_cast<double>(k_lo) * bin_hz;
    out.f_hi_hz = static_cast<double>(k_hi) * bin_hz;
    out.power.resize(k_hi - k_lo + 1);
    for (std::size_t k = k_lo; k <= k_hi; ++k) out.power[k - k_lo] = std::norm(spectrum[k]);

    double norm = std::sqrt(std::inner_product(out.power.begin(), out.power.end(),
                                               out.power.begin(), 0.0));
    if (tape) {
        tape->band_bins.assign(spectrum.begin() + static_cast<long>(k_lo),
                               spectrum.begin() + static_cast<long>(k_hi) + 1);
        tape->raw_power = out.power;
        tape->raw_norm = norm;
        tape->window = w;
        tape->first_bin = k_lo;
        tape->nfft = nfft;
        tape->rate_hz = x.rate_hz;
        tape->normalized = normalize;
    }
    if (normalize && norm > 0.0) {
        for (double& p : out.power) p /= norm;
    }
    return out;
}

} // namespace

BandSpectrum psd(const TimeSeries& x, double f_lo_hz, double f_hi_hz, double df_hz,
                 bool normalize) {
    return psd_impl(x, f_lo_hz, f_hi_hz, df_hz, normalize, nullptr);
}

BandSpectrum psd_cached(const TimeSeries& x, double f_lo_hz, double f_hi_hz, double df_hz,
                        PsdTape& tape, bool normalize) {
    return psd_impl(x, f_lo_hz, f_hi_hz, df_hz, normalize, &tape);
}

std::vector<double> psd_pullback(const PsdTape& tape, const std::vector<double>& dspectrum) {
    const std::size_t bins = tape.raw_power.size();
    if (dspectrum.size() != bins)
        throw ArgumentError("psd_pullback: gradient length does not match spectrum");

    // d(loss)/d(raw power). Unit normalization v = r/|r| has Jacobian
    // (I - v v^T)/|r| applied to the incoming gradient.
    std::vector<double> dr(bins);
    if (tape.normalized && tape.raw_norm > 0.0) {
        double dot = 0.0;
        for (std::size_t k = 0; k < bins; ++k)
            dot += dspectrum[k] * tape.raw_power[k] / tape.raw_norm;
        for (std::size_t k = 0; k < bins; ++k)
            dr[k] = (dspectrum[k] - (tape.raw_power[k] / tape.raw_norm) * dot) / tape.raw_norm;
    } else {
        dr = dspectrum;
    }

    // Through |X_k|^2 and the DFT back to the windowed input samples.
    const std::size_t n = tape.window.size();
    std::vector<double> dx(n, 0.0);
    const double step = kTwoPi / static_cast<double>(tape.nfft);
    for (std::size_t k = 0; k < bins; ++k) {
        if (dr[k] == 0.0) continue;
        const double da = 2.0 * tape.band_bins[k].real() * dr[k]; // d/dRe
        const double db = 2.0 * tape.band_bins[k].imag() * dr[k]; // d/dIm
        const double theta0 = step * static_cast<double>(tape.first_bin + k);
        // dRe/du_n = cos(theta0*n), dIm/du_n = -sin(theta0*n)
        const double cs = std::cos(theta0);
        const double sn = std::sin(theta0);
        double c = 1.0, s = 0.0; // cos/sin of theta0*n, recurrence
        for (std::size_t i = 0; i < n; ++i) {
            dx[i] += da * c - db * s;
            const double c2 = c * cs - s * sn;
            s = s * cs + c * sn;
            c = c2;
        }
    }
    for (std::size_t i = 0; i < n; ++i) dx[i] *= tape.window[i];
    return dx;
}

double hr_from_signal(const TimeSeries& x) {
    if (x.duration_s() < kHrWindowS) {
        std::ostringstream err;
        err << "hr_from_signal: need at least " << kHrWindowS << " s of signal, got "
            << x.duration_s() << " s";
        throw ArgumentError(err.str());
    }
    const BandSpectrum spec = psd(x, kCardiacLoHz, kCardiacHiHz, kHrGridHz);
    std::size_t best = 0;
    for (std::size_t i = 1; i < spec.power.size(); ++i)
        if (spec.power[i] > spec.power[best]) best = i;
    return 60.0 * spec.freq_at(best);
}

TimeSeries traditional_heartbeat(const RangeMatrix& m, std::size_t bin) {
    return bandpass(unwrap(phase_at_bin(m, bin)));
}

} // namespace dsp
} // namespace aplanc
