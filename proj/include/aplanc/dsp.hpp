#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "aplanc/types.hpp"

namespace aplanc {
namespace dsp {

/// Cardiac band and heart-rate grid used throughout the pipeline.
inline constexpr double kCardiacLoHz = 0.8;
inline constexpr double kCardiacHiHz = 3.0;
inline constexpr double kHrGridHz = 0.01;

/// Phase angle of one range-matrix column, sample n = arg(M[n, bin]) in (-pi, pi].
TimeSeries phase_at_bin(const RangeMatrix& m, std::size_t bin);

/// Remove 2*pi jumps so consecutive differences lie in (-pi, pi].
/// The first sample is passed through unchanged.
TimeSeries unwrap(const TimeSeries& phase);

/// Wrap each sample into (-pi, pi].
TimeSeries wrap(const TimeSeries& x);

/// Zero-phase FIR bandpass (windowed-sinc, Hamming window, taps normalized
/// to an exact DC null). Tap count is 4*rate/f_lo rounded up to odd.
/// Edges are handled by reflection; output length equals input length.
TimeSeries bandpass(const TimeSeries& x, double f_lo_hz = kCardiacLoHz,
                    double f_hi_hz = kCardiacHiHz);

/// Bandpass kernel taps for a given rate and band (exposed for response checks).
std::vector<double> bandpass_taps(double rate_hz, double f_lo_hz, double f_hi_hz);

/// Intermediates of one PSD evaluation, kept so psd_pullback can run the
/// exact reverse pass without recomputation.
struct PsdTape {
    std::vector<std::complex<double>> band_bins; // DFT bins inside the band
    std::vector<double> raw_power;               // |bin|^2 before normalization
    double raw_norm = 0.0;                       // Euclidean norm of raw_power
    std::vector<double> window;                  // Hann taps actually applied
    std::size_t first_bin = 0;
    std::size_t nfft = 0;
    double rate_hz = 0.0;
    bool normalized = true;
};

/// Hann-windowed periodogram zero-padded until the bin spacing is <= df_hz,
/// restricted to [f_lo, f_hi] and scaled to unit Euclidean norm (unless
/// normalize is false, which yields the raw periodogram values).
BandSpectrum psd(const TimeSeries& x, double f_lo_hz, double f_hi_hz, double df_hz,
                 bool normalize = true);

/// Same as psd but records the tape for gradient propagation.
BandSpectrum psd_cached(const TimeSeries& x, double f_lo_hz, double f_hi_hz, double df_hz,
                        PsdTape& tape, bool normalize = true);

/// Reverse-mode pass of psd: maps d(loss)/d(spectrum) to d(loss)/d(input sample).
/// The returned vector has the length of the original input window.
std::vector<double> psd_pullback(const PsdTape& tape, const std::vector<double>& dspectrum);

/// Heart rate as 60 times the argmax frequency of the cardiac-band PSD.
/// Requires at least 10 s of signal.
double hr_from_signal(const TimeSeries& x);

/// Minimum signal duration accepted by hr_from_signal and the distance ops.
inline constexpr double kHrWindowS = 10.0;

/// The training-free pipeline: bandpass(unwrap(phase_at_bin(m, bin))).
TimeSeries traditional_heartbeat(const RangeMatrix& m, std::size_t bin);

} // namespace dsp
} // namespace aplanc
