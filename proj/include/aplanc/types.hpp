#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "aplanc/errors.hpp"

namespace aplanc {

using cplx = std::complex<double>;

/// Uniformly sampled real-valued signal.
struct TimeSeries {
    std::vector<double> samples;
    double rate_hz = 0.0;

    TimeSeries() = default;
    TimeSeries(std::vector<double> s, double rate) : samples(std::move(s)), rate_hz(rate) {}

    std::size_t size() const { return samples.size(); }
    double duration_s() const { return rate_hz > 0.0 ? static_cast<double>(samples.size()) / rate_hz : 0.0; }
};

/// Power spectrum restricted to a frequency band.
///
/// The grid is uniform: bin i sits at f_lo_hz + i * df_hz, and the last bin
/// is exactly f_hi_hz. f_lo_hz/f_hi_hz are the realized grid endpoints
/// inside the band that was requested. After normalization the power
/// vector has unit Euclidean norm.
struct BandSpectrum {
    std::vector<double> power;
    double f_lo_hz = 0.0;
    double f_hi_hz = 0.0;
    double df_hz = 0.0;

    std::size_t size() const { return power.size(); }
    double freq_at(std::size_t i) const { return f_lo_hz + static_cast<double>(i) * df_hz; }

    bool same_grid(const BandSpectrum& other, double tol = 1e-9) const {
        return power.size() == other.power.size() &&
               std::abs(f_lo_hz - other.f_lo_hz) < tol &&
               std::abs(df_hz - other.df_hz) < tol;
    }
};

/// Stack of per-chirp range profiles, chirp-major (row = chirp, col = range bin).
struct RangeMatrix {
    std::vector<cplx> data; // n_chirps * n_bins
    std::size_t n_chirps = 0;
    std::size_t n_bins = 0;
    double chirp_rate_hz = 0.0;
    double range_res_m = 0.0;

    cplx& at(std::size_t chirp, std::size_t bin) { return data[chirp * n_bins + bin]; }
    const cplx& at(std::size_t chirp, std::size_t bin) const { return data[chirp * n_bins + bin]; }
};

/// Contiguous column slice of a RangeMatrix centered on a range bin.
struct WindowedMatrix {
    std::vector<cplx> data; // n_chirps * n_cols, chirp-major
    std::size_t n_chirps = 0;
    std::size_t n_cols = 0; // always 2*half_width + 1
    std::size_t center_bin = 0;
    std::size_t half_width = 0;
    double chirp_rate_hz = 0.0;

    cplx& at(std::size_t chirp, std::size_t col) { return data[chirp * n_cols + col]; }
    const cplx& at(std::size_t chirp, std::size_t col) const { return data[chirp * n_cols + col]; }
};

/// Simulator ground truth attached to a synthetic recording.
struct GroundTruth {
    TimeSeries displacement_m; // chest displacement per chirp
    TimeSeries hr_bpm_trace;   // instantaneous heart rate per chirp
    double mean_hr_bpm = 0.0;
};

/// One corpus recording: the range-matrix file plus bookkeeping.
struct ManifestEntry {
    std::string path; // RAPM path; ground truth sits next to it as .ragt
    std::uint64_t seed = 0;
    double mean_hr_bpm = 0.0;
    double snr_db = 0.0;
    std::string split; // train | val | test
};

} // namespace aplanc
