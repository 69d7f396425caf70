#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "aplanc/types.hpp"

namespace aplanc {
namespace sim {

inline constexpr double kSpeedOfLight = 299792458.0;

/// FMCW slope that yields the wanted range resolution for a given ADC rate
/// and chirp length: res = c * adc_rate / (2 * slope * samples).
double slope_for_resolution(double range_res_m, double adc_rate_hz,
                            std::size_t samples_per_chirp);

/// A static reflector at a fixed distance.
struct ClutterBin {
    double distance_m = 0.0;
    double reflectivity = 0.0;
};

/// Parametric chest-motion scene. Defaults describe a 77 GHz radar with
/// 0.04 m range resolution, a seated subject at 0.6 m, and a 72 bpm pulse.
struct SceneConfig {
    double target_distance_m = 0.6;
    double chest_amp_m = 3e-4;       // heartbeat displacement amplitude
    double heart_rate_bpm = 72.0;
    double resp_amp_m = 1.5e-3;
    double resp_rate_bpm = 15.0;
    double snr_db = 20.0;            // +inf means noiseless
    std::vector<ClutterBin> clutter_bins;
    double adc_rate_hz = 4.0e6;      // IF sample rate within a chirp
    double chirp_slope_hz_per_s = slope_for_resolution(0.04, 4.0e6, 256);
    double start_wavelength_m = kSpeedOfLight / 77.0e9;
    double chirp_rate_hz = 120.0;    // chirps per second
    std::size_t n_chirps = 3600;     // 30 s at 120 Hz
    std::size_t n_range_bins = 256;
    std::size_t samples_per_chirp = 256;
    std::uint64_t rng_seed = 1;

    double bandwidth_hz() const;
    double range_res_m() const;
    double duration_s() const { return static_cast<double>(n_chirps) / chirp_rate_hz; }

    /// Throws ConfigError naming the first offending field.
    void validate() const;
};

/// Raw per-chirp IF samples, chirp-major.
struct IfCube {
    std::vector<cplx> data; // n_chirps * n_samples
    std::size_t n_chirps = 0;
    std::size_t n_samples = 0;

    cplx& at(std::size_t chirp, std::size_t s) { return data[chirp * n_samples + s]; }
    const cplx& at(std::size_t chirp, std::size_t s) const { return data[chirp * n_samples + s]; }
};

/// Synthesize the IF recording for one scene along with its ground truth.
/// Deterministic for a fixed rng_seed.
std::pair<IfCube, GroundTruth> simulate_if_signals(const SceneConfig& cfg);

/// Simulate every scene, write one RAPM and one RAGT file per scene into
/// out_dir, and write (and return) the manifest. splits assigns one of
/// train/val/test per scene; empty means everything goes to train.
std::vector<ManifestEntry> make_corpus(const std::vector<SceneConfig>& cfgs,
                                       const std::string& out_dir,
                                       const std::vector<std::string>& splits = {});

} // namespace sim
} // namespace aplanc
