#include "aplanc/sim.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numbers>

#include "aplanc/errors.hpp"
#include "aplanc/io.hpp"
#include "aplanc/rangeproc.hpp"
#include "aplanc/rng.hpp"

namespace aplanc {
namespace sim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool ok, const std::string& field, const std::string& why) {
    if (!ok) throw ConfigError("SceneConfig." + field + ": " + why);
}

} // namespace

double slope_for_resolution(double range_res_m, double adc_rate_hz,
                            std::size_t n_range_bins) {
    if (range_res_m <= 0.0 || adc_rate_hz <= 0.0 || n_range_bins == 0)
        throw ArgumentError("slope_for_resolution: all arguments must be positive");
    return kSpeedOfLight * adc_rate_hz / (2.0 * range_res_m * static_cast<double>(n_range_bins));
}

double SceneConfig::bandwidth_hz() const {
    return chirp_slope_hz_per_s * static_cast<double>(samples_per_chirp) / adc_rate_hz;
}

double SceneConfig::range_res_m() const {
    // Bin spacing of the D-point range DFT: c * (adc_rate / D) / (2 k).
    return kSpeedOfLight * adc_rate_hz /
           (2.0 * chirp_slope_hz_per_s * static_cast<double>(n_range_bins));
}

void SceneConfig::validate() const {
    require(std::isfinite(target_distance_m) && target_distance_m > 0.0,
            "target_distance_m", "must be positive and finite");
    require(std::isfinite(chest_amp_m) && chest_amp_m >= 0.0,
            "chest_amp_m", "must be nonnegative and finite");
    require(heart_rate_bpm >= 48.0 && heart_rate_bpm <= 180.0,
            "heart_rate_bpm", "must lie in [48, 180] (cardiac band 0.8-3.0 Hz)");
    require(std::isfinite(resp_amp_m) && resp_amp_m >= 0.0,
            "resp_amp_m", "must be nonnegative and finite");
    require(std::isfinite(resp_rate_bpm) && resp_rate_bpm > 0.0,
            "resp_rate_bpm", "must be positive and finite");
    // +inf means a noiseless scene; NaN and -inf are rejected.
    require(!std::isnan(snr_db) && snr_db != -std::numeric_limits<double>::infinity(),
            "snr_db", "must be a number (or +inf for noiseless)");
    require(std::isfinite(adc_rate_hz) && adc_rate_hz > 0.0,
            "adc_rate_hz", "must be positive and finite");
    require(std::isfinite(chirp_slope_hz_per_s) && chirp_slope_hz_per_s > 0.0,
            "chirp_slope_hz_per_s", "must be positive and finite");
    require(std::isfinite(start_wavelength_m) && start_wavelength_m > 0.0,
            "start_wavelength_m", "must be positive and finite");
    require(std::isfinite(chirp_rate_hz) && chirp_rate_hz > 0.0,
            "chirp_rate_hz", "must be positive and finite");
    require(n_chirps >= 1, "n_chirps", "must be at least 1");
    require(n_range_bins >= 1, "n_range_bins", "must be at least 1");
    require(samples_per_chirp >= 1, "samples_per_chirp", "must be at least 1");
    require(chest_amp_m < range_res_m(),
            "chest_amp_m", "must stay below one range bin (" +
                std::to_string(range_res_m()) + " m): motion is sub-bin by design");
    for (std::size_t i = 0; i < clutter_bins.size(); ++i) {
        const ClutterBin& c = clutter_bins[i];
        require(std::isfinite(c.distance_m) && c.distance_m > 0.0,
                "clutter_bins[" + std::to_string(i) + "].distance_m",
                "must be positive and finite");
        require(std::isfinite(c.reflectivity) && c.reflectivity >= 0.0,
                "clutter_bins[" + std::to_string(i) + "].reflectivity",
                "must be nonnegative and finite");
    }
}

std::pair<IfCube, GroundTruth> simulate_if_signals(const SceneConfig& cfg) {
    cfg.validate();

    const std::size_t N = cfg.n_chirps;
    const std::size_t S = cfg.samples_per_chirp;
    const double hr_hz = cfg.heart_rate_bpm / 60.0;
    const double resp_hz = cfg.resp_rate_bpm / 60.0;
    const double f_per_m = 2.0 * cfg.chirp_slope_hz_per_s / kSpeedOfLight;
    const double phi_per_m = 4.0 * std::numbers::pi / cfg.start_wavelength_m;

    IfCube cube;
    cube.n_chirps = N;
    cube.n_samples = S;
    cube.data.assign(N * S, cplx{0.0, 0.0});

    GroundTruth gt;
    gt.displacement_m.rate_hz = cfg.chirp_rate_hz;
    gt.hr_bpm_trace.rate_hz = cfg.chirp_rate_hz;
    gt.displacement_m.samples.resize(N);
    gt.hr_bpm_trace.samples.assign(N, cfg.heart_rate_bpm);
    gt.mean_hr_bpm = cfg.heart_rate_bpm;

    // Stop-and-go model: target range is frozen at the chirp start time.
    for (std::size_t n = 0; n < N; ++n) {
        const double t_chirp = static_cast<double>(n) / cfg.chirp_rate_hz;
        const double chest = cfg.chest_amp_m * std::sin(kTwoPi * hr_hz * t_chirp) +
                             cfg.resp_amp_m * std::sin(kTwoPi * resp_hz * t_chirp);
        gt.displacement_m.samples[n] = chest;
        const double d = cfg.target_distance_m + chest;

        const double f_target = f_per_m * d;
        const double phi_target = phi_per_m * d;
        for (std::size_t s = 0; s < S; ++s) {
            const double tau = static_cast<double>(s) / cfg.adc_rate_hz;
            double arg = kTwoPi * f_target * tau + phi_target;
            cplx v{std::cos(arg), std::sin(arg)};
            for (const ClutterBin& c : cfg.clutter_bins) {
                const double arg_c = kTwoPi * (f_per_m * c.distance_m) * tau +
                                     phi_per_m * c.distance_m;
                v += c.reflectivity * cplx{std::cos(arg_c), std::sin(arg_c)};
            }
            cube.at(n, s) = v;
        }
    }

    if (cfg.snr_db != std::numeric_limits<double>::infinity()) {
        double sig_pow = 0.0;
        for (const cplx& z : cube.data) sig_pow += std::norm(z);
        sig_pow /= static_cast<double>(cube.data.size());
        const double noise_var = sig_pow / std::pow(10.0, cfg.snr_db / 10.0);
        const double sigma = std::sqrt(noise_var / 2.0);
        Rng rng(cfg.rng_seed);
        for (cplx& z : cube.data)
            z += cplx{sigma * rng.normal(), sigma * rng.normal()};
    }

    return {std::move(cube), std::move(gt)};
}

std::vector<ManifestEntry> make_corpus(const std::vector<SceneConfig>& cfgs,
                                       const std::string& out_dir,
                                       const std::vector<std::string>& splits) {
    if (!splits.empty() && splits.size() != cfgs.size())
        throw ArgumentError("make_corpus: splits must be empty or match cfgs in length");
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create directory " + out_dir + ": " + ec.message());

    std::vector<ManifestEntry> entries;
    entries.reserve(cfgs.size());
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        const SceneConfig& cfg = cfgs[i];
        char stem[32];
        std::snprintf(stem, sizeof stem, "rec_%03zu", i);

        auto [cube, gt] = simulate_if_signals(cfg);
        RangeMatrix m = rangeproc::build_range_matrix(cube, cfg);
        const std::string rapm_name = std::string(stem) + ".rapm";
        io::write_rapm((fs::path(out_dir) / rapm_name).string(), m);
        io::write_ragt((fs::path(out_dir) / (std::string(stem) + ".ragt")).string(), gt);

        ManifestEntry e;
        e.path = rapm_name; // relative to the manifest's directory
        e.seed = cfg.rng_seed;
        e.mean_hr_bpm = gt.mean_hr_bpm;
        e.snr_db = cfg.snr_db;
        e.split = splits.empty() ? std::string("train") : splits[i];
        entries.push_back(std::move(e));
    }
    io::write_manifest((fs::path(out_dir) / "manifest.tsv").string(), entries);
    return entries;
}

} // namespace sim
} // namespace aplanc
