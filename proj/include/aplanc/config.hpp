#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aplanc/sim.hpp"

namespace aplanc {
namespace cli {

/// Knobs of one training run. Defaults follow the reference pipeline:
/// AdamW at 1e-4 with 0.01 decay for 200 epochs, K = 4 sub-windows of 10 s,
/// a 5-bin range window (delta_d = 2).
struct TrainConfig {
    std::size_t epochs = 200;
    double learning_rate = 1e-4;
    double weight_decay = 0.01;
    std::size_t k_samples = 4;   // K spectra per sample set
    std::size_t delta_d = 2;
    double sub_len_s = 10.0;
    std::uint64_t seed = 1;
    bool determinism = true;
    int stage = 1;

    // Loss/input variants. With the defaults the noise window avoids the
    // whole heartbeat window (not just the center bin) and loss spectra
    // are unit-normalized.
    bool overlap_noise_window = false; // true: exclude only the center bin
    bool raw_psd_loss = false;         // true: un-normalized spectra in the loss

    // Ablation switches for the loss terms.
    bool use_positive_term = true;
    bool use_negative_term = true;

    // Stage two re-initializes the trainable extractors by default; set to
    // continue from the stage-one weights instead.
    bool stage2_continue = false;

    void validate() const;
};

/// Line-oriented `key = value` text with `#` comments and blank lines.
/// Throws ConfigError with the line number on malformed lines.
std::map<std::string, std::string> parse_kv_file(const std::string& path);

/// SceneConfig from a kv map; unknown keys raise ConfigError. Keys match
/// the field names (target_distance_m, chest_amp_m, ...); clutter bins are
/// `clutter = dist:refl, dist:refl, ...`.
sim::SceneConfig scene_config_from_kv(const std::map<std::string, std::string>& kv);

/// TrainConfig from a kv map; unknown keys raise ConfigError.
TrainConfig train_config_from_kv(const std::map<std::string, std::string>& kv);

/// Corpus-level variation for the simulate subcommand, read from the same
/// file as the base scene.
struct CorpusSpec {
    sim::SceneConfig base;
    std::size_t count = 1;
    std::vector<double> snr_cycle_db;     // cycled over recordings, empty = base snr
    double heart_rate_min_bpm = 0.0;      // >0 pair: uniform draw per recording
    double heart_rate_max_bpm = 0.0;
    double train_frac = 1.0;
    double val_frac = 0.0;                // remainder goes to test
    std::uint64_t seed_base = 1;
};

CorpusSpec corpus_spec_from_file(const std::string& path);

/// Expand a corpus spec into per-recording scene configs plus split labels.
std::pair<std::vector<sim::SceneConfig>, std::vector<std::string>>
expand_corpus(const CorpusSpec& spec, std::size_t count);

} // namespace cli
} // namespace aplanc
