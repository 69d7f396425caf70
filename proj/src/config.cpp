#include "aplanc/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "aplanc/errors.hpp"
#include "aplanc/rng.hpp"

namespace aplanc {
namespace cli {

namespace {

std::string trim(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": not a number: \"" + v + "\"");
    }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const std::uint64_t u = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return u;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": not a nonnegative integer: \"" + v + "\"");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key " + key + ": not a boolean: \"" + v + "\"");
}

std::vector<double> to_double_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double(key, item));
    }
    return out;
}

/// Tracks which keys a builder consumed so leftovers can be rejected.
struct KvView {
    const std::map<std::string, std::string>& kv;
    std::set<std::string> used;

    const std::string* find(const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) return nullptr;
        used.insert(key);
        return &it->second;
    }
    void reject_unknown(const char* what) const {
        for (const auto& [k, v] : kv)
            if (!used.count(k))
                throw ConfigError(std::string(what) + ": unknown config key \"" + k + "\"");
    }
};

void fill_scene(KvView& view, sim::SceneConfig& c) {
    if (const auto* v = view.find("target_distance_m")) c.target_distance_m = to_double("target_distance_m", *v);
    if (const auto* v = view.find("chest_amp_m")) c.chest_amp_m = to_double("chest_amp_m", *v);
    if (const auto* v = view.find("heart_rate_bpm")) c.heart_rate_bpm = to_double("heart_rate_bpm", *v);
    if (const auto* v = view.find("resp_amp_m")) c.resp_amp_m = to_double("resp_amp_m", *v);
    if (const auto* v = view.find("resp_rate_bpm")) c.resp_rate_bpm = to_double("resp_rate_bpm", *v);
    if (const auto* v = view.find("snr_db")) c.snr_db = to_double("snr_db", *v);
    if (const auto* v = view.find("adc_rate_hz")) c.adc_rate_hz = to_double("adc_rate_hz", *v);
    if (const auto* v = view.find("chirp_slope_hz_per_s")) c.chirp_slope_hz_per_s = to_double("chirp_slope_hz_per_s", *v);
    if (const auto* v = view.find("start_wavelength_m")) c.start_wavelength_m = to_double("start_wavelength_m", *v);
    if (const auto* v = view.find("chirp_rate_hz")) c.chirp_rate_hz = to_double("chirp_rate_hz", *v);
    if (const auto* v = view.find("n_chirps")) c.n_chirps = to_u64("n_chirps", *v);
    if (const auto* v = view.find("n_range_bins")) c.n_range_bins = to_u64("n_range_bins", *v);
    if (const auto* v = view.find("samples_per_chirp")) c.samples_per_chirp = to_u64("samples_per_chirp", *v);
    if (const auto* v = view.find("rng_seed")) c.rng_seed = to_u64("rng_seed", *v);
    if (const auto* v = view.find("clutter")) {
        c.clutter_bins.clear();
        std::stringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            const std::size_t colon = item.find(':');
            if (colon == std::string::npos)
                throw ConfigError("config key clutter: expected dist:reflectivity, got \"" +
                                  item + "\"");
            sim::ClutterBin cb;
            cb.distance_m = to_double("clutter", trim(item.substr(0, colon)));
            cb.reflectivity = to_double("clutter", trim(item.substr(colon + 1)));
            c.clutter_bins.push_back(cb);
        }
    }
    if (const auto* v = view.find("range_res_m")) {
        // Convenience: solve for the slope instead of requiring it.
        c.chirp_slope_hz_per_s = sim::slope_for_resolution(
            to_double("range_res_m", *v), c.adc_rate_hz, c.n_range_bins);
    }
}

} // namespace

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("TrainConfig.epochs: must be at least 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw ConfigError("TrainConfig.learning_rate: must be positive and finite");
    if (weight_decay < 0.0 || !std::isfinite(weight_decay))
        throw ConfigError("TrainConfig.weight_decay: must be nonnegative and finite");
    if (k_samples < 1) throw ConfigError("TrainConfig.k: must be at least 1");
    if (!(sub_len_s > 0.0) || !std::isfinite(sub_len_s))
        throw ConfigError("TrainConfig.sub_len_s: must be positive and finite");
    if (stage != 1 && stage != 2) throw ConfigError("TrainConfig.stage: must be 1 or 2");
}

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config " + path + " line " + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config " + path + " line " + std::to_string(lineno) +
                              ": empty key");
        if (kv.count(key))
            throw ConfigError("config " + path + " line " + std::to_string(lineno) +
                              ": duplicate key \"" + key + "\"");
        kv[key] = value;
    }
    if (in.bad()) throw IoError("read failed: " + path);
    return kv;
}

sim::SceneConfig scene_config_from_kv(const std::map<std::string, std::string>& kv) {
    KvView view{kv, {}};
    sim::SceneConfig c;
    fill_scene(view, c);
    view.reject_unknown("scene config");
    c.validate();
    return c;
}

TrainConfig train_config_from_kv(const std::map<std::string, std::string>& kv) {
    KvView view{kv, {}};
    TrainConfig c;
    if (const auto* v = view.find("epochs")) c.epochs = to_u64("epochs", *v);
    if (const auto* v = view.find("learning_rate")) c.learning_rate = to_double("learning_rate", *v);
    if (const auto* v = view.find("weight_decay")) c.weight_decay = to_double("weight_decay", *v);
    if (const auto* v = view.find("k")) c.k_samples = to_u64("k", *v);
    if (const auto* v = view.find("delta_d")) c.delta_d = to_u64("delta_d", *v);
    if (const auto* v = view.find("sub_len_s")) c.sub_len_s = to_double("sub_len_s", *v);
    if (const auto* v = view.find("seed")) c.seed = to_u64("seed", *v);
    if (const auto* v = view.find("determinism")) c.determinism = to_bool("determinism", *v);
    if (const auto* v = view.find("stage")) c.stage = static_cast<int>(to_u64("stage", *v));
    if (const auto* v = view.find("overlap_noise_window")) c.overlap_noise_window = to_bool("overlap_noise_window", *v);
    if (const auto* v = view.find("raw_psd_loss")) c.raw_psd_loss = to_bool("raw_psd_loss", *v);
    if (const auto* v = view.find("use_positive_term")) c.use_positive_term = to_bool("use_positive_term", *v);
    if (const auto* v = view.find("use_negative_term")) c.use_negative_term = to_bool("use_negative_term", *v);
    if (const auto* v = view.find("stage2_continue")) c.stage2_continue = to_bool("stage2_continue", *v);
    view.reject_unknown("train config");
    c.validate();
    return c;
}

CorpusSpec corpus_spec_from_file(const std::string& path) {
    const auto kv = parse_kv_file(path);
    KvView view{kv, {}};
    CorpusSpec spec;
    fill_scene(view, spec.base);
    if (const auto* v = view.find("count")) spec.count = to_u64("count", *v);
    if (const auto* v = view.find("vary_snr_db")) spec.snr_cycle_db = to_double_list("vary_snr_db", *v);
    if (const auto* v = view.find("heart_rate_min_bpm")) spec.heart_rate_min_bpm = to_double("heart_rate_min_bpm", *v);
    if (const auto* v = view.find("heart_rate_max_bpm")) spec.heart_rate_max_bpm = to_double("heart_rate_max_bpm", *v);
    if (const auto* v = view.find("train_frac")) spec.train_frac = to_double("train_frac", *v);
    if (const auto* v = view.find("val_frac")) spec.val_frac = to_double("val_frac", *v);
    if (const auto* v = view.find("seed_base")) spec.seed_base = to_u64("seed_base", *v);
    view.reject_unknown("corpus config");

    if ((spec.heart_rate_min_bpm == 0.0) != (spec.heart_rate_max_bpm == 0.0) ||
        spec.heart_rate_min_bpm > spec.heart_rate_max_bpm)
        throw ConfigError("corpus config: heart_rate_min_bpm/max_bpm must form a range");
    if (spec.train_frac < 0.0 || spec.val_frac < 0.0 || spec.train_frac + spec.val_frac > 1.0)
        throw ConfigError("corpus config: train_frac + val_frac must stay within [0, 1]");
    return spec;
}

std::pair<std::vector<sim::SceneConfig>, std::vector<std::string>>
expand_corpus(const CorpusSpec& spec, std::size_t count) {
    std::vector<sim::SceneConfig> cfgs;
    std::vector<std::string> splits;
    Rng rng(spec.seed_base);
    for (std::size_t i = 0; i < count; ++i) {
        sim::SceneConfig c = spec.base;
        c.rng_seed = spec.seed_base + i;
        if (!spec.snr_cycle_db.empty()) c.snr_db = spec.snr_cycle_db[i % spec.snr_cycle_db.size()];
        if (spec.heart_rate_max_bpm > 0.0)
            c.heart_rate_bpm = rng.uniform(spec.heart_rate_min_bpm, spec.heart_rate_max_bpm);
        c.validate();
        cfgs.push_back(c);

        const double pos = count > 1 ? static_cast<double>(i) / static_cast<double>(count) : 0.0;
        if (pos < spec.train_frac)
            splits.push_back("train");
        else if (pos < spec.train_frac + spec.val_frac)
            splits.push_back("val");
        else
            splits.push_back("test");
    }
    return {cfgs, splits};
}

} // namespace cli
} // namespace aplanc
