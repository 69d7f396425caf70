#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aplanc/config.hpp"
#include "aplanc/model.hpp"
#include "aplanc/rng.hpp"
#include "aplanc/sampling.hpp"
#include "aplanc/types.hpp"

namespace aplanc {
namespace nct {

/// Which loss terms participate (ablation control).
struct LossTerms {
    bool positive = true;
    bool negative = true;
};

/// Value and per-spectrum gradients of the contrastive loss
///   l_p = (1/K^2) sum_ij ||S_PL[i] - S_P[j]||^2   (pull toward pseudo-labels)
///   l_n = -(1/K^2) sum_ij ||S_P[i] - S_N[j]||^2   (push away from noise)
struct NctLossBreakdown {
    double l_p = 0.0;
    double l_n = 0.0;
    double total = 0.0;
    // d(total)/d(spectrum): one vector per sample-set slot. Both extractors
    // receive the true analytic gradient of the total.
    std::vector<std::vector<double>> d_s_p;
    std::vector<std::vector<double>> d_s_n;
};

NctLossBreakdown nct_loss(const sampling::SampleSet& s_pl, const sampling::SampleSet& s_p,
                          const sampling::SampleSet& s_n, LossTerms terms = {});

/// Mean absolute heart-rate difference over consecutive 10 s windows
/// (the remainder is dropped). Requires equal window counts unless
/// truncate_to_shorter is set.
double signal_distance(const TimeSeries& a, const TimeSeries& b,
                       bool truncate_to_shorter = false);

enum class Branch { agree, override, fallback };

/// Outcome of the stage-two pseudo-label selection.
struct PseudoLabelDecision {
    bool chose_pretrained = false; // true: use p, ignore chosen_index
    std::size_t chosen_index = 0;  // candidate column, 0-based
    std::vector<double> noise_dists; // X_i = D(Phi_i, q)
    std::vector<double> hb_dists;    // Y_i = D(Phi_i, p)
    double p_noise_dist = 0.0;       // D(p, q)
    Branch branch = Branch::fallback;
};

/// The pure decision rule over precomputed distances:
///   argmax X == argmin Y          -> agree,    candidate argmin Y
///   else X[argmin Y] > D(p, q)    -> override, candidate argmin Y
///   else                          -> fallback, pretrained p
/// Ties in argmax/argmin break toward the smaller index.
PseudoLabelDecision decide(const std::vector<double>& noise_dists,
                           const std::vector<double>& hb_dists, double p_noise_dist);

/// Stage-two augmented pseudo-label: picks between the traditional signal
/// of each window column and the frozen stage-one prediction. The noise
/// window (and hence q) is re-drawn on every call.
std::pair<TimeSeries, PseudoLabelDecision> aug_pseudo_gen(
    const RangeMatrix& m, std::size_t d_star, const model::ExtractorParams& gh_star,
    const model::ExtractorParams& gn_star, Rng& rng, bool exclude_overlap = true);

/// One recording held in memory during training/evaluation.
struct Recording {
    RangeMatrix m;
    GroundTruth gt;
    ManifestEntry meta;
};

/// Read a manifest entry's RAPM plus the RAGT sitting next to it.
Recording load_recording(const std::string& manifest_path, const ManifestEntry& entry);

/// Load every entry of a split ("" = all), in manifest order.
std::vector<Recording> load_split(const std::string& manifest_path,
                                  const std::vector<ManifestEntry>& entries,
                                  const std::string& split);

struct TrainResult {
    model::ExtractorParams g_h;
    model::ExtractorParams g_n;
    std::size_t best_epoch = 0;   // 1-based
    double best_val_mae = 0.0;
    std::size_t skipped_steps = 0;
    std::string metrics_csv;      // per-step and per-epoch rows
};

/// Run one training stage of the two-stage algorithm over the train split,
/// selecting the best epoch by validation MAE against the simulator ground
/// truth. Stage 2 requires the frozen stage-one extractors. Non-finite
/// losses skip the step; 50 consecutive skips abort with NumericError.
TrainResult train_stage(
    const std::vector<Recording>& train_recs, const std::vector<Recording>& val_recs,
    const cli::TrainConfig& cfg,
    const std::optional<std::pair<model::ExtractorParams, model::ExtractorParams>>&
        stage1 = std::nullopt);

} // namespace nct
} // namespace aplanc
