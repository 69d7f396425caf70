#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "aplanc/config.hpp"
#include "aplanc/model.hpp"
#include "aplanc/nct.hpp"
#include "aplanc/types.hpp"

namespace aplanc {
namespace eval {

/// Windowed heart-rate comparison: MAE and RMSE in bpm plus the Pearson
/// correlation over window pairs.
struct EvalReport {
    std::vector<double> pred_bpm;
    std::vector<double> ref_bpm;
    double mae_bpm = 0.0;
    double rmse_bpm = 0.0;
    double pearson_r = 0.0;
    bool pearson_defined = false; // false: < 2 windows or zero variance, r is NaN
    double window_s = 10.0;
};

/// Metrics over already-paired per-window rates.
EvalReport metrics_from_pairs(const std::vector<double>& pred_bpm,
                              const std::vector<double>& ref_bpm, double window_s = 10.0);

/// Split pred into consecutive non-overlapping windows, read the heart rate
/// of each, and compare against the per-window reference (one value per
/// full window).
EvalReport evaluate(const TimeSeries& pred, const std::vector<double>& ref_bpm,
                    double window_s = 10.0);

/// Per-window reference rates from the simulator ground truth.
std::vector<double> reference_windows(const GroundTruth& gt, double window_s = 10.0);

/// Heartbeat prediction of one recording: forward G_h over the heartbeat
/// window around the max-power bin.
TimeSeries predict_recording(const nct::Recording& rec, const model::ExtractorParams& g_h);

/// Pool every recording's windows into one report. Parallel over
/// recordings; the pooled order is fixed by recording index.
EvalReport evaluate_corpus(const std::vector<nct::Recording>& recs,
                           const model::ExtractorParams& g_h, double window_s = 10.0);

/// Same pooling for the training-free baseline.
EvalReport evaluate_traditional(const std::vector<nct::Recording>& recs,
                                double window_s = 10.0);

/// CSV serialization: one row per window plus an aggregate row.
std::string report_csv(const EvalReport& r);

struct AblationRow {
    std::string name;
    EvalReport report;
};

/// Train and evaluate the five reference configurations (noise-only,
/// pseudo-only, stage 1, stage 2 without the noise term, full stage 2) on
/// one corpus; evaluation runs on the test split.
std::vector<AblationRow> ablation_suite(const std::vector<nct::Recording>& train_recs,
                                        const std::vector<nct::Recording>& val_recs,
                                        const std::vector<nct::Recording>& test_recs,
                                        const cli::TrainConfig& base_cfg);

std::string ablation_csv(const std::vector<AblationRow>& rows);

} // namespace eval
} // namespace aplanc
