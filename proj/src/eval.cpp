#include "aplanc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "aplanc/dsp.hpp"
#include "aplanc/errors.hpp"
#include "aplanc/parallel.hpp"
#include "aplanc/rangeproc.hpp"

namespace aplanc {
namespace eval {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::size_t delta_d_of(const model::ExtractorParams& p) {
    const std::size_t in = p.input_channels();
    if (in < 2 || in % 2 != 0 || (in / 2) % 2 != 1)
        throw ArgumentError("extractor input channels must be 2*(2*delta_d+1)");
    return (in / 2 - 1) / 2;
}

/// Pool per-recording window pairs in recording order (deterministic under
/// any thread count).
EvalReport pooled_report(const std::vector<nct::Recording>& recs,
                         const std::function<TimeSeries(const nct::Recording&)>& predict,
                         double window_s) {
    std::vector<EvalReport> per_rec(recs.size());
    parallel_for(recs.size(), [&](std::size_t i) {
        per_rec[i] = evaluate(predict(recs[i]), reference_windows(recs[i].gt, window_s),
                              window_s);
    });
    std::vector<double> pred, ref;
    for (const EvalReport& r : per_rec) {
        pred.insert(pred.end(), r.pred_bpm.begin(), r.pred_bpm.end());
        ref.insert(ref.end(), r.ref_bpm.begin(), r.ref_bpm.end());
    }
    return metrics_from_pairs(pred, ref, window_s);
}

} // namespace

EvalReport metrics_from_pairs(const std::vector<double>& pred_bpm,
                              const std::vector<double>& ref_bpm, double window_s) {
    if (pred_bpm.size() != ref_bpm.size())
        throw ArgumentError("metrics_from_pairs: prediction/reference counts differ");
    if (pred_bpm.empty()) throw ArgumentError("metrics_from_pairs: no windows");

    EvalReport r;
    r.pred_bpm = pred_bpm;
    r.ref_bpm = ref_bpm;
    r.window_s = window_s;

    const std::size_t n = pred_bpm.size();
    double abs_acc = 0.0, sq_acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = pred_bpm[i] - ref_bpm[i];
        abs_acc += std::abs(e);
        sq_acc += e * e;
    }
    r.mae_bpm = abs_acc / static_cast<double>(n);
    r.rmse_bpm = std::sqrt(sq_acc / static_cast<double>(n));

    r.pearson_r = std::numeric_limits<double>::quiet_NaN();
    r.pearson_defined = false;
    if (n >= 2) {
        double ma = 0.0, mb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ma += pred_bpm[i];
            mb += ref_bpm[i];
        }
        ma /= static_cast<double>(n);
        mb /= static_cast<double>(n);
        double sab = 0.0, saa = 0.0, sbb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double da = pred_bpm[i] - ma;
            const double db = ref_bpm[i] - mb;
            sab += da * db;
            saa += da * da;
            sbb += db * db;
        }
        if (saa > 0.0 && sbb > 0.0) {
            r.pearson_r = sab / std::sqrt(saa * sbb);
            r.pearson_r = std::clamp(r.pearson_r, -1.0, 1.0);
            r.pearson_defined = true;
        }
    }
    return r;
}

EvalReport evaluate(const TimeSeries& pred, const std::vector<double>& ref_bpm,
                    double window_s) {
    if (pred.rate_hz <= 0.0) throw ArgumentError("evaluate: prediction has no sample rate");
    const auto w = static_cast<std::size_t>(std::llround(window_s * pred.rate_hz));
    if (w < 2 || pred.size() < w)
        throw ArgumentError("evaluate: prediction shorter than one " +
                            std::to_string(window_s) + " s window");
    const std::size_t n_win = pred.size() / w;
    if (ref_bpm.size() != n_win)
        throw ArgumentError("evaluate: " + std::to_string(ref_bpm.size()) +
                            " reference windows for " + std::to_string(n_win) +
                            " prediction windows");

    std::vector<double> pred_rates(n_win);
    for (std::size_t k = 0; k < n_win; ++k) {
        TimeSeries sub;
        sub.rate_hz = pred.rate_hz;
        sub.samples.assign(pred.samples.begin() + static_cast<std::ptrdiff_t>(k * w),
                           pred.samples.begin() + static_cast<std::ptrdiff_t>((k + 1) * w));
        pred_rates[k] = dsp::hr_from_signal(sub);
    }
    return metrics_from_pairs(pred_rates, ref_bpm, window_s);
}

std::vector<double> reference_windows(const GroundTruth& gt, double window_s) {
    const TimeSeries& tr = gt.hr_bpm_trace;
    if (tr.rate_hz <= 0.0 || tr.size() == 0)
        throw ArgumentError("reference_windows: empty ground-truth trace");
    const auto w = static_cast<std::size_t>(std::llround(window_s * tr.rate_hz));
    const std::size_t n_win = tr.size() / w;
    std::vector<double> out(n_win);
    for (std::size_t k = 0; k < n_win; ++k) {
        double acc = 0.0;
        for (std::size_t i = k * w; i < (k + 1) * w; ++i) acc += tr.samples[i];
        out[k] = acc / static_cast<double>(w);
    }
    return out;
}

TimeSeries predict_recording(const nct::Recording& rec, const model::ExtractorParams& g_h) {
    const std::size_t delta_d = delta_d_of(g_h);
    const std::size_t d_star = rangeproc::select_center_bin(rec.m);
    const WindowedMatrix hb = rangeproc::heartbeat_window(rec.m, d_star, delta_d, true);
    return model::forward(g_h, hb);
}

EvalReport evaluate_corpus(const std::vector<nct::Recording>& recs,
                           const model::ExtractorParams& g_h, double window_s) {
    if (recs.empty()) throw ArgumentError("evaluate_corpus: no recordings");
    return pooled_report(
        recs, [&](const nct::Recording& r) { return predict_recording(r, g_h); }, window_s);
}

EvalReport evaluate_traditional(const std::vector<nct::Recording>& recs, double window_s) {
    if (recs.empty()) throw ArgumentError("evaluate_traditional: no recordings");
    return pooled_report(
        recs,
        [](const nct::Recording& r) {
            return dsp::traditional_heartbeat(r.m, rangeproc::select_center_bin(r.m));
        },
        window_s);
}

std::string report_csv(const EvalReport& r) {
    std::string out = "window,pred_bpm,ref_bpm,abs_err_bpm\n";
    for (std::size_t i = 0; i < r.pred_bpm.size(); ++i)
        out += std::to_string(i + 1) + "," + fmt(r.pred_bpm[i]) + "," + fmt(r.ref_bpm[i]) +
               "," + fmt(std::abs(r.pred_bpm[i] - r.ref_bpm[i])) + "\n";
    out += "aggregate,mae=" + fmt(r.mae_bpm) + ",rmse=" + fmt(r.rmse_bpm) +
           ",r=" + fmt(r.pearson_r) + "\n";
    return out;
}

std::vector<AblationRow> ablation_suite(const std::vector<nct::Recording>& train_recs,
                                        const std::vector<nct::Recording>& val_recs,
                                        const std::vector<nct::Recording>& test_recs,
                                        const cli::TrainConfig& base_cfg) {
    struct Variant {
        const char* name;
        int stage;
        bool positive;
        bool negative;
    };
    const Variant variants[] = {
        {"noise_only", 1, false, true},
        {"pseudo_only", 1, true, false},
        {"stage1", 1, true, true},
        {"stage2_no_noise", 2, true, false},
        {"stage2_full", 2, true, true},
    };

    // Every stage-2 variant shares the same stage-1 pretrained extractors.
    cli::TrainConfig s1_cfg = base_cfg;
    s1_cfg.stage = 1;
    s1_cfg.use_positive_term = true;
    s1_cfg.use_negative_term = true;
    const nct::TrainResult stage1 = nct::train_stage(train_recs, val_recs, s1_cfg);
    const auto frozen = std::make_pair(stage1.g_h, stage1.g_n);

    std::vector<AblationRow> rows;
    for (const Variant& v : variants) {
        cli::TrainConfig cfg = base_cfg;
        cfg.stage = v.stage;
        cfg.use_positive_term = v.positive;
        cfg.use_negative_term = v.negative;
        nct::TrainResult tr =
            v.stage == 1 && v.positive && v.negative
                ? stage1
                : nct::train_stage(train_recs, val_recs, cfg,
                                   v.stage == 2 ? std::make_optional(frozen) : std::nullopt);
        rows.push_back({v.name, evaluate_corpus(test_recs, tr.g_h)});
    }
    return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
    std::string out = "config,mae_bpm,rmse_bpm,pearson_r\n";
    for (const AblationRow& r : rows)
        out += r.name + "," + fmt(r.report.mae_bpm) + "," + fmt(r.report.rmse_bpm) + "," +
               fmt(r.report.pearson_r) + "\n";
    return out;
}

} // namespace eval
} // namespace aplanc
