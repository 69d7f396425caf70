#include "aplanc/nct.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "aplanc/dsp.hpp"
#include "aplanc/errors.hpp"
#include "aplanc/eval.hpp"
#include "aplanc/io.hpp"
#include "aplanc/rangeproc.hpp"

namespace aplanc {
namespace nct {

namespace {

constexpr std::size_t kMaxConsecutiveSkips = 50;

void check_same_grid(const sampling::SampleSet& a, const sampling::SampleSet& b,
                     const char* what) {
    for (const BandSpectrum& s : b.spectra)
        if (!a.spectra.front().same_grid(s))
            throw ArgumentError(std::string("nct_loss: ") + what +
                                " spectra are not on the shared frequency grid");
}

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

TimeSeries slice(const TimeSeries& x, std::size_t start, std::size_t len) {
    TimeSeries out;
    out.rate_hz = x.rate_hz;
    out.samples.assign(x.samples.begin() + static_cast<std::ptrdiff_t>(start),
                       x.samples.begin() + static_cast<std::ptrdiff_t>(start + len));
    return out;
}

bool grads_finite(const model::ExtractorParams& g) {
    for (const model::ConvLayer& l : g.layers) {
        for (double v : l.w)
            if (!std::isfinite(v)) return false;
        for (double v : l.b)
            if (!std::isfinite(v)) return false;
    }
    return true;
}

/// Scatter the PSD pullback of each sampled sub-window back onto the full
/// signal gradient.
void accumulate_signal_grad(const TimeSeries& signal, const sampling::SampleSet& set,
                            const std::vector<std::vector<double>>& dspec,
                            std::size_t n_sub, bool normalize, std::vector<double>& dsig) {
    for (std::size_t j = 0; j < set.size(); ++j) {
        dsp::PsdTape tape;
        TimeSeries sub = slice(signal, set.starts[j], n_sub);
        dsp::psd_cached(sub, dsp::kCardiacLoHz, dsp::kCardiacHiHz, dsp::kHrGridHz, tape,
                        normalize);
        const std::vector<double> dsub = dsp::psd_pullback(tape, dspec[j]);
        for (std::size_t i = 0; i < dsub.size(); ++i) dsig[set.starts[j] + i] += dsub[i];
    }
}

} // namespace

NctLossBreakdown nct_loss(const sampling::SampleSet& s_pl, const sampling::SampleSet& s_p,
                          const sampling::SampleSet& s_n, LossTerms terms) {
    const std::size_t K = s_p.size();
    if (K == 0 || s_pl.size() != K || s_n.size() != K)
        throw ArgumentError("nct_loss: the three sample sets must share one K >= 1");
    check_same_grid(s_p, s_pl, "pseudo-label");
    check_same_grid(s_p, s_n, "noise");

    const std::size_t nb = s_p.spectra.front().size();
    const double inv_k2 = 1.0 / static_cast<double>(K * K);

    NctLossBreakdown out;
    out.d_s_p.assign(K, std::vector<double>(nb, 0.0));
    out.d_s_n.assign(K, std::vector<double>(nb, 0.0));

    // Set-wide sums make the pairwise gradients O(K) instead of O(K^2).
    std::vector<double> sum_pl(nb, 0.0), sum_p(nb, 0.0), sum_n(nb, 0.0);
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t b = 0; b < nb; ++b) {
            sum_pl[b] += s_pl.spectra[i].power[b];
            sum_p[b] += s_p.spectra[i].power[b];
            sum_n[b] += s_n.spectra[i].power[b];
        }

    if (terms.positive) {
        double acc = 0.0;
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t j = 0; j < K; ++j)
                for (std::size_t b = 0; b < nb; ++b) {
                    const double d = s_pl.spectra[i].power[b] - s_p.spectra[j].power[b];
                    acc += d * d;
                }
        out.l_p = inv_k2 * acc;
        for (std::size_t j = 0; j < K; ++j)
            for (std::size_t b = 0; b < nb; ++b)
                out.d_s_p[j][b] += 2.0 * inv_k2 *
                    (static_cast<double>(K) * s_p.spectra[j].power[b] - sum_pl[b]);
    }
    if (terms.negative) {
        double acc = 0.0;
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t j = 0; j < K; ++j)
                for (std::size_t b = 0; b < nb; ++b) {
                    const double d = s_p.spectra[i].power[b] - s_n.spectra[j].power[b];
                    acc += d * d;
                }
        out.l_n = -inv_k2 * acc;
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t b = 0; b < nb; ++b)
                out.d_s_p[i][b] -= 2.0 * inv_k2 *
                    (static_cast<double>(K) * s_p.spectra[i].power[b] - sum_n[b]);
        for (std::size_t j = 0; j < K; ++j)
            for (std::size_t b = 0; b < nb; ++b)
                out.d_s_n[j][b] -= 2.0 * inv_k2 *
                    (static_cast<double>(K) * s_n.spectra[j].power[b] - sum_p[b]);
    }
    out.total = out.l_p + out.l_n;
    return out;
}

double signal_distance(const TimeSeries& a, const TimeSeries& b, bool truncate_to_shorter) {
    if (a.rate_hz <= 0.0 || b.rate_hz <= 0.0)
        throw ArgumentError("signal_distance: signals need a sample rate");
    if (std::abs(a.rate_hz - b.rate_hz) > 1e-9)
        throw ArgumentError("signal_distance: sample rates differ");
    const auto w = static_cast<std::size_t>(std::llround(dsp::kHrWindowS * a.rate_hz));
    const std::size_t na = a.size() / w;
    const std::size_t nb = b.size() / w;
    if (na == 0 || nb == 0)
        throw ArgumentError("signal_distance: both signals must cover at least " +
                            std::to_string(dsp::kHrWindowS) + " s");
    if (na != nb && !truncate_to_shorter)
        throw ArgumentError("signal_distance: window counts differ (" + std::to_string(na) +
                            " vs " + std::to_string(nb) + ")");
    const std::size_t n = std::min(na, nb);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double ha = dsp::hr_from_signal(slice(a, k * w, w));
        const double hb = dsp::hr_from_signal(slice(b, k * w, w));
        acc += std::abs(ha - hb);
    }
    return acc / static_cast<double>(n);
}

PseudoLabelDecision decide(const std::vector<double>& noise_dists,
                           const std::vector<double>& hb_dists, double p_noise_dist) {
    if (noise_dists.empty() || noise_dists.size() != hb_dists.size())
        throw ArgumentError("decide: X and Y must be equally sized and nonempty");
    for (std::size_t i = 0; i < noise_dists.size(); ++i)
        if (!std::isfinite(noise_dists[i]) || noise_dists[i] < 0.0 ||
            !std::isfinite(hb_dists[i]) || hb_dists[i] < 0.0)
            throw ArgumentError("decide: distances must be finite and nonnegative");
    if (!std::isfinite(p_noise_dist) || p_noise_dist < 0.0)
        throw ArgumentError("decide: D(p, q) must be finite and nonnegative");

    std::size_t i_max = 0, i_min = 0;
    for (std::size_t i = 1; i < noise_dists.size(); ++i) {
        if (noise_dists[i] > noise_dists[i_max]) i_max = i; // ties keep the smaller index
        if (hb_dists[i] < hb_dists[i_min]) i_min = i;
    }

    PseudoLabelDecision d;
    d.noise_dists = noise_dists;
    d.hb_dists = hb_dists;
    d.p_noise_dist = p_noise_dist;
    if (i_max == i_min) {
        d.branch = Branch::agree;
        d.chosen_index = i_min;
    } else if (noise_dists[i_min] > p_noise_dist) {
        d.branch = Branch::override;
        d.chosen_index = i_min;
    } else {
        d.branch = Branch::fallback;
        d.chose_pretrained = true;
    }
    return d;
}

std::pair<TimeSeries, PseudoLabelDecision> aug_pseudo_gen(
    const RangeMatrix& m, std::size_t d_star, const model::ExtractorParams& gh_star,
    const model::ExtractorParams& gn_star, Rng& rng, bool exclude_overlap) {
    const std::size_t delta_d = delta_d_of(gh_star);
    if (delta_d_of(gn_star) != delta_d)
        throw ArgumentError("aug_pseudo_gen: the two extractors expect different windows");

    const WindowedMatrix hb = rangeproc::heartbeat_window(m, d_star, delta_d, true);
    const std::size_t first = hb.center_bin - hb.half_width;
    const std::size_t n_cand = 2 * delta_d + 1;

    std::vector<TimeSeries> candidates;
    candidates.reserve(n_cand);
    for (std::size_t i = 0; i < n_cand; ++i)
        candidates.push_back(dsp::traditional_heartbeat(m, first + i));

    const TimeSeries p = model::forward(gh_star, hb);
    const WindowedMatrix nw =
        rangeproc::random_noise_window(m, d_star, delta_d, rng, exclude_overlap);
    const TimeSeries q = model::forward(gn_star, nw);

    std::vector<double> x(n_cand), y(n_cand);
    for (std::size_t i = 0; i < n_cand; ++i) {
        x[i] = signal_distance(candidates[i], q);
        y[i] = signal_distance(candidates[i], p);
    }
    PseudoLabelDecision dec = decide(x, y, signal_distance(p, q));
    TimeSeries chosen = dec.chose_pretrained ? p : candidates[dec.chosen_index];
    return {std::move(chosen), std::move(dec)};
}

Recording load_recording(const std::string& manifest_path, const ManifestEntry& entry) {
    Recording rec;
    const std::string rapm = io::resolve_entry_path(manifest_path, entry.path);
    rec.m = io::read_rapm(rapm);
    std::filesystem::path ragt(rapm);
    ragt.replace_extension(".ragt");
    rec.gt = io::read_ragt(ragt.string(), rec.m.chirp_rate_hz);
    rec.meta = entry;
    return rec;
}

std::vector<Recording> load_split(const std::string& manifest_path,
                                  const std::vector<ManifestEntry>& entries,
                                  const std::string& split) {
    std::vector<Recording> out;
    for (const ManifestEntry& e : entries)
        if (split.empty() || e.split == split) out.push_back(load_recording(manifest_path, e));
    return out;
}

TrainResult train_stage(
    const std::vector<Recording>& train_recs, const std::vector<Recording>& val_recs,
    const cli::TrainConfig& cfg,
    const std::optional<std::pair<model::ExtractorParams, model::ExtractorParams>>& stage1) {
    cfg.validate();
    if (cfg.stage == 2 && !stage1)
        throw ConfigError("train_stage: stage 2 needs the frozen stage-one extractors");
    if (train_recs.empty()) throw ArgumentError("train_stage: no training recordings");

    Rng rng(cfg.seed);
    model::ExtractorParams g_h, g_n;
    if (cfg.stage == 2 && cfg.stage2_continue) {
        g_h = stage1->first;
        g_n = stage1->second;
        if (delta_d_of(g_h) != cfg.delta_d)
            throw ConfigError("train_stage: stage-one window width does not match delta_d");
    } else {
        g_h = model::make_extractor(cfg.delta_d, rng);
        g_n = model::make_extractor(cfg.delta_d, rng);
    }
    model::OptimizerState opt_h = model::make_optimizer(g_h, cfg.learning_rate, cfg.weight_decay);
    model::OptimizerState opt_n = model::make_optimizer(g_n, cfg.learning_rate, cfg.weight_decay);

    // Per-recording constants: center bin, heartbeat window, stage-1 label.
    struct Prep {
        std::size_t d_star = 0;
        WindowedMatrix hb;
        TimeSeries phi;
    };
    std::vector<Prep> preps(train_recs.size());
    for (std::size_t i = 0; i < train_recs.size(); ++i) {
        const RangeMatrix& m = train_recs[i].m;
        preps[i].d_star = rangeproc::select_center_bin(m);
        preps[i].hb = rangeproc::heartbeat_window(m, preps[i].d_star, cfg.delta_d, true);
        if (cfg.stage == 1)
            preps[i].phi = dsp::traditional_heartbeat(m, preps[i].d_star);
    }

    const LossTerms terms{cfg.use_positive_term, cfg.use_negative_term};
    const bool normalize_psd = !cfg.raw_psd_loss;

    TrainResult res;
    res.g_h = g_h;
    res.g_n = g_n;
    res.best_val_mae = std::numeric_limits<double>::infinity();
    res.metrics_csv = "epoch,step,l_p,l_n,total,val_mae,agree,override,fallback\n";

    std::size_t consecutive_skips = 0;
    std::vector<std::size_t> order(train_recs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_int(0, i - 1)]);

        std::size_t n_agree = 0, n_override = 0, n_fallback = 0;
        double ep_lp = 0.0, ep_ln = 0.0, ep_total = 0.0;
        std::size_t ep_logged = 0;

        for (std::size_t step = 0; step < order.size(); ++step) {
            const Recording& rec = train_recs[order[step]];
            const Prep& pr = preps[order[step]];

            const WindowedMatrix nw = rangeproc::random_noise_window(
                rec.m, pr.d_star, cfg.delta_d, rng, !cfg.overlap_noise_window);
            const TimeSeries p = model::forward(g_h, pr.hb);
            const TimeSeries q = model::forward(g_n, nw);

            TimeSeries phi;
            if (cfg.stage == 1) {
                phi = pr.phi;
            } else {
                auto [sig, dec] = aug_pseudo_gen(rec.m, pr.d_star, stage1->first,
                                                 stage1->second, rng, !cfg.overlap_noise_window);
                phi = std::move(sig);
                switch (dec.branch) {
                    case Branch::agree: ++n_agree; break;
                    case Branch::override: ++n_override; break;
                    case Branch::fallback: ++n_fallback; break;
                }
            }

            const auto s_pl = sampling::random_temporal_sample(
                phi, cfg.k_samples, cfg.sub_len_s, rng, sampling::SourceTag::pseudo_label,
                normalize_psd);
            const auto s_p = sampling::random_temporal_sample(
                p, cfg.k_samples, cfg.sub_len_s, rng, sampling::SourceTag::positive,
                normalize_psd);
            const auto s_n = sampling::random_temporal_sample(
                q, cfg.k_samples, cfg.sub_len_s, rng, sampling::SourceTag::negative,
                normalize_psd);

            const NctLossBreakdown loss = nct_loss(s_pl, s_p, s_n, terms);
            res.metrics_csv += std::to_string(epoch) + "," + std::to_string(step + 1) + "," +
                               fmt(loss.l_p) + "," + fmt(loss.l_n) + "," + fmt(loss.total) +
                               ",,,,\n";

            bool ok = std::isfinite(loss.total);
            if (ok) {
                const std::size_t n_sub = sampling::sub_window_len(p, cfg.sub_len_s);
                std::vector<double> dp(p.size(), 0.0), dq(q.size(), 0.0);
                accumulate_signal_grad(p, s_p, loss.d_s_p, n_sub, normalize_psd, dp);
                accumulate_signal_grad(q, s_n, loss.d_s_n, n_sub, normalize_psd, dq);
                const model::ExtractorParams grad_h = model::backward(g_h, pr.hb, dp);
                const model::ExtractorParams grad_n = model::backward(g_n, nw, dq);
                ok = grads_finite(grad_h) && grads_finite(grad_n);
                if (ok) {
                    model::adamw_step(opt_h, g_h, grad_h);
                    model::adamw_step(opt_n, g_n, grad_n);
                }
            }
            if (ok) {
                consecutive_skips = 0;
                ep_lp += loss.l_p;
                ep_ln += loss.l_n;
                ep_total += loss.total;
                ++ep_logged;
            } else {
                ++res.skipped_steps;
                if (++consecutive_skips > kMaxConsecutiveSkips)
                    throw NumericError("train_stage: " +
                                       std::to_string(kMaxConsecutiveSkips) +
                                       " consecutive non-finite steps; aborting");
            }
        }

        double val_mae = std::numeric_limits<double>::quiet_NaN();
        if (!val_recs.empty()) {
            double acc = 0.0;
            std::size_t n_win = 0;
            for (const Recording& vr : val_recs) {
                const TimeSeries pred = eval::predict_recording(vr, g_h);
                const std::vector<double> refs = eval::reference_windows(vr.gt);
                const eval::EvalReport rep = eval::evaluate(pred, refs);
                for (std::size_t k = 0; k < rep.pred_bpm.size(); ++k)
                    acc += std::abs(rep.pred_bpm[k] - rep.ref_bpm[k]);
                n_win += rep.pred_bpm.size();
            }
            val_mae = n_win > 0 ? acc / static_cast<double>(n_win)
                                : std::numeric_limits<double>::quiet_NaN();
        }

        const double den = ep_logged > 0 ? static_cast<double>(ep_logged) : 1.0;
        res.metrics_csv += std::to_string(epoch) + ",," + fmt(ep_lp / den) + "," +
                           fmt(ep_ln / den) + "," + fmt(ep_total / den) + "," + fmt(val_mae) +
                           "," + std::to_string(n_agree) + "," + std::to_string(n_override) +
                           "," + std::to_string(n_fallback) + "\n";

        const bool improved = val_recs.empty() || val_mae < res.best_val_mae;
        if (improved) {
            res.best_val_mae = val_mae;
            res.best_epoch = epoch;
            res.g_h = g_h;
            res.g_n = g_n;
        }
    }
    return res;
}

} // namespace nct
} // namespace aplanc
