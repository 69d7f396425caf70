// radar-aplanc: unsupervised radar heartbeat sensing on synthetic FMCW data.
//
// Subcommands wire the full pipeline: simulate a corpus, run the
// training-free baseline, train the contrastive extractors (two stages),
// evaluate a checkpoint, and plot a report.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aplanc/config.hpp"
#include "aplanc/dsp.hpp"
#include "aplanc/errors.hpp"
#include "aplanc/eval.hpp"
#include "aplanc/io.hpp"
#include "aplanc/model.hpp"
#include "aplanc/nct.hpp"
#include "aplanc/plot.hpp"
#include "aplanc/rangeproc.hpp"
#include "aplanc/sim.hpp"

namespace {

using namespace aplanc;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << text;
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::size_t> count_flag) {
    cli::CorpusSpec spec = cli::corpus_spec_from_file(config_path);
    const std::size_t count = count_flag.value_or(spec.count);
    if (count == 0)
        std::cerr << "warning: count is 0, writing an empty manifest\n";
    auto [cfgs, splits] = cli::expand_corpus(spec, count);
    const auto entries = sim::make_corpus(cfgs, out_dir, splits);
    std::cout << "wrote " << entries.size() << " recording(s) under " << out_dir << "\n";
    return 0;
}

int cmd_traditional(const std::string& manifest_path, const std::string& report_path) {
    const auto entries = io::read_manifest(manifest_path);
    std::vector<nct::Recording> recs;
    std::size_t skipped = 0;
    for (const ManifestEntry& e : entries) {
        if (e.split != "test") continue;
        try {
            recs.push_back(nct::load_recording(manifest_path, e));
        } catch (const std::exception& ex) {
            std::cerr << "warning: skipping " << e.path << ": " << ex.what() << "\n";
            ++skipped;
        }
    }
    if (recs.empty()) {
        if (skipped > 0) throw IoError("traditional: every test recording failed to load");
        throw ConfigError("traditional: no recordings in the test split of " + manifest_path);
    }
    const eval::EvalReport rep = eval::evaluate_traditional(recs);
    write_text(report_path, eval::report_csv(rep));
    std::printf("traditional baseline: %zu recording(s), MAE %.3f bpm, RMSE %.3f bpm\n",
                recs.size(), rep.mae_bpm, rep.rmse_bpm);
    return 0;
}

int cmd_train(const std::string& manifest_path, int stage, const std::string& config_path,
              const std::string& ckpt_dir, const std::string& init_from) {
    cli::TrainConfig cfg;
    if (!config_path.empty()) cfg = cli::train_config_from_kv(cli::parse_kv_file(config_path));
    cfg.stage = stage;

    std::optional<std::pair<model::ExtractorParams, model::ExtractorParams>> stage1;
    if (stage == 2) {
        if (init_from.empty())
            throw ConfigError("train: stage 2 requires --init-from with stage-1 checkpoints");
        namespace fs = std::filesystem;
        stage1 = std::make_pair(
            model::ExtractorParams::from_rapw(
                io::read_rapw((fs::path(init_from) / "g_h.rapw").string())),
            model::ExtractorParams::from_rapw(
                io::read_rapw((fs::path(init_from) / "g_n.rapw").string())));
    }

    const auto entries = io::read_manifest(manifest_path);
    const auto train_recs = nct::load_split(manifest_path, entries, "train");
    const auto val_recs = nct::load_split(manifest_path, entries, "val");

    const nct::TrainResult res = nct::train_stage(train_recs, val_recs, cfg, stage1);

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(ckpt_dir, ec);
    if (ec) throw IoError("cannot create directory " + ckpt_dir + ": " + ec.message());
    io::write_rapw((fs::path(ckpt_dir) / "g_h.rapw").string(), res.g_h.to_rapw());
    io::write_rapw((fs::path(ckpt_dir) / "g_n.rapw").string(), res.g_n.to_rapw());
    write_text((fs::path(ckpt_dir) / "metrics.csv").string(), res.metrics_csv);
    std::printf("stage %d done: best epoch %zu, val MAE %.3f bpm, %zu skipped step(s)\n",
                stage, res.best_epoch, res.best_val_mae, res.skipped_steps);
    return 0;
}

int cmd_eval(const std::string& manifest_path, const std::string& ckpt_path,
             const std::string& report_path) {
    const model::ExtractorParams g_h =
        model::ExtractorParams::from_rapw(io::read_rapw(ckpt_path));
    const auto entries = io::read_manifest(manifest_path);
    const auto recs = nct::load_split(manifest_path, entries, "test");
    if (recs.empty())
        throw ConfigError("eval: no recordings in the test split of " + manifest_path);

    const eval::EvalReport rep = eval::evaluate_corpus(recs, g_h);

    // Waveform overlay of the first recording (first 10 s): prediction,
    // traditional baseline, and cardiac-band ground-truth displacement.
    const nct::Recording& rec = recs.front();
    const TimeSeries pred = eval::predict_recording(rec, g_h);
    const TimeSeries trad =
        dsp::traditional_heartbeat(rec.m, rangeproc::select_center_bin(rec.m));
    const TimeSeries truth = dsp::bandpass(rec.gt.displacement_m);
    const auto n_wave = std::min<std::size_t>(
        pred.size(), static_cast<std::size_t>(dsp::kHrWindowS * pred.rate_hz));
    std::vector<cli::WaveSeries> waves(3);
    waves[0].name = "predicted";
    waves[1].name = "traditional";
    waves[2].name = "truth";
    for (std::size_t i = 0; i < n_wave; ++i) {
        const double t = static_cast<double>(i) / pred.rate_hz;
        waves[0].t_s.push_back(t);
        waves[0].values.push_back(pred.samples[i]);
        waves[1].t_s.push_back(t);
        waves[1].values.push_back(trad.samples[i]);
        waves[2].t_s.push_back(t);
        waves[2].values.push_back(truth.samples[i]);
    }
    write_text(report_path, eval::report_csv(rep) + cli::wave_csv_rows(waves));
    std::printf("eval: %zu recording(s), MAE %.3f bpm, RMSE %.3f bpm, r %.3f\n", recs.size(),
                rep.mae_bpm, rep.rmse_bpm, rep.pearson_r);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"radar-aplanc: unsupervised FMCW heartbeat sensing"};
    app.require_subcommand(1);

    std::string config_path, out_dir, manifest_path, report_path, ckpt_dir, ckpt_path,
        init_from, out_svg;
    int stage = 1;
    std::optional<std::size_t> count;

    CLI::App* sim_cmd = app.add_subcommand("simulate", "generate a synthetic corpus");
    sim_cmd->add_option("--config", config_path, "scene/corpus config file")->required();
    sim_cmd->add_option("--out", out_dir, "output directory")->required();
    sim_cmd->add_option("--count", count, "number of recordings (overrides the config)");

    CLI::App* trad_cmd =
        app.add_subcommand("traditional", "training-free baseline over the test split");
    trad_cmd->add_option("--manifest", manifest_path, "corpus manifest")->required();
    trad_cmd->add_option("--report", report_path, "output report CSV")->required();

    CLI::App* train_cmd = app.add_subcommand("train", "train the contrastive extractors");
    train_cmd->add_option("--manifest", manifest_path, "corpus manifest")->required();
    train_cmd->add_option("--stage", stage, "training stage (1 or 2)")->required();
    train_cmd->add_option("--config", config_path, "train config file");
    train_cmd->add_option("--ckpt-dir", ckpt_dir, "checkpoint output directory")->required();
    train_cmd->add_option("--init-from", init_from, "stage-1 checkpoint directory");

    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a heartbeat checkpoint");
    eval_cmd->add_option("--manifest", manifest_path, "corpus manifest")->required();
    eval_cmd->add_option("--ckpt", ckpt_path, "g_h checkpoint (RAPW)")->required();
    eval_cmd->add_option("--report", report_path, "output report CSV")->required();

    CLI::App* plot_cmd = app.add_subcommand("plot", "render a report as SVG");
    plot_cmd->add_option("--report", report_path, "report CSV from eval")->required();
    plot_cmd->add_option("--out-svg", out_svg, "output SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim_cmd->parsed()) return cmd_simulate(config_path, out_dir, count);
        if (trad_cmd->parsed()) return cmd_traditional(manifest_path, report_path);
        if (train_cmd->parsed())
            return cmd_train(manifest_path, stage, config_path, ckpt_dir, init_from);
        if (eval_cmd->parsed()) return cmd_eval(manifest_path, ckpt_path, report_path);
        if (plot_cmd->parsed()) {
            cli::plot_report_file(report_path, out_svg);
            std::cout << "wrote " << out_svg << "\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
