#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "aplanc/config.hpp"
#include "aplanc/errors.hpp"
#include "aplanc/eval.hpp"
#include "aplanc/model.hpp"
#include "aplanc/nct.hpp"
#include "aplanc/rangeproc.hpp"
#include "aplanc/rng.hpp"
#include "aplanc/sim.hpp"

using namespace aplanc;

namespace {

constexpr double kPi = 3.14159265358979323846;

nct::Recording make_recording(double hr_bpm, double snr_db, std::uint64_t seed,
                              std::size_t n_chirps = 2400) {
    sim::SceneConfig c;
    c.samples_per_chirp = 16;
    c.n_range_bins = 16;
    c.chirp_slope_hz_per_s = sim::slope_for_resolution(0.04, 4.0e6, 16);
    c.target_distance_m = 0.32;
    c.resp_amp_m = 2.0e-4;
    c.heart_rate_bpm = hr_bpm;
    c.snr_db = snr_db;
    c.n_chirps = n_chirps;
    c.rng_seed = seed;
    auto [cube, gt] = sim::simulate_if_signals(c);
    nct::Recording rec;
    rec.m = rangeproc::build_range_matrix(cube, c);
    rec.gt = gt;
    rec.meta.seed = seed;
    rec.meta.mean_hr_bpm = gt.mean_hr_bpm;
    rec.meta.snr_db = snr_db;
    rec.meta.split = "test";
    return rec;
}

} // namespace

TEST_CASE("metrics on the two-window example: mae 2, rmse 2, r 1") {
    const eval::EvalReport r = eval::metrics_from_pairs({70.0, 80.0}, {72.0, 78.0});
    CHECK(r.mae_bpm == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.rmse_bpm == doctest::Approx(2.0).epsilon(1e-12));
    REQUIRE(r.pearson_defined);
    CHECK(r.pearson_r == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("anti-monotone predictions give r = -1") {
    const eval::EvalReport r = eval::metrics_from_pairs({60.0, 70.0, 80.0}, {90.0, 80.0, 70.0});
    REQUIRE(r.pearson_defined);
    CHECK(r.pearson_r == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("rmse never drops below mae") {
    Rng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> pred(8), ref(8);
        for (std::size_t i = 0; i < 8; ++i) {
            pred[i] = rng.uniform(48.0, 180.0);
            ref[i] = rng.uniform(48.0, 180.0);
        }
        const eval::EvalReport r = eval::metrics_from_pairs(pred, ref);
        CHECK(r.rmse_bpm >= r.mae_bpm - 1e-12);
        CHECK(r.pearson_r <= 1.0);
        CHECK(r.pearson_r >= -1.0);
    }
}

TEST_CASE("pearson is invariant under positive affine maps of either side") {
    Rng rng(2);
    std::vector<double> pred(10), ref(10);
    for (std::size_t i = 0; i < 10; ++i) {
        pred[i] = rng.uniform(50.0, 170.0);
        ref[i] = rng.uniform(50.0, 170.0);
    }
    const double r0 = eval::metrics_from_pairs(pred, ref).pearson_r;
    std::vector<double> scaled = pred;
    for (auto& v : scaled) v = 3.7 * v + 11.0;
    CHECK(eval::metrics_from_pairs(scaled, ref).pearson_r ==
          doctest::Approx(r0).epsilon(1e-9));
}

TEST_CASE("degenerate inputs leave pearson undefined but keep the errors") {
    const eval::EvalReport one = eval::metrics_from_pairs({70.0}, {75.0});
    CHECK(one.mae_bpm == doctest::Approx(5.0));
    CHECK_FALSE(one.pearson_defined);
    CHECK(std::isnan(one.pearson_r));

    const eval::EvalReport flat = eval::metrics_from_pairs({70.0, 70.0, 70.0},
                                                           {60.0, 70.0, 80.0});
    CHECK_FALSE(flat.pearson_defined);

    CHECK_THROWS_AS(eval::metrics_from_pairs({70.0, 71.0}, {70.0}), ArgumentError);
    CHECK_THROWS_AS(eval::metrics_from_pairs({}, {}), ArgumentError);
}

TEST_CASE("evaluate windows a signal and pairs it with the references") {
    // 30 s at 120 Hz, heart rate stepping 72 -> 90 -> 108 every 10 s.
    TimeSeries x;
    x.rate_hz = 120.0;
    x.samples.resize(3600);
    const double rates[3] = {72.0, 90.0, 108.0};
    for (std::size_t i = 0; i < 3600; ++i) {
        const double f = rates[i / 1200] / 60.0;
        x.samples[i] = std::sin(2.0 * kPi * f * static_cast<double>(i % 1200) / 120.0);
    }
    const eval::EvalReport r = eval::evaluate(x, {72.0, 90.0, 108.0});
    REQUIRE(r.pred_bpm.size() == 3);
    CHECK(r.mae_bpm <= 0.6);
    CHECK(r.window_s == doctest::Approx(10.0));

    CHECK_THROWS_AS(eval::evaluate(x, {72.0, 90.0}), ArgumentError);
}

TEST_CASE("a 35 s signal yields three full windows, remainder dropped") {
    TimeSeries x;
    x.rate_hz = 120.0;
    x.samples.resize(4200);
    for (std::size_t i = 0; i < 4200; ++i)
        x.samples[i] = std::sin(2.0 * kPi * 1.2 * static_cast<double>(i) / 120.0);
    const eval::EvalReport r = eval::evaluate(x, {72.0, 72.0, 72.0});
    CHECK(r.pred_bpm.size() == 3);
}

TEST_CASE("reference_windows averages the ground-truth trace per window") {
    GroundTruth gt;
    gt.mean_hr_bpm = 80.0;
    gt.hr_bpm_trace.rate_hz = 120.0;
    gt.displacement_m.rate_hz = 120.0;
    gt.hr_bpm_trace.samples.assign(2400, 0.0);
    gt.displacement_m.samples.assign(2400, 0.0);
    for (std::size_t i = 0; i < 2400; ++i)
        gt.hr_bpm_trace.samples[i] = i < 1200 ? 70.0 : 90.0;
    const std::vector<double> refs = eval::reference_windows(gt);
    REQUIRE(refs.size() == 2);
    CHECK(refs[0] == doctest::Approx(70.0));
    CHECK(refs[1] == doctest::Approx(90.0));
}

TEST_CASE("predict_recording shapes and determinism") {
    const nct::Recording rec = make_recording(85.0, 15.0, 7);
    Rng init(3);
    const auto g_h = model::make_extractor(2, init);
    const TimeSeries a = eval::predict_recording(rec, g_h);
    const TimeSeries b = eval::predict_recording(rec, g_h);
    REQUIRE(a.size() == rec.m.n_chirps);
    CHECK(a.rate_hz == doctest::Approx(120.0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::isfinite(a.samples[i]));
        CHECK(a.samples[i] == b.samples[i]);
    }
}

TEST_CASE("evaluate_corpus pools windows in recording order") {
    const std::vector<nct::Recording> recs = {make_recording(72.0, 15.0, 11),
                                              make_recording(96.0, 15.0, 12)};
    Rng init(4);
    const auto g_h = model::make_extractor(2, init);
    const eval::EvalReport pooled = eval::evaluate_corpus(recs, g_h);

    std::vector<double> want_pred, want_ref;
    for (const auto& rec : recs) {
        const TimeSeries pred = eval::predict_recording(rec, g_h);
        const auto refs = eval::reference_windows(rec.gt);
        const eval::EvalReport one = eval::evaluate(pred, refs);
        want_pred.insert(want_pred.end(), one.pred_bpm.begin(), one.pred_bpm.end());
        want_ref.insert(want_ref.end(), one.ref_bpm.begin(), one.ref_bpm.end());
    }
    REQUIRE(pooled.pred_bpm.size() == want_pred.size());
    for (std::size_t i = 0; i < want_pred.size(); ++i) {
        CHECK(pooled.pred_bpm[i] == doctest::Approx(want_pred[i]).epsilon(1e-12));
        CHECK(pooled.ref_bpm[i] == doctest::Approx(want_ref[i]).epsilon(1e-12));
    }
}

TEST_CASE("the traditional baseline nails clean recordings") {
    const std::vector<nct::Recording> recs = {make_recording(66.0, 15.0, 21),
                                              make_recording(132.0, 15.0, 22)};
    const eval::EvalReport r = eval::evaluate_traditional(recs);
    CHECK(r.mae_bpm < 1.0);
    REQUIRE(r.pred_bpm.size() == 4); // two 10 s windows per 20 s recording
}

TEST_CASE("report_csv lists every window and an aggregate row") {
    eval::EvalReport r = eval::metrics_from_pairs({70.0, 80.0, 90.0}, {71.0, 79.0, 92.0});
    const std::string csv = eval::report_csv(r);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "window,pred_bpm,ref_bpm,abs_err_bpm");
    std::size_t windows = 0;
    bool aggregate = false;
    while (std::getline(in, line)) {
        if (line.rfind("aggregate,", 0) == 0) {
            aggregate = true;
            CHECK(line.find("mae=") != std::string::npos);
            CHECK(line.find("rmse=") != std::string::npos);
            CHECK(line.find("r=") != std::string::npos);
        } else if (!line.empty()) {
            ++windows;
        }
    }
    CHECK(windows == 3);
    CHECK(aggregate);
}

TEST_CASE("ablation_suite trains all five configurations") {
    const std::vector<nct::Recording> train = {make_recording(78.0, 10.0, 31),
                                               make_recording(100.0, 10.0, 32)};
    const std::vector<nct::Recording> val = {make_recording(90.0, 10.0, 33)};
    const std::vector<nct::Recording> test = {make_recording(84.0, 10.0, 34)};
    cli::TrainConfig cfg;
    cfg.epochs = 2;
    cfg.learning_rate = 1e-3;
    cfg.k_samples = 2;
    cfg.seed = 9;
    const auto rows = eval::ablation_suite(train, val, test, cfg);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].name == "noise_only");
    CHECK(rows[1].name == "pseudo_only");
    CHECK(rows[2].name == "stage1");
    CHECK(rows[3].name == "stage2_no_noise");
    CHECK(rows[4].name == "stage2_full");
    for (const auto& row : rows) {
        CHECK(std::isfinite(row.report.mae_bpm));
        CHECK(row.report.rmse_bpm >= row.report.mae_bpm - 1e-12);
    }

    const std::string csv = eval::ablation_csv(rows);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "config,mae_bpm,rmse_bpm,pearson_r");
    std::size_t n = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++n;
    CHECK(n == 5);
}
