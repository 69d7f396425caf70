#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "aplanc/errors.hpp"
#include "aplanc/rangeproc.hpp"
#include "aplanc/rng.hpp"
#include "aplanc/sim.hpp"

using namespace aplanc;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Independent oracle: textbook O(n^2) DFT with zero padding to n_out points.
std::vector<cplx> naive_dft(const std::vector<cplx>& x, std::size_t n_out) {
    std::vector<cplx> out(n_out, cplx{0.0, 0.0});
    for (std::size_t k = 0; k < n_out; ++k)
        for (std::size_t s = 0; s < x.size(); ++s) {
            const double w = -2.0 * kPi * static_cast<double>(k * s) / static_cast<double>(n_out);
            out[k] += x[s] * cplx{std::cos(w), std::sin(w)};
        }
    return out;
}

sim::IfCube random_cube(std::size_t n_chirps, std::size_t n_samples, std::uint64_t seed) {
    Rng rng(seed);
    sim::IfCube cube;
    cube.n_chirps = n_chirps;
    cube.n_samples = n_samples;
    cube.data.resize(n_chirps * n_samples);
    for (auto& z : cube.data) z = cplx{rng.normal(), rng.normal()};
    return cube;
}

sim::SceneConfig cfg_for(std::size_t n_bins) {
    sim::SceneConfig c;
    c.samples_per_chirp = n_bins;
    c.n_range_bins = n_bins;
    c.chirp_slope_hz_per_s = sim::slope_for_resolution(0.04, 4.0e6, n_bins);
    return c;
}

RangeMatrix flat_matrix(std::size_t n_chirps, std::size_t n_bins) {
    RangeMatrix m;
    m.n_chirps = n_chirps;
    m.n_bins = n_bins;
    m.chirp_rate_hz = 120.0;
    m.range_res_m = 0.04;
    m.data.assign(n_chirps * n_bins, cplx{1.0, 0.0});
    return m;
}

} // namespace

TEST_CASE("range matrix rows equal the per-chirp DFT (truncate and pad cases)") {
    SUBCASE("sample count equals bin count") {
        const sim::IfCube cube = random_cube(3, 8, 1);
        sim::SceneConfig c = cfg_for(8);
        const RangeMatrix m = rangeproc::build_range_matrix(cube, c);
        REQUIRE(m.n_chirps == 3);
        REQUIRE(m.n_bins == 8);
        for (std::size_t n = 0; n < 3; ++n) {
            std::vector<cplx> row(cube.data.begin() + n * 8, cube.data.begin() + (n + 1) * 8);
            const auto want = naive_dft(row, 8);
            for (std::size_t k = 0; k < 8; ++k)
                CHECK(std::abs(m.at(n, k) - want[k]) < 1e-9);
        }
    }
    SUBCASE("more samples than bins truncates the chirp") {
        const sim::IfCube cube = random_cube(2, 12, 2);
        sim::SceneConfig c = cfg_for(8);
        c.samples_per_chirp = 12;
        const RangeMatrix m = rangeproc::build_range_matrix(cube, c);
        for (std::size_t n = 0; n < 2; ++n) {
            std::vector<cplx> row(cube.data.begin() + n * 12, cube.data.begin() + n * 12 + 8);
            const auto want = naive_dft(row, 8);
            for (std::size_t k = 0; k < 8; ++k)
                CHECK(std::abs(m.at(n, k) - want[k]) < 1e-9);
        }
    }
    SUBCASE("fewer samples than bins zero-pads the chirp") {
        const sim::IfCube cube = random_cube(2, 5, 3);
        sim::SceneConfig c = cfg_for(16);
        c.samples_per_chirp = 5;
        const RangeMatrix m = rangeproc::build_range_matrix(cube, c);
        for (std::size_t n = 0; n < 2; ++n) {
            std::vector<cplx> row(cube.data.begin() + n * 5, cube.data.begin() + (n + 1) * 5);
            const auto want = naive_dft(row, 16);
            for (std::size_t k = 0; k < 16; ++k)
                CHECK(std::abs(m.at(n, k) - want[k]) < 1e-9);
        }
    }
}

TEST_CASE("Parseval holds for the square case") {
    const sim::IfCube cube = random_cube(4, 32, 7);
    const RangeMatrix m = rangeproc::build_range_matrix(cube, cfg_for(32));
    for (std::size_t n = 0; n < 4; ++n) {
        double in_pw = 0.0, out_pw = 0.0;
        for (std::size_t s = 0; s < 32; ++s) in_pw += std::norm(cube.at(n, s));
        for (std::size_t k = 0; k < 32; ++k) out_pw += std::norm(m.at(n, k));
        CHECK(out_pw == doctest::Approx(32.0 * in_pw).epsilon(1e-9));
    }
}

TEST_CASE("range matrix metadata comes from the scene") {
    const sim::IfCube cube = random_cube(2, 16, 4);
    sim::SceneConfig c = cfg_for(16);
    const RangeMatrix m = rangeproc::build_range_matrix(cube, c);
    CHECK(m.chirp_rate_hz == doctest::Approx(c.chirp_rate_hz));
    CHECK(m.range_res_m == doctest::Approx(0.04).epsilon(1e-12));
}

TEST_CASE("build_range_matrix rejects bad cubes") {
    sim::IfCube cube = random_cube(2, 16, 5);
    cube.data[7] = cplx{std::numeric_limits<double>::quiet_NaN(), 0.0};
    CHECK_THROWS_AS(rangeproc::build_range_matrix(cube, cfg_for(16)), NumericError);

    sim::IfCube short_cube = random_cube(2, 1, 6);
    sim::SceneConfig c1 = cfg_for(16);
    c1.samples_per_chirp = 1;
    CHECK_THROWS_AS(rangeproc::build_range_matrix(short_cube, c1), ArgumentError);

    sim::IfCube mismatched = random_cube(2, 16, 8);
    mismatched.data.pop_back();
    CHECK_THROWS_AS(rangeproc::build_range_matrix(mismatched, cfg_for(16)), ArgumentError);
}

TEST_CASE("a simulated target dominates its range bin") {
    sim::SceneConfig c = cfg_for(16);
    c.samples_per_chirp = 16;
    c.target_distance_m = 0.32; // bin 8
    c.resp_amp_m = 2e-4;
    c.n_chirps = 200;
    c.snr_db = std::numeric_limits<double>::infinity();
    const auto [cube, gt] = sim::simulate_if_signals(c);
    const RangeMatrix m = rangeproc::build_range_matrix(cube, c);
    CHECK(rangeproc::select_center_bin(m) == 8);
    std::vector<double> pw(m.n_bins, 0.0);
    for (std::size_t n = 0; n < m.n_chirps; ++n)
        for (std::size_t b = 0; b < m.n_bins; ++b) pw[b] += std::norm(m.at(n, b));
    for (std::size_t b = 0; b < m.n_bins; ++b) {
        if (b >= 7 && b <= 9) continue; // skip the target bin and leakage neighbors
        CHECK(pw[8] > 10.0 * pw[b]);
    }
}

TEST_CASE("select_center_bin breaks ties toward the smaller index") {
    RangeMatrix m = flat_matrix(3, 12);
    for (std::size_t n = 0; n < 3; ++n) {
        m.at(n, 7) = cplx{5.0, 0.0};
        m.at(n, 9) = cplx{0.0, 5.0}; // same power, larger index
    }
    CHECK(rangeproc::select_center_bin(m) == 7);

    // An all-equal matrix degenerates to bin 0.
    CHECK(rangeproc::select_center_bin(flat_matrix(2, 6)) == 0);
}

TEST_CASE("select_center_bin is invariant to uniform scaling") {
    Rng rng(9);
    RangeMatrix m = flat_matrix(5, 20);
    for (auto& z : m.data) z = cplx{rng.normal(), rng.normal()};
    RangeMatrix scaled = m;
    for (auto& z : scaled.data) z *= 123.0;
    CHECK(rangeproc::select_center_bin(m) == rangeproc::select_center_bin(scaled));
}

TEST_CASE("select_center_bin honors the search interval") {
    RangeMatrix m = flat_matrix(2, 10);
    m.at(0, 8) = cplx{10.0, 0.0};
    m.at(0, 3) = cplx{4.0, 0.0};
    CHECK(rangeproc::select_center_bin(m) == 8);
    CHECK(rangeproc::select_center_bin(m, rangeproc::BinRange{0, 6}) == 3);
    CHECK_THROWS_AS(rangeproc::select_center_bin(m, rangeproc::BinRange{6, 6}), ArgumentError);
    CHECK_THROWS_AS(rangeproc::select_center_bin(m, rangeproc::BinRange{4, 14}), ArgumentError);
}

TEST_CASE("heartbeat_window copies the right columns and metadata") {
    Rng rng(11);
    RangeMatrix m = flat_matrix(6, 16);
    for (auto& z : m.data) z = cplx{rng.normal(), rng.normal()};
    const WindowedMatrix w = rangeproc::heartbeat_window(m, 8, 2);
    REQUIRE(w.n_cols == 5);
    REQUIRE(w.n_chirps == 6);
    CHECK(w.center_bin == 8);
    CHECK(w.half_width == 2);
    CHECK(w.chirp_rate_hz == doctest::Approx(m.chirp_rate_hz));
    for (std::size_t n = 0; n < 6; ++n)
        for (std::size_t c = 0; c < 5; ++c) CHECK(w.at(n, c) == m.at(n, 6 + c));

    const WindowedMatrix w0 = rangeproc::heartbeat_window(m, 8, 0);
    CHECK(w0.n_cols == 1);
}

TEST_CASE("heartbeat_window edge handling: error message and clamping") {
    const RangeMatrix m = flat_matrix(2, 16);
    try {
        rangeproc::heartbeat_window(m, 1, 3);
        FAIL("expected ArgumentError");
    } catch (const ArgumentError& e) {
        CHECK(std::string(e.what()).find("largest valid half-width here is 1") !=
              std::string::npos);
    }
    CHECK_THROWS_AS(rangeproc::heartbeat_window(m, 15, 2), ArgumentError);
    CHECK_THROWS_AS(rangeproc::heartbeat_window(m, 16, 0), ArgumentError);
    CHECK_THROWS_AS(rangeproc::heartbeat_window(m, 8, 8), ArgumentError);

    const WindowedMatrix left = rangeproc::heartbeat_window(m, 1, 3, true);
    CHECK(left.center_bin == 3);
    const WindowedMatrix right = rangeproc::heartbeat_window(m, 15, 2, true);
    CHECK(right.center_bin == 13);
    const WindowedMatrix mid = rangeproc::heartbeat_window(m, 8, 2, true);
    CHECK(mid.center_bin == 8); // clamp leaves interior windows alone
}

TEST_CASE("noise windows never touch the heartbeat window when exclusion is on") {
    const RangeMatrix m = flat_matrix(2, 64);
    const std::size_t d_star = 32, hw = 2;
    Rng rng(13);
    for (int i = 0; i < 10000; ++i) {
        const WindowedMatrix w = rangeproc::random_noise_window(m, d_star, hw, rng);
        const std::size_t lo = w.center_bin - hw, hi = w.center_bin + hw;
        CHECK(lo >= 0 + 0u);
        CHECK(hi < 64);
        const bool disjoint = hi < d_star - hw || lo > d_star + hw;
        CHECK(disjoint);
    }
}

TEST_CASE("relaxed exclusion blocks only the center bin") {
    const RangeMatrix m = flat_matrix(2, 9);
    const std::size_t d_star = 4, hw = 1;
    Rng rng(17);
    std::set<std::size_t> seen;
    for (int i = 0; i < 2000; ++i)
        seen.insert(rangeproc::random_noise_window(m, d_star, hw, rng, false).center_bin);
    CHECK(seen == std::set<std::size_t>{1, 2, 3, 5, 6, 7});

    Rng rng2(18);
    std::set<std::size_t> strict;
    for (int i = 0; i < 2000; ++i)
        strict.insert(rangeproc::random_noise_window(m, d_star, hw, rng2, true).center_bin);
    CHECK(strict == std::set<std::size_t>{1, 7});
}

TEST_CASE("noise window centers are uniform over the admissible bins") {
    const RangeMatrix m = flat_matrix(1, 64);
    const std::size_t d_star = 32, hw = 2;
    // Admissible centers: [2, 27] and [37, 61], 51 bins total.
    const std::size_t n_bins_admissible = 51;
    const int draws = 100000;
    Rng rng(19);
    std::map<std::size_t, int> counts;
    for (int i = 0; i < draws; ++i)
        counts[rangeproc::random_noise_window(m, d_star, hw, rng).center_bin]++;
    REQUIRE(counts.size() == n_bins_admissible);
    const double expect = static_cast<double>(draws) / n_bins_admissible;
    double chi2 = 0.0;
    for (const auto& [bin, n] : counts) {
        const double d = static_cast<double>(n) - expect;
        chi2 += d * d / expect;
    }
    // 99th percentile of chi-squared with 50 degrees of freedom.
    CHECK(chi2 < 76.154);
    CHECK(chi2 > 10.0); // a rigged uniform spread would be suspiciously flat
}

TEST_CASE("noise window draws are reproducible from the seed") {
    const RangeMatrix m = flat_matrix(1, 32);
    Rng a(23), b(23);
    for (int i = 0; i < 50; ++i) {
        CHECK(rangeproc::random_noise_window(m, 16, 2, a).center_bin ==
              rangeproc::random_noise_window(m, 16, 2, b).center_bin);
    }
}

TEST_CASE("random_noise_window reports when nothing is admissible") {
    const RangeMatrix m = flat_matrix(1, 5);
    Rng rng(29);
    CHECK_THROWS_AS(rangeproc::random_noise_window(m, 2, 2, rng), ConfigError);
    const RangeMatrix m9 = flat_matrix(1, 9);
    CHECK_THROWS_AS(rangeproc::random_noise_window(m9, 4, 2, rng), ConfigError);
    CHECK_NOTHROW(rangeproc::random_noise_window(m9, 4, 1, rng));
}
