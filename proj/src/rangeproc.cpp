#include "aplanc/rangeproc.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "aplanc/errors.hpp"
#include "aplanc/fft.hpp"

namespace aplanc {
namespace rangeproc {

RangeMatrix build_range_matrix(const sim::IfCube& cube, const sim::SceneConfig& cfg) {
    const std::size_t N = cube.n_chirps;
    const std::size_t S = cube.n_samples;
    const std::size_t D = cfg.n_range_bins;
    if (S < 2) throw ArgumentError("build_range_matrix: need at least 2 samples per chirp");
    if (D < 2) throw ArgumentError("build_range_matrix: need at least 2 range bins");
    if (cube.data.size() != N * S)
        throw ArgumentError("build_range_matrix: cube size does not match its dimensions");
    for (const cplx& z : cube.data) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw NumericError("build_range_matrix: non-finite IF sample");
    }

    RangeMatrix m;
    m.n_chirps = N;
    m.n_bins = D;
    m.chirp_rate_hz = cfg.chirp_rate_hz;
    m.range_res_m = cfg.range_res_m();
    m.data.resize(N * D);

    // D-point DFT per chirp: truncate when S > D, zero-pad when S < D.
    std::vector<cplx> chirp(std::min(S, D));
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t s = 0; s < chirp.size(); ++s) chirp[s] = cube.at(n, s);
        std::vector<cplx> profile = dft_forward(chirp, D);
        std::copy(profile.begin(), profile.end(), m.data.begin() + n * D);
    }
    return m;
}

std::size_t select_center_bin(const RangeMatrix& m, std::optional<BinRange> search) {
    BinRange r{0, m.n_bins};
    if (search) {
        r = *search;
        if (r.lo >= r.hi || r.hi > m.n_bins)
            throw ArgumentError("select_center_bin: empty or out-of-range search interval [" +
                                std::to_string(r.lo) + ", " + std::to_string(r.hi) + ")");
    }
    if (m.n_bins == 0 || m.n_chirps == 0)
        throw ArgumentError("select_center_bin: empty range matrix");

    std::size_t best = r.lo;
    double best_pow = -1.0;
    for (std::size_t bin = r.lo; bin < r.hi; ++bin) {
        double p = 0.0;
        for (std::size_t n = 0; n < m.n_chirps; ++n) p += std::norm(m.at(n, bin));
        if (p > best_pow) { // strict: ties keep the smaller index
            best_pow = p;
            best = bin;
        }
    }
    return best;
}

WindowedMatrix heartbeat_window(const RangeMatrix& m, std::size_t center_bin,
                                std::size_t half_width, bool clamp) {
    const std::size_t w = 2 * half_width + 1;
    if (w > m.n_bins)
        throw ArgumentError("heartbeat_window: window of " + std::to_string(w) +
                            " bins exceeds the " + std::to_string(m.n_bins) + "-bin matrix");
    std::size_t center = center_bin;
    if (center >= m.n_bins)
        throw ArgumentError("heartbeat_window: center bin " + std::to_string(center_bin) +
                            " out of range");
    const bool off_left = center < half_width;
    const bool off_right = center + half_width >= m.n_bins;
    if (off_left || off_right) {
        if (!clamp) {
            const std::size_t max_hw = std::min(center, m.n_bins - 1 - center);
            throw ArgumentError("heartbeat_window: bin " + std::to_string(center) +
                                " +/- " + std::to_string(half_width) +
                                " runs off the matrix; largest valid half-width here is " +
                                std::to_string(max_hw));
        }
        center = off_left ? half_width : m.n_bins - 1 - half_width;
    }

    WindowedMatrix out;
    out.n_chirps = m.n_chirps;
    out.n_cols = w;
    out.center_bin = center;
    out.half_width = half_width;
    out.chirp_rate_hz = m.chirp_rate_hz;
    out.data.resize(m.n_chirps * w);
    const std::size_t first = center - half_width;
    for (std::size_t n = 0; n < m.n_chirps; ++n)
        for (std::size_t c = 0; c < w; ++c) out.at(n, c) = m.at(n, first + c);
    return out;
}

WindowedMatrix random_noise_window(const RangeMatrix& m, std::size_t center_bin,
                                   std::size_t half_width, Rng& rng,
                                   bool exclude_overlap) {
    if (center_bin >= m.n_bins)
        throw ArgumentError("random_noise_window: center bin out of range");
    std::vector<std::size_t> admissible;
    for (std::size_t d = half_width; d + half_width < m.n_bins; ++d) {
        if (d == center_bin) continue;
        if (exclude_overlap) {
            // Windows [d-hw, d+hw] and [d*-hw, d*+hw] must be disjoint.
            const std::size_t lo = d - half_width;
            const std::size_t hi = d + half_width;
            const std::size_t hb_lo = center_bin >= half_width ? center_bin - half_width : 0;
            const std::size_t hb_hi = std::min(center_bin + half_width, m.n_bins - 1);
            if (hi >= hb_lo && lo <= hb_hi) continue;
        }
        admissible.push_back(d);
    }
    if (admissible.empty())
        throw ConfigError("random_noise_window: no admissible noise bin (matrix has " +
                          std::to_string(m.n_bins) + " bins, window half-width " +
                          std::to_string(half_width) + ")");
    const std::size_t pick = admissible[rng.uniform_int(0, admissible.size() - 1)];
    return heartbeat_window(m, pick, half_width, false);
}

} // namespace rangeproc
} // namespace aplanc
