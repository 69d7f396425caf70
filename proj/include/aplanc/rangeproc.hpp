#pragma once

#include <cstddef>
#include <optional>

#include "aplanc/rng.hpp"
#include "aplanc/sim.hpp"
#include "aplanc/types.hpp"

namespace aplanc {
namespace rangeproc {

/// Inclusive-exclusive bin interval [lo, hi).
struct BinRange {
    std::size_t lo = 0;
    std::size_t hi = 0;
};

/// Per-chirp DFT of the IF cube. Rows are the first cfg.n_range_bins DFT
/// bins of each chirp (zero-padded when n_range_bins exceeds the chirp
/// length).
RangeMatrix build_range_matrix(const sim::IfCube& cube, const sim::SceneConfig& cfg);

/// Range bin with the maximum power occupancy, sum_n |M[n, bin]|^2.
/// Ties break toward the smaller index.
std::size_t select_center_bin(const RangeMatrix& m,
                              std::optional<BinRange> search = std::nullopt);

/// Columns [d* - half_width, d* + half_width] of the range matrix.
/// With clamp set, a window that would run off either edge is shifted
/// inward instead of raising an error.
WindowedMatrix heartbeat_window(const RangeMatrix& m, std::size_t center_bin,
                                std::size_t half_width, bool clamp = false);

/// A window of the same width centered on a uniformly drawn admissible bin.
/// By default the draw excludes every bin whose window would overlap the
/// heartbeat window; with exclude_overlap false only the center d* itself
/// is excluded (windows may then overlap).
WindowedMatrix random_noise_window(const RangeMatrix& m, std::size_t center_bin,
                                   std::size_t half_width, Rng& rng,
                                   bool exclude_overlap = true);

} // namespace rangeproc
} // namespace aplanc
