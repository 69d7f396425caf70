#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aplanc/types.hpp"

namespace aplanc {
namespace io {

// Binary containers. All multi-byte fields are little-endian regardless of
// host order, so files hash identically across platforms.
//
//   RAPM  range matrix   header (f64 metadata) + (f32 re, f32 im) payload
//   RAGT  ground truth   displacement f32[n], hr f32[n], mean_hr f64
//   RAPW  checkpoint     per-layer shapes + raw f64 weights, bit-exact

void write_rapm(const std::string& path, const RangeMatrix& m);
RangeMatrix read_rapm(const std::string& path);

void write_ragt(const std::string& path, const GroundTruth& gt);
/// rate_hz restores the sample rate the container does not store.
GroundTruth read_ragt(const std::string& path, double rate_hz);

/// One convolution layer of a checkpoint: weights are out*in*kernel doubles
/// (out-major), bias is out doubles.
struct RapwLayer {
    std::uint64_t out_ch = 0;
    std::uint64_t in_ch = 0;
    std::uint64_t kernel = 0;
    std::vector<double> weights;
    std::vector<double> bias;
};

void write_rapw(const std::string& path, const std::vector<RapwLayer>& layers);
std::vector<RapwLayer> read_rapw(const std::string& path);

/// Tab-separated text, one recording per line:
///   path \t seed \t mean_hr_bpm \t snr_db \t split
/// Lines starting with '#' are comments. Floats are written with enough
/// digits to round-trip exactly.
void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);

/// Throws FormatError naming the line on malformed input. Duplicate paths
/// are legal but reported through `warnings` when given.
std::vector<ManifestEntry> read_manifest(const std::string& path,
                                         std::vector<std::string>* warnings = nullptr);

/// Manifest entries store paths relative to the manifest file so a corpus
/// directory can be moved wholesale; absolute entry paths pass through.
std::string resolve_entry_path(const std::string& manifest_path,
                               const std::string& entry_path);

} // namespace io
} // namespace aplanc
