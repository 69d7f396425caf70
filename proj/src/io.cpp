#include "aplanc/io.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "aplanc/errors.hpp"

namespace aplanc {
namespace io {

namespace {

void put_u32(std::string& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& b, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& b, double v) { put_u64(b, std::bit_cast<std::uint64_t>(v)); }
void put_f32(std::string& b, float v) { put_u32(b, std::bit_cast<std::uint32_t>(v)); }

/// Sequential reader over an in-memory file image. Every under-run throws
/// FormatError carrying the byte offset where the data ran out.
class ByteReader {
public:
    ByteReader(std::string data, std::string label)
        : data_(std::move(data)), label_(std::move(label)) {}

    std::size_t offset() const { return pos_; }
    bool exhausted() const { return pos_ == data_.size(); }

    void expect_magic(const char (&magic)[5]) {
        if (data_.size() < 4) {
            throw FormatError(label_ + ": missing magic (file has " +
                              std::to_string(data_.size()) + " bytes)");
        }
        if (data_.compare(0, 4, magic, 4) != 0) {
            throw FormatError(label_ + ": bad magic at offset 0, expected \"" +
                              std::string(magic, 4) + "\"");
        }
        pos_ = 4;
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }
    float f32() { return std::bit_cast<float>(u32()); }

    void expect_end() {
        if (pos_ != data_.size()) {
            throw FormatError(label_ + ": " + std::to_string(data_.size() - pos_) +
                              " trailing bytes at offset " + std::to_string(pos_));
        }
    }

private:
    void need(std::size_t n) {
        if (data_.size() - pos_ < n) {
            throw FormatError(label_ + ": truncated at offset " + std::to_string(pos_) +
                              " (need " + std::to_string(n) + " bytes, have " +
                              std::to_string(data_.size() - pos_) + ")");
        }
    }

    std::string data_;
    std::string label_;
    std::size_t pos_ = 0;
};

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + path);
    return std::move(ss).str();
}

void check_version(ByteReader& r, const std::string& label, std::uint32_t got) {
    if (got != 1) {
        throw FormatError(label + ": unsupported version " + std::to_string(got) +
                          " at offset " + std::to_string(r.offset() - 4));
    }
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_rapm(const std::string& path, const RangeMatrix& m) {
    if (m.data.size() != m.n_chirps * m.n_bins)
        throw ArgumentError("write_rapm: payload size does not match n_chirps*n_bins");
    std::string b;
    b.reserve(4 + 4 + 8 * 4 + 8 * m.data.size());
    b.append("RAPM", 4);
    put_u32(b, 1);
    put_u64(b, m.n_chirps);
    put_u64(b, m.n_bins);
    put_f64(b, m.chirp_rate_hz);
    put_f64(b, m.range_res_m);
    for (const cplx& z : m.data) {
        put_f32(b, static_cast<float>(z.real()));
        put_f32(b, static_cast<float>(z.imag()));
    }
    write_file(path, b);
}

RangeMatrix read_rapm(const std::string& path) {
    ByteReader r(read_file(path), "rapm " + path);
    r.expect_magic("RAPM");
    check_version(r, "rapm " + path, r.u32());
    RangeMatrix m;
    m.n_chirps = r.u64();
    m.n_bins = r.u64();
    m.chirp_rate_hz = r.f64();
    m.range_res_m = r.f64();
    m.data.reserve(m.n_chirps * m.n_bins);
    for (std::size_t i = 0; i < m.n_chirps * m.n_bins; ++i) {
        double re = r.f32();
        double im = r.f32();
        m.data.emplace_back(re, im);
    }
    r.expect_end();
    return m;
}

void write_ragt(const std::string& path, const GroundTruth& gt) {
    if (gt.displacement_m.size() != gt.hr_bpm_trace.size())
        throw ArgumentError("write_ragt: displacement and hr traces differ in length");
    std::string b;
    const std::size_t n = gt.displacement_m.size();
    b.reserve(4 + 4 + 8 + 4 * 2 * n + 8);
    b.append("RAGT", 4);
    put_u32(b, 1);
    put_u64(b, n);
    for (double d : gt.displacement_m.samples) put_f32(b, static_cast<float>(d));
    for (double h : gt.hr_bpm_trace.samples) put_f32(b, static_cast<float>(h));
    put_f64(b, gt.mean_hr_bpm);
    write_file(path, b);
}

GroundTruth read_ragt(const std::string& path, double rate_hz) {
    ByteReader r(read_file(path), "ragt " + path);
    r.expect_magic("RAGT");
    check_version(r, "ragt " + path, r.u32());
    const std::uint64_t n = r.u64();
    GroundTruth gt;
    gt.displacement_m.rate_hz = rate_hz;
    gt.hr_bpm_trace.rate_hz = rate_hz;
    gt.displacement_m.samples.reserve(n);
    gt.hr_bpm_trace.samples.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) gt.displacement_m.samples.push_back(r.f32());
    for (std::uint64_t i = 0; i < n; ++i) gt.hr_bpm_trace.samples.push_back(r.f32());
    gt.mean_hr_bpm = r.f64();
    r.expect_end();
    return gt;
}

void write_rapw(const std::string& path, const std::vector<RapwLayer>& layers) {
    std::string b;
    b.append("RAPW", 4);
    put_u32(b, 1);
    put_u64(b, layers.size());
    for (const RapwLayer& l : layers) {
        if (l.weights.size() != l.out_ch * l.in_ch * l.kernel || l.bias.size() != l.out_ch)
            throw ArgumentError("write_rapw: layer arrays do not match the declared shape");
        put_u64(b, l.out_ch);
        put_u64(b, l.in_ch);
        put_u64(b, l.kernel);
        for (double w : l.weights) put_f64(b, w);
        for (double w : l.bias) put_f64(b, w);
    }
    write_file(path, b);
}

std::vector<RapwLayer> read_rapw(const std::string& path) {
    ByteReader r(read_file(path), "rapw " + path);
    r.expect_magic("RAPW");
    check_version(r, "rapw " + path, r.u32());
    const std::uint64_t n_layers = r.u64();
    std::vector<RapwLayer> layers;
    layers.reserve(n_layers);
    for (std::uint64_t i = 0; i < n_layers; ++i) {
        RapwLayer l;
        l.out_ch = r.u64();
        l.in_ch = r.u64();
        l.kernel = r.u64();
        l.weights.reserve(l.out_ch * l.in_ch * l.kernel);
        for (std::uint64_t j = 0; j < l.out_ch * l.in_ch * l.kernel; ++j)
            l.weights.push_back(r.f64());
        l.bias.reserve(l.out_ch);
        for (std::uint64_t j = 0; j < l.out_ch; ++j) l.bias.push_back(r.f64());
        layers.push_back(std::move(l));
    }
    r.expect_end();
    return layers;
}

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
    std::string b = "# path\tseed\tmean_hr_bpm\tsnr_db\tsplit\n";
    for (const ManifestEntry& e : entries) {
        if (e.path.find('\t') != std::string::npos || e.path.find('\n') != std::string::npos)
            throw ArgumentError("write_manifest: path contains tab or newline: " + e.path);
        if (e.split != "train" && e.split != "val" && e.split != "test")
            throw ArgumentError("write_manifest: bad split \"" + e.split + "\" for " + e.path);
        b += e.path;
        b += '\t';
        b += std::to_string(e.seed);
        b += '\t';
        b += fmt_double(e.mean_hr_bpm);
        b += '\t';
        b += fmt_double(e.snr_db);
        b += '\t';
        b += e.split;
        b += '\n';
    }
    write_file(path, b);
}

std::vector<ManifestEntry> read_manifest(const std::string& path,
                                         std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::vector<ManifestEntry> entries;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cols;
        std::size_t start = 0;
        while (true) {
            std::size_t tab = line.find('\t', start);
            cols.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        const std::string where = "manifest " + path + " line " + std::to_string(lineno);
        if (cols.size() != 5)
            throw FormatError(where + ": expected 5 tab-separated columns, got " +
                              std::to_string(cols.size()));
        ManifestEntry e;
        e.path = cols[0];
        try {
            std::size_t used = 0;
            e.seed = std::stoull(cols[1], &used);
            if (used != cols[1].size()) throw std::invalid_argument(cols[1]);
            e.mean_hr_bpm = std::stod(cols[2], &used);
            if (used != cols[2].size()) throw std::invalid_argument(cols[2]);
            e.snr_db = std::stod(cols[3], &used);
            if (used != cols[3].size()) throw std::invalid_argument(cols[3]);
        } catch (const std::exception&) {
            throw FormatError(where + ": malformed numeric field");
        }
        e.split = cols[4];
        if (e.split != "train" && e.split != "val" && e.split != "test")
            throw FormatError(where + ": unknown split token \"" + e.split + "\"");
        if (!seen.insert(e.path).second && warnings)
            warnings->push_back("duplicate path in manifest: " + e.path);
        entries.push_back(std::move(e));
    }
    if (in.bad()) throw IoError("read failed: " + path);
    return entries;
}

std::string resolve_entry_path(const std::string& manifest_path,
                               const std::string& entry_path) {
    std::filesystem::path p(entry_path);
    if (p.is_absolute()) return entry_path;
    return (std::filesystem::path(manifest_path).parent_path() / p).string();
}

} // namespace io
} // namespace aplanc
