#include "aplanc/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "aplanc/errors.hpp"

namespace aplanc {
namespace cli {

namespace {

const char* kPalette[] = {"#2266cc", "#cc3322", "#228844", "#8866ad"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Frame {
    double x0, y0, w, h;       // pixel box
    double lo_x, hi_x, lo_y, hi_y; // data range

    double px(double x) const { return x0 + (x - lo_x) / (hi_x - lo_x) * w; }
    double py(double y) const { return y0 + h - (y - lo_y) / (hi_y - lo_y) * h; }
};

void axis_box(std::string& svg, const Frame& f, const std::string& label) {
    svg += "<rect x=\"" + num(f.x0) + "\" y=\"" + num(f.y0) + "\" width=\"" + num(f.w) +
           "\" height=\"" + num(f.h) +
           "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + num(f.x0 + f.w / 2) + "\" y=\"" + num(f.y0 + f.h + 28) +
           "\" font-size=\"13\" text-anchor=\"middle\" fill=\"#222222\">" + esc(label) +
           "</text>\n";
}

} // namespace

std::string render_svg(const std::vector<double>& pred_bpm,
                       const std::vector<double>& ref_bpm,
                       const std::vector<WaveSeries>& waves, const std::string& title) {
    const double W = 920.0, H = 430.0;
    std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) + "\" height=\"" +
           num(H) + "\" viewBox=\"0 0 " + num(W) + " " + num(H) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    svg += "<text x=\"" + num(W / 2) +
           "\" y=\"24\" font-size=\"16\" text-anchor=\"middle\" fill=\"#111111\">" +
           esc(title) + "</text>\n";

    // Left panel: HR scatter against the identity line.
    Frame sc{60, 50, 340, 310, 40, 190, 40, 190};
    if (!pred_bpm.empty()) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t i = 0; i < pred_bpm.size(); ++i) {
            lo = std::min({lo, pred_bpm[i], ref_bpm[i]});
            hi = std::max({hi, pred_bpm[i], ref_bpm[i]});
        }
        const double pad = std::max(2.0, 0.08 * (hi - lo));
        sc.lo_x = sc.lo_y = lo - pad;
        sc.hi_x = sc.hi_y = hi + pad;
    }
    axis_box(svg, sc, "reference bpm vs predicted bpm");
    svg += "<line x1=\"" + num(sc.px(sc.lo_x)) + "\" y1=\"" + num(sc.py(sc.lo_y)) +
           "\" x2=\"" + num(sc.px(sc.hi_x)) + "\" y2=\"" + num(sc.py(sc.hi_y)) +
           "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
    for (std::size_t i = 0; i < pred_bpm.size() && i < ref_bpm.size(); ++i)
        svg += "<circle cx=\"" + num(sc.px(ref_bpm[i])) + "\" cy=\"" + num(sc.py(pred_bpm[i])) +
               "\" r=\"3.5\" fill=\"#2266cc\" fill-opacity=\"0.7\"/>\n";

    // Right panel: normalized waveform overlay.
    Frame wf{470, 50, 400, 310, 0, 1, -1.2, 1.2};
    if (!waves.empty()) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const WaveSeries& w : waves)
            for (double t : w.t_s) {
                lo = std::min(lo, t);
                hi = std::max(hi, t);
            }
        if (lo < hi) {
            wf.lo_x = lo;
            wf.hi_x = hi;
        }
    }
    axis_box(svg, wf, "time s, per-series normalized amplitude");
    for (std::size_t wi = 0; wi < waves.size(); ++wi) {
        const WaveSeries& w = waves[wi];
        if (w.values.size() < 2) continue;
        double peak = 0.0;
        for (double v : w.values) peak = std::max(peak, std::abs(v));
        const double scale = peak > 0.0 ? 1.0 / peak : 1.0;
        std::string pts;
        for (std::size_t i = 0; i < w.values.size(); ++i) {
            pts += num(wf.px(w.t_s[i])) + "," + num(wf.py(w.values[i] * scale));
            if (i + 1 < w.values.size()) pts += " ";
        }
        const char* color = kPalette[wi % (sizeof kPalette / sizeof kPalette[0])];
        svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.3\"/>\n";
        svg += "<text x=\"" + num(wf.x0 + 8) + "\" y=\"" + num(wf.y0 + 16 + 15 * double(wi)) +
               "\" font-size=\"12\" fill=\"" + color + "\">" + esc(w.name) + "</text>\n";
    }

    svg += "</svg>\n";
    return svg;
}

std::string wave_csv_rows(const std::vector<WaveSeries>& waves) {
    std::string out;
    char buf[96];
    for (const WaveSeries& w : waves)
        for (std::size_t i = 0; i < w.values.size(); ++i) {
            std::snprintf(buf, sizeof buf, "wave,%s,%.9g,%.9g\n", w.name.c_str(), w.t_s[i],
                          w.values[i]);
            out += buf;
        }
    return out;
}

void plot_report_file(const std::string& report_csv_path, const std::string& out_svg_path) {
    std::ifstream in(report_csv_path);
    if (!in) throw IoError("cannot open report: " + report_csv_path);

    std::vector<double> pred, ref;
    std::vector<WaveSeries> waves;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.rfind("window,", 0) == 0 || line.rfind("aggregate,", 0) == 0 ||
            line.rfind("config,", 0) == 0)
            continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) cols.push_back(item);
        try {
            if (cols.size() == 4 && cols[0] == "wave") {
                if (waves.empty() || waves.back().name != cols[1]) {
                    WaveSeries w;
                    w.name = cols[1];
                    waves.push_back(w);
                }
                waves.back().t_s.push_back(std::stod(cols[2]));
                waves.back().values.push_back(std::stod(cols[3]));
            } else if (cols.size() == 4) {
                pred.push_back(std::stod(cols[1]));
                ref.push_back(std::stod(cols[2]));
            } else {
                throw std::invalid_argument(line);
            }
        } catch (const std::exception&) {
            throw FormatError("report " + report_csv_path + " line " +
                              std::to_string(lineno) + ": unrecognized row");
        }
    }
    if (in.bad()) throw IoError("read failed: " + report_csv_path);

    const std::string svg =
        render_svg(pred, ref, waves, "heart rate and heartbeat waveforms");
    std::ofstream out(out_svg_path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + out_svg_path);
    out << svg;
    out.flush();
    if (!out) throw IoError("write failed: " + out_svg_path);
}

} // namespace cli
} // namespace aplanc
