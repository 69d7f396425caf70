#pragma once

#include <string>
#include <vector>

namespace aplanc {
namespace cli {

/// One time-domain trace for the overlay panel.
struct WaveSeries {
    std::string name;
    std::vector<double> t_s;
    std::vector<double> values;
};

/// Two-panel SVG: predicted-vs-reference heart-rate scatter with the
/// identity line, and normalized waveform overlays. Waves may be empty.
std::string render_svg(const std::vector<double>& pred_bpm,
                       const std::vector<double>& ref_bpm,
                       const std::vector<WaveSeries>& waves, const std::string& title);

/// Rows appended to a report CSV by the eval subcommand so the plot
/// subcommand can draw waveforms from the report alone:
///   wave,<series name>,<t seconds>,<value>
std::string wave_csv_rows(const std::vector<WaveSeries>& waves);

/// Read a report CSV (per-window rows plus optional wave rows) and write
/// the SVG. Throws FormatError on rows that parse as neither.
void plot_report_file(const std::string& report_csv_path, const std::string& out_svg_path);

} // namespace cli
} // namespace aplanc
