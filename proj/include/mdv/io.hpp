#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdv/density_estimate.hpp"
#include "mdv/errors.hpp"
#include "mdv/sample_set.hpp"

namespace mdv {

using json = nlohmann::json;

// Shortest round-trip decimal form; the same bits always print the same text,
// which is what the byte-identical-output contract rests on.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    return out;
}

// SampleSet CSV: a '#'-prefixed JSON metadata line, a header, one value per row.
inline void write_sample_csv(const SampleSet& samples, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    json meta = {{"model", samples.model_tag}, {"seed", samples.seed}, {"n", samples.size()}};
    out << "# " << meta.dump() << "\n";
    out << "value\n";
    for (double v : samples.values) out << format_double(v) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

inline SampleSet read_sample_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    SampleSet s;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            try {
                json meta = json::parse(line.substr(1));
                s.model_tag = meta.value("model", std::string{});
                s.seed = meta.value("seed", std::uint64_t{0});
            } catch (const json::exception&) {
                // tolerated: metadata comment in a foreign format
            }
            continue;
        }
        if (line == "value" || line == "x") continue;
        s.values.push_back(std::stod(line));
    }
    if (s.values.empty()) throw IoError("no sample values in " + path.string());
    return s;
}

// DensityEstimate: CSV of (x, value) plus a JSON sidecar with the settings.
inline void write_estimate_csv(const DensityEstimate& est, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    out << "x,value\n";
    for (std::size_t i = 0; i < est.x_grid.size(); ++i)
        out << format_double(est.x_grid[i]) << "," << format_double(est.values[i]) << "\n";
    if (!out) throw IoError("write failed: " + path.string());

    json side = {{"route", est.route}, {"params", est.params}};
    auto meta = open_for_write(std::filesystem::path(path).replace_extension(".json"));
    meta << side.dump(2) << "\n";
}

// --- minimal SVG plotting -------------------------------------------------

namespace svg {

struct Frame {
    double width = 720, height = 480;
    double margin = 52;
    double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;

    double px(double x) const {
        return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin);
    }
    double py(double y) const {
        return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin);
    }
};

inline void header(std::ofstream& out, const Frame& f) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\""
        << f.height << "\" viewBox=\"0 0 " << f.width << " " << f.height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

inline void axes(std::ofstream& out, const Frame& f, const std::string& x_label,
                 const std::string& y_label) {
    out << "<g stroke=\"black\" stroke-width=\"1\">\n"
        << "<line x1=\"" << f.px(f.x_lo) << "\" y1=\"" << f.py(f.y_lo) << "\" x2=\""
        << f.px(f.x_hi) << "\" y2=\"" << f.py(f.y_lo) << "\"/>\n"
        << "<line x1=\"" << f.px(f.x_lo) << "\" y1=\"" << f.py(f.y_lo) << "\" x2=\""
        << f.px(f.x_lo) << "\" y2=\"" << f.py(f.y_hi) << "\"/>\n</g>\n";
    for (int i = 0; i <= 5; ++i) {
        const double x = f.x_lo + (f.x_hi - f.x_lo) * i / 5.0;
        const double y = f.y_lo + (f.y_hi - f.y_lo) * i / 5.0;
        out << "<text x=\"" << f.px(x) << "\" y=\"" << f.py(f.y_lo) + 16
            << "\" font-size=\"10\" text-anchor=\"middle\">" << format_double(std::round(x * 100) / 100)
            << "</text>\n";
        out << "<text x=\"" << f.px(f.x_lo) - 6 << "\" y=\"" << f.py(y) + 3
            << "\" font-size=\"10\" text-anchor=\"end\">" << format_double(std::round(y * 1000) / 1000)
            << "</text>\n";
    }
    out << "<text x=\"" << (f.width / 2) << "\" y=\"" << f.height - 8
        << "\" font-size=\"12\" text-anchor=\"middle\">" << x_label << "</text>\n";
    out << "<text x=\"14\" y=\"" << (f.height / 2)
        << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << (f.height / 2) << ")\">" << y_label << "</text>\n";
}

inline void polyline(std::ofstream& out, const Frame& f, std::span<const double> x,
                     std::span<const double> y, const std::string& color, double width,
                     double opacity) {
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width
        << "\" stroke-opacity=\"" << opacity << "\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i)
        out << f.px(x[i]) << "," << f.py(std::min(std::max(y[i], f.y_lo), f.y_hi)) << " ";
    out << "\"/>\n";
}

}  // namespace svg

}  // namespace mdv
