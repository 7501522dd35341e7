#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stegsan/metrics.hpp"

namespace stegsan {

// Shortest decimal string that parses back to exactly the same double.
// Keeps CSV output readable while making re-parse round-trips exact.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return buf;
}

inline double parse_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::strtod(s.c_str(), nullptr);
}

// One aggregate experiment row: a (hide method, sanitizer, t) cell.
struct ResultRow {
    std::string hide;
    std::string sanitizer;
    int t = 0;
    MetricReport metrics;
    std::string verdict_ip = "-";  // "success", "fail" or "-" for the None row
    std::string verdict_se = "-";
    double time_ms = 0.0;
};

inline const char* kResultCsvHeader =
    "hide,sanitizer,t,mse_ip,psnr_ip,ssim_ip,ncc_ip,mse_se,psnr_se,ssim_se,ncc_se,"
    "verdict_ip,verdict_se,time_ms";

inline std::string result_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    out << kResultCsvHeader << "\n";
    for (const ResultRow& r : rows) {
        out << r.hide << ',' << r.sanitizer << ',' << r.t << ','
            << format_double(r.metrics.mse_ip) << ',' << format_double(r.metrics.psnr_ip) << ','
            << format_double(r.metrics.ssim_ip) << ',' << format_double(r.metrics.ncc_ip) << ','
            << format_double(r.metrics.mse_se) << ',' << format_double(r.metrics.psnr_se) << ','
            << format_double(r.metrics.ssim_se) << ',' << format_double(r.metrics.ncc_se) << ','
            << r.verdict_ip << ',' << r.verdict_se << ',' << format_double(r.time_ms) << "\n";
    }
    return out.str();
}

inline std::vector<ResultRow> parse_result_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv: empty");
    if (line != kResultCsvHeader) throw std::runtime_error("csv: unexpected header");
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string item;
        std::istringstream ss(line);
        while (std::getline(ss, item, ',')) f.push_back(item);
        if (f.size() != 14) throw std::runtime_error("csv: bad field count");
        ResultRow r;
        r.hide = f[0];
        r.sanitizer = f[1];
        r.t = std::atoi(f[2].c_str());
        r.metrics.mse_ip = parse_double(f[3]);
        r.metrics.psnr_ip = parse_double(f[4]);
        r.metrics.ssim_ip = parse_double(f[5]);
        r.metrics.ncc_ip = parse_double(f[6]);
        r.metrics.mse_se = parse_double(f[7]);
        r.metrics.psnr_se = parse_double(f[8]);
        r.metrics.ssim_se = parse_double(f[9]);
        r.metrics.ncc_se = parse_double(f[10]);
        r.verdict_ip = f[11];
        r.verdict_se = f[12];
        r.time_ms = parse_double(f[13]);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Minimal self-contained SVG line plot.
// ---------------------------------------------------------------------------
struct PlotSeries {
    std::string label;
    std::string color;
    std::vector<double> x, y;
};

inline std::string svg_line_plot(const std::vector<PlotSeries>& series, const std::string& title,
                                 const std::string& xlabel, const std::string& ylabel) {
    const double width = 640, height = 420;
    const double ml = 60, mr = 20, mt = 40, mb = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (xmin > xmax) {
        xmin = 0;
        xmax = 1;
    }
    if (ymin > ymax) {
        ymin = 0;
        ymax = 1;
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto sy = [&](double y) { return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb); };
    auto num = [](double v) {
        char b[32];
        std::snprintf(b, sizeof(b), "%.4g", v);
        return std::string(b);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
           "font-family=\"sans-serif\">" << title << "</text>\n";
    // axes
    svg << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
        << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << height - mb << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        double fx = xmin + (xmax - xmin) * i / 5.0;
        double fy = ymin + (ymax - ymin) * i / 5.0;
        svg << "<text x=\"" << sx(fx) << "\" y=\"" << height - mb + 18
            << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" << num(fx)
            << "</text>\n";
        svg << "<text x=\"" << ml - 8 << "\" y=\"" << sy(fy) + 4
            << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << num(fy)
            << "</text>\n";
        svg << "<line x1=\"" << ml << "\" y1=\"" << sy(fy) << "\" x2=\"" << width - mr
            << "\" y2=\"" << sy(fy) << "\" stroke=\"#dddddd\"/>\n";
    }
    svg << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" << xlabel
        << "</text>\n";
    svg << "<text x=\"16\" y=\"" << (mt + height - mb) / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
           "transform=\"rotate(-90 16 " << (mt + height - mb) / 2 << ")\">" << ylabel
        << "</text>\n";

    double ly = mt + 8;
    for (const auto& s : series) {
        svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.8\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            svg << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
        svg << "\"/>\n";
        svg << "<line x1=\"" << width - mr - 150 << "\" y1=\"" << ly << "\" x2=\""
            << width - mr - 130 << "\" y2=\"" << ly << "\" stroke=\"" << s.color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << width - mr - 124 << "\" y=\"" << ly + 4
            << "\" font-size=\"11\" font-family=\"sans-serif\">" << s.label << "</text>\n";
        ly += 16;
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace stegsan
