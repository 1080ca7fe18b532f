#include "wlda/svg_render.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace wlda {

namespace {

// fixed-point helpers keep the output byte-stable
std::string fmt(double v, int prec = 1) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    // avoid "-0.0" noise
    std::string s(buf);
    if (s == "-0.0" || s == "-0.00") s.erase(0, 1);
    return s;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(ch);
        }
    }
    return out;
}

// diverging blue-white-red scale over [-range, range]
std::string diverging_color(double v, double range) {
    double t = range > 0.0 ? (v + range) / (2.0 * range) : 0.5;
    t = std::min(1.0, std::max(0.0, t));
    const int lo_r = 33, lo_g = 102, lo_b = 172;  // blue end
    const int hi_r = 178, hi_g = 24, hi_b = 43;   // red end
    int r, g, b;
    if (t < 0.5) {
        const double u = t * 2.0;
        r = static_cast<int>(std::lround(lo_r + (255 - lo_r) * u));
        g = static_cast<int>(std::lround(lo_g + (255 - lo_g) * u));
        b = static_cast<int>(std::lround(lo_b + (255 - lo_b) * u));
    } else {
        const double u = (t - 0.5) * 2.0;
        r = static_cast<int>(std::lround(255 + (hi_r - 255) * u));
        g = static_cast<int>(std::lround(255 + (hi_g - 255) * u));
        b = static_cast<int>(std::lround(255 + (hi_b - 255) * u));
    }
    char buf[10];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

void check_finite(double v, const std::string& path) {
    if (!std::isfinite(v))
        throw data_error("svg rendering: non-finite value for " + path);
}

} // namespace

void emit_heatmap(const Matrix& values, const std::vector<std::string>& labels,
                  const std::string& path, const HeatmapOptions& opts) {
    const Eigen::Index rows = values.rows();
    const Eigen::Index cols = values.cols();
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) check_finite(values(i, j), path);

    double range = opts.range;
    if (range <= 0.0)
        range = std::max(values.cwiseAbs().maxCoeff(), 1e-12); // symmetric data range

    const int cell = 56, left = 110, top = opts.title.empty() ? 30 : 54, legend_h = 46;
    const int width = left + cell * static_cast<int>(cols) + 20;
    const int height = top + cell * static_cast<int>(rows) + legend_h;

    std::ofstream out(path);
    if (!out) throw data_error("cannot write SVG file: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
        << "\" height=\"" << height << "\" font-family=\"monospace\">\n";
    if (!opts.title.empty())
        out << "<text x=\"" << left << "\" y=\"22\" font-size=\"15\">"
            << escape_xml(opts.title) << "</text>\n";

    for (Eigen::Index j = 0; j < cols; ++j) {
        const std::string lab =
            j < static_cast<Eigen::Index>(labels.size()) ? labels[static_cast<std::size_t>(j)] : "";
        out << "<text x=\"" << left + cell * j + cell / 2 << "\" y=\"" << top - 6
            << "\" font-size=\"11\" text-anchor=\"middle\">" << escape_xml(lab) << "</text>\n";
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
        const std::string lab =
            i < static_cast<Eigen::Index>(labels.size()) ? labels[static_cast<std::size_t>(i)] : "";
        out << "<text x=\"" << left - 8 << "\" y=\"" << top + cell * i + cell / 2 + 4
            << "\" font-size=\"11\" text-anchor=\"end\">" << escape_xml(lab) << "</text>\n";
        for (Eigen::Index j = 0; j < cols; ++j) {
            const double v = values(i, j);
            out << "<rect x=\"" << left + cell * j << "\" y=\"" << top + cell * i
                << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
                << diverging_color(v, range) << "\" stroke=\"#ffffff\"/>\n";
            const bool dark = std::abs(v) > 0.6 * range;
            out << "<text x=\"" << left + cell * j + cell / 2 << "\" y=\""
                << top + cell * i + cell / 2 + 4 << "\" font-size=\"12\" text-anchor=\"middle\""
                << (dark ? " fill=\"#ffffff\"" : "") << ">" << fmt(v, 2) << "</text>\n";
        }
    }

    // legend: min, zero, max swatches
    const int ly = top + cell * static_cast<int>(rows) + 16;
    const double marks[3] = {-range, 0.0, range};
    for (int t = 0; t < 3; ++t) {
        const int lx = left + t * 90;
        out << "<rect x=\"" << lx << "\" y=\"" << ly << "\" width=\"16\" height=\"16\" fill=\""
            << diverging_color(marks[t], range) << "\" stroke=\"#888888\"/>\n";
        out << "<text x=\"" << lx + 22 << "\" y=\"" << ly + 12 << "\" font-size=\"11\">"
            << fmt(marks[t], 2) << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw data_error("write failed: " + path);
}

void emit_bars(const Vector& values, const std::vector<std::string>& labels,
               const std::string& path, const std::string& title) {
    for (Eigen::Index i = 0; i < values.size(); ++i) check_finite(values(i), path);

    const Eigen::Index n = values.size();
    const double vmax = std::max(values.size() ? values.cwiseAbs().maxCoeff() : 0.0, 1e-12);
    const int bar_h = 24, gap = 8, left = 130, top = title.empty() ? 16 : 44;
    const int plot_w = 360;
    const int width = left + plot_w + 80;
    const int height = top + static_cast<int>(n) * (bar_h + gap) + 12;

    std::ofstream out(path);
    if (!out) throw data_error("cannot write SVG file: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
        << "\" height=\"" << height << "\" font-family=\"monospace\">\n";
    if (!title.empty())
        out << "<text x=\"" << left << "\" y=\"24\" font-size=\"15\">" << escape_xml(title)
            << "</text>\n";

    for (Eigen::Index i = 0; i < n; ++i) {
        const double v = values(i);
        const int y = top + static_cast<int>(i) * (bar_h + gap);
        const int w = static_cast<int>(std::lround(std::abs(v) / vmax * plot_w));
        const std::string lab =
            i < static_cast<Eigen::Index>(labels.size()) ? labels[static_cast<std::size_t>(i)] : "";
        out << "<text x=\"" << left - 8 << "\" y=\"" << y + bar_h / 2 + 4
            << "\" font-size=\"11\" text-anchor=\"end\">" << escape_xml(lab) << "</text>\n";
        out << "<rect x=\"" << left << "\" y=\"" << y << "\" width=\"" << w << "\" height=\""
            << bar_h << "\" fill=\"" << (v < 0.0 ? "#2166ac" : "#b2182b") << "\"/>\n";
        out << "<text x=\"" << left + w + 6 << "\" y=\"" << y + bar_h / 2 + 4
            << "\" font-size=\"11\">" << fmt(v, 2) << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw data_error("write failed: " + path);
}

} // namespace wlda
