#include "flatlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace flatlab {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 25.0;
constexpr double kMarginTop = 45.0;
constexpr double kMarginBottom = 55.0;

const char* kPalette[] = {"#1f6fb4", "#d1495b", "#2e8b57", "#b8860b", "#6a51a3", "#444444"};
constexpr int kPaletteSize = 6;

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

struct Frame {
    double x_lo, x_hi, y_lo, y_hi;

    double px(double x) const {
        return kMarginLeft + (x - x_lo) / (x_hi - x_lo) * (kWidth - kMarginLeft - kMarginRight);
    }
    double py(double y) const {
        return kHeight - kMarginBottom -
               (y - y_lo) / (y_hi - y_lo) * (kHeight - kMarginTop - kMarginBottom);
    }
};

void pad_range(double& lo, double& hi) {
    if (!(hi > lo)) {
        const double c = lo;
        lo = c - 1.0;
        hi = c + 1.0;
        return;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
}

std::ofstream open_svg(const std::filesystem::path& path, const SvgMeta& meta) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" "
           "font-family=\"sans-serif\">\n";
    for (const auto& [key, value] : meta) out << "<!-- " << key << " = " << value << " -->\n";
    out << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
    return out;
}

void draw_axes(std::ofstream& out, const Frame& f, const std::string& title,
               const std::string& x_label, const std::string& y_label) {
    out << "<text x=\"400\" y=\"26\" text-anchor=\"middle\" font-size=\"17\">" << title
        << "</text>\n";
    out << "<rect x=\"" << fmt(kMarginLeft) << "\" y=\"" << fmt(kMarginTop) << "\" width=\""
        << fmt(kWidth - kMarginLeft - kMarginRight) << "\" height=\""
        << fmt(kHeight - kMarginTop - kMarginBottom)
        << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = f.x_lo + (f.x_hi - f.x_lo) * i / 5.0;
        const double yv = f.y_lo + (f.y_hi - f.y_lo) * i / 5.0;
        out << "<text x=\"" << fmt(f.px(xv)) << "\" y=\"" << fmt(kHeight - kMarginBottom + 18)
            << "\" text-anchor=\"middle\" font-size=\"12\">" << fmt_tick(xv) << "</text>\n";
        out << "<text x=\"" << fmt(kMarginLeft - 8) << "\" y=\"" << fmt(f.py(yv) + 4)
            << "\" text-anchor=\"end\" font-size=\"12\">" << fmt_tick(yv) << "</text>\n";
    }
    out << "<text x=\"" << fmt(kMarginLeft + (kWidth - kMarginLeft - kMarginRight) / 2)
        << "\" y=\"" << fmt(kHeight - 14) << "\" text-anchor=\"middle\" font-size=\"14\">"
        << x_label << "</text>\n";
    out << "<text x=\"18\" y=\"" << fmt(kMarginTop + (kHeight - kMarginTop - kMarginBottom) / 2)
        << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 "
        << fmt(kMarginTop + (kHeight - kMarginTop - kMarginBottom) / 2) << ")\">" << y_label
        << "</text>\n";
}

void draw_legend(std::ofstream& out, const std::vector<std::string>& labels) {
    for (std::size_t s = 0; s < labels.size(); ++s) {
        const double y = kMarginTop + 16.0 + 18.0 * static_cast<double>(s);
        out << "<rect x=\"" << fmt(kWidth - kMarginRight - 170) << "\" y=\"" << fmt(y - 9)
            << "\" width=\"14\" height=\"4\" fill=\"" << kPalette[s % kPaletteSize] << "\"/>\n";
        out << "<text x=\"" << fmt(kWidth - kMarginRight - 150) << "\" y=\"" << fmt(y)
            << "\" font-size=\"12\">" << labels[s] << "</text>\n";
    }
}

// 5-stop blue-to-red ramp
std::string heat_color(double v) {
    v = std::clamp(v, 0.0, 1.0);
    static const double stops[5][3] = {{0.17, 0.25, 0.60},
                                       {0.20, 0.60, 0.80},
                                       {0.55, 0.80, 0.40},
                                       {0.95, 0.75, 0.20},
                                       {0.80, 0.15, 0.15}};
    const double pos = v * 4.0;
    const int i = std::min(3, static_cast<int>(pos));
    const double t = pos - i;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                  static_cast<int>(std::lround(255 * (stops[i][0] + t * (stops[i + 1][0] - stops[i][0])))),
                  static_cast<int>(std::lround(255 * (stops[i][1] + t * (stops[i + 1][1] - stops[i][1])))),
                  static_cast<int>(std::lround(255 * (stops[i][2] + t * (stops[i + 1][2] - stops[i][2])))));
    return buf;
}

} // namespace

void svg_histograms(const std::filesystem::path& path, const SvgMeta& meta,
                    const std::string& title, const std::string& x_label,
                    const std::vector<std::string>& labels, const std::vector<HistogramND>& hists) {
    if (hists.empty() || labels.size() != hists.size())
        throw ConfigError("svg_histograms: need one label per histogram");
    Frame f{};
    f.x_lo = hists[0].axis1d().lo;
    f.x_hi = hists[0].axis1d().hi;
    f.y_lo = 0.0;
    f.y_hi = 0.0;
    for (const auto& h : hists) {
        const Axis& a = h.axis1d();
        f.x_lo = std::min(f.x_lo, a.lo);
        f.x_hi = std::max(f.x_hi, a.hi);
        for (double m : h.mass) f.y_hi = std::max(f.y_hi, m / a.width());
    }
    f.y_hi *= 1.08;
    if (f.y_hi == 0.0) f.y_hi = 1.0;

    auto out = open_svg(path, meta);
    draw_axes(out, f, title, x_label, "density");
    for (std::size_t s = 0; s < hists.size(); ++s) {
        const Axis& a = hists[s].axis1d();
        out << "<polyline fill=\"none\" stroke=\"" << kPalette[s % kPaletteSize]
            << "\" stroke-width=\"1.5\" points=\"";
        out << fmt(f.px(a.lo)) << "," << fmt(f.py(0.0)) << " ";
        for (int b = 0; b < a.bins; ++b) {
            const double density = hists[s].mass[static_cast<std::size_t>(b)] / a.width();
            out << fmt(f.px(a.bin_lo(b))) << "," << fmt(f.py(density)) << " ";
            out << fmt(f.px(a.bin_hi(b))) << "," << fmt(f.py(density)) << " ";
        }
        out << fmt(f.px(a.hi)) << "," << fmt(f.py(0.0)) << "\"/>\n";
    }
    draw_legend(out, labels);
    out << "</svg>\n";
}

void svg_lines(const std::filesystem::path& path, const SvgMeta& meta, const std::string& title,
               const std::string& x_label, const std::string& y_label,
               const std::vector<SvgSeries>& series) {
    if (series.empty()) throw ConfigError("svg_lines: no series");
    Frame f{};
    bool first = true;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size() || s.x.empty())
            throw ConfigError("svg_lines: series '" + s.label + "' is empty or ragged");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (first) {
                f.x_lo = f.x_hi = s.x[i];
                f.y_lo = f.y_hi = s.y[i];
                first = false;
            }
            f.x_lo = std::min(f.x_lo, s.x[i]);
            f.x_hi = std::max(f.x_hi, s.x[i]);
            f.y_lo = std::min(f.y_lo, s.y[i]);
            f.y_hi = std::max(f.y_hi, s.y[i]);
        }
    }
    pad_range(f.x_lo, f.x_hi);
    pad_range(f.y_lo, f.y_hi);

    auto out = open_svg(path, meta);
    draw_axes(out, f, title, x_label, y_label);
    std::vector<std::string> labels;
    for (std::size_t s = 0; s < series.size(); ++s) {
        labels.push_back(series[s].label);
        out << "<polyline fill=\"none\" stroke=\"" << kPalette[s % kPaletteSize]
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < series[s].x.size(); ++i)
            out << fmt(f.px(series[s].x[i])) << "," << fmt(f.py(series[s].y[i])) << " ";
        out << "\"/>\n";
    }
    draw_legend(out, labels);
    out << "</svg>\n";
}

void svg_simplex(const std::filesystem::path& path, const SvgMeta& meta, const std::string& title,
                 const SimplexSurface& surface, bool use_accuracy) {
    if (surface.rows.empty()) throw ConfigError("svg_simplex: empty surface");
    double v_lo = 0.0, v_hi = 0.0;
    bool first = true;
    for (const auto& r : surface.rows) {
        const double v = use_accuracy ? r.accuracy : r.loss;
        if (first) {
            v_lo = v_hi = v;
            first = false;
        }
        v_lo = std::min(v_lo, v);
        v_hi = std::max(v_hi, v);
    }
    if (!(v_hi > v_lo)) v_hi = v_lo + 1.0;
    if (use_accuracy) {
        v_lo = 0.0; // accuracy maps onto the fixed [0,1] ramp
        v_hi = 1.0;
    }

    // embedding spans x in [0,1], y in [0, sqrt(3)/2]
    Frame f{-0.06, 1.06, -0.05, 0.92};
    auto out = open_svg(path, meta);
    out << "<text x=\"400\" y=\"26\" text-anchor=\"middle\" font-size=\"17\">" << title
        << "</text>\n";
    const double radius = 0.5 * (f.px(1.0) - f.px(0.0)) / surface.resolution;
    for (const auto& r : surface.rows) {
        const double raw = use_accuracy ? r.accuracy : r.loss;
        out << "<circle cx=\"" << fmt(f.px(r.x)) << "\" cy=\"" << fmt(f.py(r.y)) << "\" r=\""
            << fmt(radius) << "\" fill=\"" << heat_color((raw - v_lo) / (v_hi - v_lo)) << "\"/>\n";
    }
    // vertex labels: w1 at (0,0), w2 at (1,0), w3 at the apex
    out << "<text x=\"" << fmt(f.px(0.0) - 12) << "\" y=\"" << fmt(f.py(0.0) + 16)
        << "\" font-size=\"13\">w1</text>\n";
    out << "<text x=\"" << fmt(f.px(1.0) + 2) << "\" y=\"" << fmt(f.py(0.0) + 16)
        << "\" font-size=\"13\">w2</text>\n";
    out << "<text x=\"" << fmt(f.px(0.5)) << "\" y=\"" << fmt(f.py(0.5 * std::sqrt(3.0)) - 8)
        << "\" text-anchor=\"middle\" font-size=\"13\">w3</text>\n";
    // color bar
    for (int i = 0; i < 40; ++i) {
        out << "<rect x=\"" << fmt(740.0) << "\" y=\"" << fmt(520.0 - 11.0 * i)
            << "\" width=\"18\" height=\"11\" fill=\"" << heat_color(i / 39.0) << "\"/>\n";
    }
    out << "<text x=\"736\" y=\"530\" text-anchor=\"end\" font-size=\"11\">" << fmt_tick(v_lo)
        << "</text>\n";
    out << "<text x=\"736\" y=\"92\" text-anchor=\"end\" font-size=\"11\">" << fmt_tick(v_hi)
        << "</text>\n";
    out << "<text x=\"749\" y=\"70\" text-anchor=\"middle\" font-size=\"12\">"
        << (use_accuracy ? "accuracy" : "loss") << "</text>\n";
    out << "</svg>\n";
}

} // namespace flatlab
