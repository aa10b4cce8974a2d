#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "flatlab/analysis.hpp"
#include "flatlab/histogram.hpp"

namespace flatlab {

// Deterministic standalone SVG figures, fixed 800x600 viewbox, linear axes.
// No external plotting dependency so artifacts are diffable. `meta` key/value
// pairs are embedded as XML comments right after the root tag.

using SvgMeta = std::map<std::string, std::string>;

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Step-outline overlay of 1D histograms (density per bin).
void svg_histograms(const std::filesystem::path& path, const SvgMeta& meta,
                    const std::string& title, const std::string& x_label,
                    const std::vector<std::string>& labels, const std::vector<HistogramND>& hists);

// Polyline chart for curves such as training logs.
void svg_lines(const std::filesystem::path& path, const SvgMeta& meta, const std::string& title,
               const std::string& x_label, const std::string& y_label,
               const std::vector<SvgSeries>& series);

// Heat map of a simplex surface in its equilateral embedding; `use_accuracy`
// selects the accuracy column, otherwise loss.
void svg_simplex(const std::filesystem::path& path, const SvgMeta& meta, const std::string& title,
                 const SimplexSurface& surface, bool use_accuracy);

} // namespace flatlab
