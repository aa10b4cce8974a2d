#include "flatlab/histogram.hpp"

#include <algorithm>
#include <cmath>

namespace flatlab {

int Axis::index(double x) const {
    const int b = static_cast<int>(std::floor((x - lo) / (hi - lo) * bins));
    return std::clamp(b, 0, bins - 1);
}

bool Axis::operator==(const Axis& other) const {
    return lo == other.lo && hi == other.hi && bins == other.bins;
}

HistogramND HistogramND::zeros(std::vector<Axis> axes) {
    HistogramND h;
    h.axes = std::move(axes);
    h.mass.assign(h.bin_count(), 0.0);
    return h;
}

std::size_t HistogramND::bin_count() const {
    std::size_t n = 1;
    for (const auto& a : axes) {
        if (a.bins < 1) throw ConfigError("histogram: axis needs at least one bin");
        n *= static_cast<std::size_t>(a.bins);
    }
    return n;
}

void HistogramND::normalize() {
    const double total = sum();
    if (!(total > 0.0)) throw ConfigError("histogram: cannot normalize zero mass");
    for (double& m : mass) m /= total;
}

double HistogramND::sum() const {
    double s = 0.0;
    for (double m : mass) s += m;
    return s;
}

const Axis& HistogramND::axis1d() const {
    if (axes.size() != 1) throw ConfigError("histogram: expected exactly one axis");
    return axes[0];
}

HistogramND histogram_coord(const std::vector<Vec>& points, int coord, Axis axis) {
    if (points.empty()) throw ConfigError("histogram_coord: empty sample set");
    HistogramND h = HistogramND::zeros({axis});
    for (const auto& p : points) {
        if (coord < 0 || coord >= static_cast<int>(p.size()))
            throw ConfigError("histogram_coord: coordinate index out of range");
        h.mass[static_cast<std::size_t>(axis.index(p[static_cast<std::size_t>(coord)]))] += 1.0;
    }
    const double inv = 1.0 / static_cast<double>(points.size());
    for (double& m : h.mass) m *= inv;
    return h;
}

HistogramND histogram_values(const std::vector<double>& values, Axis axis) {
    if (values.empty()) throw ConfigError("histogram_values: empty value list");
    HistogramND h = HistogramND::zeros({axis});
    for (double v : values) h.mass[static_cast<std::size_t>(axis.index(v))] += 1.0;
    const double inv = 1.0 / static_cast<double>(values.size());
    for (double& m : h.mass) m *= inv;
    return h;
}

double tv_distance(const HistogramND& h1, const HistogramND& h2) {
    if (h1.axes != h2.axes) throw ConfigError("tv_distance: histogram binnings differ");
    double s = 0.0;
    for (std::size_t i = 0; i < h1.mass.size(); ++i) s += std::fabs(h1.mass[i] - h2.mass[i]);
    return 0.5 * s;
}

} // namespace flatlab
