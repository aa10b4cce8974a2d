#pragma once

#include <string>
#include <vector>

#include "flatlab/common.hpp"

namespace flatlab {

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    int bins = 1;

    double width() const { return (hi - lo) / bins; }
    // Bin index for x, clamped to [0, bins-1]; values at hi land in the last bin.
    int index(double x) const;
    double bin_lo(int b) const { return lo + (hi - lo) * b / bins; }
    double bin_hi(int b) const { return lo + (hi - lo) * (b + 1) / bins; }
    bool operator==(const Axis& other) const;
};

// Binned probability mass on a rectangular grid. Mass is normalized to sum 1;
// bin order is row-major in axis order.
struct HistogramND {
    std::vector<Axis> axes;
    std::vector<double> mass;

    static HistogramND zeros(std::vector<Axis> axes);
    std::size_t bin_count() const;
    void normalize();
    double sum() const;

    // 1D convenience accessors (throws ConfigError if not 1-axis).
    const Axis& axis1d() const;
};

// Histogram of one coordinate of a point cloud over [axis.lo, axis.hi].
HistogramND histogram_coord(const std::vector<Vec>& points, int coord, Axis axis);

// Histogram of scalar values.
HistogramND histogram_values(const std::vector<double>& values, Axis axis);

// Total variation distance (1/2) sum |h1 - h2|; requires identical binnings.
double tv_distance(const HistogramND& h1, const HistogramND& h2);

} // namespace flatlab
