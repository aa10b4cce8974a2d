#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "flatlab/boltzmann.hpp"
#include "flatlab/dynamics.hpp"
#include "flatlab/histogram.hpp"

namespace flatlab {

// --------------------------------------------------------- flatness radius

struct FlatnessReport {
    std::vector<double> radii; // successful directions only
    int failed = 0;            // NaN loss along the ray
    int capped = 0;            // no crossing up to r_max
    double epsilon = 0.0;
    double r_max = 0.0;
    std::string subset_label = "all";

    double mean() const;
    double stddev() const; // sample standard deviation
};

// Average distance from w, over random unit directions, at which the loss
// first moves by more than epsilon: per direction the first crossing of
// |loss(w) - loss(w + r dw)| > epsilon is bracketed by geometric expansion
// from r = 1e-3 and located by bisection to 1e-3 relative tolerance, capped
// at r_max. Directions are isotropic Gaussian restricted to subset_mask (all
// coordinates when null), normalized to |dw| = 1.
FlatnessReport flatness_radius(const std::function<double(const Vec&)>& loss_eval, const Vec& w,
                               double epsilon, int directions, std::uint64_t seed,
                               const std::vector<int>* subset_mask = nullptr, double r_max = 1e3,
                               int threads = 1);

// ---------------------------------------------------- simplex interpolation

struct SimplexSurface {
    int resolution = 0;
    struct Row {
        double l1, l2, l3; // barycentric weights, grid-exact rationals i/m
        double x, y;       // equilateral embedding x = l2 + l3/2, y = sqrt(3)/2 l3
        double loss;
        double accuracy;
    };
    std::vector<Row> rows;

    // fraction of grid points with accuracy >= threshold
    double area_fraction_accuracy(double threshold) const;
};

// Evaluates loss/accuracy at all (m+1)(m+2)/2 barycentric grid points
// w = l1 w1 + l2 w2 + l3 w3. Vertex rows reproduce the inputs exactly.
SimplexSurface simplex_interpolation(
    const std::function<std::pair<double, double>(const Vec&)>& eval, const Vec& w1, const Vec& w2,
    const Vec& w3, int m, int threads = 1);

// ------------------------------------------------------ gradient noise stats

enum class GradStatsMode { per_example, minibatch_mean };

struct ComponentStats {
    int index = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    bool degenerate = false; // zero variance; higher moments undefined
    HistogramND hist;
};

// Distribution of selected gradient components. per_example enumerates
// grad_example over the whole dataset; minibatch_mean draws `num_batches`
// minibatches of size `batch` (uniform with replacement) and uses the batch
// mean gradient. The per-example mean equals the full-gradient component.
std::vector<ComponentStats> gradient_component_stats(const EmpiricalPotential& U, const Vec& w,
                                                     const std::vector<int>& components,
                                                     GradStatsMode mode, int batch = 64,
                                                     int num_batches = 10'000, int bins = 30,
                                                     std::uint64_t seed = 0, int threads = 1);

// Deterministically spreads `count` component indices over [0, dim).
std::vector<int> spread_indices(int dim, int count);

} // namespace flatlab
