#pragma once

#include <cstdint>
#include <vector>

#include "flatlab/dynamics.hpp"
#include "flatlab/histogram.hpp"
#include "flatlab/potential.hpp"

namespace flatlab {

// Ground truth for the asymptotic density p(w) = (1/Z) exp(-U(w)/T) on the
// potential's bounded domain box.

// Partition value by midpoint-rule quadrature over the domain box; d <= 3.
// Doubling the resolution is the caller's error estimate.
double partition(const Potential& U, double T, int grid_points_per_dim);

struct RejectionResult {
    SampleSet samples;
    double acceptance_rate = 0.0;
};

// Exact i.i.d. Boltzmann samples: uniform proposals on the box accepted with
// probability exp(-U/T) (valid since U >= 0). Deterministic for any thread
// count. Throws NumericalError when the acceptance rate drops below 1e-6
// over 1e7 proposals.
RejectionResult rejection_sample(const Potential& U, double T, std::int64_t count,
                                 std::uint64_t seed, int threads = 1);

// Marginal density of one coordinate from quadrature (d <= 3): integrates the
// density over the remaining coordinates per bin; mass sums to 1.
HistogramND marginal_quadrature(const Potential& U, double T, int coord, int bins,
                                int min_grid_per_dim = 64);

// Marginal of one coordinate from samples, binned over the potential's domain.
HistogramND marginal_samples(const std::vector<Vec>& samples, const Potential& U, int coord,
                             int bins);

// Membership is L-inf distance <= margin from the declared minimum region.
struct BasinSpec {
    std::string label;
    Box region;
    double margin = 0.0;

    bool contains(const Vec& w) const { return region.linf_dist(w) <= margin; }
};

// One basin per declared minimum of U, margin defaulting to the potential's
// default_basin_margin(). Throws if U declares none.
std::vector<BasinSpec> default_basins(const Potential& U, double margin = -1.0);

void check_basins_disjoint(const std::vector<BasinSpec>& basins);

// Boltzmann mass of each basin by quadrature (d <= 3). Probabilities sum to
// <= 1; the remainder is transition-region mass.
std::vector<double> basin_mass_quadrature(const Potential& U, double T,
                                          const std::vector<BasinSpec>& basins,
                                          int grid_points_per_dim);

// Fraction of samples inside each basin (basins must be disjoint).
std::vector<double> occupancy(const std::vector<Vec>& samples,
                              const std::vector<BasinSpec>& basins);

} // namespace flatlab
