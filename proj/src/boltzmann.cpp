#include "flatlab/boltzmann.hpp"

#include <cmath>

namespace flatlab {

namespace {

// Visits midpoint-rule cell centers of a uniform grid over the domain box.
// fn(center, flat_index) is called in lexicographic order.
template <typename Fn>
void for_each_cell(const Domain& dom, int res, Fn&& fn) {
    const int d = dom.dim();
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    Vec center(static_cast<std::size_t>(d));
    std::int64_t flat = 0;
    while (true) {
        for (int i = 0; i < d; ++i) {
            const double w = dom.width(i) / res;
            center[static_cast<std::size_t>(i)] =
                dom.lower[static_cast<std::size_t>(i)] + (idx[static_cast<std::size_t>(i)] + 0.5) * w;
        }
        fn(center, flat);
        ++flat;
        int i = d - 1;
        while (i >= 0 && ++idx[static_cast<std::size_t>(i)] == res) {
            idx[static_cast<std::size_t>(i)] = 0;
            --i;
        }
        if (i < 0) break;
    }
}

void require_quadrature_dim(const Potential& U) {
    if (U.dim() > 3)
        throw ConfigError("quadrature is limited to d <= 3; use rejection sampling for '" +
                          U.id() + "'");
}

double cell_volume(const Domain& dom, int res) {
    double v = 1.0;
    for (int i = 0; i < dom.dim(); ++i) v *= dom.width(i) / res;
    return v;
}

} // namespace

double partition(const Potential& U, double T, int grid_points_per_dim) {
    require_quadrature_dim(U);
    if (!(T > 0.0)) throw ConfigError("partition: temperature must be > 0");
    if (grid_points_per_dim < 2) throw ConfigError("partition: need at least 2 grid points per dim");
    double z = 0.0;
    for_each_cell(U.domain(), grid_points_per_dim,
                  [&](const Vec& c, std::int64_t) { z += std::exp(-U.eval(c) / T); });
    return z * cell_volume(U.domain(), grid_points_per_dim);
}

RejectionResult rejection_sample(const Potential& U, double T, std::int64_t count,
                                 std::uint64_t seed, int threads) {
    if (!(T > 0.0)) throw ConfigError("rejection_sample: temperature must be > 0");
    if (count < 1) throw ConfigError("rejection_sample: count must be >= 1");

    const int d = U.dim();
    const Domain& dom = U.domain();
    constexpr std::int64_t block_size = 1 << 14;
    constexpr std::int64_t blocks_per_wave = 64; // fixed so output ignores thread count
    constexpr std::int64_t min_proposals = 10'000'000;

    std::vector<Vec> accepted;
    std::int64_t proposals = 0;
    std::int64_t next_block = 0;

    while (static_cast<std::int64_t>(accepted.size()) < count) {
        std::vector<std::vector<Vec>> wave(static_cast<std::size_t>(blocks_per_wave));
        parallel_for(blocks_per_wave, threads, [&](std::int64_t b) {
            Rng rng(seed, static_cast<std::uint64_t>(next_block + b));
            auto& out = wave[static_cast<std::size_t>(b)];
            Vec w(static_cast<std::size_t>(d));
            for (std::int64_t p = 0; p < block_size; ++p) {
                for (int i = 0; i < d; ++i)
                    w[static_cast<std::size_t>(i)] =
                        rng.uniform(dom.lower[static_cast<std::size_t>(i)],
                                    dom.upper[static_cast<std::size_t>(i)]);
                const double u = rng.uniform();
                if (u < std::exp(-U.eval(w) / T)) out.push_back(w);
            }
        });
        next_block += blocks_per_wave;
        proposals += blocks_per_wave * block_size;
        for (auto& block : wave)
            accepted.insert(accepted.end(), block.begin(), block.end());

        const double rate = static_cast<double>(accepted.size()) / static_cast<double>(proposals);
        if (proposals >= min_proposals && rate < 1e-6)
            throw NumericalError("rejection_sample: acceptance rate " +
                                 format_double(rate, "%.3g") + " after " +
                                 std::to_string(proposals) +
                                 " proposals; temperature too low for rejection on '" + U.id() +
                                 "'");
    }

    RejectionResult res;
    res.acceptance_rate = static_cast<double>(accepted.size()) / static_cast<double>(proposals);
    accepted.resize(static_cast<std::size_t>(count));
    res.samples.dim = d;
    res.samples.samples = std::move(accepted);
    res.samples.provenance = {{"method", "rejection"},
                              {"potential", U.id()},
                              {"temperature", format_double(T, "%.17g")},
                              {"count", std::to_string(count)},
                              {"seed", std::to_string(seed)}};
    return res;
}

HistogramND marginal_quadrature(const Potential& U, double T, int coord, int bins,
                                int min_grid_per_dim) {
    require_quadrature_dim(U);
    if (bins < 10) throw ConfigError("marginal: bins must be >= 10");
    if (coord < 0 || coord >= U.dim()) throw ConfigError("marginal: coordinate out of range");
    // grid resolution along `coord` is a multiple of the bin count so each bin
    // covers a whole number of grid columns
    const int mult = (min_grid_per_dim + bins - 1) / bins;
    const int res = bins * std::max(1, mult);

    const Domain& dom = U.domain();
    Axis axis{dom.lower[static_cast<std::size_t>(coord)], dom.upper[static_cast<std::size_t>(coord)],
              bins};
    HistogramND h = HistogramND::zeros({axis});

    const int d = U.dim();
    for_each_cell(dom, res, [&](const Vec& c, std::int64_t flat) {
        // recover the grid column of `coord` from the flat lexicographic index
        std::int64_t rest = flat;
        int col = 0;
        for (int i = d - 1; i >= 0; --i) {
            const int ci = static_cast<int>(rest % res);
            rest /= res;
            if (i == coord) col = ci;
        }
        h.mass[static_cast<std::size_t>(col / mult)] += std::exp(-U.eval(c) / T);
    });
    h.normalize();
    return h;
}

HistogramND marginal_samples(const std::vector<Vec>& samples, const Potential& U, int coord,
                             int bins) {
    if (bins < 10) throw ConfigError("marginal: bins must be >= 10");
    if (coord < 0 || coord >= U.dim()) throw ConfigError("marginal: coordinate out of range");
    const Domain& dom = U.domain();
    Axis axis{dom.lower[static_cast<std::size_t>(coord)], dom.upper[static_cast<std::size_t>(coord)],
              bins};
    return histogram_coord(samples, coord, axis);
}

std::vector<BasinSpec> default_basins(const Potential& U, double margin) {
    const auto minima = U.minima();
    if (minima.empty()) throw ConfigError("potential '" + U.id() + "' declares no minima");
    if (margin < 0.0) margin = U.default_basin_margin();
    std::vector<BasinSpec> basins;
    basins.reserve(minima.size());
    for (const auto& m : minima) basins.push_back(BasinSpec{m.label, m.region, margin});
    check_basins_disjoint(basins);
    return basins;
}

void check_basins_disjoint(const std::vector<BasinSpec>& basins) {
    for (std::size_t i = 0; i < basins.size(); ++i) {
        for (std::size_t j = i + 1; j < basins.size(); ++j) {
            if (basins[i].region.inflated(basins[i].margin)
                    .intersects(basins[j].region.inflated(basins[j].margin)))
                throw ConfigError("basins '" + basins[i].label + "' and '" + basins[j].label +
                                  "' overlap");
        }
    }
}

std::vector<double> basin_mass_quadrature(const Potential& U, double T,
                                          const std::vector<BasinSpec>& basins,
                                          int grid_points_per_dim) {
    require_quadrature_dim(U);
    check_basins_disjoint(basins);
    if (!(T > 0.0)) throw ConfigError("basin_mass: temperature must be > 0");
    std::vector<double> mass(basins.size(), 0.0);
    double z = 0.0;
    for_each_cell(U.domain(), grid_points_per_dim, [&](const Vec& c, std::int64_t) {
        const double p = std::exp(-U.eval(c) / T);
        z += p;
        for (std::size_t b = 0; b < basins.size(); ++b) {
            if (basins[b].contains(c)) {
                mass[b] += p;
                break; // disjoint
            }
        }
    });
    for (double& m : mass) m /= z;
    return mass;
}

std::vector<double> occupancy(const std::vector<Vec>& samples,
                              const std::vector<BasinSpec>& basins) {
    if (samples.empty()) throw ConfigError("occupancy: empty sample set");
    check_basins_disjoint(basins);
    std::vector<double> frac(basins.size(), 0.0);
    for (const auto& w : samples) {
        for (std::size_t b = 0; b < basins.size(); ++b) {
            if (basins[b].contains(w)) {
                frac[b] += 1.0;
                break;
            }
        }
    }
    const double inv = 1.0 / static_cast<double>(samples.size());
    for (double& f : frac) f *= inv;
    return frac;
}

} // namespace flatlab
