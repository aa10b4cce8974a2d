#include "flatlab/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "flatlab/rng.hpp"

namespace flatlab {

// --------------------------------------------------------- flatness radius

double FlatnessReport::mean() const {
    if (radii.empty()) return std::nan("");
    double s = 0.0;
    for (double r : radii) s += r;
    return s / static_cast<double>(radii.size());
}

double FlatnessReport::stddev() const {
    if (radii.size() < 2) return 0.0;
    const double m = mean();
    double s = 0.0;
    for (double r : radii) s += (r - m) * (r - m);
    return std::sqrt(s / static_cast<double>(radii.size() - 1));
}

namespace {

// One random unit direction supported on the mask coordinates.
Vec random_direction(std::size_t dim, const std::vector<int>* mask, Rng& rng) {
    Vec dw(dim, 0.0);
    double norm = 0.0;
    while (norm == 0.0) {
        if (mask == nullptr) {
            for (auto& x : dw) x = rng.gaussian();
        } else {
            for (int i : *mask) {
                if (i < 0 || i >= static_cast<int>(dim))
                    throw ConfigError("flatness: subset index out of range");
                dw[static_cast<std::size_t>(i)] = rng.gaussian();
            }
        }
        norm = norm2(dw);
    }
    for (auto& x : dw) x /= norm;
    return dw;
}

} // namespace

FlatnessReport flatness_radius(const std::function<double(const Vec&)>& loss_eval, const Vec& w,
                               double epsilon, int directions, std::uint64_t seed,
                               const std::vector<int>* subset_mask, double r_max, int threads) {
    if (!(epsilon > 0.0)) throw ConfigError("flatness: epsilon must be > 0");
    if (directions < 1) throw ConfigError("flatness: directions must be >= 1");
    if (subset_mask != nullptr && subset_mask->empty())
        throw ConfigError("flatness: empty subset mask");
    const double base = loss_eval(w);
    if (std::isnan(base)) throw ConfigError("flatness: loss is NaN at the base point");

    enum class Outcome { ok, capped, failed };
    std::vector<double> radius(static_cast<std::size_t>(directions), 0.0);
    std::vector<Outcome> outcome(static_cast<std::size_t>(directions), Outcome::ok);

    parallel_for(directions, threads, [&](std::int64_t k) {
        Rng rng(seed, static_cast<std::uint64_t>(k));
        const Vec dw = random_direction(w.size(), subset_mask, rng);
        Vec probe(w.size());
        auto exceeds = [&](double r) -> int { // 1 = crossed, 0 = within, -1 = NaN
            for (std::size_t i = 0; i < w.size(); ++i) probe[i] = w[i] + r * dw[i];
            const double v = loss_eval(probe);
            if (std::isnan(v)) return -1;
            return std::fabs(v - base) > epsilon ? 1 : 0;
        };

        // geometric expansion to bracket the first crossing
        double lo = 0.0;
        double hi = 1e-3;
        int state = 0;
        while (hi <= r_max && (state = exceeds(hi)) == 0) {
            lo = hi;
            hi *= 2.0;
        }
        if (state == -1) {
            outcome[static_cast<std::size_t>(k)] = Outcome::failed;
            return;
        }
        if (hi > r_max) {
            // check the cap itself before giving up
            const int at_cap = exceeds(r_max);
            if (at_cap == -1) {
                outcome[static_cast<std::size_t>(k)] = Outcome::failed;
                return;
            }
            if (at_cap == 0) {
                radius[static_cast<std::size_t>(k)] = r_max;
                outcome[static_cast<std::size_t>(k)] = Outcome::capped;
                return;
            }
            lo = std::min(lo, r_max);
            hi = r_max;
        }

        // bisection to relative tolerance 1e-3
        while ((hi - lo) > 1e-3 * hi) {
            const double mid = 0.5 * (lo + hi);
            const int s = exceeds(mid);
            if (s == -1) {
                outcome[static_cast<std::size_t>(k)] = Outcome::failed;
                return;
            }
            if (s == 0) lo = mid;
            else hi = mid;
        }
        radius[static_cast<std::size_t>(k)] = 0.5 * (lo + hi);
    });

    FlatnessReport report;
    report.epsilon = epsilon;
    report.r_max = r_max;
    if (subset_mask != nullptr) report.subset_label = "subset";
    for (int k = 0; k < directions; ++k) {
        switch (outcome[static_cast<std::size_t>(k)]) {
            case Outcome::failed: ++report.failed; break;
            case Outcome::capped:
                ++report.capped;
                report.radii.push_back(radius[static_cast<std::size_t>(k)]);
                break;
            case Outcome::ok: report.radii.push_back(radius[static_cast<std::size_t>(k)]); break;
        }
    }
    return report;
}

// ---------------------------------------------------- simplex interpolation

double SimplexSurface::area_fraction_accuracy(double threshold) const {
    if (rows.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& r : rows)
        if (r.accuracy >= threshold) ++hits;
    return static_cast<double>(hits) / static_cast<double>(rows.size());
}

SimplexSurface simplex_interpolation(
    const std::function<std::pair<double, double>(const Vec&)>& eval, const Vec& w1, const Vec& w2,
    const Vec& w3, int m, int threads) {
    if (m < 2) throw ConfigError("simplex: resolution m must be >= 2");
    if (w1.size() != w2.size() || w1.size() != w3.size())
        throw ConfigError("simplex: minimizer dimensions differ");

    // enumerate grid points (a, b) -> lambda = (a/m, b/m, (m-a-b)/m)
    std::vector<std::pair<int, int>> grid;
    for (int a = 0; a <= m; ++a)
        for (int b = 0; b <= m - a; ++b) grid.emplace_back(a, b);

    SimplexSurface surface;
    surface.resolution = m;
    surface.rows.resize(grid.size());

    parallel_for(static_cast<std::int64_t>(grid.size()), threads, [&](std::int64_t g) {
        const auto [a, b] = grid[static_cast<std::size_t>(g)];
        const double l1 = static_cast<double>(a) / m;
        const double l2 = static_cast<double>(b) / m;
        const double l3 = static_cast<double>(m - a - b) / m;
        Vec w(w1.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = l1 * w1[i] + l2 * w2[i] + l3 * w3[i];
        const auto [loss, acc] = eval(w);
        surface.rows[static_cast<std::size_t>(g)] =
            SimplexSurface::Row{l1, l2, l3, l2 + 0.5 * l3, 0.5 * std::sqrt(3.0) * l3, loss, acc};
    });
    return surface;
}

// ------------------------------------------------------ gradient noise stats

std::vector<ComponentStats> gradient_component_stats(const EmpiricalPotential& U, const Vec& w,
                                                     const std::vector<int>& components,
                                                     GradStatsMode mode, int batch, int num_batches,
                                                     int bins, std::uint64_t seed, int threads) {
    if (components.empty()) throw ConfigError("gradient stats: no components selected");
    for (int c : components)
        if (c < 0 || c >= U.dim()) throw ConfigError("gradient stats: component index out of range");
    if (mode == GradStatsMode::minibatch_mean && (batch < 1 || num_batches < 2))
        throw ConfigError("gradient stats: need batch >= 1 and num_batches >= 2");
    if (bins < 10) throw ConfigError("gradient stats: bins must be >= 10");

    const int n = U.num_examples();
    const std::int64_t draws = mode == GradStatsMode::per_example ? n : num_batches;
    if (draws < 2) throw ConfigError("gradient stats: need at least two draws");

    // values[j][t] = component j of the t-th gradient draw
    std::vector<std::vector<double>> values(components.size(),
                                            std::vector<double>(static_cast<std::size_t>(draws)));
    parallel_for(draws, threads, [&](std::int64_t t) {
        Vec g;
        if (mode == GradStatsMode::per_example) {
            g = U.grad_example(w, static_cast<int>(t));
        } else {
            Rng rng(seed, static_cast<std::uint64_t>(t));
            std::vector<int> idx(static_cast<std::size_t>(batch));
            for (auto& i : idx)
                i = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
            g = U.grad_batch(w, idx);
        }
        for (std::size_t j = 0; j < components.size(); ++j)
            values[j][static_cast<std::size_t>(t)] = g[static_cast<std::size_t>(components[j])];
    });

    std::vector<ComponentStats> stats(components.size());
    for (std::size_t j = 0; j < components.size(); ++j) {
        auto& s = stats[j];
        s.index = components[j];
        const auto& v = values[j];
        const double inv = 1.0 / static_cast<double>(v.size());
        for (double x : v) s.mean += x;
        s.mean *= inv;
        double m2 = 0.0, m3 = 0.0, m4 = 0.0;
        for (double x : v) {
            const double d = x - s.mean;
            m2 += d * d;
            m3 += d * d * d;
            m4 += d * d * d * d;
        }
        m2 *= inv;
        m3 *= inv;
        m4 *= inv;
        s.stddev = std::sqrt(m2);
        // component with (numerically) no variance: flag, skip higher moments
        if (m2 <= 1e-28 * (1.0 + s.mean * s.mean)) {
            s.degenerate = true;
            continue;
        }
        s.skewness = m3 / (m2 * s.stddev);
        s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
        double lo = v[0], hi = v[0];
        for (double x : v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        if (hi <= lo) hi = lo + 1.0;
        s.hist = histogram_values(v, Axis{lo, hi, bins});
    }
    return stats;
}

std::vector<int> spread_indices(int dim, int count) {
    if (count < 1 || dim < 1) throw ConfigError("spread_indices: bad arguments");
    count = std::min(count, dim);
    std::vector<int> idx(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j)
        idx[static_cast<std::size_t>(j)] = static_cast<int>(
            (static_cast<std::int64_t>(j) * dim + dim / 2) / count % dim);
    return idx;
}

} // namespace flatlab
