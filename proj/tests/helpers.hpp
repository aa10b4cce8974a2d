#pragma once

#include <cmath>
#include <string>

#include "flatlab/potential.hpp"
#include "flatlab/rng.hpp"

namespace flatlab::testing {

inline Vec random_in_domain(const Potential& pot, Rng& rng) {
    Vec w(static_cast<std::size_t>(pot.dim()));
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = rng.uniform(pot.domain().lower[i], pot.domain().upper[i]);
    return w;
}

// True when w is safely away from the potential's piecewise-gradient
// boundaries, so central differences with step h see a single smooth branch.
// Uses the declared minimum boxes for geometry; bands are in excess-distance
// units (L-inf distances are 1-Lipschitz in each coordinate).
inline bool kink_safe(const Potential& pot, const Vec& w, double h) {
    const double band = 2.5 * h;
    const auto minima = pot.minima();
    const std::string& id = pot.id();

    if (id.rfind("quadratic", 0) == 0) return true;

    if (id.rfind("flat_sharp", 0) == 0 || id.rfind("two_cubes", 0) == 0) {
        const Box& a = minima[0].region;
        const Box& b = minima[1].region;
        const double da = a.linf_dist(w);
        const double db = b.linf_dist(w);
        if (std::fabs(da - db) < band) return false; // cube-choice tie
        const Box& cube = da < db ? a : b;
        const double d = std::min(da, db);
        double top1 = 0.0, top2 = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            double excess = 0.0;
            if (w[i] < cube.lo[i]) excess = cube.lo[i] - w[i];
            else if (w[i] > cube.hi[i]) excess = w[i] - cube.hi[i];
            if (excess > top1) {
                top2 = top1;
                top1 = excess;
            } else {
                top2 = std::max(top2, excess);
            }
            // cube face crossing: inside/outside flip along coordinate i
            const double face_gap =
                std::min(std::fabs(w[i] - cube.lo[i]), std::fabs(w[i] - cube.hi[i]));
            if (face_gap < band) return false;
        }
        if (d > 0.0 && top1 - top2 < band) return false; // arg-max tie
        return true;
    }

    if (id.rfind("wedge", 0) == 0) {
        const Box& slab = minima[1].region;
        double tp = (w[0] + 2.0) * (w[0] + 2.0);
        for (std::size_t i = 1; i < w.size(); ++i) tp += w[i] * w[i];
        double ts = (w[0] - 2.0) * (w[0] - 2.0);
        const double L = slab.hi.size() > 1 ? slab.hi[1] : 0.0;
        for (std::size_t i = 1; i < w.size(); ++i) {
            const double excess = std::max(0.0, std::fabs(w[i]) - L);
            ts += excess * excess;
            if (std::fabs(std::fabs(w[i]) - L) < band) return false; // slab shoulder
        }
        // squared-term tie: terms are (2 * dist)-Lipschitz, stay generous
        if (std::fabs(tp - ts) < 50.0 * band) return false;
        return true;
    }

    return true;
}

// Dense 1D scan oracle for the L-inf distance from x to an interval.
inline double scan_dist_1d(double x, double lo, double hi, int steps = 200000) {
    double best = std::fabs(x - lo);
    for (int i = 0; i <= steps; ++i) {
        const double u = lo + (hi - lo) * i / steps;
        best = std::min(best, std::fabs(x - u));
    }
    return best;
}

} // namespace flatlab::testing
