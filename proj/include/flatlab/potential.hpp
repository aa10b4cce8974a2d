#pragma once

#include <memory>
#include <string>
#include <vector>

#include "flatlab/common.hpp"

namespace flatlab {

// Axis-aligned box. Degenerate extents (lo == hi) are allowed and represent
// points or slabs embedded in a higher-dimensional space.
struct Box {
    Vec lo;
    Vec hi;

    int dim() const { return static_cast<int>(lo.size()); }
    bool contains(const Vec& w) const;
    // L-inf distance from w to the box (0 inside).
    double linf_dist(const Vec& w) const;
    Box inflated(double margin) const;
    bool intersects(const Box& other) const;
    double volume() const;
};

enum class BoundaryMode { wrap, clamp };

struct Domain {
    Vec lower;
    Vec upper;
    BoundaryMode mode = BoundaryMode::wrap;

    static Domain cube(int d, double half_width, BoundaryMode mode = BoundaryMode::wrap);
    int dim() const { return static_cast<int>(lower.size()); }
    double width(int i) const { return upper[i] - lower[i]; }
    double volume() const;
    bool contains(const Vec& w) const;
    void validate() const;
};

// Wrap mode: coordinate-wise modular reduction into [lower, upper); realizes
// the torus. Clamp mode: coordinate-wise clip to [lower, upper].
Vec project(const Domain& domain, Vec w);

// A labelled connected piece of the zero-level set of a potential.
struct MinRegion {
    std::string label;
    Box region;
};

// An energy landscape U: R^d -> R>=0 with analytic gradient. Immutable after
// construction; eval/grad are pure and safe for concurrent use.
//
// On the measure-zero set where the piecewise gradient is discontinuous, grad
// returns the one-sided limit with the smaller norm (ties broken by branch
// declaration order).
class Potential {
  public:
    virtual ~Potential() = default;

    virtual double eval(const Vec& w) const = 0;
    virtual Vec grad(const Vec& w) const = 0;

    int dim() const { return dim_; }
    const Domain& domain() const { return domain_; }
    const std::string& id() const { return id_; }

    // Declared zero-level sets, used by basin bookkeeping. Empty when unknown.
    virtual std::vector<MinRegion> minima() const { return {}; }
    // Default basin margin for occupancy measurements around minima().
    virtual double default_basin_margin() const { return 0.25; }

    // Throws ConfigError on dimension mismatch or non-finite coordinates.
    void check_point(const Vec& w) const;

  protected:
    Potential(int dim, Domain domain, std::string id);

  private:
    int dim_;
    Domain domain_;
    std::string id_;
};

using PotentialPtr = std::shared_ptr<const Potential>;

// U(w) = (a/2)|w|^2 on [-box_half, box_half]^d (wrap).
PotentialPtr make_quadratic(int d, double a, double box_half = 4.0);

// Two hypercube zero-sets of equal depth: side s centered at (-2,...,-2) and
// side flat_factor*s centered at (+2,...,+2). U(w) = (k/2) min(dinf_sharp,
// dinf_flat)^2 where dinf is L-inf distance to the cube.
PotentialPtr make_flat_sharp(int d, double s, double flat_factor, double k, double box_half = 4.0);

// Degenerate slab {w1 = 2, |w_i| <= L} versus sharp point (-2, 0, ..., 0):
// U(w) = (k/2) min(|w - p|^2, (w1-2)^2 + sum_i max(0, |w_i| - L)^2).
PotentialPtr make_wedge(int d, double k, double L, double box_half = 4.0);

// Internal two-cube construction with explicit geometry; make_flat_sharp is
// the catalog front end for it.
PotentialPtr make_two_cubes(const Vec& center_a, double side_a, const Vec& center_b, double side_b,
                            double k, Domain domain, std::string id);

// Programmatic potential, used by the empirical-loss adapters and tests.
PotentialPtr make_custom(int dim, Domain domain, std::string id,
                         std::function<double(const Vec&)> eval_fn,
                         std::function<Vec(const Vec&)> grad_fn,
                         std::vector<MinRegion> minima = {});

// Central finite difference per coordinate, (U(w+h e_i) - U(w-h e_i)) / (2h).
Vec fd_grad(const Potential& U, const Vec& w, double h);

// Parses catalog specs of the form "quadratic:d=2,a=1",
// "flat_sharp:d=3,s=0.5,ff=2,k=1", "wedge:d=5,k=1,L=1". An optional "box=H"
// key overrides the default [-4,4] half-width.
PotentialPtr parse_potential(const std::string& spec);

} // namespace flatlab
