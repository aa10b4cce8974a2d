#include "flatlab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <utility>

namespace flatlab {

namespace {

std::string fmt_param(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

} // namespace

// ---------------------------------------------------------------- geometry

bool Box::contains(const Vec& w) const {
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (w[i] < lo[i] || w[i] > hi[i]) return false;
    }
    return true;
}

double Box::linf_dist(const Vec& w) const {
    double d = 0.0;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        double excess = 0.0;
        if (w[i] < lo[i]) excess = lo[i] - w[i];
        else if (w[i] > hi[i]) excess = w[i] - hi[i];
        d = std::max(d, excess);
    }
    return d;
}

Box Box::inflated(double margin) const {
    Box b = *this;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        b.lo[i] -= margin;
        b.hi[i] += margin;
    }
    return b;
}

bool Box::intersects(const Box& other) const {
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (hi[i] < other.lo[i] || other.hi[i] < lo[i]) return false;
    }
    return true;
}

double Box::volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
}

Domain Domain::cube(int d, double half_width, BoundaryMode mode) {
    Domain dom;
    dom.lower.assign(static_cast<std::size_t>(d), -half_width);
    dom.upper.assign(static_cast<std::size_t>(d), half_width);
    dom.mode = mode;
    dom.validate();
    return dom;
}

double Domain::volume() const {
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= width(i);
    return v;
}

bool Domain::contains(const Vec& w) const {
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (w[i] < lower[i] || w[i] > upper[i]) return false;
    }
    return true;
}

void Domain::validate() const {
    if (lower.empty() || lower.size() != upper.size())
        throw ConfigError("domain: lower/upper size mismatch or empty");
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!(lower[i] < upper[i])) throw ConfigError("domain: lower[i] must be < upper[i]");
    }
}

Vec project(const Domain& domain, Vec w) {
    if (w.size() != domain.lower.size()) throw ConfigError("project: dimension mismatch");
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double lo = domain.lower[i];
        const double hi = domain.upper[i];
        if (domain.mode == BoundaryMode::clamp) {
            w[i] = std::clamp(w[i], lo, hi);
        } else {
            if (w[i] >= lo && w[i] < hi) continue; // identity inside the box
            const double width = hi - lo;
            double r = std::fmod(w[i] - lo, width);
            if (r < 0.0) r += width;
            if (r >= width) r -= width; // fmod rounding can land exactly on width
            w[i] = lo + r;
        }
    }
    return w;
}

// ---------------------------------------------------------------- base

Potential::Potential(int dim, Domain domain, std::string id)
    : dim_(dim), domain_(std::move(domain)), id_(std::move(id)) {
    if (dim_ < 1) throw ConfigError("potential: dimension must be >= 1");
    if (domain_.dim() != dim_) throw ConfigError("potential: domain dimension mismatch");
}

void Potential::check_point(const Vec& w) const {
    if (static_cast<int>(w.size()) != dim_)
        throw ConfigError("potential '" + id_ + "': point has dimension " +
                          std::to_string(w.size()) + ", expected " + std::to_string(dim_));
    if (!all_finite(w)) throw ConfigError("potential '" + id_ + "': non-finite coordinate");
}

// ---------------------------------------------------------------- quadratic

namespace {

class QuadraticPotential final : public Potential {
  public:
    QuadraticPotential(int d, double a, double box_half)
        : Potential(d, Domain::cube(d, box_half),
                    "quadratic:d=" + std::to_string(d) + ",a=" + fmt_param(a)),
          a_(a) {}

    double eval(const Vec& w) const override {
        check_point(w);
        return 0.5 * a_ * dot(w, w);
    }

    Vec grad(const Vec& w) const override {
        check_point(w);
        Vec g(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) g[i] = a_ * w[i];
        return g;
    }

    std::vector<MinRegion> minima() const override {
        Vec origin(static_cast<std::size_t>(dim()), 0.0);
        return {{"origin", Box{origin, origin}}};
    }

  private:
    double a_;
};

// ------------------------------------------------------------- two cubes

// U(w) = (k/2) min(dinf(w, A), dinf(w, B))^2 for two axis-aligned cubes.
class TwoCubesPotential final : public Potential {
  public:
    TwoCubesPotential(Box a, Box b, double k, Domain domain, std::string id, double margin)
        : Potential(a.dim(), std::move(domain), std::move(id)), cube_a_(std::move(a)),
          cube_b_(std::move(b)), k_(k), margin_(margin) {}

    double eval(const Vec& w) const override {
        check_point(w);
        const double d = std::min(cube_a_.linf_dist(w), cube_b_.linf_dist(w));
        return 0.5 * k_ * d * d;
    }

    Vec grad(const Vec& w) const override {
        check_point(w);
        const double da = cube_a_.linf_dist(w);
        const double db = cube_b_.linf_dist(w);
        // branch gradients share the norm k*d at ties; keep declaration order
        return da <= db ? cube_grad(cube_a_, w, da) : cube_grad(cube_b_, w, db);
    }

    std::vector<MinRegion> minima() const override {
        return {{"sharp", cube_a_}, {"flat", cube_b_}};
    }

    double default_basin_margin() const override { return margin_; }

    const Box& cube_a() const { return cube_a_; }
    const Box& cube_b() const { return cube_b_; }

  private:
    Vec cube_grad(const Box& c, const Vec& w, double d) const {
        Vec g(w.size(), 0.0);
        if (d <= 0.0) return g;
        // d = max_i excess_i; gradient follows the first arg-max coordinate
        // (one-sided limits at arg-max ties all have norm k*d)
        for (std::size_t i = 0; i < w.size(); ++i) {
            double excess = 0.0, sign = 0.0;
            if (w[i] < c.lo[i]) {
                excess = c.lo[i] - w[i];
                sign = -1.0;
            } else if (w[i] > c.hi[i]) {
                excess = w[i] - c.hi[i];
                sign = 1.0;
            }
            if (excess == d) {
                g[i] = k_ * d * sign;
                return g;
            }
        }
        return g;
    }

    Box cube_a_;
    Box cube_b_;
    double k_;
    double margin_;
};

// ------------------------------------------------------------------ wedge

class WedgePotential final : public Potential {
  public:
    WedgePotential(int d, double k, double L, double box_half)
        : Potential(d, Domain::cube(d, box_half),
                    "wedge:d=" + std::to_string(d) + ",k=" + fmt_param(k) + ",L=" + fmt_param(L)),
          k_(k), L_(L) {
        if (2.0 + L_ > box_half && d > 1)
            throw ConfigError("wedge: slab half-width L leaves the domain box");
    }

    double eval(const Vec& w) const override {
        check_point(w);
        return 0.5 * k_ * std::min(point_term(w), slab_term(w));
    }

    Vec grad(const Vec& w) const override {
        check_point(w);
        const double tp = point_term(w);
        const double ts = slab_term(w);
        Vec gp, gs;
        if (tp <= ts) gp = point_grad(w);
        if (ts <= tp) gs = slab_grad(w);
        if (tp < ts) return gp;
        if (ts < tp) return gs;
        return norm2(gs) <= norm2(gp) ? gs : gp; // tie: smaller-norm one-sided limit
    }

    std::vector<MinRegion> minima() const override {
        const auto n = static_cast<std::size_t>(dim());
        Vec p(n, 0.0);
        p[0] = -2.0;
        Vec slab_lo(n, -L_), slab_hi(n, L_);
        slab_lo[0] = slab_hi[0] = 2.0;
        return {{"point", Box{p, p}}, {"slab", Box{slab_lo, slab_hi}}};
    }

  private:
    double point_term(const Vec& w) const {
        double s = (w[0] + 2.0) * (w[0] + 2.0);
        for (std::size_t i = 1; i < w.size(); ++i) s += w[i] * w[i];
        return s;
    }

    double slab_term(const Vec& w) const {
        double s = (w[0] - 2.0) * (w[0] - 2.0);
        for (std::size_t i = 1; i < w.size(); ++i) {
            const double excess = std::max(0.0, std::fabs(w[i]) - L_);
            s += excess * excess;
        }
        return s;
    }

    Vec point_grad(const Vec& w) const {
        Vec g(w.size());
        g[0] = k_ * (w[0] + 2.0);
        for (std::size_t i = 1; i < w.size(); ++i) g[i] = k_ * w[i];
        return g;
    }

    Vec slab_grad(const Vec& w) const {
        Vec g(w.size());
        g[0] = k_ * (w[0] - 2.0);
        for (std::size_t i = 1; i < w.size(); ++i) {
            const double excess = std::max(0.0, std::fabs(w[i]) - L_);
            g[i] = k_ * (w[i] >= 0.0 ? excess : -excess);
        }
        return g;
    }

    double k_;
    double L_;
};

// ----------------------------------------------------------------- custom

class CustomPotential final : public Potential {
  public:
    CustomPotential(int dim, Domain domain, std::string id,
                    std::function<double(const Vec&)> eval_fn, std::function<Vec(const Vec&)> grad_fn,
                    std::vector<MinRegion> minima)
        : Potential(dim, std::move(domain), std::move(id)), eval_fn_(std::move(eval_fn)),
          grad_fn_(std::move(grad_fn)), minima_(std::move(minima)) {}

    double eval(const Vec& w) const override {
        check_point(w);
        return eval_fn_(w);
    }

    Vec grad(const Vec& w) const override {
        check_point(w);
        return grad_fn_(w);
    }

    std::vector<MinRegion> minima() const override { return minima_; }

  private:
    std::function<double(const Vec&)> eval_fn_;
    std::function<Vec(const Vec&)> grad_fn_;
    std::vector<MinRegion> minima_;
};

} // namespace

// ----------------------------------------------------------------- makers

PotentialPtr make_quadratic(int d, double a, double box_half) {
    if (d < 1) throw ConfigError("quadratic: d must be >= 1");
    if (!(a > 0.0)) throw ConfigError("quadratic: a must be > 0");
    if (!(box_half > 0.0)) throw ConfigError("quadratic: box must be > 0");
    return std::make_shared<QuadraticPotential>(d, a, box_half);
}

PotentialPtr make_two_cubes(const Vec& center_a, double side_a, const Vec& center_b, double side_b,
                            double k, Domain domain, std::string id) {
    if (center_a.size() != center_b.size() || center_a.empty())
        throw ConfigError("two_cubes: center dimension mismatch");
    if (!(side_a > 0.0) || !(side_b > 0.0)) throw ConfigError("two_cubes: sides must be > 0");
    if (!(k > 0.0)) throw ConfigError("two_cubes: k must be > 0");
    auto cube = [](const Vec& c, double side) {
        Box b{c, c};
        for (std::size_t i = 0; i < c.size(); ++i) {
            b.lo[i] -= 0.5 * side;
            b.hi[i] += 0.5 * side;
        }
        return b;
    };
    Box a = cube(center_a, side_a);
    Box b = cube(center_b, side_b);
    if (a.intersects(b)) throw ConfigError("two_cubes: cubes overlap");
    Box box{domain.lower, domain.upper};
    for (int i = 0; i < static_cast<int>(center_a.size()); ++i) {
        if (a.lo[i] < box.lo[i] || a.hi[i] > box.hi[i] || b.lo[i] < box.lo[i] ||
            b.hi[i] > box.hi[i])
            throw ConfigError("two_cubes: cube leaves the domain box");
    }
    const double margin = 0.5 * std::min(side_a, side_b);
    return std::make_shared<TwoCubesPotential>(std::move(a), std::move(b), k, std::move(domain),
                                               std::move(id), margin);
}

PotentialPtr make_flat_sharp(int d, double s, double flat_factor, double k, double box_half) {
    if (d < 1) throw ConfigError("flat_sharp: d must be >= 1");
    if (!(s > 0.0)) throw ConfigError("flat_sharp: s must be > 0");
    if (!(flat_factor >= 1.0)) throw ConfigError("flat_sharp: flat_factor must be >= 1");
    if (!(k > 0.0)) throw ConfigError("flat_sharp: k must be > 0");
    const double gap = 4.0 - 0.5 * s - 0.5 * flat_factor * s;
    if (gap < s) throw ConfigError("flat_sharp: cubes too large, separating gap < s");
    Vec c_sharp(static_cast<std::size_t>(d), -2.0);
    Vec c_flat(static_cast<std::size_t>(d), 2.0);
    std::string id = "flat_sharp:d=" + std::to_string(d) + ",s=" + fmt_param(s) +
                     ",ff=" + fmt_param(flat_factor) + ",k=" + fmt_param(k);
    // margin default: s/2 beyond the zero-set cube
    return make_two_cubes(c_sharp, s, c_flat, flat_factor * s, k,
                          Domain::cube(d, box_half), std::move(id));
}

PotentialPtr make_wedge(int d, double k, double L, double box_half) {
    if (d < 1) throw ConfigError("wedge: d must be >= 1");
    if (!(k > 0.0)) throw ConfigError("wedge: k must be > 0");
    if (!(L > 0.0)) throw ConfigError("wedge: L must be > 0");
    return std::make_shared<WedgePotential>(d, k, L, box_half);
}

PotentialPtr make_custom(int dim, Domain domain, std::string id,
                         std::function<double(const Vec&)> eval_fn,
                         std::function<Vec(const Vec&)> grad_fn, std::vector<MinRegion> minima) {
    return std::make_shared<CustomPotential>(dim, std::move(domain), std::move(id),
                                             std::move(eval_fn), std::move(grad_fn),
                                             std::move(minima));
}

Vec fd_grad(const Potential& U, const Vec& w, double h) {
    if (!(h > 0.0)) throw ConfigError("fd_grad: h must be > 0");
    U.check_point(w);
    Vec g(w.size());
    Vec probe = w;
    for (std::size_t i = 0; i < w.size(); ++i) {
        probe[i] = w[i] + h;
        const double up = U.eval(probe);
        probe[i] = w[i] - h;
        const double down = U.eval(probe);
        probe[i] = w[i];
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

// ----------------------------------------------------------------- parser

namespace {

std::map<std::string, std::string> parse_kv(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("potential spec: expected key=value, got '" + item + "'");
        kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return kv;
}

double take_num(std::map<std::string, std::string>& kv, const std::string& key, double fallback,
                bool required = false) {
    auto it = kv.find(key);
    if (it == kv.end()) {
        if (required) throw ConfigError("potential spec: missing required key '" + key + "'");
        return fallback;
    }
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(it->second, &pos);
    } catch (const std::exception&) {
        throw ConfigError("potential spec: bad number for key '" + key + "'");
    }
    if (pos != it->second.size()) throw ConfigError("potential spec: bad number for key '" + key + "'");
    kv.erase(it);
    return v;
}

} // namespace

PotentialPtr parse_potential(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    auto kv = colon == std::string::npos ? std::map<std::string, std::string>{}
                                         : parse_kv(spec.substr(colon + 1));
    PotentialPtr pot;
    if (name == "quadratic") {
        const int d = static_cast<int>(take_num(kv, "d", 0, true));
        const double a = take_num(kv, "a", 1.0);
        const double box = take_num(kv, "box", 4.0);
        pot = make_quadratic(d, a, box);
    } else if (name == "flat_sharp") {
        const int d = static_cast<int>(take_num(kv, "d", 0, true));
        const double s = take_num(kv, "s", 0.5);
        const double ff = take_num(kv, "ff", 2.0);
        const double k = take_num(kv, "k", 1.0);
        const double box = take_num(kv, "box", 4.0);
        pot = make_flat_sharp(d, s, ff, k, box);
    } else if (name == "wedge") {
        const int d = static_cast<int>(take_num(kv, "d", 0, true));
        const double k = take_num(kv, "k", 1.0);
        const double L = take_num(kv, "L", 1.0);
        const double box = take_num(kv, "box", 4.0);
        pot = make_wedge(d, k, L, box);
    } else {
        throw ConfigError("unknown potential '" + name + "'");
    }
    if (!kv.empty()) throw ConfigError("potential spec: unknown key '" + kv.begin()->first + "'");
    return pot;
}

} // namespace flatlab
