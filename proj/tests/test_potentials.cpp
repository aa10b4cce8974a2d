#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flatlab/potential.hpp"
#include "helpers.hpp"

using namespace flatlab;
using flatlab::testing::kink_safe;
using flatlab::testing::random_in_domain;
using flatlab::testing::scan_dist_1d;

TEST_CASE("quadratic basics") {
    const auto q1 = make_quadratic(1, 1.0);
    CHECK(q1->eval({0.0}) == 0.0);
    CHECK(q1->eval({3.0}) == doctest::Approx(4.5));

    const auto q2 = make_quadratic(2, 1.0);
    CHECK(q2->eval({1.0, 1.0}) == doctest::Approx(1.0));
    CHECK(q2->eval({3.0, 4.0}) == doctest::Approx(12.5));

    const auto q_steep = make_quadratic(1, 2.0);
    CHECK(q_steep->grad({3.0})[0] == doctest::Approx(6.0));

    CHECK_THROWS_AS(make_quadratic(0, 1.0), ConfigError);
    CHECK_THROWS_AS(make_quadratic(2, -1.0), ConfigError);
    CHECK_THROWS_AS(make_quadratic(2, 0.0), ConfigError);
}

TEST_CASE("eval/grad argument errors") {
    const auto q = make_quadratic(2, 1.0);
    CHECK_THROWS_AS(q->eval({1.0}), ConfigError);
    CHECK_THROWS_AS(q->grad({1.0, 2.0, 3.0}), ConfigError);
    CHECK_THROWS_AS(q->eval({1.0, std::nan("")}), ConfigError);
}

TEST_CASE("flat_sharp geometry and values") {
    const auto fs = make_flat_sharp(1, 0.5, 2.0, 1.0);
    CHECK(fs->eval({2.0}) == 0.0);  // center of the flat cube
    CHECK(fs->eval({-2.0}) == 0.0); // center of the sharp cube, same depth

    // U(0) against the dense-scan oracle of the piecewise definition:
    // sharp cube [-2.25, -1.75], flat cube [1.5, 2.5]
    const double d_sharp = scan_dist_1d(0.0, -2.25, -1.75);
    const double d_flat = scan_dist_1d(0.0, 1.5, 2.5);
    const double oracle = 0.5 * std::min(d_sharp, d_flat) * std::min(d_sharp, d_flat);
    CHECK(oracle == doctest::Approx(1.125).epsilon(1e-6));
    CHECK(fs->eval({0.0}) == doctest::Approx(1.125));

    // gradient vanishes inside the flat cube
    CHECK(fs->grad({2.0})[0] == 0.0);
    CHECK(fs->grad({2.2})[0] == 0.0);

    // zero-set volume ratio in d=3 is 2^3
    const auto fs3 = make_flat_sharp(3, 0.5, 2.0, 1.0);
    const auto minima = fs3->minima();
    REQUIRE(minima.size() == 2);
    CHECK(minima[1].region.volume() / minima[0].region.volume() == doctest::Approx(8.0));

    // cubes overlapping or leaving the domain are parameter errors
    CHECK_THROWS_AS(make_flat_sharp(1, 2.0, 3.0, 1.0), ConfigError);
    CHECK_THROWS_AS(make_flat_sharp(1, 0.5, 10.0, 1.0), ConfigError);
    CHECK_THROWS_AS(make_flat_sharp(1, -0.5, 2.0, 1.0), ConfigError);
}

TEST_CASE("flat_sharp swap symmetry") {
    // reflecting the coordinates maps the standard layout onto the layout with
    // basin centers and sizes swapped
    const auto fs = make_flat_sharp(2, 0.5, 2.0, 1.0);
    const auto swapped = make_two_cubes({2.0, 2.0}, 0.5, {-2.0, -2.0}, 1.0, 1.0,
                                        Domain::cube(2, 4.0), "two_cubes:swapped");
    Rng rng(42, 0);
    for (int i = 0; i < 200; ++i) {
        const Vec w = random_in_domain(*fs, rng);
        const Vec neg = {-w[0], -w[1]};
        CHECK(fs->eval(w) == doctest::Approx(swapped->eval(neg)).epsilon(1e-12));
    }
}

TEST_CASE("wedge values") {
    const auto w2 = make_wedge(2, 1.0, 1.0);
    CHECK(w2->eval({2.0, 0.5}) == 0.0);  // inside the degenerate slab
    CHECK(w2->eval({-2.0, 0.0}) == 0.0); // sharp point minimum
    CHECK(w2->eval({2.0, 2.0}) == doctest::Approx(0.5));

    // grid-scan oracle for U((2,2)): slab term vs point term
    {
        double best = 1e30;
        for (int i = 0; i <= 400; ++i) {
            const double t = -1.0 + 2.0 * i / 400.0; // slab points (2, t), |t| <= 1
            best = std::min(best, (2.0 - 2.0) * (2.0 - 2.0) + (2.0 - t) * (2.0 - t));
        }
        const double point_term = (2.0 + 2.0) * (2.0 + 2.0) + 2.0 * 2.0;
        CHECK(0.5 * std::min(best, point_term) == doctest::Approx(0.5).epsilon(1e-4));
    }

    // degeneracy is a literal flat direction
    for (double t = -1.0; t <= 1.0; t += 0.125) {
        CHECK(w2->eval({2.0, t}) == 0.0);
        const Vec g = w2->grad({2.0, t});
        CHECK(g[0] == 0.0);
        CHECK(g[1] == 0.0);
    }

    const auto w5 = make_wedge(5, 1.0, 1.0);
    CHECK(w5->eval({2.0, 0.5, -0.5, 0.9, 0.0}) == 0.0);
    CHECK(w5->eval({-2.0, 0.0, 0.0, 0.0, 0.0}) == 0.0);
}

TEST_CASE("gradients vanish at declared minima") {
    const std::vector<PotentialPtr> catalog = {
        make_quadratic(2, 1.5), make_flat_sharp(2, 0.5, 2.0, 1.0), make_wedge(3, 1.0, 1.0)};
    for (const auto& pot : catalog) {
        for (const auto& m : pot->minima()) {
            Vec center(m.region.lo.size());
            for (std::size_t i = 0; i < center.size(); ++i)
                center[i] = 0.5 * (m.region.lo[i] + m.region.hi[i]);
            for (double g : pot->grad(center)) CHECK(g == 0.0);
        }
    }
}

TEST_CASE("U positive away from the zero sets") {
    const std::vector<PotentialPtr> catalog = {
        make_quadratic(1, 1.0), make_flat_sharp(2, 0.5, 2.0, 1.0), make_wedge(2, 1.0, 1.0)};
    Rng rng(7, 0);
    for (const auto& pot : catalog) {
        int checked = 0;
        while (checked < 100) {
            const Vec w = random_in_domain(*pot, rng);
            double dist = 1e30;
            for (const auto& m : pot->minima()) dist = std::min(dist, m.region.linf_dist(w));
            if (dist < 1e-6) continue;
            CHECK(pot->eval(w) > 0.0);
            ++checked;
        }
        // and exactly zero on the minimum sets themselves
        for (const auto& m : pot->minima()) {
            Vec corner = m.region.lo;
            CHECK(pot->eval(corner) == 0.0);
            CHECK(pot->eval(m.region.hi) == 0.0);
        }
    }
}

TEST_CASE("analytic gradient matches finite differences") {
    const double h = 1e-5;
    const std::vector<PotentialPtr> catalog = {
        make_quadratic(1, 1.0),           make_quadratic(3, 2.0),
        make_flat_sharp(1, 0.5, 2.0, 1.0), make_flat_sharp(3, 0.5, 2.0, 1.0),
        make_wedge(2, 1.0, 1.0),          make_wedge(5, 1.0, 1.0)};
    for (const auto& pot : catalog) {
        Rng rng(fnv1a64(pot->id()), 0);
        int checked = 0;
        while (checked < 100) {
            const Vec w = random_in_domain(*pot, rng);
            if (!kink_safe(*pot, w, h)) continue;
            const Vec g = pot->grad(w);
            const Vec fd = fd_grad(*pot, w, h);
            double err = 0.0, fd_norm = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                err += (g[i] - fd[i]) * (g[i] - fd[i]);
                fd_norm += fd[i] * fd[i];
            }
            CHECK(std::sqrt(err) / (1.0 + std::sqrt(fd_norm)) <= 1e-5);
            ++checked;
        }
    }
}

TEST_CASE("fd_grad spot values") {
    const auto q = make_quadratic(1, 1.0);
    CHECK(fd_grad(*q, {1.0}, 1e-5)[0] == doctest::Approx(1.0).epsilon(1e-8));

    const auto w2 = make_wedge(2, 1.0, 1.0);
    const Vec g = w2->grad({0.0, 0.3});
    const Vec fd = fd_grad(*w2, {0.0, 0.3}, 1e-5);
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(g[i] == doctest::Approx(fd[i]).epsilon(1e-5));

    const auto fs = make_flat_sharp(1, 0.5, 2.0, 1.0);
    CHECK(fd_grad(*fs, {2.0}, 1e-5)[0] == 0.0);

    CHECK_THROWS_AS(fd_grad(*q, {1.0}, 0.0), ConfigError);
}

TEST_CASE("projection") {
    Domain wrap;
    wrap.lower = {-1.0};
    wrap.upper = {1.0};
    wrap.mode = BoundaryMode::wrap;
    CHECK(project(wrap, {1.5})[0] == doctest::Approx(-0.5));
    CHECK(project(wrap, {0.25})[0] == 0.25);
    CHECK(project(wrap, {-1.0})[0] == -1.0);
    CHECK(project(wrap, {1.0})[0] == -1.0); // upper bound wraps to lower

    Domain clamp;
    clamp.lower = {-1.0, -1.0};
    clamp.upper = {1.0, 1.0};
    clamp.mode = BoundaryMode::clamp;
    const Vec p = project(clamp, {2.0, -3.0});
    CHECK(p[0] == 1.0);
    CHECK(p[1] == -1.0);

    // wrapped points always land inside [lower, upper)
    Rng rng(3, 0);
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.uniform(-50.0, 50.0);
        const double y = project(wrap, {x})[0];
        CHECK(y >= -1.0);
        CHECK(y < 1.0);
    }
}

TEST_CASE("potential spec parsing") {
    CHECK(parse_potential("quadratic:d=2,a=1")->id() == "quadratic:d=2,a=1");
    CHECK(parse_potential("flat_sharp:d=3,s=0.5,ff=2,k=1")->id() == "flat_sharp:d=3,s=0.5,ff=2,k=1");
    CHECK(parse_potential("wedge:d=5,k=1,L=1")->id() == "wedge:d=5,k=1,L=1");
    CHECK(parse_potential("quadratic:d=2,a=1")->dim() == 2);
    CHECK(parse_potential("wedge:d=2")->dim() == 2); // k, L default to 1

    CHECK_THROWS_AS(parse_potential("mystery:d=2"), ConfigError);
    CHECK_THROWS_AS(parse_potential("quadratic"), ConfigError);
    CHECK_THROWS_AS(parse_potential("quadratic:a=1"), ConfigError);
    CHECK_THROWS_AS(parse_potential("quadratic:d=2,zeta=1"), ConfigError);
    CHECK_THROWS_AS(parse_potential("quadratic:d=2,a=zebra"), ConfigError);

    // ids round-trip through the parser
    const auto fs = parse_potential("flat_sharp:d=2,s=0.5,ff=2,k=1");
    CHECK(parse_potential(fs->id())->id() == fs->id());
}
