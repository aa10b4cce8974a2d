#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flatlab/boltzmann.hpp"
#include "helpers.hpp"

using namespace flatlab;

namespace {

PotentialPtr uniform_potential(int d, double lo, double hi) {
    Domain dom;
    dom.lower.assign(static_cast<std::size_t>(d), lo);
    dom.upper.assign(static_cast<std::size_t>(d), hi);
    dom.mode = BoundaryMode::wrap;
    Box whole{dom.lower, dom.upper};
    return make_custom(
        d, dom, "custom:uniform", [](const Vec&) { return 0.0; },
        [d](const Vec&) { return Vec(static_cast<std::size_t>(d), 0.0); },
        {{"everything", whole}});
}

double sample_variance_coord(const std::vector<Vec>& pts, int coord) {
    double mean = 0.0;
    for (const auto& p : pts) mean += p[static_cast<std::size_t>(coord)];
    mean /= static_cast<double>(pts.size());
    double var = 0.0;
    for (const auto& p : pts) {
        const double d = p[static_cast<std::size_t>(coord)] - mean;
        var += d * d;
    }
    return var / static_cast<double>(pts.size() - 1);
}

} // namespace

TEST_CASE("partition values") {
    // U == 0 on [0,1]: Z is the box volume
    CHECK(partition(*uniform_potential(1, 0.0, 1.0), 1.0, 256) == doctest::Approx(1.0));

    // gaussian integral: quadratic a=1, T=1 on a wide box
    const auto q = make_quadratic(1, 1.0, 8.0);
    CHECK(partition(*q, 1.0, 8192) == doctest::Approx(std::sqrt(2.0 * M_PI)).epsilon(1e-3 / 2.5));

    // flat_sharp d=1: zero-set lengths are 0.5 + 1.0; boundary layers add
    // 4*sqrt(pi T / 2): frozen against a high-resolution quadrature oracle
    const auto fs = make_flat_sharp(1, 0.5, 2.0, 1.0);
    const double z_cold = partition(*fs, 1e-6, 131072);
    CHECK(z_cold == doctest::Approx(1.5).epsilon(0.02)); // T -> 0 limit: total zero-set length
    CHECK(z_cold == doctest::Approx(1.505013).epsilon(1e-3));
    const double z_warm = partition(*fs, 0.01, 16384);
    CHECK(z_warm == doctest::Approx(2.001326).epsilon(5e-3));

    // doubling the resolution is the error estimate
    CHECK(std::fabs(partition(*fs, 0.01, 8192) - z_warm) / z_warm < 5e-3);

    CHECK_THROWS_AS(partition(*make_quadratic(4, 1.0), 1.0, 64), ConfigError);
    CHECK_THROWS_AS(partition(*q, -1.0, 64), ConfigError);
}

TEST_CASE("rejection sampling: uniform and gaussian closed forms") {
    const auto flat = uniform_potential(2, -1.0, 1.0);
    const RejectionResult res = rejection_sample(*flat, 1.0, 200000, 4, 4);
    CHECK(res.acceptance_rate == 1.0);
    const HistogramND h = marginal_samples(res.samples.samples, *flat, 0, 20);
    HistogramND expect = HistogramND::zeros({h.axes[0]});
    for (auto& m : expect.mass) m = 1.0 / 20.0;
    CHECK(tv_distance(h, expect) <= 0.01);

    const auto q = make_quadratic(1, 1.0);
    const RejectionResult g = rejection_sample(*q, 0.5, 1'000'000, 5, 4);
    CHECK(sample_variance_coord(g.samples.samples, 0) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("rejection sampling: flat-basin occupancy in d=2") {
    const auto fs = make_flat_sharp(2, 0.5, 2.0, 1.0);
    const RejectionResult res = rejection_sample(*fs, 1e-4, 100000, 6, 4);
    const auto basins = default_basins(*fs);
    REQUIRE(basins.size() == 2);
    const auto occ = occupancy(res.samples.samples, basins);
    // volume ratio 4:1 plus the thin boundary layer at this temperature
    CHECK(occ[1] == doctest::Approx(0.8).epsilon(0.02 / 0.8));
    CHECK(occ[0] + occ[1] == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("rejection sampling aborts when the temperature is hopeless") {
    const auto w5 = make_wedge(5, 1.0, 1.0);
    CHECK_THROWS_AS(rejection_sample(*w5, 1e-6, 10, 7, 4), NumericalError);
}

TEST_CASE("quadrature marginals") {
    // uniform density, 10 equal bins
    const HistogramND u = marginal_quadrature(*uniform_potential(1, 0.0, 1.0), 1.0, 0, 10);
    for (double m : u.mass) CHECK(m == doctest::Approx(0.1).epsilon(1e-12));

    // normalization invariants
    const auto fs = make_flat_sharp(2, 0.5, 2.0, 1.0);
    const HistogramND mq = marginal_quadrature(*fs, 1e-3, 0, 40, 128);
    CHECK(std::fabs(mq.sum() - 1.0) <= 1e-9);

    const RejectionResult res = rejection_sample(*fs, 1e-3, 100000, 8, 4);
    const HistogramND ms = marginal_samples(res.samples.samples, *fs, 0, 40);
    CHECK(std::fabs(ms.sum() - 1.0) <= 1e-12);

    CHECK_THROWS_AS(marginal_quadrature(*fs, 1e-3, 0, 5), ConfigError);
    CHECK_THROWS_AS(marginal_quadrature(*fs, 1e-3, 3, 40), ConfigError);
}

TEST_CASE("gaussian marginal passes a chi-square test") {
    // quadratic d=2, T=1: the coord-0 marginal is a standard gaussian
    // truncated to [-4, 4]
    const auto q = make_quadratic(2, 1.0);
    const int n = 100000;
    const RejectionResult res = rejection_sample(*q, 1.0, n, 9, 4);
    const int bins = 40;
    const HistogramND h = marginal_samples(res.samples.samples, *q, 0, bins);

    const double norm = std::erf(4.0 / std::sqrt(2.0));
    double stat = 0.0;
    for (int b = 0; b < bins; ++b) {
        const Axis& a = h.axes[0];
        const double p = 0.5 *
                         (std::erf(a.bin_hi(b) / std::sqrt(2.0)) -
                          std::erf(a.bin_lo(b) / std::sqrt(2.0))) /
                         norm;
        const double observed = h.mass[static_cast<std::size_t>(b)] * n;
        stat += (observed - n * p) * (observed - n * p) / (n * p);
    }
    // chi-square 0.99 quantile at 39 degrees of freedom
    CHECK(stat < 62.4281);
}

TEST_CASE("rejection and quadrature marginals agree") {
    struct Case {
        PotentialPtr pot;
        double T;
        int samples;
    };
    const std::vector<Case> cases = {
        {make_quadratic(1, 1.0), 0.5, 300000},
        {make_quadratic(2, 1.0), 0.5, 300000},
        {make_quadratic(3, 1.0), 0.5, 200000},
        {make_flat_sharp(1, 0.5, 2.0, 1.0), 1e-3, 300000},
        {make_flat_sharp(2, 0.5, 2.0, 1.0), 1e-3, 300000},
        {make_flat_sharp(3, 0.5, 2.0, 1.0), 1e-2, 200000},
        {make_wedge(1, 1.0, 1.0), 0.05, 300000},
        {make_wedge(2, 1.0, 1.0), 0.05, 300000},
        {make_wedge(3, 1.0, 1.0), 0.05, 150000},
    };
    for (const auto& c : cases) {
        CAPTURE(c.pot->id());
        const RejectionResult res = rejection_sample(*c.pot, c.T, c.samples, 11, 4);
        const HistogramND hs = marginal_samples(res.samples.samples, *c.pot, 0, 40);
        const HistogramND hq = marginal_quadrature(*c.pot, c.T, 0, 40, 256);
        CHECK(tv_distance(hs, hq) <= 0.02);
    }
}

TEST_CASE("basin masses") {
    // single basin covering the whole domain
    const auto flat = uniform_potential(2, -1.0, 1.0);
    const auto whole = default_basins(*flat, 0.0);
    const RejectionResult res = rejection_sample(*flat, 1.0, 1000, 13);
    CHECK(occupancy(res.samples.samples, whole)[0] == 1.0);

    // flat_sharp d=1, low T: flat zero-set is twice as long
    const auto fs1 = make_flat_sharp(1, 0.5, 2.0, 1.0);
    const auto mass1 = basin_mass_quadrature(*fs1, 1e-4, default_basins(*fs1), 8192);
    CHECK(mass1[1] == doctest::Approx(2.0 / 3.0).epsilon(0.02 / 0.667));

    // flat_sharp d=5: volume ratio 2^5, rejection oracle
    const auto fs5 = make_flat_sharp(5, 0.5, 2.0, 1.0);
    const RejectionResult r5 = rejection_sample(*fs5, 1e-4, 8000, 15, 4);
    const auto occ5 = occupancy(r5.samples.samples, default_basins(*fs5));
    CHECK(occ5[1] == doctest::Approx(32.0 / 33.0).epsilon(0.01 / 0.97));

    // overlapping basins are a parameter error
    std::vector<BasinSpec> bad = {{"a", Box{{0.0}, {1.0}}, 0.5}, {"b", Box{{1.2}, {2.0}}, 0.5}};
    CHECK_THROWS_AS(check_basins_disjoint(bad), ConfigError);
    CHECK_THROWS_AS(basin_mass_quadrature(*fs1, 1e-4, bad, 64), ConfigError);
}

TEST_CASE("flat-basin mass grows with dimension and sharpens as T drops") {
    // monotone concentration, quadrature side (d <= 3)
    double prev = 0.0;
    for (int d = 1; d <= 3; ++d) {
        const auto fs = make_flat_sharp(d, 0.5, 2.0, 1.0);
        const auto mass = basin_mass_quadrature(*fs, 1e-4, default_basins(*fs), d == 3 ? 256 : 1024);
        const double pred = std::pow(2.0, d) / (std::pow(2.0, d) + 1.0);
        CHECK(mass[1] > prev);
        CHECK(std::fabs(mass[1] - pred) <= 0.05);
        prev = mass[1];
    }

    // temperature limit: halving T does not lose flat mass (up to 0.01)
    const auto fs2 = make_flat_sharp(2, 0.5, 2.0, 1.0);
    double t = 2e-3;
    double at_t = basin_mass_quadrature(*fs2, t, default_basins(*fs2), 1024)[1];
    for (int step = 0; step < 3; ++step) {
        const double at_half = basin_mass_quadrature(*fs2, 0.5 * t, default_basins(*fs2), 1024)[1];
        CHECK(at_half >= at_t - 0.01);
        t *= 0.5;
        at_t = at_half;
    }
}
