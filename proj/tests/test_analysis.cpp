#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "flatlab/analysis.hpp"
#include "flatlab/train.hpp"
#include "helpers.hpp"

using namespace flatlab;

TEST_CASE("flatness radius has the quadratic closed form") {
    // U = (a/2)|w|^2 at the origin: radius = sqrt(2 eps / a) in every direction
    for (double a : {1.0, 2.0}) {
        const auto q = make_quadratic(3, a);
        auto loss = [&](const Vec& w) { return q->eval(w); };
        const FlatnessReport rep = flatness_radius(loss, {0.0, 0.0, 0.0}, 0.05, 40, 7);
        const double expect = std::sqrt(2.0 * 0.05 / a);
        REQUIRE(rep.radii.size() == 40);
        CHECK(rep.mean() == doctest::Approx(expect).epsilon(1e-3));
        CHECK(rep.stddev() <= 1e-3 * expect);
        for (double r : rep.radii) CHECK(r == doctest::Approx(expect).epsilon(1.5e-3));
        CHECK(rep.failed == 0);
        CHECK(rep.capped == 0);
    }
}

TEST_CASE("flatness radius is permutation invariant for isotropic potentials") {
    const auto q = make_quadratic(4, 1.0);
    auto loss = [&](const Vec& w) { return q->eval(w); };
    auto permuted = [&](const Vec& w) {
        const Vec p = {w[2], w[0], w[3], w[1]};
        return q->eval(p);
    };
    const Vec origin(4, 0.0);
    const FlatnessReport a = flatness_radius(loss, origin, 0.05, 30, 3);
    const FlatnessReport b = flatness_radius(permuted, origin, 0.05, 30, 3);
    CHECK(std::fabs(a.mean() - b.mean()) <= 1e-6);

    // mask order does not matter either
    std::vector<int> mask1 = {0, 2};
    std::vector<int> mask2 = {2, 0};
    const FlatnessReport m1 = flatness_radius(loss, origin, 0.05, 20, 5, &mask1);
    const FlatnessReport m2 = flatness_radius(loss, origin, 0.05, 20, 5, &mask2);
    CHECK(std::fabs(m1.mean() - m2.mean()) <= 1e-6);
    CHECK(m1.subset_label == "subset");
}

TEST_CASE("flatness radius ratio of flat to sharp cube centers") {
    const auto fs = make_flat_sharp(2, 0.5, 2.0, 1.0);
    auto loss = [&](const Vec& w) { return fs->eval(w); };
    const double eps = 1e-4;
    const FlatnessReport flat = flatness_radius(loss, {2.0, 2.0}, eps, 60, 9);
    const FlatnessReport sharp = flatness_radius(loss, {-2.0, -2.0}, eps, 60, 9);
    CHECK(flat.mean() / sharp.mean() == doctest::Approx(2.0).epsilon(0.3 / 2.0));

    // brute-force oracle: dense ray marching along the same directions
    Rng probe_rng(9, 0);
    for (int k = 0; k < 5; ++k) {
        Rng rng(9, static_cast<std::uint64_t>(k));
        Vec dw(2);
        double norm = 0.0;
        for (auto& x : dw) x = rng.gaussian();
        norm = norm2(dw);
        for (auto& x : dw) x /= norm;
        double r = 0.0;
        const Vec w0 = {2.0, 2.0};
        while (r < 10.0) {
            const Vec p = {w0[0] + r * dw[0], w0[1] + r * dw[1]};
            if (std::fabs(loss(p)) > eps) break;
            r += 1e-4;
        }
        CHECK(flat.radii[static_cast<std::size_t>(k)] == doctest::Approx(r).epsilon(2e-3));
    }
}

TEST_CASE("flatness radius caps and failure handling") {
    auto flat_loss = [](const Vec&) { return 0.0; };
    const FlatnessReport capped = flatness_radius(flat_loss, {0.0, 0.0}, 0.05, 10, 1, nullptr, 100.0);
    CHECK(capped.capped == 10);
    for (double r : capped.radii) CHECK(r == 100.0);

    auto nan_loss = [](const Vec& w) {
        return norm2(w) > 1.0 ? std::nan("") : norm2(w);
    };
    const FlatnessReport failed = flatness_radius(nan_loss, {0.0, 0.0}, 3.0, 8, 1);
    CHECK(failed.failed == 8);
    CHECK(failed.radii.empty());

    CHECK_THROWS_AS(flatness_radius(flat_loss, {0.0}, -0.1, 10, 1), ConfigError);
    CHECK_THROWS_AS(flatness_radius(flat_loss, {0.0}, 0.1, 0, 1), ConfigError);
}

TEST_CASE("simplex interpolation grid") {
    Rng rng(21, 0);
    Vec w1(6), w2(6), w3(6);
    for (std::size_t i = 0; i < 6; ++i) {
        w1[i] = rng.gaussian();
        w2[i] = rng.gaussian();
        w3[i] = rng.gaussian();
    }
    auto eval = [&](const Vec& w) {
        double d1 = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) d1 += (w[i] - w1[i]) * (w[i] - w1[i]);
        return std::make_pair(d1, d1 < 0.25 ? 1.0 : 0.0);
    };
    const int m = 12;
    const SimplexSurface s = simplex_interpolation(eval, w1, w2, w3, m);
    CHECK(s.rows.size() == static_cast<std::size_t>((m + 1) * (m + 2) / 2));

    int vertices_hit = 0;
    for (const auto& r : s.rows) {
        CHECK(r.l1 + r.l2 + r.l3 == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(r.x == doctest::Approx(r.l2 + 0.5 * r.l3));
        CHECK(r.y == doctest::Approx(0.5 * std::sqrt(3.0) * r.l3));
        if (r.l1 == 1.0) {
            CHECK(r.loss == 0.0); // vertex reproduces w1 exactly
            CHECK(r.accuracy == 1.0);
            ++vertices_hit;
        }
        if (r.l2 == 1.0) {
            CHECK(r.loss == eval(w2).first);
            ++vertices_hit;
        }
        if (r.l3 == 1.0) {
            CHECK(r.loss == eval(w3).first);
            ++vertices_hit;
        }
    }
    CHECK(vertices_hit == 3);

    // identical minimizers give a constant surface
    const SimplexSurface flat = simplex_interpolation(eval, w1, w1, w1, 5);
    for (const auto& r : flat.rows) CHECK(r.loss == doctest::Approx(0.0).epsilon(1e-12));

    // relabeling permutes the grid values
    const SimplexSurface rot = simplex_interpolation(eval, w2, w3, w1, m);
    std::vector<double> a, b;
    for (const auto& r : s.rows) a.push_back(r.loss);
    for (const auto& r : rot.rows) b.push_back(r.loss);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));

    CHECK_THROWS_AS(simplex_interpolation(eval, w1, w2, Vec{1.0}, m), ConfigError);
    CHECK_THROWS_AS(simplex_interpolation(eval, w1, w2, w3, 1), ConfigError);

    // thread count does not change the surface
    const SimplexSurface threaded = simplex_interpolation(eval, w1, w2, w3, m, 4);
    for (std::size_t i = 0; i < s.rows.size(); ++i)
        CHECK(threaded.rows[i].loss == s.rows[i].loss);
}

TEST_CASE("tv distance is a metric on shared binnings") {
    const Axis axis{0.0, 1.0, 16};
    Rng rng(33, 0);
    auto random_hist = [&]() {
        HistogramND h = HistogramND::zeros({axis});
        for (auto& m : h.mass) m = rng.uniform() + 0.01;
        h.normalize();
        return h;
    };
    for (int trial = 0; trial < 25; ++trial) {
        const HistogramND h1 = random_hist(), h2 = random_hist(), h3 = random_hist();
        CHECK(tv_distance(h1, h1) == 0.0);
        CHECK(tv_distance(h1, h2) == tv_distance(h2, h1));
        CHECK(tv_distance(h1, h2) >= 0.0);
        CHECK(tv_distance(h1, h2) <= 1.0);
        CHECK(tv_distance(h1, h3) <= tv_distance(h1, h2) + tv_distance(h2, h3) + 1e-15);
        if (tv_distance(h1, h2) == 0.0) CHECK(h1.mass == h2.mass);
    }

    // disjoint supports
    HistogramND left = HistogramND::zeros({axis});
    HistogramND right = HistogramND::zeros({axis});
    for (int b = 0; b < 8; ++b) left.mass[static_cast<std::size_t>(b)] = 0.125;
    for (int b = 8; b < 16; ++b) right.mass[static_cast<std::size_t>(b)] = 0.125;
    CHECK(tv_distance(left, right) == 1.0);

    HistogramND other = HistogramND::zeros({Axis{0.0, 1.0, 8}});
    CHECK_THROWS_AS(tv_distance(left, other), ConfigError);
}

TEST_CASE("occupancy fractions") {
    const std::vector<BasinSpec> basins = {{"a", Box{{-1.0}, {-1.0}}, 0.25},
                                           {"b", Box{{1.0}, {1.0}}, 0.25}};
    const std::vector<Vec> at_a(100, Vec{-1.0});
    const auto occ = occupancy(at_a, basins);
    CHECK(occ[0] == 1.0);
    CHECK(occ[1] == 0.0);

    // uniform samples over a symmetric layout split evenly
    Rng rng(44, 0);
    std::vector<Vec> uniform;
    for (int i = 0; i < 100000; ++i) uniform.push_back({rng.uniform(-2.0, 2.0)});
    const auto u = occupancy(uniform, basins);
    CHECK(u[0] == doctest::Approx(u[1]).epsilon(0.05));
    CHECK(u[0] + u[1] <= 1.0);

    // invariant under sample order permutation
    std::vector<Vec> shuffled = uniform;
    for (std::size_t i = shuffled.size() - 1; i > 0; --i)
        std::swap(shuffled[i], shuffled[rng.uniform_index(i + 1)]);
    const auto v = occupancy(shuffled, basins);
    CHECK(u == v);

    CHECK_THROWS_AS(occupancy({}, basins), ConfigError);
}

TEST_CASE("gradient component stats: exact gaussian case") {
    // linear model, square loss, constant target: at w = 0 the per-example
    // gradient of weight j is -x_j, exactly standard gaussian inputs
    const int n = 10000, d_in = 8;
    const MLPSpec spec = MLPSpec::parse("8-1", Activation::softplus, LossKind::square);
    LabeledDataset ds;
    ds.input_dim = d_in;
    ds.classes = 1;
    Rng rng(55, 0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d_in; ++j) ds.inputs.push_back(rng.gaussian());
        ds.labels.push_back(0);
        ds.train_idx.push_back(i);
    }
    const auto U = make_empirical_loss(spec, std::make_shared<const LabeledDataset>(ds));
    const Vec zero(static_cast<std::size_t>(spec.weight_count()), 0.0);

    std::vector<int> comps;
    for (int j = 0; j < d_in; ++j) comps.push_back(j); // weight block
    comps.push_back(d_in);                             // bias: constant gradient
    const auto stats =
        gradient_component_stats(*U, zero, comps, GradStatsMode::per_example, 0, 0, 30, 1, 4);

    const Vec full = U->grad(zero);
    for (int j = 0; j < d_in; ++j) {
        const auto& s = stats[static_cast<std::size_t>(j)];
        CHECK(!s.degenerate);
        CHECK(std::fabs(s.skewness) <= 0.1);
        CHECK(std::fabs(s.excess_kurtosis) <= 0.2);
        CHECK(s.stddev == doctest::Approx(1.0).epsilon(0.05));
        // the per-example mean is the full-gradient component
        CHECK(s.mean == doctest::Approx(full[static_cast<std::size_t>(j)]).epsilon(1e-12));
        CHECK(std::fabs(s.hist.sum() - 1.0) <= 1e-12);
    }
    CHECK(stats.back().degenerate); // bias gradient is exactly -1 for every example
}

TEST_CASE("gradient component stats: degenerate full batch") {
    // all examples identical: any minibatch mean is a point mass
    const MLPSpec spec = MLPSpec::parse("3-4-2", Activation::softplus, LossKind::square);
    LabeledDataset ds;
    ds.input_dim = 3;
    ds.classes = 2;
    for (int i = 0; i < 16; ++i) {
        ds.inputs.insert(ds.inputs.end(), {0.5, -1.0, 2.0});
        ds.labels.push_back(1);
        ds.train_idx.push_back(i);
    }
    const auto U = make_empirical_loss(spec, std::make_shared<const LabeledDataset>(ds));
    const Vec w = init_params(spec, 3);
    const auto stats = gradient_component_stats(*U, w, {0, 5, 11}, GradStatsMode::minibatch_mean,
                                                16, 200, 30, 2);
    for (const auto& s : stats) {
        CHECK(s.degenerate);
        CHECK(s.stddev <= 1e-12);
    }
}

TEST_CASE("spread_indices") {
    const auto idx = spread_indices(1250, 16);
    CHECK(idx.size() == 16);
    for (std::size_t i = 1; i < idx.size(); ++i) CHECK(idx[i] > idx[i - 1]);
    CHECK(idx.front() >= 0);
    CHECK(idx.back() < 1250);
    CHECK(spread_indices(3, 16).size() == 3);
}
