#include "flatlab/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "flatlab/analysis.hpp"
#include "flatlab/boltzmann.hpp"
#include "flatlab/io.hpp"
#include "flatlab/svg.hpp"
#include "flatlab/train.hpp"

namespace flatlab {

namespace {

// ------------------------------------------------------------ plumbing

class Ctx {
  public:
    Ctx(const ExperimentConfig& cfg, std::map<std::string, std::string> defaults)
        : cfg_(cfg), effective_(std::move(defaults)) {
        for (const auto& [key, value] : cfg.params) {
            if (effective_.find(key) == effective_.end())
                throw ConfigError("experiment '" + cfg.name + "': unknown parameter '" + key +
                                  "'");
            effective_[key] = value;
        }
        effective_["experiment"] = cfg.name;
        effective_["seed"] = std::to_string(cfg.seed);
    }

    double num(const std::string& key) const {
        try {
            return std::stod(effective_.at(key));
        } catch (const std::exception&) {
            throw ConfigError("experiment parameter '" + key + "' is not a number");
        }
    }
    int integer(const std::string& key) const { return static_cast<int>(std::llround(num(key))); }
    std::string str(const std::string& key) const { return effective_.at(key); }
    std::uint64_t seed() const { return cfg_.seed; }
    int threads() const { return std::max(1, cfg_.threads); }

    // effective config embedded in every artifact (thread count excluded:
    // it must not influence output bytes)
    const std::map<std::string, std::string>& header() const { return effective_; }

    std::filesystem::path path(const std::string& name) {
        artifacts_.push_back(name);
        return cfg_.out_dir / name;
    }

    void write_table(const std::string& name, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows, const char* fmt = "%.12g") {
        write_csv(path(name), header(), columns, rows, fmt);
    }

    void write_hist(const std::string& name, const HistogramND& hist,
                    std::map<std::string, std::string> extra = {}) {
        auto meta = header();
        meta.merge(extra);
        write_histogram_csv(path(name), meta, hist);
    }

    ExperimentResult finish(std::map<std::string, double> summary) {
        // summary.csv: one row per key
        {
            auto out_path = path("summary.csv");
            std::string text;
            for (const auto& [k, v] : header()) text += "# " + k + " = " + v + "\n";
            text += "key,value\n";
            for (const auto& [key, value] : summary)
                text += key + "," + format_double(value, "%.12g") + "\n";
            write_file(out_path, text);
        }

        std::sort(artifacts_.begin(), artifacts_.end());
        std::string manifest;
        for (const auto& name : artifacts_) {
            const std::string content = read_file(cfg_.out_dir / name);
            char digest[32];
            std::snprintf(digest, sizeof(digest), "%016llx",
                          static_cast<unsigned long long>(fnv1a64(content)));
            manifest += std::string(digest) + "  " + name + "\n";
        }
        write_file(cfg_.out_dir / "manifest.txt", manifest);

        ExperimentResult result;
        result.summary = std::move(summary);
        result.artifacts = artifacts_;
        result.artifacts.push_back("manifest.txt");
        return result;
    }

  private:
    const ExperimentConfig& cfg_;
    std::map<std::string, std::string> effective_;
    std::vector<std::string> artifacts_;
};

std::vector<std::vector<double>> log_rows(const std::vector<EpochLog>& log) {
    std::vector<std::vector<double>> rows;
    rows.reserve(log.size());
    for (const auto& e : log)
        rows.push_back({static_cast<double>(e.step), e.train_loss, e.train_acc, e.heldout_loss,
                        e.heldout_acc});
    return rows;
}

const std::vector<std::string> kLogColumns = {"step", "train_loss", "train_acc", "heldout_loss",
                                              "heldout_acc"};

// Shared blobs+MLP setup used by the model-based experiments.
struct ModelSetup {
    MLPSpec spec;
    std::shared_ptr<const LabeledDataset> data;
};

ModelSetup model_setup(const Ctx& ctx, bool random_labels) {
    ModelSetup s;
    s.spec = MLPSpec::parse(ctx.str("arch"), parse_activation(ctx.str("act")),
                            parse_loss(ctx.str("loss")));
    LabeledDataset ds = make_blobs(ctx.integer("n"), ctx.integer("d_in"), ctx.integer("classes"),
                                   ctx.num("spread"), ctx.seed());
    if (random_labels) ds = randomize_labels(ds, ctx.seed() + 7);
    s.data = std::make_shared<const LabeledDataset>(std::move(ds));
    return s;
}

TrainResult train_one(const Ctx& ctx, const ModelSetup& setup, Rule rule, std::uint64_t train_seed,
                      std::int64_t max_steps) {
    TrainConfig tc;
    tc.rule = rule;
    tc.gamma = Schedule::constant(ctx.num("gamma"));
    if (rule == Rule::sgdl) tc.noise = NoiseMode::parse(ctx.str("sgdl_noise"));
    tc.batch_size = ctx.integer("batch");
    tc.max_steps = max_steps;
    tc.target_loss = ctx.num("target_loss");
    tc.seed = train_seed;
    return train_to_interpolation(setup.spec, setup.data, tc);
}

// Stationary-start Langevin sampling: chains are initialized from exact
// rejection-oracle draws, so the post-burn-in pool tests that the dynamics
// preserves the Boltzmann law. At the low temperatures used here the basin
// barrier is hundreds of T and within-chain crossings are unobservable, so
// an ergodic (single chain) run could not equilibrate across basins in any
// feasible step budget.
struct StationaryRun {
    std::vector<Vec> oracle_points;
    std::vector<Vec> dynamics_points;
    double acceptance = 0.0;
};

StationaryRun stationary_gdl(const Potential& pot, double T, double gamma, int traj,
                             std::int64_t steps, std::int64_t burn, std::int64_t thin,
                             int oracle_count, std::uint64_t seed, int threads) {
    RejectionResult oracle =
        rejection_sample(pot, T, std::max(oracle_count, traj), seed + 1, threads);
    std::vector<Vec> inits(oracle.samples.samples.begin(), oracle.samples.samples.begin() + traj);

    DynamicsConfig dc;
    dc.rule = Rule::gdl;
    dc.step = Schedule::constant(gamma);
    dc.noise = NoiseMode::stationary(T);
    dc.total_steps = steps;
    dc.burn_in = burn;
    dc.thinning = thin;
    dc.seed = seed;

    StationaryRun run;
    run.dynamics_points = pool_samples(run_trajectories(pot, dc, traj, &inits, threads));
    run.oracle_points = std::move(oracle.samples.samples);
    run.acceptance = oracle.acceptance_rate;
    return run;
}

// ------------------------------------------------------------ experiments

// Gradient-noise Gaussianity at a trained minimum (per-example components
// and minibatch means).
ExperimentResult fig_gauss_noise(const ExperimentConfig& cfg) {
    Ctx ctx(cfg, {{"n", "256"},
                  {"d_in", "10"},
                  {"classes", "2"},
                  {"spread", "0.5"},
                  {"arch", "10-64-2"},
                  {"act", "softplus"},
                  {"loss", "square"},
                  {"gamma", "0.1"},
                  {"batch", "32"},
                  {"max_steps", "60000"},
                  {"target_loss", "1e-3"},
                  {"sgdl_noise", "none"},
                  {"components", "12"},
                  {"mb_batch", "64"},
                  {"mb_draws", "3000"},
                  {"bins", "30"}});

    const ModelSetup setup = model_setup(ctx, false);
    const TrainResult tr = train_one(ctx, setup, Rule::sgd, ctx.seed() + 11,
                                     static_cast<std::int64_t>(ctx.num("max_steps")));
    ctx.write_table("train_log.csv", kLogColumns, log_rows(tr.log));

    const auto U = make_empirical_loss(setup.spec, setup.data);
    const std::vector<int> comps = spread_indices(U->dim(), ctx.integer("components"));

    const auto per_example =
        gradient_component_stats(*U, tr.params, comps, GradStatsMode::per_example, 0, 0,
                                 ctx.integer("bins"), ctx.seed(), ctx.threads());
    const auto minibatch = gradient_component_stats(
        *U, tr.params, comps, GradStatsMode::minibatch_mean, ctx.integer("mb_batch"),
        ctx.integer("mb_draws"), ctx.integer("bins"), ctx.seed() + 3, ctx.threads());

    std::vector<std::vector<double>> rows;
    auto add_stats = [&rows](const std::vector<ComponentStats>& stats, double mode) {
        for (const auto& s : stats)
            rows.push_back({mode, static_cast<double>(s.index), s.mean, s.stddev, s.skewness,
                            s.excess_kurtosis, s.degenerate ? 1.0 : 0.0});
    };
    add_stats(per_example, 0);
    add_stats(minibatch, 1);
    ctx.write_table("stats.csv",
                    {"mode", "component", "mean", "stddev", "skewness", "excess_kurtosis",
                     "degenerate"},
                    rows);

    auto plot = [&](const std::string& name, const std::vector<ComponentStats>& stats) {
        std::vector<std::string> labels;
        std::vector<HistogramND> hists;
        for (std::size_t j = 0; j < stats.size() && hists.size() < 4; ++j) {
            if (stats[j].degenerate) continue;
            labels.push_back("component " + std::to_string(stats[j].index));
            hists.push_back(stats[j].hist);
        }
        if (!hists.empty())
            svg_histograms(ctx.path(name), ctx.header(), "gradient component distribution",
                           "gradient value", labels, hists);
    };
    plot("per_example_hist.svg", per_example);
    plot("minibatch_hist.svg", minibatch);

    int ok = 0, considered = 0;
    for (const auto& s : minibatch) {
        if (s.degenerate) continue;
        ++considered;
        if (std::fabs(s.skewness) <= 0.5 && std::fabs(s.excess_kurtosis) <= 1.0) ++ok;
    }
    return ctx.finish({{"interpolated", tr.interpolated ? 1.0 : 0.0},
                       {"train_loss", tr.log.back().train_loss},
                       {"gaussian_fraction", considered ? static_cast<double>(ok) / considered : 0.0},
                       {"components_considered", static_cast<double>(considered)}});
}

// SGD versus SGDL: (a) training/validation parity on the blobs task,
// (b) both rules sampling the 2D wedge against the Boltzmann oracle.
ExperimentResult fig_sgdl_vs_sgd(const ExperimentConfig& cfg) {
    Ctx ctx(cfg, {{"n", "256"},
                  {"d_in", "10"},
                  {"classes", "2"},
                  {"spread", "0.5"},
                  {"arch", "10-64-2"},
                  {"act", "softplus"},
                  {"loss", "square"},
                  {"gamma", "0.1"},
                  {"batch", "32"},
                  {"max_steps", "60000"},
                  {"target_loss", "1e-3"},
                  {"sgdl_noise", "anneal:inverse_sqrt_t:base=0.02"},
                  {"wedge_T", "0.01"},
                  {"wedge_gamma", "0.01"},
                  {"wedge_n_examples", "64"},
                  {"wedge_batch", "8"},
                  {"wedge_traj", "1500"},
                  {"wedge_steps", "4000"},
                  {"wedge_burn", "1000"},
                  {"wedge_thin", "10"},
                  {"oracle_n", "20000"},
                  {"bins", "40"}});

    // (a) training parity
    const ModelSetup setup = model_setup(ctx, false);
    const auto max_steps = static_cast<std::int64_t>(ctx.num("max_steps"));
    const TrainResult sgd = train_one(ctx, setup, Rule::sgd, ctx.seed() + 11, max_steps);
    const TrainResult sgdl = train_one(ctx, setup, Rule::sgdl, ctx.seed() + 11, max_steps);
    ctx.write_table("sgd_log.csv", kLogColumns, log_rows(sgd.log));
    ctx.write_table("sgdl_log.csv", kLogColumns, log_rows(sgdl.log));

    SvgSeries s1{"sgd", {}, {}}, s2{"sgdl", {}, {}};
    for (const auto& e : sgd.log) {
        s1.x.push_back(static_cast<double>(e.step));
        s1.y.push_back(e.heldout_acc);
    }
    for (const auto& e : sgdl.log) {
        s2.x.push_back(static_cast<double>(e.step));
        s2.y.push_back(e.heldout_acc);
    }
    svg_lines(ctx.path("validation_curves.svg"), ctx.header(), "held-out accuracy, SGD vs SGDL",
              "step", "accuracy", {s1, s2});

    // (b) wedge sampling with minibatch noise
    const double T = ctx.num("wedge_T");
    const double gamma = ctx.num("wedge_gamma");
    const int n_ex = ctx.integer("wedge_n_examples");
    const int batch = ctx.integer("wedge_batch");
    const int traj = ctx.integer("wedge_traj");
    const auto pot = make_wedge(2, 1.0, 1.0);

    const RejectionResult oracle =
        rejection_sample(*pot, T, std::max(ctx.integer("oracle_n"), traj), ctx.seed() + 1,
                         ctx.threads());
    std::vector<Vec> inits(oracle.samples.samples.begin(), oracle.samples.samples.begin() + traj);

    // eta amplitude realizing an effective temperature T through minibatch
    // noise alone: gamma * amp^2 / (2 * batch) = T_mb
    auto run_rule = [&](Rule rule, double t_mb, std::uint64_t seed_shift) {
        const double amp = std::sqrt(2.0 * t_mb * batch / gamma);
        const auto emp = make_synthetic_decomposition(pot, n_ex, amp, ctx.seed() + seed_shift);
        DynamicsConfig dc;
        dc.rule = rule;
        dc.step = Schedule::constant(gamma);
        if (rule == Rule::sgdl) dc.noise = NoiseMode::stationary(T - t_mb);
        dc.batch_size = batch;
        dc.total_steps = static_cast<std::int64_t>(ctx.num("wedge_steps"));
        dc.burn_in = static_cast<std::int64_t>(ctx.num("wedge_burn"));
        dc.thinning = static_cast<std::int64_t>(ctx.num("wedge_thin"));
        dc.seed = ctx.seed() + seed_shift + 1;
        return pool_samples(run_trajectories(*emp, dc, traj, &inits, ctx.threads()));
    };
    // sgd: all of T carried by minibatch noise; sgdl: half and half
    const std::vector<Vec> sgd_points = run_rule(Rule::sgd, T, 100);
    const std::vector<Vec> sgdl_points = run_rule(Rule::sgdl, 0.5 * T, 200);

    const int bins = ctx.integer("bins");
    const HistogramND h_oracle = marginal_samples(oracle.samples.samples, *pot, 0, bins);
    const HistogramND h_sgd = marginal_samples(sgd_points, *pot, 0, bins);
    const HistogramND h_sgdl = marginal_samples(sgdl_points, *pot, 0, bins);
    ctx.write_hist("wedge_hist_oracle.csv", h_oracle);
    ctx.write_hist("wedge_hist_sgd.csv", h_sgd);
    ctx.write_hist("wedge_hist_sgdl.csv", h_sgdl);
    svg_histograms(ctx.path("wedge_hist.svg"), ctx.header(),
                   "wedge d=2: first-coordinate marginal", "w1", {"oracle", "sgd", "sgdl"},
                   {h_oracle, h_sgd, h_sgdl});

    const auto basins = default_basins(*pot);
    const auto occ_oracle = occupancy(oracle.samples.samples, basins);
    const auto occ_sgd = occupancy(sgd_points, basins);
    const auto occ_sgdl = occupancy(sgdl_points, basins);

    return ctx.finish({{"sgd_train_loss", sgd.log.back().train_loss},
                       {"sgdl_train_loss", sgdl.log.back().train_loss},
                       {"sgd_heldout_acc", sgd.log.back().heldout_acc},
                       {"sgdl_heldout_acc", sgdl.log.back().heldout_acc},
                       {"sgd_interpolated", sgd.interpolated ? 1.0 : 0.0},
                       {"sgdl_interpolated", sgdl.interpolated ? 1.0 : 0.0},
                       {"occ_slab_oracle", occ_oracle[1]},
                       {"occ_slab_sgd", occ_sgd[1]},
                       {"occ_slab_sgdl", occ_sgdl[1]},
                       {"tv_sgd_oracle", tv_distance(h_sgd, h_oracle)},
                       {"tv_sgdl_oracle", tv_distance(h_sgdl, h_oracle)}});
}

// Flat-basin mass versus dimension on the two-cube landscape.
ExperimentResult fig_flat_volume_dims(const ExperimentConfig& cfg) {
    Ctx ctx(cfg, {{"d_max", "5"},
                  {"s", "0.5"},
                  {"ff", "2"},
                  {"k", "1"},
                  {"T", "1e-4"},
                  {"gamma", "0.01"},
                  {"traj", "2000"},
                  {"steps", "5000"},
                  {"burn", "2000"},
                  {"thin", "10"},
                  {"oracle_n", "4000"},
                  {"bins", "40"}});

    const int d_max = ctx.integer("d_max");
    const double T = ctx.num("T");
    std::vector<std::vector<double>> occ_rows;
    std::map<std::string, double> summary;
    std::vector<std::string> hist_labels;
    std::vector<HistogramND> hist_list;

    for (int d = 1; d <= d_max; ++d) {
        const auto pot = make_flat_sharp(d, ctx.num("s"), ctx.num("ff"), ctx.num("k"));
        const StationaryRun run = stationary_gdl(
            *pot, T, ctx.num("gamma"), ctx.integer("traj"),
            static_cast<std::int64_t>(ctx.num("steps")), static_cast<std::int64_t>(ctx.num("burn")),
            static_cast<std::int64_t>(ctx.num("thin")), ctx.integer("oracle_n"), ctx.seed() + d,
            ctx.threads());

        const auto basins = default_basins(*pot);
        const double occ_gdl = occupancy(run.dynamics_points, basins)[1];
        const double occ_oracle = occupancy(run.oracle_points, basins)[1];
        const double prediction = std::pow(2.0, d) / (std::pow(2.0, d) + 1.0);
        occ_rows.push_back({static_cast<double>(d), occ_gdl, occ_oracle, prediction});
        summary["occ_gdl_d" + std::to_string(d)] = occ_gdl;
        summary["occ_oracle_d" + std::to_string(d)] = occ_oracle;
        summary["prediction_d" + std::to_string(d)] = prediction;

        const int bins = ctx.integer("bins");
        const HistogramND h_gdl = marginal_samples(run.dynamics_points, *pot, 0, bins);
        ctx.write_hist("hist_d" + std::to_string(d) + "_gdl.csv", h_gdl);
        ctx.write_hist("hist_d" + std::to_string(d) + "_oracle.csv",
                       marginal_samples(run.oracle_points, *pot, 0, bins));
        hist_labels.push_back("d=" + std::to_string(d));
        hist_list.push_back(h_gdl);
    }

    ctx.write_table("occupancy.csv", {"d", "occ_gdl", "occ_oracle", "volume_prediction"}, occ_rows);
    svg_histograms(ctx.path("marginals.svg"), ctx.header(),
                   "first-coordinate marginal of stationary GDL, d = 1..5", "w1", hist_labels,
                   hist_list);
    return ctx.finish(std::move(summary));
}

// Degenerate slab versus sharp point on the 2D wedge (Langevin only).
ExperimentResult fig_wedge_2d(const ExperimentConfig& cfg) {
    Ctx ctx(cfg, {{"k", "1"},
                  {"L", "1"},
                  {"T", "0.01"},
                  {"gamma", "0.01"},
                  {"traj", "1500"},
                  {"steps", "4000"},
                  {"burn", "1000"},
                  {"thin", "10"},
                  {"oracle_n", "20000"},
                  {"bins", "40"}});

    const auto pot = make_wedge(2, ctx.num("k"), ctx.num("L"));
    const double T = ctx.num("T");
    const StationaryRun run = stationary_gdl(
        *pot, T, ctx.num("gamma"), ctx.integer("traj"), static_cast<std::int64_t>(ctx.num("steps")),
        static_cast<std::int64_t>(ctx.num("burn")), static_cast<std::int64_t>(ctx.num("thin")),
        ctx.integer("oracle_n"), ctx.seed(), ctx.threads());

    const int bins = ctx.integer("bins");
    const HistogramND h_gdl = marginal_samples(run.dynamics_points, *pot, 0, bins);
    const HistogramND h_oracle = marginal_samples(run.oracle_points, *pot, 0, bins);
    ctx.write_hist("hist_gdl.csv", h_gdl);
    ctx.write_hist("hist_oracle.csv", h_oracle);
    svg_histograms(ctx.path("hist.svg"), ctx.header(), "wedge d=2: first-coordinate marginal",
                   "w1", {"gdl", "oracle"}, {h_gdl, h_oracle});

    const auto basins = default_basins(*pot);
    const auto occ_gdl = occupancy(run.dynamics_points, basins);
    const auto occ_oracle = occupancy(run.oracle_points, basins);
    return ctx.finish({{"occ_point_gdl", occ_gdl[0]},
                       {"occ_slab_gdl", occ_gdl[1]},
                       {"occ_point_oracle", occ_oracle[0]},
                       {"occ_slab_oracle", occ_oracle[1]},
                       {"tv_gdl_oracle", tv_distance(h_gdl, h_oracle)}});
}

// Slab concentration sharpening with dimension on the wedge.
ExperimentResult fig_wedge_5d(const ExperimentConfig& cfg) {
    Ctx ctx(cfg, {{"k", "1"},
                  {"L", "1"},
                  {"T", "0.05"},
                  {"gamma", "0.01"},
                  {"traj", "800"},
                  {"steps", "4000"},
                  {"burn", "1000"},
                  {"thin", "10"},
                  {"bins", "40"}});

    std::map<std::string, double> summary;
    std::vector<std::string> labels;
    std::vector<HistogramND> hists;
    std::vector<std::vector<double>> occ_rows;
    for (int d = 2; d <= 5; ++d) {
        const auto pot = make_wedge(d, ctx.num("k"), ctx.num("L"));
        const StationaryRun run = stationary_gdl(
            *pot, ctx.num("T"), ctx.num("gamma"), ctx.integer("traj"),
            static_cast<std::int64_t>(ctx.num("steps")), static_cast<std::int64_t>(ctx.num("burn")),
            static_cast<std::int64_t>(ctx.num("thin")), ctx.integer("traj"), ctx.seed() + d,
            ctx.threads());
        const HistogramND h = marginal_samples(run.dynamics_points, *pot, 0, ctx.integer("bins"));
        ctx.write_hist("hist_d" + std::to_string(d) + ".csv", h);
        labels.push_back("d=" + std::to_string(d));
        hists.push_back(h);
        const auto occ = occupancy(run.dynamics_points, default_basins(*pot));
        occ_rows.push_back({static_cast<double>(d), occ[0], occ[1]});
        summary["occ_slab_d" + std::to_string(d)] = occ[1];
    }
    ctx.write_table("occupancy.csv", {"d", "occ_point", "occ_slab"}, occ_rows);
    svg_histograms(ctx.path("marginals.svg"), ctx.header(),
                   "wedge: first-coordinate marginal of GDL, d = 2..5", "w1", labels, hists);
    return ctx.finish(std::move(summary));
}

// Shared by fig-interp and table-flatness: three interpolating minima per
// label mode.
struct MinimaSet {
    ModelSetup natural;
    ModelSetup random;
    std::vector<Vec> w_natural;
    std::vector<Vec> w_random;
    double interpolated = 1.0;
};

MinimaSet train_minima(const Ctx& ctx, int count) {
    MinimaSet set;
    set.natural = model_setup(ctx, false);
    set.random = model_setup(ctx, true);
    const auto natural_steps = static_cast<std::int64_t>(ctx.num("max_steps"));
    const auto random_steps = static_cast<std::int64_t>(ctx.num("max_steps_random"));
    for (int i = 0; i < count; ++i) {
        TrainResult tn = train_one(ctx, set.natural, Rule::sgd, ctx.seed() + 11 + i, natural_steps);
        TrainResult tr = train_one(ctx, set.random, Rule::sgd, ctx.seed() + 11 + i, random_steps);
        if (!tn.interpolated || !tr.interpolated) set.interpolated = 0.0;
        set.w_natural.push_back(std::move(tn.params));
        set.w_random.push_back(std::move(tr.params));
    }
    return set;
}

const std::map<std::string, std::string> kMinimaDefaults = {
    {"n", "256"},          {"d_in", "10"},      {"classes", "2"},
    {"spread", "0.5"},     {"arch", "10-96-2"}, {"act", "softplus"},
    {"loss", "square"},    {"gamma", "0.1"},    {"batch", "32"},
    {"max_steps", "60000"}, {"max_steps_random", "400000"}, {"target_loss", "1e-3"},
    {"sgdl_noise", "none"}, {"minima", "3"}};

// Three-point interpolation surfaces, natural versus random labels.
ExperimentResult fig_interp(const ExperimentConfig& cfg) {
    auto defaults = kMinimaDefaults;
    defaults["m"] = "30";
    defaults["acc_threshold"] = "0.99";
    Ctx ctx(cfg, defaults);

    const MinimaSet set = train_minima(ctx, 3);
    const int m = ctx.integer("m");

    auto surface_for = [&](const ModelSetup& setup, const std::vector<Vec>& w) {
        auto eval = [&](const Vec& params) {
            return std::make_pair(
                loss_value(setup.spec, params, *setup.data, setup.data->train_idx),
                accuracy(setup.spec, params, *setup.data, setup.data->train_idx));
        };
        return simplex_interpolation(eval, w[0], w[1], w[2], m, ctx.threads());
    };
    const SimplexSurface nat = surface_for(set.natural, set.w_natural);
    const SimplexSurface rnd = surface_for(set.random, set.w_random);

    auto rows_for = [](const SimplexSurface& s) {
        std::vector<std::vector<double>> rows;
        for (const auto& r : s.rows) rows.push_back({r.l1, r.l2, r.l3, r.x, r.y, r.loss, r.accuracy});
        return rows;
    };
    const std::vector<std::string> cols = {"lambda1", "lambda2", "lambda3", "x", "y",
                                           "loss",    "accuracy"};
    ctx.write_table("interp_natural.csv", cols, rows_for(nat), "%.17g");
    ctx.write_table("interp_random.csv", cols, rows_for(rnd), "%.17g");
    svg_simplex(ctx.path("interp_natural.svg"), ctx.header(),
                "train accuracy between minima (natural labels)", nat, true);
    svg_simplex(ctx.path("interp_random.svg"), ctx.header(),
                "train accuracy between minima (random labels)", rnd, true);

    const double thr = ctx.num("acc_threshold");
    return ctx.finish({{"interpolated", set.interpolated},
                       {"area_natural", nat.area_fraction_accuracy(thr)},
                       {"area_random", rnd.area_fraction_accuracy(thr)},
                       {"vertex_acc_natural", nat.rows.front().accuracy},
                       {"vertex_acc_random", rnd.rows.front().accuracy}});
}

// Flatness-radius table, natural versus random labels, all-parameter and
// top-layer direction subsets.
ExperimentResult table_flatness(const ExperimentConfig& cfg) {
    auto defaults = kMinimaDefaults;
    defaults["epsilon"] = "0.05";
    defaults["directions"] = "50";
    defaults["r_max"] = "1e3";
    Ctx ctx(cfg, defaults);

    const MinimaSet set = train_minima(ctx, ctx.integer("minima"));

    const auto [top_begin, top_end] = set.natural.spec.top_layer_range();
    std::vector<int> top_mask;
    for (int i = top_begin; i < top_end; ++i) top_mask.push_back(i);

    std::vector<std::vector<double>> rows;
    std::map<std::string, double> summary;
    // labels: 0 natural / 1 random; subset: 0 all params / 1 top layer
    for (int label_mode = 0; label_mode < 2; ++label_mode) {
        const ModelSetup& setup = label_mode == 0 ? set.natural : set.random;
        const auto& minima = label_mode == 0 ? set.w_natural : set.w_random;
        for (int subset = 0; subset < 2; ++subset) {
            std::vector<double> pooled;
            for (std::size_t i = 0; i < minima.size(); ++i) {
                auto loss_eval = [&](const Vec& w) {
                    return loss_value(setup.spec, w, *setup.data, setup.data->train_idx);
                };
                const FlatnessReport report = flatness_radius(
                    loss_eval, minima[i], ctx.num("epsilon"), ctx.integer("directions"),
                    ctx.seed() + 31 * (label_mode + 1) + static_cast<std::uint64_t>(i),
                    subset == 0 ? nullptr : &top_mask, ctx.num("r_max"), ctx.threads());
                rows.push_back({static_cast<double>(label_mode), static_cast<double>(subset),
                                static_cast<double>(i), report.mean(), report.stddev(),
                                static_cast<double>(report.radii.size()),
                                static_cast<double>(report.failed),
                                static_cast<double>(report.capped)});
                pooled.insert(pooled.end(), report.radii.begin(), report.radii.end());
            }
            double pooled_mean = 0.0;
            for (double r : pooled) pooled_mean += r;
            pooled_mean /= static_cast<double>(pooled.size());
            double pooled_var = 0.0;
            for (double r : pooled) pooled_var += (r - pooled_mean) * (r - pooled_mean);
            const double pooled_std =
                pooled.size() > 1 ? std::sqrt(pooled_var / static_cast<double>(pooled.size() - 1))
                                  : 0.0;
            rows.push_back({static_cast<double>(label_mode), static_cast<double>(subset), -1.0,
                            pooled_mean, pooled_std, static_cast<double>(pooled.size()), 0.0, 0.0});
            const std::string key = std::string(label_mode == 0 ? "natural" : "random") + "_" +
                                    (subset == 0 ? "all" : "top");
            summary["radius_" + key] = pooled_mean;
            summary["radius_std_" + key] = pooled_std;
        }
    }
    // minimum = -1 rows hold the pooled statistics across minima
    ctx.write_table("table.csv",
                    {"random_labels", "top_layer", "minimum", "mean_radius", "std_radius",
                     "directions", "failed", "capped"},
                    rows);
    summary["ratio_all"] = summary["radius_natural_all"] / summary["radius_random_all"];
    summary["ratio_top"] = summary["radius_natural_top"] / summary["radius_random_top"];
    summary["interpolated"] = set.interpolated;
    return ctx.finish(std::move(summary));
}

} // namespace

std::vector<std::string> experiment_names() {
    return {"fig-gauss-noise", "fig-sgdl-vs-sgd", "fig-flat-volume-dims", "fig-wedge-2d",
            "fig-wedge-5d",    "fig-interp",      "table-flatness"};
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    if (config.name == "fig-gauss-noise") return fig_gauss_noise(config);
    if (config.name == "fig-sgdl-vs-sgd") return fig_sgdl_vs_sgd(config);
    if (config.name == "fig-flat-volume-dims") return fig_flat_volume_dims(config);
    if (config.name == "fig-wedge-2d") return fig_wedge_2d(config);
    if (config.name == "fig-wedge-5d") return fig_wedge_5d(config);
    if (config.name == "fig-interp") return fig_interp(config);
    if (config.name == "table-flatness") return table_flatness(config);
    std::string known;
    for (const auto& n : experiment_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown experiment '" + config.name + "'; known experiments: " + known);
}

} // namespace flatlab
