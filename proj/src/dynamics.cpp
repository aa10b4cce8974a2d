#include "flatlab/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace flatlab {

// ------------------------------------------------------------- schedules

double Schedule::value(std::int64_t t) const {
    double v = base;
    switch (kind) {
        case ScheduleKind::constant: break;
        case ScheduleKind::inverse_t: v = base / (1.0 + static_cast<double>(t)); break;
        case ScheduleKind::inverse_sqrt_t: v = base / std::sqrt(1.0 + static_cast<double>(t)); break;
    }
    return std::max(floor, v);
}

Schedule Schedule::constant(double base, double floor) {
    Schedule s;
    s.kind = ScheduleKind::constant;
    s.base = base;
    s.floor = floor;
    return s;
}

namespace {

ScheduleKind parse_schedule_kind(const std::string& name) {
    if (name == "constant") return ScheduleKind::constant;
    if (name == "inverse_t") return ScheduleKind::inverse_t;
    if (name == "inverse_sqrt_t") return ScheduleKind::inverse_sqrt_t;
    throw ConfigError("unknown schedule kind '" + name + "'");
}

std::string schedule_kind_name(ScheduleKind k) {
    switch (k) {
        case ScheduleKind::constant: return "constant";
        case ScheduleKind::inverse_t: return "inverse_t";
        case ScheduleKind::inverse_sqrt_t: return "inverse_sqrt_t";
    }
    return "?";
}

double parse_num(const std::string& text, const std::string& what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw ConfigError("bad number in " + what + ": '" + text + "'");
    }
    if (pos != text.size()) throw ConfigError("bad number in " + what + ": '" + text + "'");
    return v;
}

} // namespace

Schedule Schedule::parse(const std::string& text) {
    const auto colon = text.find(':');
    Schedule s;
    s.kind = parse_schedule_kind(text.substr(0, colon));
    if (colon == std::string::npos) throw ConfigError("schedule '" + text + "': missing base");
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    bool have_base = false;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            if (have_base) throw ConfigError("schedule '" + text + "': repeated base");
            s.base = parse_num(item, "schedule");
            have_base = true;
        } else {
            const std::string key = item.substr(0, eq);
            const double v = parse_num(item.substr(eq + 1), "schedule");
            if (key == "base") {
                s.base = v;
                have_base = true;
            } else if (key == "floor") {
                s.floor = v;
            } else {
                throw ConfigError("schedule '" + text + "': unknown key '" + key + "'");
            }
        }
    }
    if (!have_base) throw ConfigError("schedule '" + text + "': missing base");
    if (!(s.base >= 0.0) || !(s.floor >= 0.0))
        throw ConfigError("schedule '" + text + "': base and floor must be >= 0");
    return s;
}

std::string Schedule::to_string() const {
    std::string out = schedule_kind_name(kind) + ":base=" + format_double(base, "%.17g");
    if (floor > 0.0) out += ",floor=" + format_double(floor, "%.17g");
    return out;
}

double NoiseMode::sigma(std::int64_t t, double gamma) const {
    switch (kind) {
        case NoiseKind::none: return 0.0;
        case NoiseKind::anneal: return schedule.value(t);
        case NoiseKind::stationary: return std::sqrt(2.0 * gamma * temperature);
    }
    return 0.0;
}

NoiseMode NoiseMode::none_mode() { return NoiseMode{}; }

NoiseMode NoiseMode::anneal(Schedule s) {
    NoiseMode m;
    m.kind = NoiseKind::anneal;
    m.schedule = s;
    return m;
}

NoiseMode NoiseMode::stationary(double temperature) {
    if (!(temperature > 0.0)) throw ConfigError("stationary noise: temperature must be > 0");
    NoiseMode m;
    m.kind = NoiseKind::stationary;
    m.temperature = temperature;
    return m;
}

NoiseMode NoiseMode::parse(const std::string& text) {
    if (text == "none") return none_mode();
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    if (head == "anneal") {
        if (colon == std::string::npos) throw ConfigError("noise mode 'anneal': missing schedule");
        return anneal(Schedule::parse(text.substr(colon + 1)));
    }
    if (head == "stationary") {
        if (colon == std::string::npos) throw ConfigError("noise mode 'stationary': missing T");
        std::string rest = text.substr(colon + 1);
        if (rest.rfind("T=", 0) != 0) throw ConfigError("noise mode 'stationary': expected T=<real>");
        return stationary(parse_num(rest.substr(2), "stationary noise"));
    }
    throw ConfigError("unknown noise mode '" + text + "'");
}

std::string NoiseMode::to_string() const {
    switch (kind) {
        case NoiseKind::none: return "none";
        case NoiseKind::anneal: return "anneal:" + schedule.to_string();
        case NoiseKind::stationary: return "stationary:T=" + format_double(temperature, "%.17g");
    }
    return "?";
}

// ------------------------------------------------------------- config

Rule parse_rule(const std::string& name) {
    if (name == "gd") return Rule::gd;
    if (name == "sgd") return Rule::sgd;
    if (name == "gdl") return Rule::gdl;
    if (name == "sgdl") return Rule::sgdl;
    throw ConfigError("unknown rule '" + name + "'");
}

std::string rule_name(Rule r) {
    switch (r) {
        case Rule::gd: return "gd";
        case Rule::sgd: return "sgd";
        case Rule::gdl: return "gdl";
        case Rule::sgdl: return "sgdl";
    }
    return "?";
}

void DynamicsConfig::validate() const {
    if (total_steps <= 0) throw ConfigError("dynamics: total_steps must be > 0");
    if (burn_in < 0 || burn_in >= total_steps)
        throw ConfigError("dynamics: burn_in must satisfy 0 <= burn_in < total_steps");
    if (thinning < 1) throw ConfigError("dynamics: thinning must be >= 1");
    const bool langevin = rule == Rule::gdl || rule == Rule::sgdl;
    if (langevin && noise.kind == NoiseKind::none)
        throw ConfigError("dynamics: gdl/sgdl require a noise mode");
    if (!langevin && noise.kind != NoiseKind::none)
        throw ConfigError("dynamics: gd/sgd forbid a noise mode");
    if ((rule == Rule::sgd || rule == Rule::sgdl) && batch_size < 1)
        throw ConfigError("dynamics: batch_size must be >= 1");
}

std::map<std::string, std::string> DynamicsConfig::to_map() const {
    std::map<std::string, std::string> kv;
    kv["rule"] = rule_name(rule);
    kv["gamma"] = step.to_string();
    kv["noise"] = noise.to_string();
    kv["batch"] = std::to_string(batch_size);
    kv["steps"] = std::to_string(total_steps);
    kv["burn_in"] = std::to_string(burn_in);
    kv["thin"] = std::to_string(thinning);
    kv["seed"] = std::to_string(seed);
    return kv;
}

DynamicsConfig DynamicsConfig::from_map(const std::map<std::string, std::string>& kv) {
    DynamicsConfig c;
    auto need = [&](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError("dynamics config: missing key '" + key + "'");
        return it->second;
    };
    c.rule = parse_rule(need("rule"));
    c.step = Schedule::parse(need("gamma"));
    c.noise = NoiseMode::parse(need("noise"));
    c.batch_size = static_cast<int>(std::stoll(need("batch")));
    c.total_steps = std::stoll(need("steps"));
    c.burn_in = std::stoll(need("burn_in"));
    c.thinning = std::stoll(need("thin"));
    c.seed = std::stoull(need("seed"));
    c.validate();
    return c;
}

// ------------------------------------------------------------- empirical

Vec EmpiricalPotential::grad_batch(const Vec& w, std::span<const int> batch) const {
    if (batch.empty()) throw ConfigError("grad_batch: empty batch");
    Vec g = grad_example(w, batch[0]);
    for (std::size_t b = 1; b < batch.size(); ++b) {
        const Vec gi = grad_example(w, batch[b]);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += gi[i];
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (double& x : g) x *= inv;
    return g;
}

Vec EmpiricalPotential::grad(const Vec& w) const {
    std::vector<int> all(static_cast<std::size_t>(num_examples()));
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return grad_batch(w, all);
}

namespace {

class SyntheticDecomposition final : public EmpiricalPotential {
  public:
    SyntheticDecomposition(PotentialPtr base, int n, double eta_amp, std::uint64_t seed)
        : EmpiricalPotential(base->dim(), base->domain(),
                             "synthetic:base=" + base->id() + ",n=" + std::to_string(n) +
                                 ",amp=" + format_double(eta_amp, "%g") +
                                 ",seed=" + std::to_string(seed)),
          base_(std::move(base)) {
        if (n < 1) throw ConfigError("synthetic decomposition: n must be >= 1");
        const auto d = static_cast<std::size_t>(dim());
        offsets_.assign(static_cast<std::size_t>(n), Vec(d, 0.0));
        Vec mean(d, 0.0);
        for (int i = 0; i < n; ++i) {
            Rng rng(seed, static_cast<std::uint64_t>(i));
            for (std::size_t c = 0; c < d; ++c) {
                offsets_[static_cast<std::size_t>(i)][c] = eta_amp * rng.gaussian();
                mean[c] += offsets_[static_cast<std::size_t>(i)][c];
            }
        }
        // center exactly so the full gradient equals the base gradient
        for (std::size_t c = 0; c < d; ++c) mean[c] /= static_cast<double>(n);
        for (auto& eta : offsets_)
            for (std::size_t c = 0; c < d; ++c) eta[c] -= mean[c];
    }

    double eval(const Vec& w) const override { return base_->eval(w); }
    Vec grad(const Vec& w) const override { return base_->grad(w); }

    int num_examples() const override { return static_cast<int>(offsets_.size()); }

    Vec grad_example(const Vec& w, int i) const override {
        Vec g = base_->grad(w);
        const Vec& eta = offsets_[static_cast<std::size_t>(i)];
        for (std::size_t c = 0; c < g.size(); ++c) g[c] += eta[c];
        return g;
    }

    std::vector<MinRegion> minima() const override { return base_->minima(); }
    double default_basin_margin() const override { return base_->default_basin_margin(); }

  private:
    PotentialPtr base_;
    std::vector<Vec> offsets_;
};

} // namespace

std::shared_ptr<const EmpiricalPotential> make_synthetic_decomposition(PotentialPtr base, int n,
                                                                       double eta_amp,
                                                                       std::uint64_t seed) {
    return std::make_shared<SyntheticDecomposition>(std::move(base), n, eta_amp, seed);
}

Vec noise_residual(const EmpiricalPotential& U, const Vec& f, std::span<const int> batch) {
    Vec mini = U.grad_batch(f, batch);
    const Vec full = U.grad(f);
    for (std::size_t i = 0; i < mini.size(); ++i) mini[i] -= full[i];
    return mini;
}

// ------------------------------------------------------------- stepping

namespace {

void check_gradient(const Vec& g, const DynamicsState& state, const Potential& U) {
    if (!all_finite(g)) {
        std::string where;
        for (std::size_t i = 0; i < state.point.size() && i < 8; ++i)
            where += (i ? "," : "") + format_double(state.point[i], "%.6g");
        throw NumericalError("non-finite gradient of '" + U.id() + "' at step " +
                             std::to_string(state.t) + ", point (" + where +
                             (state.point.size() > 8 ? ",..." : "") + ")");
    }
}

void apply_update(const Potential& U, DynamicsState& state, const Vec& direction, double gamma,
                  double sigma) {
    Vec next = state.point;
    for (std::size_t i = 0; i < next.size(); ++i) next[i] -= gamma * direction[i];
    if (sigma != 0.0) {
        for (std::size_t i = 0; i < next.size(); ++i) next[i] += sigma * state.rng.gaussian();
    }
    state.point = project(U.domain(), std::move(next));
    ++state.t;
}

std::vector<int> draw_batch(DynamicsState& state, int batch_size, int n) {
    std::vector<int> batch(static_cast<std::size_t>(batch_size));
    for (auto& idx : batch)
        idx = static_cast<int>(state.rng.uniform_index(static_cast<std::uint64_t>(n)));
    return batch;
}

} // namespace

void step_gd(const Potential& U, DynamicsState& state, double gamma) {
    if (gamma < 0.0) throw ConfigError("step_gd: gamma must be >= 0");
    const Vec g = U.grad(state.point);
    check_gradient(g, state, U);
    apply_update(U, state, g, gamma, 0.0);
}

void step_sgd(const EmpiricalPotential& U, DynamicsState& state, double gamma,
              std::span<const int> batch) {
    if (gamma < 0.0) throw ConfigError("step_sgd: gamma must be >= 0");
    const Vec g = U.grad_batch(state.point, batch);
    check_gradient(g, state, U);
    apply_update(U, state, g, gamma, 0.0);
}

void step_sgd(const EmpiricalPotential& U, DynamicsState& state, double gamma, int batch_size) {
    if (batch_size < 1) throw ConfigError("step_sgd: batch_size must be >= 1");
    const std::vector<int> batch = draw_batch(state, batch_size, U.num_examples());
    step_sgd(U, state, gamma, batch);
}

void step_gdl(const Potential& U, DynamicsState& state, double gamma, double sigma) {
    if (gamma < 0.0 || sigma < 0.0) throw ConfigError("step_gdl: gamma and sigma must be >= 0");
    const Vec g = U.grad(state.point);
    check_gradient(g, state, U);
    apply_update(U, state, g, gamma, sigma);
}

void step_sgdl(const EmpiricalPotential& U, DynamicsState& state, double gamma, double sigma,
               int batch_size) {
    if (gamma < 0.0 || sigma < 0.0) throw ConfigError("step_sgdl: gamma and sigma must be >= 0");
    if (batch_size < 1) throw ConfigError("step_sgdl: batch_size must be >= 1");
    const std::vector<int> batch = draw_batch(state, batch_size, U.num_examples());
    const Vec g = U.grad_batch(state.point, batch);
    check_gradient(g, state, U);
    apply_update(U, state, g, gamma, sigma);
}

// ------------------------------------------------------------- trajectories

SampleSet run_trajectory(const Potential& U, const DynamicsConfig& config,
                         std::optional<Vec> initial, int traj_index) {
    config.validate();
    const bool minibatch = config.rule == Rule::sgd || config.rule == Rule::sgdl;
    const auto* emp = dynamic_cast<const EmpiricalPotential*>(&U);
    if (minibatch && emp == nullptr)
        throw ConfigError("rule '" + rule_name(config.rule) +
                          "' needs an empirical (per-example) potential");

    DynamicsState state{Vec(), 0, Rng(config.seed, static_cast<std::uint64_t>(traj_index))};
    std::string init_desc;
    if (initial.has_value()) {
        U.check_point(*initial);
        state.point = project(U.domain(), std::move(*initial));
        init_desc = "explicit";
        for (std::size_t i = 0; i < state.point.size(); ++i)
            init_desc += (i ? "," : ":") + format_exact(state.point[i]);
    } else {
        state.point.resize(static_cast<std::size_t>(U.dim()));
        for (std::size_t i = 0; i < state.point.size(); ++i)
            state.point[i] = state.rng.uniform(U.domain().lower[i], U.domain().upper[i]);
        init_desc = "uniform_random";
    }

    SampleSet out;
    out.dim = U.dim();
    out.samples.reserve(
        static_cast<std::size_t>((config.total_steps - config.burn_in) / config.thinning));

    const double energy_cap = 1e6;
    for (std::int64_t t = 0; t < config.total_steps; ++t) {
        const double gamma = config.step.value(t);
        const double sigma = config.noise.sigma(t, gamma);
        switch (config.rule) {
            case Rule::gd: step_gd(U, state, gamma); break;
            case Rule::sgd: step_sgd(*emp, state, gamma, config.batch_size); break;
            case Rule::gdl: step_gdl(U, state, gamma, sigma); break;
            case Rule::sgdl: step_sgdl(*emp, state, gamma, sigma, config.batch_size); break;
        }
        if (U.eval(state.point) > energy_cap)
            throw NumericalError("trajectory " + std::to_string(traj_index) + " diverged at step " +
                                 std::to_string(t) + " (U > 1e6) on '" + U.id() + "'");
        const std::int64_t done = t + 1;
        if (done > config.burn_in && (done - config.burn_in) % config.thinning == 0)
            out.samples.push_back(state.point);
    }

    out.provenance = config.to_map();
    out.provenance["potential"] = U.id();
    out.provenance["traj"] = std::to_string(traj_index);
    out.provenance["init"] = init_desc;
    return out;
}

std::vector<SampleSet> run_trajectories(const Potential& U, const DynamicsConfig& config, int count,
                                        const std::vector<Vec>* initials, int threads) {
    if (count < 1) throw ConfigError("run_trajectories: count must be >= 1");
    if (initials != nullptr && static_cast<int>(initials->size()) != count)
        throw ConfigError("run_trajectories: need one initial point per trajectory");
    std::vector<SampleSet> sets(static_cast<std::size_t>(count));
    parallel_for(count, threads, [&](std::int64_t i) {
        std::optional<Vec> init;
        if (initials != nullptr) init = (*initials)[static_cast<std::size_t>(i)];
        sets[static_cast<std::size_t>(i)] =
            run_trajectory(U, config, std::move(init), static_cast<int>(i));
    });
    return sets;
}

std::vector<Vec> pool_samples(const std::vector<SampleSet>& sets) {
    std::vector<Vec> all;
    std::size_t total = 0;
    for (const auto& s : sets) total += s.samples.size();
    all.reserve(total);
    for (const auto& s : sets) all.insert(all.end(), s.samples.begin(), s.samples.end());
    return all;
}

} // namespace flatlab
