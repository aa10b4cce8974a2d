#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flatlab/potential.hpp"
#include "flatlab/rng.hpp"

namespace flatlab {

// ------------------------------------------------------------- schedules

enum class ScheduleKind { constant, inverse_t, inverse_sqrt_t };

// value(t) = max(floor, base * decay(t)); non-increasing in t.
struct Schedule {
    ScheduleKind kind = ScheduleKind::constant;
    double base = 0.0;
    double floor = 0.0;

    double value(std::int64_t t) const;

    static Schedule constant(double base, double floor = 0.0);
    // "constant:0.01", "inverse_t:base=0.1,floor=0.001", "inverse_sqrt_t:base=0.1"
    static Schedule parse(const std::string& text);
    std::string to_string() const;
};

// Noise amplitude policy for gdl/sgdl. `anneal` follows a decreasing schedule
// for the per-step amplitude. `stationary` holds sigma = sqrt(2*gamma*T), the
// Euler-Maruyama discretization whose invariant density is exp(-U/T).
enum class NoiseKind { none, anneal, stationary };

struct NoiseMode {
    NoiseKind kind = NoiseKind::none;
    Schedule schedule;       // anneal only
    double temperature = 0.0; // stationary only

    double sigma(std::int64_t t, double gamma) const;

    static NoiseMode none_mode();
    static NoiseMode anneal(Schedule s);
    static NoiseMode stationary(double temperature);
    // "anneal:inverse_t:base=0.1" or "stationary:T=0.5"
    static NoiseMode parse(const std::string& text);
    std::string to_string() const;
};

// ------------------------------------------------------------- config

enum class Rule { gd, sgd, gdl, sgdl };

Rule parse_rule(const std::string& name);
std::string rule_name(Rule r);

struct DynamicsConfig {
    Rule rule = Rule::gd;
    Schedule step;           // gamma_t
    NoiseMode noise;         // required for gdl/sgdl, forbidden for gd/sgd
    int batch_size = 1;      // sgd/sgdl only
    std::int64_t total_steps = 0;
    std::int64_t burn_in = 0;
    std::int64_t thinning = 1;
    std::uint64_t seed = 0;

    void validate() const;
    std::map<std::string, std::string> to_map() const;
    static DynamicsConfig from_map(const std::map<std::string, std::string>& kv);
};

struct DynamicsState {
    Vec point;
    std::int64_t t = 0;
    Rng rng;
};

struct SampleSet {
    int dim = 0;
    std::vector<Vec> samples;
    // potential id, serialized config, trajectory index, initial point; enough
    // to rebuild the trajectory bit-exactly.
    std::map<std::string, std::string> provenance;
};

// ------------------------------------------------------------- empirical

// A potential that is a mean of per-example terms, U = (1/n) sum_i V_i.
// grad() is the exact full-dataset mean; grad_batch averages a minibatch.
class EmpiricalPotential : public Potential {
  public:
    virtual int num_examples() const = 0;
    virtual Vec grad_example(const Vec& w, int i) const = 0;

    Vec grad_batch(const Vec& w, std::span<const int> batch) const;
    Vec grad(const Vec& w) const override;

  protected:
    using Potential::Potential;
};

// Wraps a base potential as a synthetic n-example decomposition
// V_i(w) = U(w) + <eta_i, w> with the eta_i exactly centered, so the full
// gradient equals the base gradient and minibatch noise has amplitude
// ~ eta_amp/sqrt(batch) per coordinate.
std::shared_ptr<const EmpiricalPotential> make_synthetic_decomposition(PotentialPtr base, int n,
                                                                       double eta_amp,
                                                                       std::uint64_t seed);

// Minibatch gradient minus full-dataset gradient at f.
Vec noise_residual(const EmpiricalPotential& U, const Vec& f, std::span<const int> batch);

// ------------------------------------------------------------- stepping

// point <- project(point - gamma * grad U(point)); t <- t + 1.
void step_gd(const Potential& U, DynamicsState& state, double gamma);

// Minibatch step with an explicit index set (mean gradient over `batch`).
void step_sgd(const EmpiricalPotential& U, DynamicsState& state, double gamma,
              std::span<const int> batch);
// Draws batch_size indices uniformly with replacement from the state's RNG.
void step_sgd(const EmpiricalPotential& U, DynamicsState& state, double gamma, int batch_size);

// Langevin variants: adds sigma * W, W a standard Gaussian vector drawn from
// the state's RNG. sigma == 0 consumes no randomness and reduces exactly to
// the noiseless rule.
void step_gdl(const Potential& U, DynamicsState& state, double gamma, double sigma);
void step_sgdl(const EmpiricalPotential& U, DynamicsState& state, double gamma, double sigma,
               int batch_size);

// ------------------------------------------------------------- trajectories

// Applies the configured rule for total_steps from `initial` (uniform random
// over the domain when missing), collecting every thinning-th point after
// burn_in. Bit-exact reproducible from (seed, config, traj_index).
SampleSet run_trajectory(const Potential& U, const DynamicsConfig& config,
                         std::optional<Vec> initial = std::nullopt, int traj_index = 0);

// Runs trajectories 0..count-1 in parallel. initials, when given, supplies
// one starting point per trajectory. Output is independent of thread count.
std::vector<SampleSet> run_trajectories(const Potential& U, const DynamicsConfig& config, int count,
                                        const std::vector<Vec>* initials = nullptr,
                                        int threads = 1);

// Flattens many sample sets into one point list (trajectory-major order).
std::vector<Vec> pool_samples(const std::vector<SampleSet>& sets);

} // namespace flatlab
