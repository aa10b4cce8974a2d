#pragma once

#include <memory>

#include "flatlab/dynamics.hpp"
#include "flatlab/mlp.hpp"

namespace flatlab {

// Exposes the mean per-example loss of an MLP on the dataset's training split
// as a potential over the flat weight vector. grad delegates to backprop.
// Domain is a wide clamp box; at this scale trained weights never reach it.
std::shared_ptr<const EmpiricalPotential> make_empirical_loss(const MLPSpec& spec,
                                                              std::shared_ptr<const LabeledDataset> data,
                                                              double box_half = 16.0);

struct TrainConfig {
    Rule rule = Rule::sgd;          // sgd or sgdl
    Schedule gamma = Schedule::constant(0.1);
    NoiseMode noise;                // sgdl only
    int batch_size = 32;
    std::int64_t max_steps = 50'000;
    double target_loss = 1e-3;      // full train loss to declare interpolation
    std::int64_t eval_every = 0;    // 0 = once per epoch (n/batch steps)
    std::uint64_t seed = 0;
};

struct EpochLog {
    std::int64_t step;
    double train_loss;
    double train_acc;
    double heldout_loss;
    double heldout_acc;
};

struct TrainResult {
    Vec params;
    std::vector<EpochLog> log;
    bool interpolated = false;
    std::int64_t steps_used = 0;
};

// Runs minibatch SGD/SGDL until the full train loss drops below target_loss
// or max_steps is spent; returns best-found params with `interpolated` false
// in the latter case. Deterministic from (spec, data, config.seed).
TrainResult train_to_interpolation(const MLPSpec& spec, std::shared_ptr<const LabeledDataset> data,
                                   const TrainConfig& config);

} // namespace flatlab
