#include "flatlab/train.hpp"

#include <cmath>

namespace flatlab {

namespace {

class MlpLossPotential final : public EmpiricalPotential {
  public:
    MlpLossPotential(MLPSpec spec, std::shared_ptr<const LabeledDataset> data, double box_half)
        : EmpiricalPotential(spec.weight_count(),
                             Domain::cube(spec.weight_count(), box_half, BoundaryMode::clamp),
                             "mlp:arch=" + spec.arch_string() + ",act=" + activation_name(spec.act) +
                                 ",loss=" + loss_name(spec.loss) +
                                 ",n=" + std::to_string(data->train_idx.size()) +
                                 ",labels=" + data->label_mode),
          spec_(std::move(spec)), data_(std::move(data)) {
        spec_.validate();
        data_->validate();
        if (data_->train_idx.empty()) throw ConfigError("empirical loss: empty training split");
        if (data_->input_dim != spec_.input_dim() || data_->classes > spec_.num_classes())
            throw ConfigError("empirical loss: dataset does not match the architecture");
    }

    double eval(const Vec& w) const override {
        check_point(w);
        return loss_value(spec_, w, *data_, data_->train_idx);
    }

    int num_examples() const override { return static_cast<int>(data_->train_idx.size()); }

    Vec grad_example(const Vec& w, int i) const override {
        const int row = data_->train_idx[static_cast<std::size_t>(i)];
        return flatlab::grad_example(spec_, w, data_->row(row),
                                     data_->labels[static_cast<std::size_t>(row)]);
    }

    const MLPSpec& spec() const { return spec_; }
    const LabeledDataset& data() const { return *data_; }

  private:
    MLPSpec spec_;
    std::shared_ptr<const LabeledDataset> data_;
};

} // namespace

std::shared_ptr<const EmpiricalPotential> make_empirical_loss(const MLPSpec& spec,
                                                              std::shared_ptr<const LabeledDataset> data,
                                                              double box_half) {
    return std::make_shared<MlpLossPotential>(spec, std::move(data), box_half);
}

TrainResult train_to_interpolation(const MLPSpec& spec, std::shared_ptr<const LabeledDataset> data,
                                   const TrainConfig& config) {
    if (config.rule != Rule::sgd && config.rule != Rule::sgdl)
        throw ConfigError("train: rule must be sgd or sgdl");
    if (config.max_steps < 1) throw ConfigError("train: max_steps must be >= 1");
    if (config.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (config.rule == Rule::sgdl && config.noise.kind == NoiseKind::none)
        throw ConfigError("train: sgdl requires a noise mode");
    if (config.rule == Rule::sgd && config.noise.kind != NoiseKind::none)
        throw ConfigError("train: sgd forbids a noise mode");

    const auto U = make_empirical_loss(spec, data, 16.0);
    const auto& ds = *data;

    DynamicsState state{init_params(spec, config.seed), 0, Rng(config.seed, 1)};

    std::int64_t eval_every = config.eval_every;
    if (eval_every <= 0)
        eval_every = std::max<std::int64_t>(1, U->num_examples() / config.batch_size);

    TrainResult result;
    auto record = [&](std::int64_t step) {
        EpochLog entry{};
        entry.step = step;
        entry.train_loss = loss_value(spec, state.point, ds, ds.train_idx);
        entry.train_acc = accuracy(spec, state.point, ds, ds.train_idx);
        if (!ds.heldout_idx.empty()) {
            entry.heldout_loss = loss_value(spec, state.point, ds, ds.heldout_idx);
            entry.heldout_acc = accuracy(spec, state.point, ds, ds.heldout_idx);
        } else {
            entry.heldout_loss = std::nan("");
            entry.heldout_acc = std::nan("");
        }
        result.log.push_back(entry);
        if (entry.train_loss > 1e6)
            throw NumericalError("train: loss diverged (> 1e6) at step " + std::to_string(step));
        return entry.train_loss;
    };

    record(0);
    for (std::int64_t t = 0; t < config.max_steps; ++t) {
        const double gamma = config.gamma.value(t);
        if (config.rule == Rule::sgd) {
            step_sgd(*U, state, gamma, config.batch_size);
        } else {
            const double sigma = config.noise.sigma(t, gamma);
            step_sgdl(*U, state, gamma, sigma, config.batch_size);
        }
        if ((t + 1) % eval_every == 0 || t + 1 == config.max_steps) {
            const double train_loss = record(t + 1);
            if (train_loss < config.target_loss) {
                result.interpolated = true;
                result.steps_used = t + 1;
                break;
            }
        }
    }
    if (!result.interpolated) result.steps_used = config.max_steps;
    result.params = std::move(state.point);
    return result;
}

} // namespace flatlab
