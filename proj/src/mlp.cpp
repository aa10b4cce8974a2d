#include "flatlab/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "flatlab/rng.hpp"

namespace flatlab {

Activation parse_activation(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "softplus") return Activation::softplus;
    throw ConfigError("unknown activation '" + name + "'");
}

LossKind parse_loss(const std::string& name) {
    if (name == "square") return LossKind::square;
    if (name == "cross_entropy") return LossKind::cross_entropy;
    throw ConfigError("unknown loss '" + name + "'");
}

std::string activation_name(Activation a) { return a == Activation::relu ? "relu" : "softplus"; }
std::string loss_name(LossKind l) { return l == LossKind::square ? "square" : "cross_entropy"; }

void MLPSpec::validate() const {
    if (widths.size() < 2) throw ConfigError("mlp: need at least input and output widths");
    for (int w : widths)
        if (w < 1) throw ConfigError("mlp: layer widths must be >= 1");
    if (loss == LossKind::cross_entropy && num_classes() < 2)
        throw ConfigError("mlp: cross_entropy needs >= 2 classes");
}

int MLPSpec::weight_count() const {
    int total = 0;
    for (int l = 0; l < num_layers(); ++l) total += (widths[l] + 1) * widths[l + 1];
    return total;
}

MLPSpec::Block MLPSpec::block(int layer) const {
    int off = 0;
    for (int l = 0; l < layer; ++l) off += (widths[l] + 1) * widths[l + 1];
    Block b;
    b.fan_in = widths[layer];
    b.fan_out = widths[layer + 1];
    b.w_off = off;
    b.b_off = off + b.fan_in * b.fan_out;
    return b;
}

std::pair<int, int> MLPSpec::top_layer_range() const {
    const Block b = block(num_layers() - 1);
    return {b.w_off, b.b_off + b.fan_out};
}

std::string MLPSpec::arch_string() const {
    std::string s;
    for (std::size_t i = 0; i < widths.size(); ++i)
        s += (i ? "-" : "") + std::to_string(widths[i]);
    return s;
}

MLPSpec MLPSpec::parse(const std::string& arch, Activation act, LossKind loss) {
    MLPSpec spec;
    spec.act = act;
    spec.loss = loss;
    std::stringstream ss(arch);
    std::string item;
    while (std::getline(ss, item, '-')) {
        try {
            spec.widths.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw ConfigError("bad architecture string '" + arch + "'");
        }
    }
    spec.validate();
    return spec;
}

std::span<const double> LabeledDataset::row(int i) const {
    if (i < 0 || i >= size()) throw ConfigError("dataset: example index out of range");
    return {inputs.data() + static_cast<std::size_t>(i) * input_dim,
            static_cast<std::size_t>(input_dim)};
}

void LabeledDataset::validate() const {
    if (input_dim < 1 || classes < 1) throw ConfigError("dataset: bad dimensions");
    if (inputs.size() != static_cast<std::size_t>(size()) * input_dim)
        throw ConfigError("dataset: input size mismatch");
    for (int l : labels)
        if (l < 0 || l >= classes) throw ConfigError("dataset: label out of range");
    for (int i : train_idx)
        if (i < 0 || i >= size()) throw ConfigError("dataset: train index out of range");
    for (int i : heldout_idx)
        if (i < 0 || i >= size()) throw ConfigError("dataset: held-out index out of range");
}

LabeledDataset make_blobs(int n, int d_in, int classes, double spread, std::uint64_t seed,
                          double train_fraction) {
    if (n < 1) throw ConfigError("make_blobs: n must be >= 1");
    if (classes < 2) throw ConfigError("make_blobs: classes must be >= 2");
    if (d_in < 1) throw ConfigError("make_blobs: d_in must be >= 1");
    if (spread < 0.0) throw ConfigError("make_blobs: spread must be >= 0");
    if (!(train_fraction > 0.0 && train_fraction <= 1.0))
        throw ConfigError("make_blobs: train_fraction must be in (0, 1]");

    LabeledDataset ds;
    ds.input_dim = d_in;
    ds.classes = classes;
    ds.labels.resize(static_cast<std::size_t>(n));
    ds.inputs.resize(static_cast<std::size_t>(n) * d_in);

    Rng rng(seed, 0);
    std::vector<double> centers(static_cast<std::size_t>(classes) * d_in);
    for (double& c : centers) c = 2.0 * rng.gaussian();

    for (int i = 0; i < n; ++i) {
        const int label = i % classes; // balanced classes
        ds.labels[static_cast<std::size_t>(i)] = label;
        for (int j = 0; j < d_in; ++j)
            ds.inputs[static_cast<std::size_t>(i) * d_in + j] =
                centers[static_cast<std::size_t>(label) * d_in + j] + spread * rng.gaussian();
    }

    // shuffled split
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i)
        std::swap(perm[static_cast<std::size_t>(i)],
                  perm[rng.uniform_index(static_cast<std::uint64_t>(i + 1))]);
    const int n_train = std::max(1, static_cast<int>(std::lround(n * train_fraction)));
    ds.train_idx.assign(perm.begin(), perm.begin() + n_train);
    ds.heldout_idx.assign(perm.begin() + n_train, perm.end());
    std::sort(ds.train_idx.begin(), ds.train_idx.end());
    std::sort(ds.heldout_idx.begin(), ds.heldout_idx.end());
    ds.label_mode = "natural";
    return ds;
}

LabeledDataset randomize_labels(const LabeledDataset& ds, std::uint64_t seed) {
    LabeledDataset out = ds;
    Rng rng(seed, 0);
    for (auto& l : out.labels)
        l = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(ds.classes)));
    out.label_mode = "random:seed=" + std::to_string(seed);
    return out;
}

Vec init_params(const MLPSpec& spec, std::uint64_t seed) {
    spec.validate();
    Vec params(static_cast<std::size_t>(spec.weight_count()));
    Rng rng(seed, 0);
    for (int l = 0; l < spec.num_layers(); ++l) {
        const auto b = spec.block(l);
        const double bound = 1.0 / std::sqrt(static_cast<double>(b.fan_in));
        for (int i = 0; i < b.fan_in * b.fan_out; ++i)
            params[static_cast<std::size_t>(b.w_off + i)] = rng.uniform(-bound, bound);
        for (int i = 0; i < b.fan_out; ++i)
            params[static_cast<std::size_t>(b.b_off + i)] = rng.uniform(-bound, bound);
    }
    return params;
}

namespace {

double softplus(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double activate(Activation a, double x) {
    return a == Activation::relu ? std::max(0.0, x) : softplus(x);
}

double activate_deriv(Activation a, double x) {
    return a == Activation::relu ? (x > 0.0 ? 1.0 : 0.0) : sigmoid(x);
}

void check_shapes(const MLPSpec& spec, const Vec& params, std::span<const double> input) {
    if (static_cast<int>(params.size()) != spec.weight_count())
        throw ConfigError("mlp: params length " + std::to_string(params.size()) + " != W = " +
                          std::to_string(spec.weight_count()));
    if (static_cast<int>(input.size()) != spec.input_dim())
        throw ConfigError("mlp: input dimension mismatch");
}

// Forward pass keeping pre-activations; activations[l] is the input of layer l.
struct ForwardTrace {
    std::vector<Vec> activations; // size num_layers + 1, last = scores
    std::vector<Vec> pre;         // size num_layers
};

ForwardTrace forward_trace(const MLPSpec& spec, const Vec& params, std::span<const double> input) {
    ForwardTrace tr;
    const int L = spec.num_layers();
    tr.activations.resize(static_cast<std::size_t>(L) + 1);
    tr.pre.resize(static_cast<std::size_t>(L));
    tr.activations[0].assign(input.begin(), input.end());
    for (int l = 0; l < L; ++l) {
        const auto b = spec.block(l);
        const Vec& a = tr.activations[static_cast<std::size_t>(l)];
        Vec z(static_cast<std::size_t>(b.fan_out));
        for (int r = 0; r < b.fan_out; ++r) {
            double s = params[static_cast<std::size_t>(b.b_off + r)];
            const double* wrow = params.data() + b.w_off + static_cast<std::size_t>(r) * b.fan_in;
            for (int c = 0; c < b.fan_in; ++c) s += wrow[c] * a[static_cast<std::size_t>(c)];
            z[static_cast<std::size_t>(r)] = s;
        }
        tr.pre[static_cast<std::size_t>(l)] = z;
        if (l + 1 < L) {
            Vec& out = tr.activations[static_cast<std::size_t>(l) + 1];
            out.resize(z.size());
            for (std::size_t i = 0; i < z.size(); ++i) out[i] = activate(spec.act, z[i]);
        } else {
            tr.activations[static_cast<std::size_t>(L)] = z; // linear output
        }
    }
    return tr;
}

// Loss and d(loss)/d(scores) for one example.
double loss_and_delta(const MLPSpec& spec, const Vec& scores, int label, Vec* delta) {
    const auto n = scores.size();
    if (label < 0 || label >= static_cast<int>(n)) throw ConfigError("mlp: label out of range");
    if (spec.loss == LossKind::square) {
        double loss = 0.0;
        if (delta) delta->resize(n);
        for (std::size_t c = 0; c < n; ++c) {
            const double target = static_cast<int>(c) == label ? 1.0 : 0.0;
            const double r = scores[c] - target;
            loss += 0.5 * r * r;
            if (delta) (*delta)[c] = r;
        }
        return loss;
    }
    // cross entropy on softmax
    double zmax = scores[0];
    for (double s : scores) zmax = std::max(zmax, s);
    double lse = 0.0;
    for (double s : scores) lse += std::exp(s - zmax);
    lse = zmax + std::log(lse);
    if (delta) {
        delta->resize(n);
        for (std::size_t c = 0; c < n; ++c) {
            const double p = std::exp(scores[c] - lse);
            (*delta)[c] = p - (static_cast<int>(c) == label ? 1.0 : 0.0);
        }
    }
    return lse - scores[static_cast<std::size_t>(label)];
}

} // namespace

Vec forward(const MLPSpec& spec, const Vec& params, std::span<const double> input) {
    check_shapes(spec, params, input);
    return forward_trace(spec, params, input).activations.back();
}

double example_loss(const MLPSpec& spec, const Vec& params, std::span<const double> input,
                    int label) {
    const Vec scores = forward(spec, params, input);
    return loss_and_delta(spec, scores, label, nullptr);
}

double loss_value(const MLPSpec& spec, const Vec& params, const LabeledDataset& ds,
                  std::span<const int> indices) {
    if (indices.empty()) throw ConfigError("loss_value: empty index set");
    double total = 0.0;
    for (int i : indices) total += example_loss(spec, params, ds.row(i), ds.labels[static_cast<std::size_t>(i)]);
    return total / static_cast<double>(indices.size());
}

double accuracy(const MLPSpec& spec, const Vec& params, const LabeledDataset& ds,
                std::span<const int> indices) {
    if (indices.empty()) throw ConfigError("accuracy: empty index set");
    int hits = 0;
    for (int i : indices) {
        const Vec scores = forward(spec, params, ds.row(i));
        const auto best = std::max_element(scores.begin(), scores.end());
        if (static_cast<int>(best - scores.begin()) == ds.labels[static_cast<std::size_t>(i)])
            ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(indices.size());
}

Vec grad_example(const MLPSpec& spec, const Vec& params, std::span<const double> input, int label) {
    check_shapes(spec, params, input);
    const int L = spec.num_layers();
    const ForwardTrace tr = forward_trace(spec, params, input);

    Vec grad(params.size(), 0.0);
    Vec delta;
    loss_and_delta(spec, tr.activations[static_cast<std::size_t>(L)], label, &delta);

    for (int l = L - 1; l >= 0; --l) {
        const auto b = spec.block(l);
        const Vec& a = tr.activations[static_cast<std::size_t>(l)];
        for (int r = 0; r < b.fan_out; ++r) {
            const double d = delta[static_cast<std::size_t>(r)];
            grad[static_cast<std::size_t>(b.b_off + r)] = d;
            double* grow = grad.data() + b.w_off + static_cast<std::size_t>(r) * b.fan_in;
            for (int c = 0; c < b.fan_in; ++c) grow[c] = d * a[static_cast<std::size_t>(c)];
        }
        if (l > 0) {
            const Vec& z_prev = tr.pre[static_cast<std::size_t>(l) - 1];
            Vec next(static_cast<std::size_t>(b.fan_in), 0.0);
            for (int c = 0; c < b.fan_in; ++c) {
                double s = 0.0;
                for (int r = 0; r < b.fan_out; ++r)
                    s += params[static_cast<std::size_t>(b.w_off + r * b.fan_in + c)] *
                         delta[static_cast<std::size_t>(r)];
                next[static_cast<std::size_t>(c)] =
                    s * activate_deriv(spec.act, z_prev[static_cast<std::size_t>(c)]);
            }
            delta = std::move(next);
        }
    }
    return grad;
}

Vec grad_full(const MLPSpec& spec, const Vec& params, const LabeledDataset& ds,
              std::span<const int> indices) {
    if (indices.empty()) throw ConfigError("grad_full: empty index set");
    Vec g(params.size(), 0.0);
    for (int i : indices) {
        const Vec gi = grad_example(spec, params, ds.row(i), ds.labels[static_cast<std::size_t>(i)]);
        for (std::size_t j = 0; j < g.size(); ++j) g[j] += gi[j];
    }
    const double inv = 1.0 / static_cast<double>(indices.size());
    for (double& x : g) x *= inv;
    return g;
}

} // namespace flatlab
