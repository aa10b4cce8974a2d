#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flatlab/common.hpp"

namespace flatlab {

enum class Activation { relu, softplus };
enum class LossKind { square, cross_entropy };

Activation parse_activation(const std::string& name);
LossKind parse_loss(const std::string& name);
std::string activation_name(Activation a);
std::string loss_name(LossKind l);

// Fully connected network. widths = {d_in, hidden..., classes}; hidden layers
// use the configured activation, the output layer is linear. Square loss
// targets are one-hot vectors.
struct MLPSpec {
    std::vector<int> widths;
    Activation act = Activation::softplus;
    LossKind loss = LossKind::square;

    struct Block {
        int w_off;  // weight block offset (rows = fan_out, row-major)
        int b_off;  // bias offset
        int fan_in;
        int fan_out;
    };

    void validate() const;
    int num_layers() const { return static_cast<int>(widths.size()) - 1; }
    int input_dim() const { return widths.front(); }
    int num_classes() const { return widths.back(); }
    // Total parameter count W = sum (fan_in + 1) * fan_out. Layout: for each
    // layer in order, the weight matrix row-major then its bias vector.
    int weight_count() const;
    Block block(int layer) const;
    // Parameter index range [begin, end) of the last layer (Table-style
    // "top layer" subset).
    std::pair<int, int> top_layer_range() const;

    // "10-64-2"
    std::string arch_string() const;
    static MLPSpec parse(const std::string& arch, Activation act, LossKind loss);
};

struct LabeledDataset {
    int input_dim = 0;
    int classes = 0;
    std::vector<double> inputs; // row-major n x input_dim
    std::vector<int> labels;
    std::string label_mode = "natural"; // or "random:seed=S"
    std::vector<int> train_idx;
    std::vector<int> heldout_idx;

    int size() const { return static_cast<int>(labels.size()); }
    std::span<const double> row(int i) const;
    void validate() const;
};

// Gaussian class clusters: class centers drawn once, points = center + spread
// * N(0, I). Deterministic from seed; train/held-out split by seeded shuffle.
LabeledDataset make_blobs(int n, int d_in, int classes, double spread, std::uint64_t seed,
                          double train_fraction = 0.5);

// Replaces every label by an i.i.d. uniform class draw; inputs untouched.
LabeledDataset randomize_labels(const LabeledDataset& ds, std::uint64_t seed);

// Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer.
Vec init_params(const MLPSpec& spec, std::uint64_t seed);

// Class scores (output-layer pre-activations).
Vec forward(const MLPSpec& spec, const Vec& params, std::span<const double> input);

double example_loss(const MLPSpec& spec, const Vec& params, std::span<const double> input,
                    int label);
// Mean per-example loss over the index set.
double loss_value(const MLPSpec& spec, const Vec& params, const LabeledDataset& ds,
                  std::span<const int> indices);
double accuracy(const MLPSpec& spec, const Vec& params, const LabeledDataset& ds,
                std::span<const int> indices);

// Backpropagated gradient for one example, in MLPParams layout.
Vec grad_example(const MLPSpec& spec, const Vec& params, std::span<const double> input, int label);
// Mean of grad_example over the index set (exact identity).
Vec grad_full(const MLPSpec& spec, const Vec& params, const LabeledDataset& ds,
              std::span<const int> indices);

} // namespace flatlab
