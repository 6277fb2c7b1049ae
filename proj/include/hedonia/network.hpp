#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hedonia/rng.hpp"
#include "hedonia/tensor.hpp"

namespace hedonia {

enum class LayerKind : std::uint8_t {
    Conv3x3 = 0,
    MaxPool2x2 = 1,
    Dense = 2,
    Relu = 3,
    Flatten = 4,
    Concat = 5,  // fusion boundary marker; composed at the model level
};

const char* layer_kind_name(LayerKind k);

struct LayerSpec {
    LayerKind kind;
    std::size_t fan_in = 0;   // conv: input channels, dense: input width
    std::size_t fan_out = 0;  // conv: filters, dense: output width
};

// A sequential network. input_shape excludes the batch dimension:
// [H, W, C] for image nets, [D] for dense nets.
struct NetworkSpec {
    std::vector<std::size_t> input_shape;
    std::vector<LayerSpec> layers;
};

// Per-layer parameters, weights followed by biases. Non-trainable layers
// hold an empty vector.
struct Weights {
    std::vector<std::vector<double>> layers;
};

using GradientBundle = std::vector<std::vector<double>>;

struct ActivationTrace {
    Tensor input;                                      // batched input
    std::vector<Tensor> outputs;                       // one per layer
    std::vector<std::vector<std::uint32_t>> argmaxes;  // pool layers only
    const Tensor& final() const { return outputs.back(); }
};

std::size_t layer_param_count(const LayerSpec& layer);
std::size_t total_param_count(const NetworkSpec& spec);

// Non-batch output shape after each layer; validates the layer graph and
// throws NumericError naming the offending layer on any mismatch.
std::vector<std::vector<std::size_t>> layer_shapes(const NetworkSpec& spec);
std::vector<std::size_t> output_shape(const NetworkSpec& spec);

// He-uniform for conv layers, Xavier-uniform for dense; biases zero.
Weights init_weights(const NetworkSpec& spec, Rng& rng);
Weights zero_like(const Weights& w);
void accumulate(Weights& acc, const GradientBundle& g, double scale);

// input is batched: [N, ...input_shape].
ActivationTrace forward(const NetworkSpec& spec, const Weights& weights,
                        const Tensor& input);

// output_grad must match the trace's final output; returns parameter
// gradients plus the gradient w.r.t. the network input.
struct BackwardResult {
    GradientBundle grads;
    Tensor input_grad;
};
BackwardResult backward(const NetworkSpec& spec, const Weights& weights,
                        const ActivationTrace& trace, const Tensor& output_grad);

// mean over all elements of (target - pred)^2, plus d loss / d pred.
struct MseResult {
    double loss;
    Tensor grad;
};
MseResult mse_loss(const Tensor& pred, const Tensor& target);

// Versioned binary weight container with a text sidecar manifest at
// <path>.manifest.txt. Multiple named sections allow fused models (street
// net, aerial net, fusion net) to live in one checkpoint.
struct CheckpointSection {
    std::string name;
    NetworkSpec spec;
    Weights weights;
};
void save_checkpoint(const std::string& path,
                     const std::vector<CheckpointSection>& sections);
std::vector<CheckpointSection> load_checkpoint(const std::string& path);

}  // namespace hedonia
