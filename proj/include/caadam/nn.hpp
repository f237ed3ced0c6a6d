#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "caadam/linalg.hpp"

namespace caadam {

enum class OutputHead { linear_regression, softmax_classification };

std::string_view to_string(OutputHead head);

/// Declarative shape of a dense ReLU network.
struct NetworkSpec {
    std::size_t input_dim = 1;
    std::vector<std::size_t> hidden_sizes;
    std::size_t output_dim = 1;
    OutputHead head = OutputHead::linear_regression;

    /// Throws ShapeError if any width is zero.
    void validate() const;
    /// Fan-in/fan-out pair of every trainable layer, input side first.
    std::vector<std::pair<std::size_t, std::size_t>> layer_dims() const;
};

/// Parameters of one dense layer. `weights` is (fan_in x fan_out) and `bias`
/// is a (1 x fan_out) row.
struct DenseLayer {
    Matrix weights;
    Matrix bias;
};

/// Parameter-shaped collection used for gradients and additive updates.
struct GradientSet {
    std::vector<DenseLayer> layers;

    /// All-zero set congruent with `layers`.
    static GradientSet zeros_like(const std::vector<DenseLayer>& layers);
    bool all_finite() const;
};

class Network {
public:
    Network() = default;
    /// Glorot-uniform weights and zero biases drawn from `rng`.
    Network(NetworkSpec spec, Rng& rng);
    /// Explicit parameters; shapes are checked against the spec.
    Network(NetworkSpec spec, std::vector<DenseLayer> layers);

    const NetworkSpec& spec() const noexcept { return spec_; }
    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    std::vector<DenseLayer>& layers() noexcept { return layers_; }
    std::size_t num_layers() const noexcept { return layers_.size(); }
    std::size_t num_parameters() const;

    friend bool operator==(const Network&, const Network&);

private:
    NetworkSpec spec_;
    std::vector<DenseLayer> layers_;
};

/// Per-layer activations kept for backpropagation. `inputs[i]` is what layer
/// i consumed and `pre_activations[i]` is its affine output.
struct ForwardCache {
    std::vector<Matrix> inputs;
    std::vector<Matrix> pre_activations;
};

struct ForwardResult {
    Matrix prediction;
    ForwardCache cache;
};

/// Runs the network on a batch (one sample per row). The linear head returns
/// raw outputs; the softmax head returns logits (softmax is folded into the
/// loss). Throws ShapeError on width mismatch and NonFiniteError on overflow.
ForwardResult forward(const Network& net, const Matrix& batch);

/// Prediction only, without retaining the cache.
Matrix predict(const Network& net, const Matrix& batch);

/// Mean squared error over every element, or mean sparse categorical
/// cross-entropy where `targets` holds one class index per row.
double loss(const Matrix& prediction, const Matrix& targets, OutputHead head);

/// Row-wise softmax with max subtraction.
Matrix softmax(const Matrix& logits);

/// Exact gradient of loss(forward(net, batch), targets) with respect to every
/// weight and bias.
GradientSet backward(const Network& net, const ForwardCache& cache, const Matrix& targets);

/// Adds `delta` to every parameter in place.
void apply_update(Network& net, const GradientSet& delta);

/// Probability floor applied inside the cross-entropy logarithm.
inline constexpr double kProbabilityFloor = 1e-12;

}  // namespace caadam
