#include "caadam/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "caadam/error.hpp"

namespace caadam {

std::string_view to_string(OutputHead head) {
    return head == OutputHead::linear_regression ? "linear_regression" : "softmax_classification";
}

void NetworkSpec::validate() const {
    if (input_dim == 0 || output_dim == 0) throw ShapeError("network input/output widths must be >= 1");
    for (std::size_t h : hidden_sizes) {
        if (h == 0) throw ShapeError("hidden layer widths must be >= 1");
    }
}

std::vector<std::pair<std::size_t, std::size_t>> NetworkSpec::layer_dims() const {
    std::vector<std::pair<std::size_t, std::size_t>> dims;
    std::size_t fan_in = input_dim;
    for (std::size_t h : hidden_sizes) {
        dims.emplace_back(fan_in, h);
        fan_in = h;
    }
    dims.emplace_back(fan_in, output_dim);
    return dims;
}

GradientSet GradientSet::zeros_like(const std::vector<DenseLayer>& layers) {
    GradientSet g;
    g.layers.reserve(layers.size());
    for (const auto& l : layers) {
        g.layers.push_back({Matrix::zeros_like(l.weights), Matrix::zeros_like(l.bias)});
    }
    return g;
}

bool GradientSet::all_finite() const {
    return std::all_of(layers.begin(), layers.end(), [](const DenseLayer& l) {
        return l.weights.all_finite() && l.bias.all_finite();
    });
}

Network::Network(NetworkSpec spec, Rng& rng) : spec_(std::move(spec)) {
    spec_.validate();
    for (auto [fan_in, fan_out] : spec_.layer_dims()) {
        layers_.push_back({glorot_uniform(rng, fan_in, fan_out), Matrix(1, fan_out)});
    }
}

Network::Network(NetworkSpec spec, std::vector<DenseLayer> layers)
    : spec_(std::move(spec)), layers_(std::move(layers)) {
    spec_.validate();
    const auto dims = spec_.layer_dims();
    if (dims.size() != layers_.size()) throw ShapeError("layer count does not match network spec");
    for (std::size_t i = 0; i < dims.size(); ++i) {
        const auto [fan_in, fan_out] = dims[i];
        if (layers_[i].weights.rows() != fan_in || layers_[i].weights.cols() != fan_out ||
            layers_[i].bias.rows() != 1 || layers_[i].bias.cols() != fan_out) {
            throw ShapeError("layer " + std::to_string(i) + " parameters do not match network spec");
        }
    }
}

std::size_t Network::num_parameters() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
    return n;
}

bool operator==(const Network& a, const Network& b) {
    if (a.layers_.size() != b.layers_.size()) return false;
    for (std::size_t i = 0; i < a.layers_.size(); ++i) {
        if (a.layers_[i].weights != b.layers_[i].weights || a.layers_[i].bias != b.layers_[i].bias) {
            return false;
        }
    }
    return true;
}

namespace {

void add_bias_rows(Matrix& z, const Matrix& bias) {
    for (std::size_t r = 0; r < z.rows(); ++r) {
        auto row = z.row(r);
        for (std::size_t c = 0; c < z.cols(); ++c) row[c] += bias[c];
    }
}

void check_congruent(const Matrix& prediction, const Matrix& targets, OutputHead head) {
    if (prediction.rows() != targets.rows()) throw ShapeError("prediction/target row counts differ");
    if (head == OutputHead::linear_regression) {
        if (prediction.cols() != targets.cols()) throw ShapeError("prediction/target widths differ");
    } else if (targets.cols() != 1) {
        throw ShapeError("classification targets must be a single column of class indices");
    }
}

std::size_t class_index(double label, std::size_t num_classes, std::size_t row) {
    if (!(label >= 0.0) || label != std::floor(label) || label >= static_cast<double>(num_classes)) {
        throw ShapeError("class index out of range at row " + std::to_string(row));
    }
    return static_cast<std::size_t>(label);
}

}  // namespace

ForwardResult forward(const Network& net, const Matrix& batch) {
    if (batch.cols() != net.spec().input_dim) {
        throw ShapeError("forward: batch has " + std::to_string(batch.cols()) + " columns, network expects " +
                         std::to_string(net.spec().input_dim));
    }
    ForwardResult result;
    auto& cache = result.cache;
    cache.inputs.reserve(net.num_layers());
    cache.pre_activations.reserve(net.num_layers());

    Matrix activation = batch;
    for (std::size_t i = 0; i < net.num_layers(); ++i) {
        const auto& layer = net.layers()[i];
        Matrix z = matmul(activation, layer.weights);
        add_bias_rows(z, layer.bias);
        if (!z.all_finite()) throw NonFiniteError("forward: non-finite activation in layer " + std::to_string(i));
        cache.inputs.push_back(std::move(activation));
        const bool last = i + 1 == net.num_layers();
        activation = z;
        if (!last) {
            for (double& v : activation.values()) v = std::max(v, 0.0);
        }
        cache.pre_activations.push_back(std::move(z));
    }
    result.prediction = std::move(activation);
    return result;
}

Matrix predict(const Network& net, const Matrix& batch) {
    return forward(net, batch).prediction;
}

Matrix softmax(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        auto in = logits.row(r);
        auto dst = out.row(r);
        const double mx = *std::max_element(in.begin(), in.end());
        double sum = 0.0;
        for (std::size_t c = 0; c < in.size(); ++c) {
            dst[c] = std::exp(in[c] - mx);
            sum += dst[c];
        }
        for (double& v : dst) v /= sum;
    }
    return out;
}

double loss(const Matrix& prediction, const Matrix& targets, OutputHead head) {
    check_congruent(prediction, targets, head);
    if (prediction.empty()) throw ShapeError("loss: empty batch");
    if (head == OutputHead::linear_regression) {
        double acc = 0.0;
        for (std::size_t i = 0; i < prediction.size(); ++i) {
            const double d = prediction[i] - targets[i];
            acc += d * d;
        }
        return acc / static_cast<double>(prediction.size());
    }
    const Matrix probs = softmax(prediction);
    double acc = 0.0;
    for (std::size_t r = 0; r < probs.rows(); ++r) {
        const std::size_t k = class_index(targets(r, 0), probs.cols(), r);
        acc -= std::log(std::max(probs(r, k), kProbabilityFloor));
    }
    return acc / static_cast<double>(probs.rows());
}

GradientSet backward(const Network& net, const ForwardCache& cache, const Matrix& targets) {
    const std::size_t depth = net.num_layers();
    if (cache.inputs.size() != depth || cache.pre_activations.size() != depth) {
        throw ShapeError("backward: cache does not belong to this network");
    }
    for (std::size_t i = 0; i < depth; ++i) {
        const auto& w = net.layers()[i].weights;
        if (cache.inputs[i].cols() != w.rows() || cache.pre_activations[i].cols() != w.cols()) {
            throw ShapeError("backward: stale cache for layer " + std::to_string(i));
        }
    }
    const Matrix& output = cache.pre_activations.back();
    const OutputHead head = net.spec().head;
    check_congruent(output, targets, head);

    // Gradient of the mean batch loss with respect to the output layer's
    // pre-activation.
    Matrix delta(output.rows(), output.cols());
    if (head == OutputHead::linear_regression) {
        const double scale = 2.0 / static_cast<double>(output.size());
        for (std::size_t i = 0; i < output.size(); ++i) delta[i] = scale * (output[i] - targets[i]);
    } else {
        delta = softmax(output);
        const double scale = 1.0 / static_cast<double>(output.rows());
        for (std::size_t r = 0; r < output.rows(); ++r) {
            delta(r, class_index(targets(r, 0), output.cols(), r)) -= 1.0;
            for (double& v : delta.row(r)) v *= scale;
        }
    }

    GradientSet grads;
    grads.layers.resize(depth);
    for (std::size_t i = depth; i-- > 0;) {
        auto& g = grads.layers[i];
        g.weights = matmul_at_b(cache.inputs[i], delta);
        g.bias = Matrix(1, delta.cols());
        for (std::size_t r = 0; r < delta.rows(); ++r) {
            auto row = delta.row(r);
            for (std::size_t c = 0; c < delta.cols(); ++c) g.bias[c] += row[c];
        }
        if (i == 0) break;
        Matrix upstream = matmul_a_bt(delta, net.layers()[i].weights);
        const Matrix& z_prev = cache.pre_activations[i - 1];
        for (std::size_t k = 0; k < upstream.size(); ++k) {
            if (z_prev[k] <= 0.0) upstream[k] = 0.0;
        }
        delta = std::move(upstream);
    }
    if (!grads.all_finite()) throw NonFiniteError("backward: non-finite gradient");
    return grads;
}

void apply_update(Network& net, const GradientSet& delta) {
    if (delta.layers.size() != net.num_layers()) throw ShapeError("apply_update: layer count mismatch");
    for (std::size_t i = 0; i < net.num_layers(); ++i) {
        auto& layer = net.layers()[i];
        const auto& d = delta.layers[i];
        if (!layer.weights.same_shape(d.weights) || !layer.bias.same_shape(d.bias)) {
            throw ShapeError("apply_update: shape mismatch in layer " + std::to_string(i));
        }
        for (std::size_t k = 0; k < layer.weights.size(); ++k) layer.weights[k] += d.weights[k];
        for (std::size_t k = 0; k < layer.bias.size(); ++k) layer.bias[k] += d.bias[k];
    }
}

}  // namespace caadam
