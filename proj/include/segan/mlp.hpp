#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "segan/errors.hpp"
#include "segan/matrix.hpp"
#include "segan/rng.hpp"

namespace segan {

enum class Activation {
    Identity,
    Rectifier,
    Sigmoid,
    SoftmaxColumns,
};

inline const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Rectifier: return "rectifier";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::SoftmaxColumns: return "softmax";
    }
    return "?";
}

inline Activation activation_from_name(const std::string& s) {
    if (s == "identity") return Activation::Identity;
    if (s == "rectifier") return Activation::Rectifier;
    if (s == "sigmoid") return Activation::Sigmoid;
    if (s == "softmax") return Activation::SoftmaxColumns;
    throw ParseError("unknown activation '" + s + "'");
}

// Fully connected layer: activation(weight * input + bias).
struct MlpLayer {
    Matrix weight;  // out_dim x in_dim
    Matrix bias;    // out_dim x 1
    Activation activation = Activation::Identity;

    std::size_t in_dim() const { return weight.cols(); }
    std::size_t out_dim() const { return weight.rows(); }
};

// Glorot-uniform weights, zero biases.
inline MlpLayer make_layer(std::size_t out_dim, std::size_t in_dim, Activation act, Rng& rng) {
    MlpLayer layer;
    layer.weight = Matrix(out_dim, in_dim);
    layer.bias = Matrix(out_dim, 1);
    layer.activation = act;
    const double bound = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
    for (double& w : layer.weight.values()) w = rng.uniform(-bound, bound);
    return layer;
}

inline Matrix apply_activation(Activation act, const Matrix& z) {
    Matrix a = z;
    switch (act) {
        case Activation::Identity:
            break;
        case Activation::Rectifier:
            for (double& v : a.values()) v = v > 0.0 ? v : 0.0;
            break;
        case Activation::Sigmoid:
            for (double& v : a.values()) v = 1.0 / (1.0 + std::exp(-v));
            break;
        case Activation::SoftmaxColumns:
            for (std::size_t c = 0; c < a.cols(); ++c) {
                double mx = a.at(0, c);
                for (std::size_t r = 1; r < a.rows(); ++r) mx = std::max(mx, a.at(r, c));
                double sum = 0.0;
                for (std::size_t r = 0; r < a.rows(); ++r) {
                    const double e = std::exp(a.at(r, c) - mx);
                    a.at(r, c) = e;
                    sum += e;
                }
                for (std::size_t r = 0; r < a.rows(); ++r) a.at(r, c) /= sum;
            }
            break;
    }
    return a;
}

// Everything the backward pass needs from a forward pass. activations[0] is
// the input; activations[l+1] and pre_activations[l] belong to layer l.
// dropout_masks[l] (possibly empty) was applied to activations[l+1].
struct ForwardCache {
    std::vector<Matrix> pre_activations;
    std::vector<Matrix> activations;
    std::vector<Matrix> dropout_masks;
};

// Inverted dropout mask: entries are 0 with probability `rate`, else 1/(1-rate).
inline Matrix dropout_mask(std::size_t rows, std::size_t cols, double rate, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0) {
        throw ConfigError("dropout rate must lie in [0,1), got " + std::to_string(rate));
    }
    Matrix m(rows, cols, 1.0);
    if (rate == 0.0) return m;
    const double keep_scale = 1.0 / (1.0 - rate);
    for (double& v : m.values()) v = rng.bernoulli(rate) ? 0.0 : keep_scale;
    return m;
}

struct DropoutSpec {
    double rate = 0.0;
    Rng* rng = nullptr;  // null disables dropout (inference mode)

    bool active() const { return rng != nullptr && rate > 0.0; }
};

// Forward pass through a stack of layers. Dropout, when active, is applied to
// every hidden activation but never to the final layer's output.
inline Matrix mlp_forward(const std::vector<MlpLayer>& layers, const Matrix& input, ForwardCache& cache,
                          const DropoutSpec& dropout = {}) {
    if (layers.empty()) throw ShapeError("mlp_forward: empty layer stack");
    if (input.rows() != layers.front().in_dim()) {
        throw ShapeError("mlp_forward: input has " + std::to_string(input.rows()) + " rows but first layer expects " +
                         std::to_string(layers.front().in_dim()));
    }
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
        if (layers[l].out_dim() != layers[l + 1].in_dim()) {
            throw ShapeError("mlp_forward: layer " + std::to_string(l) + " outputs " + std::to_string(layers[l].out_dim()) +
                             " but layer " + std::to_string(l + 1) + " expects " + std::to_string(layers[l + 1].in_dim()));
        }
    }
    cache.pre_activations.clear();
    cache.activations.clear();
    cache.dropout_masks.clear();
    cache.activations.push_back(input);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Matrix z = matmul(layers[l].weight, cache.activations.back());
        for (std::size_t r = 0; r < z.rows(); ++r) {
            const double b = layers[l].bias.at(r, 0);
            for (std::size_t c = 0; c < z.cols(); ++c) z.at(r, c) += b;
        }
        Matrix a = apply_activation(layers[l].activation, z);
        Matrix mask;
        if (dropout.active() && l + 1 < layers.size()) {
            mask = dropout_mask(a.rows(), a.cols(), dropout.rate, *dropout.rng);
            a = hadamard(a, mask);
        }
        cache.pre_activations.push_back(std::move(z));
        cache.dropout_masks.push_back(std::move(mask));
        cache.activations.push_back(std::move(a));
    }
    return cache.activations.back();
}

// Per-layer gradient accumulators, shape-matched to the layer parameters.
struct GradientStore {
    std::vector<Matrix> weight_grads;
    std::vector<Matrix> bias_grads;

    void init_like(const std::vector<MlpLayer>& layers) {
        weight_grads.clear();
        bias_grads.clear();
        for (const auto& l : layers) {
            weight_grads.emplace_back(l.weight.rows(), l.weight.cols());
            bias_grads.emplace_back(l.bias.rows(), 1);
        }
    }
};

// dL/dz given dL/da for one layer.
inline Matrix activation_backward(Activation act, const Matrix& grad_act, const Matrix& pre, const Matrix& post) {
    Matrix grad_z = grad_act;
    switch (act) {
        case Activation::Identity:
            break;
        case Activation::Rectifier:
            for (std::size_t i = 0; i < grad_z.size(); ++i) {
                if (pre.values()[i] <= 0.0) grad_z.values()[i] = 0.0;
            }
            break;
        case Activation::Sigmoid:
            for (std::size_t i = 0; i < grad_z.size(); ++i) {
                const double a = post.values()[i];
                grad_z.values()[i] *= a * (1.0 - a);
            }
            break;
        case Activation::SoftmaxColumns:
            // dz_r = a_r * (g_r - sum_k g_k a_k), per column
            for (std::size_t c = 0; c < grad_z.cols(); ++c) {
                double dot = 0.0;
                for (std::size_t r = 0; r < grad_z.rows(); ++r) dot += grad_act.at(r, c) * post.at(r, c);
                for (std::size_t r = 0; r < grad_z.rows(); ++r) {
                    grad_z.at(r, c) = post.at(r, c) * (grad_act.at(r, c) - dot);
                }
            }
            break;
    }
    return grad_z;
}

// Backward pass. `output_gradient` is dL/d(final activation). Returns the
// parameter gradients in `store` and dL/d(input) so stacks can be chained.
inline Matrix mlp_backward(const std::vector<MlpLayer>& layers, const ForwardCache& cache, const Matrix& output_gradient,
                           GradientStore& store) {
    if (cache.activations.size() != layers.size() + 1 || cache.pre_activations.size() != layers.size()) {
        throw Error("mlp_backward: cache does not match layer stack");
    }
    require_same_shape(output_gradient, cache.activations.back(), "mlp_backward output gradient");
    store.init_like(layers);
    Matrix grad_act = output_gradient;
    for (std::size_t li = layers.size(); li-- > 0;) {
        // undo dropout scaling before the activation derivative; the mask was
        // applied after the activation, so its factor carries straight through
        if (!cache.dropout_masks[li].empty()) {
            grad_act = hadamard(grad_act, cache.dropout_masks[li]);
        }
        // post-activation values without the dropout mask: recompute when masked
        const Matrix* post = &cache.activations[li + 1];
        Matrix post_unmasked;
        if (!cache.dropout_masks[li].empty() &&
            (layers[li].activation == Activation::Sigmoid || layers[li].activation == Activation::SoftmaxColumns)) {
            post_unmasked = apply_activation(layers[li].activation, cache.pre_activations[li]);
            post = &post_unmasked;
        }
        Matrix grad_z = activation_backward(layers[li].activation, grad_act, cache.pre_activations[li], *post);
        store.weight_grads[li] = matmul_bt(grad_z, cache.activations[li]);
        for (std::size_t r = 0; r < grad_z.rows(); ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < grad_z.cols(); ++c) s += grad_z.at(r, c);
            store.bias_grads[li].at(r, 0) = s;
        }
        grad_act = matmul_at(layers[li].weight, grad_z);
    }
    return grad_act;
}

}  // namespace segan
