#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "segan/errors.hpp"
#include "segan/matrix.hpp"
#include "segan/mlp.hpp"

namespace segan {

struct AdamState {
    Matrix m;  // first moment
    Matrix v;  // second moment
    std::uint64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

inline AdamState make_adam_state(const Matrix& param, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8) {
    AdamState s;
    s.m = Matrix(param.rows(), param.cols());
    s.v = Matrix(param.rows(), param.cols());
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.epsilon = epsilon;
    return s;
}

// Bias-corrected Adam update, in place. Throws on non-finite gradients.
inline void adam_step(Matrix& param, const Matrix& grad, AdamState& state, double learning_rate,
                      const std::string& param_name = "parameter") {
    if (learning_rate <= 0.0) throw ConfigError("adam_step: learning rate must be positive");
    require_same_shape(param, grad, "adam_step");
    require_same_shape(param, state.m, "adam_step state");
    if (!grad.all_finite()) {
        throw DivergenceError("non-finite gradient for " + param_name);
    }
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double corr1 = 1.0 - std::pow(state.beta1, t);
    const double corr2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad.values()[i];
        double& m = state.m.values()[i];
        double& v = state.v.values()[i];
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g * g;
        const double m_hat = m / corr1;
        const double v_hat = v / corr2;
        param.values()[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

// One optimizer per parameter group. A group may span several layer stacks
// (the shared trunk plus each head); stacks updated in the same begin_step
// share the step counter, so trunk moments accumulate coherently across the
// discriminator and classifier updates.
class AdamOptimizer {
public:
    explicit AdamOptimizer(double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8)
        : beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

    std::size_t add_stack(const std::vector<MlpLayer>& layers, std::string name) {
        StackStates s;
        s.name = std::move(name);
        for (const auto& l : layers) {
            s.weights.push_back(make_adam_state(l.weight, beta1_, beta2_, epsilon_));
            s.biases.push_back(make_adam_state(l.bias, beta1_, beta2_, epsilon_));
        }
        stacks_.push_back(std::move(s));
        return stacks_.size() - 1;
    }

    void begin_step() { ++step_count_; }

    void update(std::size_t handle, std::vector<MlpLayer>& layers, const GradientStore& grads, double learning_rate) {
        StackStates& s = stacks_.at(handle);
        if (layers.size() != s.weights.size()) throw Error("AdamOptimizer: layer count changed for " + s.name);
        for (std::size_t l = 0; l < layers.size(); ++l) {
            s.weights[l].step = step_count_ - 1;
            s.biases[l].step = step_count_ - 1;
            adam_step(layers[l].weight, grads.weight_grads[l], s.weights[l], learning_rate,
                      s.name + "[" + std::to_string(l) + "].weight");
            adam_step(layers[l].bias, grads.bias_grads[l], s.biases[l], learning_rate,
                      s.name + "[" + std::to_string(l) + "].bias");
        }
    }

    std::uint64_t step_count() const { return step_count_; }

private:
    struct StackStates {
        std::string name;
        std::vector<AdamState> weights;
        std::vector<AdamState> biases;
    };

    double beta1_, beta2_, epsilon_;
    std::vector<StackStates> stacks_;
    std::uint64_t step_count_ = 0;
};

}  // namespace segan
