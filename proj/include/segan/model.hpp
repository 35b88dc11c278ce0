#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "segan/adam.hpp"
#include "segan/dataset.hpp"
#include "segan/errors.hpp"
#include "segan/matrix.hpp"
#include "segan/mlp.hpp"
#include "segan/rng.hpp"
#include "segan/train_config.hpp"

namespace segan {

enum class Variant { Full, NoClassifier, NoDiscriminator, NoHint };

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::Full: return "full";
        case Variant::NoClassifier: return "no_classifier";
        case Variant::NoDiscriminator: return "no_discriminator";
        case Variant::NoHint: return "no_hint";
    }
    return "?";
}

inline Variant variant_from_name(const std::string& s) {
    if (s == "full") return Variant::Full;
    if (s == "no_classifier") return Variant::NoClassifier;
    if (s == "no_discriminator") return Variant::NoDiscriminator;
    if (s == "no_hint") return Variant::NoHint;
    throw ConfigError("unknown variant '" + s + "'");
}

// All log arguments are clamped to [kProbFloor, 1 - kProbFloor].
inline constexpr double kProbFloor = 1e-7;

inline double clamp_prob(double p) {
    return std::min(std::max(p, kProbFloor), 1.0 - kProbFloor);
}

// Hint matrix R = K.*M + 0.5*(1-K): entries with k=1 reveal the mask,
// entries with k=0 carry the uninformative value 0.5.
struct HintMatrix {
    Matrix r;
    Matrix k;
};

inline HintMatrix sample_hint(const Matrix& mask, double hint_rate, Rng& rng) {
    if (hint_rate < 0.0 || hint_rate > 1.0) throw ConfigError("hint rate must lie in [0,1]");
    HintMatrix h;
    h.k = Matrix(mask.rows(), mask.cols());
    h.r = Matrix(mask.rows(), mask.cols());
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const bool reveal = rng.bernoulli(hint_rate);
        h.k.values()[i] = reveal ? 1.0 : 0.0;
        h.r.values()[i] = reveal ? mask.values()[i] : 0.5;
    }
    return h;
}

// The hint channel a pure classifier pass sees: no position revealed.
inline Matrix blank_hint(std::size_t rows, std::size_t cols) {
    return Matrix(rows, cols, 0.5);
}

// Generator, shared trunk, and the two heads hanging off the trunk.
// The generator consumes [X_noisy; M]; trunk consumes [X_hat; R].
struct SeganModel {
    std::size_t feature_dim = 0;  // d
    std::size_t class_count = 0;  // q, 0 when the data is unlabeled
    Variant variant = Variant::Full;
    double alpha = 1.0;
    double beta = 1.0;
    double hint_rate = 0.8;
    double pseudo_label_threshold = 0.9;
    std::uint64_t schema_fingerprint = 0;
    TrainConfig config;  // configuration the model was trained with

    std::vector<MlpLayer> generator;
    std::vector<MlpLayer> trunk;
    std::vector<MlpLayer> disc_head;
    std::vector<MlpLayer> cls_head;

    bool has_classifier() const { return !cls_head.empty(); }
};

inline constexpr std::size_t kHiddenWidth = 128;

// Builds the untrained parameter scaffold for one variant.
inline SeganModel build_model(std::size_t feature_dim, std::size_t class_count, Variant variant, double alpha,
                              double beta, double hint_rate, double pseudo_label_threshold, Rng& rng,
                              std::size_t hidden_width = kHiddenWidth) {
    if (feature_dim == 0) throw ConfigError("model needs at least one feature");
    if (class_count == 1) throw ConfigError("classification needs q >= 2 classes, got 1");
    if (pseudo_label_threshold <= 0.5 || pseudo_label_threshold >= 1.0) {
        throw ConfigError("pseudo-label threshold must lie in (0.5,1)");
    }
    SeganModel model;
    model.feature_dim = feature_dim;
    model.class_count = class_count;
    model.variant = variant;
    model.alpha = alpha;
    model.beta = beta;
    model.hint_rate = variant == Variant::NoHint ? 0.0 : hint_rate;
    model.pseudo_label_threshold = pseudo_label_threshold;
    const std::size_t d = feature_dim;
    model.generator.push_back(make_layer(hidden_width, 2 * d, Activation::Rectifier, rng));
    model.generator.push_back(make_layer(d, hidden_width, Activation::Sigmoid, rng));
    model.trunk.push_back(make_layer(hidden_width, 2 * d, Activation::Rectifier, rng));
    model.disc_head.push_back(make_layer(d, hidden_width, Activation::Sigmoid, rng));
    if (class_count >= 2 && variant != Variant::NoClassifier) {
        model.cls_head.push_back(make_layer(class_count, hidden_width, Activation::SoftmaxColumns, rng));
    }
    return model;
}

// Fills missing slots with independent uniform noise on [0, 0.01); the
// observed slots pass through untouched.
inline Matrix noise_fill(const Matrix& values, const Matrix& mask, Rng& rng) {
    require_same_shape(values, mask, "noise_fill");
    Matrix out = values;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (mask.values()[i] == 0.0) out.values()[i] = rng.uniform(0.0, 0.01);
    }
    return out;
}

// X_bar: the generator's full reconstruction, every entry in (0,1).
inline Matrix generator_forward(const SeganModel& model, const Matrix& x_noisy, const Matrix& mask, ForwardCache& cache,
                                const DropoutSpec& dropout = {}) {
    require_same_shape(x_noisy, mask, "generator_forward");
    return mlp_forward(model.generator, vstack(x_noisy, mask), cache, dropout);
}

inline Matrix generator_forward(const SeganModel& model, const Matrix& x_noisy, const Matrix& mask) {
    ForwardCache cache;
    return generator_forward(model, x_noisy, mask, cache);
}

// X_hat = M.*X + (1-M).*X_bar, as an entrywise select so observed positions
// carry X bit-exactly.
inline Matrix impute_combine(const Matrix& x, const Matrix& x_bar, const Matrix& mask) {
    require_same_shape(x, x_bar, "impute_combine");
    require_same_shape(x, mask, "impute_combine");
    Matrix out = x;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (mask.values()[i] == 0.0) out.values()[i] = x_bar.values()[i];
    }
    return out;
}

struct CriticCaches {
    ForwardCache trunk;
    ForwardCache head;
};

// M_hat in (0,1)^{d x n}: trunk over [X_hat; R], then the sigmoid head.
inline Matrix discriminator_forward(const SeganModel& model, const Matrix& x_hat, const Matrix& hint,
                                    CriticCaches& caches, const DropoutSpec& dropout = {}) {
    require_same_shape(x_hat, hint, "discriminator_forward");
    const Matrix trunk_out = mlp_forward(model.trunk, vstack(x_hat, hint), caches.trunk, dropout);
    return mlp_forward(model.disc_head, trunk_out, caches.head);
}

inline Matrix discriminator_forward(const SeganModel& model, const Matrix& x_hat, const Matrix& hint) {
    CriticCaches caches;
    return discriminator_forward(model, x_hat, hint, caches);
}

// Class probabilities (q x n); shares the trunk with the discriminator and
// feeds it a blank hint channel.
inline Matrix classifier_forward(const SeganModel& model, const Matrix& x_hat, CriticCaches& caches,
                                 const DropoutSpec& dropout = {}) {
    if (!model.has_classifier()) throw ConfigError("model has no classifier (q < 2 or no_classifier variant)");
    const Matrix trunk_out =
        mlp_forward(model.trunk, vstack(x_hat, blank_hint(x_hat.rows(), x_hat.cols())), caches.trunk, dropout);
    return mlp_forward(model.cls_head, trunk_out, caches.head);
}

inline Matrix classifier_forward(const SeganModel& model, const Matrix& x_hat) {
    CriticCaches caches;
    return classifier_forward(model, x_hat, caches);
}

// Masked MAE sum over observed entries; the 1/n factor is applied by the
// generator objective at the call site.
inline double reconstruction_loss(const Matrix& x, const Matrix& x_bar, const Matrix& mask) {
    require_same_shape(x, x_bar, "reconstruction_loss");
    require_same_shape(x, mask, "reconstruction_loss");
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sum += mask.values()[i] * std::abs(x.values()[i] - x_bar.values()[i]);
    }
    return sum;
}

// Mean entrywise binary cross-entropy between the mask and the
// discrimination matrix, over all d*n entries.
inline double discriminator_loss(const Matrix& mask, const Matrix& m_hat) {
    require_same_shape(mask, m_hat, "discriminator_loss");
    double sum = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const double p = clamp_prob(m_hat.values()[i]);
        sum -= mask.values()[i] * std::log(p) + (1.0 - mask.values()[i]) * std::log(1.0 - p);
    }
    return sum / static_cast<double>(mask.size());
}

// dL_D/dM_hat for the loss above.
inline Matrix discriminator_loss_grad(const Matrix& mask, const Matrix& m_hat) {
    Matrix grad(m_hat.rows(), m_hat.cols());
    const double n = static_cast<double>(m_hat.size());
    for (std::size_t i = 0; i < m_hat.size(); ++i) {
        const double p = clamp_prob(m_hat.values()[i]);
        grad.values()[i] = (-mask.values()[i] / p + (1.0 - mask.values()[i]) / (1.0 - p)) / n;
    }
    return grad;
}

// Mean over labeled samples of -log(probability of the true class).
// Labels may be true or pseudo; unlabeled columns contribute nothing.
inline double classifier_loss(const LabelVector& labels, const Matrix& probabilities) {
    std::size_t labeled = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < labels.size() && i < probabilities.cols(); ++i) {
        if (!labels[i]) continue;
        if (*labels[i] >= probabilities.rows()) throw ShapeError("classifier_loss: label out of range");
        sum -= std::log(clamp_prob(probabilities.at(*labels[i], i)));
        ++labeled;
    }
    if (labeled == 0) {
        std::cerr << "segan: warning: classifier loss over zero labeled samples\n";
        return 0.0;
    }
    return sum / static_cast<double>(labeled);
}

// dL_C/dprobabilities; zero columns for unlabeled samples.
inline Matrix classifier_loss_grad(const LabelVector& labels, const Matrix& probabilities) {
    Matrix grad(probabilities.rows(), probabilities.cols());
    std::size_t labeled = 0;
    for (std::size_t i = 0; i < labels.size() && i < probabilities.cols(); ++i) {
        if (labels[i]) ++labeled;
    }
    if (labeled == 0) return grad;
    for (std::size_t i = 0; i < labels.size() && i < probabilities.cols(); ++i) {
        if (!labels[i]) continue;
        const double p = std::max(probabilities.at(*labels[i], i), kProbFloor);
        grad.at(*labels[i], i) = -1.0 / (p * static_cast<double>(labeled));
    }
    return grad;
}

// Mean over missing entries of log(1 - M_hat); 0 when nothing is missing.
inline double adversarial_term(const Matrix& mask, const Matrix& m_hat) {
    require_same_shape(mask, m_hat, "adversarial_term");
    double sum = 0.0;
    std::size_t missing = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask.values()[i] == 0.0) {
            sum += std::log(1.0 - clamp_prob(m_hat.values()[i]));
            ++missing;
        }
    }
    return missing ? sum / static_cast<double>(missing) : 0.0;
}

// d(adversarial_term)/dM_hat.
inline Matrix adversarial_term_grad(const Matrix& mask, const Matrix& m_hat) {
    Matrix grad(m_hat.rows(), m_hat.cols());
    std::size_t missing = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask.values()[i] == 0.0) ++missing;
    }
    if (missing == 0) return grad;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask.values()[i] == 0.0) {
            grad.values()[i] = -1.0 / ((1.0 - clamp_prob(m_hat.values()[i])) * static_cast<double>(missing));
        }
    }
    return grad;
}

// L_G = (1/n) * masked-MAE sum + alpha * adversarial term + beta * classifier
// loss on labeled samples. Pure value function; training uses the gradient
// path in train.hpp, tests diff this one.
inline double generator_loss(const SeganModel& model, const Matrix& x, const Matrix& x_bar, const Matrix& x_hat,
                             const Matrix& mask, const Matrix& hint, const LabelVector& labels) {
    const double n = static_cast<double>(x.cols());
    double loss = reconstruction_loss(x, x_bar, mask) / n;
    if (model.variant != Variant::NoDiscriminator && model.alpha != 0.0) {
        loss += model.alpha * adversarial_term(mask, discriminator_forward(model, x_hat, hint));
    }
    if (model.has_classifier() && model.beta != 0.0) {
        loss += model.beta * classifier_loss(labels, classifier_forward(model, x_hat));
    }
    if (!std::isfinite(loss)) throw DivergenceError("generator loss is not finite");
    return loss;
}

struct PseudoLabelResult {
    LabelVector labels;        // true labels kept, confident predictions added
    std::size_t pseudo_count = 0;
};

// Assigns argmax labels where the top probability reaches the threshold.
// True labels always win over predictions.
inline PseudoLabelResult pseudo_label(const Matrix& probabilities, double threshold, const LabelVector& true_labels) {
    if (threshold <= 0.5 || threshold >= 1.0) {
        throw ConfigError("pseudo-label threshold must lie in (0.5,1), got " + std::to_string(threshold));
    }
    PseudoLabelResult result;
    result.labels.assign(probabilities.cols(), std::nullopt);
    for (std::size_t i = 0; i < probabilities.cols(); ++i) {
        if (i < true_labels.size() && true_labels[i]) {
            result.labels[i] = true_labels[i];
            continue;
        }
        std::size_t best = 0;
        for (std::size_t r = 1; r < probabilities.rows(); ++r) {
            if (probabilities.at(r, i) > probabilities.at(best, i)) best = r;
        }
        if (probabilities.at(best, i) >= threshold) {
            result.labels[i] = best;
            ++result.pseudo_count;
        }
    }
    return result;
}

}  // namespace segan
