#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "segan/adam.hpp"
#include "segan/dataset.hpp"
#include "segan/errors.hpp"
#include "segan/matrix.hpp"
#include "segan/mlp.hpp"
#include "segan/model.hpp"
#include "segan/rng.hpp"
#include "segan/train_config.hpp"

namespace segan {

struct TrainReport {
    std::vector<double> generator_loss;      // one entry per epoch
    std::vector<double> discriminator_loss;  // empty when the D step never ran
    std::vector<double> classifier_loss;     // empty when the C step never ran
    std::vector<std::size_t> pseudo_label_counts;
    std::vector<double> epoch_seconds;  // wall clock; excluded from determinism comparisons
};

// Parameter scaffold for one variant. no_hint forces the hint rate to 0,
// no_classifier drops the classifier head, no_discriminator keeps the
// discriminator parameters but the training loop never updates or uses them.
inline SeganModel build_variant(const TrainConfig& config, Variant variant, std::size_t feature_dim,
                                std::size_t class_count) {
    config.validate();
    Rng init_rng(derive_seed(config.seed, "init"));
    const double beta = variant == Variant::NoClassifier ? 0.0 : config.beta;
    SeganModel model = build_model(feature_dim, class_count, variant, config.alpha, beta, config.hint_rate,
                                   config.pseudo_label_threshold, init_rng);
    model.config = config;
    return model;
}

namespace detail {

inline LabelVector select_labels(const LabelVector& labels, const std::vector<std::size_t>& idx) {
    LabelVector out(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
        if (idx[j] < labels.size()) out[j] = labels[idx[j]];
    }
    return out;
}

inline std::size_t labeled_count(const LabelVector& labels) {
    std::size_t n = 0;
    for (const auto& l : labels) {
        if (l) ++n;
    }
    return n;
}

// dL/dX_bar of the (1/n)*masked-MAE term.
inline Matrix reconstruction_grad(const Matrix& x, const Matrix& x_bar, const Matrix& mask) {
    Matrix grad(x.rows(), x.cols());
    const double inv_n = 1.0 / static_cast<double>(x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (mask.values()[i] == 1.0) {
            const double diff = x_bar.values()[i] - x.values()[i];
            grad.values()[i] = diff > 0.0 ? inv_n : (diff < 0.0 ? -inv_n : 0.0);
        }
    }
    return grad;
}

// Backpropagates a head-output gradient through head and trunk; returns the
// gradient at the trunk input (2d rows). Parameter grads land in the stores.
inline Matrix critic_backward(const std::vector<MlpLayer>& head, const std::vector<MlpLayer>& trunk,
                              const CriticCaches& caches, const Matrix& output_grad, GradientStore& head_store,
                              GradientStore& trunk_store) {
    const Matrix trunk_out_grad = mlp_backward(head, caches.head, output_grad, head_store);
    return mlp_backward(trunk, caches.trunk, trunk_out_grad, trunk_store);
}

}  // namespace detail

// The minimax loop: per batch a discriminator update, a classifier update on
// labeled + pseudo-labeled samples, then a generator update against the
// frozen critics. Pseudo-labels refresh once per epoch after the warm-up.
inline std::pair<SeganModel, TrainReport> train(const Dataset& dataset, const TrainConfig& config,
                                                Variant variant = Variant::Full) {
    config.validate();
    const std::size_t d = dataset.feature_dim();
    const std::size_t n = dataset.sample_count();
    if (d == 0 || n == 0) throw DatasetError("train: dataset is empty");

    const std::size_t q = dataset.schema.class_count();
    SeganModel model = build_variant(config, variant, d, q);
    model.schema_fingerprint = schema_fingerprint(dataset.schema);
    const bool use_discriminator = variant != Variant::NoDiscriminator;
    const bool use_classifier = model.has_classifier() && model.beta > 0.0;
    if (model.beta > 0.0 && variant != Variant::NoClassifier && q < 2) {
        throw ConfigError("train: beta > 0 requires q >= 2 classes (got q=" + std::to_string(q) +
                          "); set beta=0 for unlabeled data");
    }

    Rng rng(derive_seed(config.seed, "train"));
    AdamOptimizer gen_opt;
    const std::size_t gen_h = gen_opt.add_stack(model.generator, "generator");
    AdamOptimizer critic_opt;
    const std::size_t trunk_h = critic_opt.add_stack(model.trunk, "trunk");
    const std::size_t disc_h = critic_opt.add_stack(model.disc_head, "discriminator_head");
    std::size_t cls_h = 0;
    if (use_classifier) cls_h = critic_opt.add_stack(model.cls_head, "classifier_head");

    LabelVector active_labels = dataset.labels;  // true labels plus pseudo-labels
    TrainReport report;

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    for (std::uint64_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto epoch_start = std::chrono::steady_clock::now();
        rng.shuffle(order);

        double g_sum = 0.0, d_sum = 0.0, c_sum = 0.0;
        std::size_t g_n = 0, d_n = 0, c_n = 0;

        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t end = std::min(n, start + config.batch_size);
            const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                               order.begin() + static_cast<std::ptrdiff_t>(end));
            const std::size_t nb = idx.size();
            const Matrix xb = select_columns(dataset.values, idx);
            const Matrix mb = select_columns(dataset.mask, idx);
            const LabelVector yb = detail::select_labels(active_labels, idx);
            const std::size_t yb_count = detail::labeled_count(yb);
            const HintMatrix hint = sample_hint(mb, model.hint_rate, rng);
            DropoutSpec train_dropout{config.dropout_rate, &rng};

            // a generated sample from the frozen generator, shared by the
            // discriminator and classifier updates
            Matrix x_hat_const;
            {
                const Matrix x_noisy = noise_fill(xb, mb, rng);
                x_hat_const = impute_combine(xb, generator_forward(model, x_noisy, mb), mb);
            }

            if (use_discriminator) {
                CriticCaches caches;
                const Matrix m_hat = discriminator_forward(model, x_hat_const, hint.r, caches, train_dropout);
                const double l_d = discriminator_loss(mb, m_hat);
                if (!std::isfinite(l_d)) {
                    throw DivergenceError("discriminator loss diverged at epoch " + std::to_string(epoch + 1) +
                                          ", batch " + std::to_string(start / config.batch_size + 1));
                }
                GradientStore head_store, trunk_store;
                detail::critic_backward(model.disc_head, model.trunk, caches, discriminator_loss_grad(mb, m_hat),
                                        head_store, trunk_store);
                critic_opt.begin_step();
                critic_opt.update(trunk_h, model.trunk, trunk_store, config.learning_rate);
                critic_opt.update(disc_h, model.disc_head, head_store, config.learning_rate);
                d_sum += l_d * static_cast<double>(nb);
                d_n += nb;
            }

            if (use_classifier && yb_count > 0) {
                CriticCaches caches;
                const Matrix probs = classifier_forward(model, x_hat_const, caches, train_dropout);
                const double l_c = classifier_loss(yb, probs);
                if (!std::isfinite(l_c)) {
                    throw DivergenceError("classifier loss diverged at epoch " + std::to_string(epoch + 1) +
                                          ", batch " + std::to_string(start / config.batch_size + 1));
                }
                GradientStore head_store, trunk_store;
                detail::critic_backward(model.cls_head, model.trunk, caches, classifier_loss_grad(yb, probs),
                                        head_store, trunk_store);
                critic_opt.begin_step();
                critic_opt.update(trunk_h, model.trunk, trunk_store, config.learning_rate);
                critic_opt.update(cls_h, model.cls_head, head_store, config.learning_rate);
                c_sum += l_c * static_cast<double>(yb_count);
                c_n += yb_count;
            }

            // generator update against the frozen critics
            {
                const Matrix x_noisy = noise_fill(xb, mb, rng);
                ForwardCache gen_cache;
                const Matrix x_bar = generator_forward(model, x_noisy, mb, gen_cache, train_dropout);
                const Matrix x_hat = impute_combine(xb, x_bar, mb);

                double l_g = reconstruction_loss(xb, x_bar, mb) / static_cast<double>(nb);
                Matrix x_bar_grad = detail::reconstruction_grad(xb, x_bar, mb);
                Matrix x_hat_grad(d, nb);

                if (use_discriminator && model.alpha != 0.0) {
                    CriticCaches caches;
                    const Matrix m_hat = discriminator_forward(model, x_hat, hint.r, caches);
                    l_g += model.alpha * adversarial_term(mb, m_hat);
                    Matrix adv_grad = adversarial_term_grad(mb, m_hat);
                    scale_in_place(adv_grad, model.alpha);
                    GradientStore unused_head, unused_trunk;
                    const Matrix input_grad =
                        detail::critic_backward(model.disc_head, model.trunk, caches, adv_grad, unused_head, unused_trunk);
                    add_in_place(x_hat_grad, top_rows(input_grad, d));
                }

                if (use_classifier && yb_count > 0) {
                    CriticCaches caches;
                    const Matrix probs = classifier_forward(model, x_hat, caches);
                    l_g += model.beta * classifier_loss(yb, probs);
                    Matrix cls_grad = classifier_loss_grad(yb, probs);
                    scale_in_place(cls_grad, model.beta);
                    GradientStore unused_head, unused_trunk;
                    const Matrix input_grad =
                        detail::critic_backward(model.cls_head, model.trunk, caches, cls_grad, unused_head, unused_trunk);
                    add_in_place(x_hat_grad, top_rows(input_grad, d));
                }

                if (!std::isfinite(l_g)) {
                    throw DivergenceError("generator loss diverged at epoch " + std::to_string(epoch + 1) + ", batch " +
                                          std::to_string(start / config.batch_size + 1));
                }

                // dX_hat/dX_bar = (1 - M)
                for (std::size_t i = 0; i < x_hat_grad.size(); ++i) {
                    if (mb.values()[i] == 0.0) x_bar_grad.values()[i] += x_hat_grad.values()[i];
                }
                GradientStore gen_store;
                mlp_backward(model.generator, gen_cache, x_bar_grad, gen_store);
                gen_opt.begin_step();
                gen_opt.update(gen_h, model.generator, gen_store, config.learning_rate);
                g_sum += l_g * static_cast<double>(nb);
                g_n += nb;
            }
        }

        report.generator_loss.push_back(g_n ? g_sum / static_cast<double>(g_n) : 0.0);
        if (use_discriminator) report.discriminator_loss.push_back(d_n ? d_sum / static_cast<double>(d_n) : 0.0);
        if (use_classifier) report.classifier_loss.push_back(c_n ? c_sum / static_cast<double>(c_n) : 0.0);

        // pseudo-label refresh, once per epoch after the warm-up
        std::size_t pseudo_count = 0;
        if (use_classifier && epoch + 1 >= config.warmup_epochs && epoch + 1 < config.epochs) {
            const Matrix x_noisy = noise_fill(dataset.values, dataset.mask, rng);
            const Matrix x_hat = impute_combine(dataset.values, generator_forward(model, x_noisy, dataset.mask),
                                                dataset.mask);
            const PseudoLabelResult refreshed =
                pseudo_label(classifier_forward(model, x_hat), model.pseudo_label_threshold, dataset.labels);
            active_labels = refreshed.labels;
            pseudo_count = refreshed.pseudo_count;
        }
        report.pseudo_label_counts.push_back(pseudo_count);

        const auto epoch_end = std::chrono::steady_clock::now();
        report.epoch_seconds.push_back(std::chrono::duration<double>(epoch_end - epoch_start).count());
    }

    return {std::move(model), std::move(report)};
}

// Inference: noise-fill, generator forward with dropout off, combine.
// Observed entries pass through bit-exactly.
inline Matrix impute(const SeganModel& model, const Dataset& dataset) {
    if (dataset.feature_dim() != model.feature_dim) {
        throw ConfigError("impute: dataset has " + std::to_string(dataset.feature_dim()) + " features, model expects " +
                          std::to_string(model.feature_dim));
    }
    if (model.schema_fingerprint != 0 && schema_fingerprint(dataset.schema) != model.schema_fingerprint) {
        throw ConfigError("impute: dataset schema does not match the model's schema fingerprint");
    }
    Rng rng(derive_seed(model.config.seed, "impute"));
    const Matrix x_noisy = noise_fill(dataset.values, dataset.mask, rng);
    return impute_combine(dataset.values, generator_forward(model, x_noisy, dataset.mask), dataset.mask);
}

}  // namespace segan
