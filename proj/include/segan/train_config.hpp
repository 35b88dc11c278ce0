#pragma once

#include <cstdint>
#include <string>

#include "segan/errors.hpp"

namespace segan {

// Training hyperparameters. Defaults: lr 0.001, 30 epochs, batch 128,
// dropout 0.5, hint rate 0.8, label rate 1.0.
struct TrainConfig {
    double learning_rate = 0.001;
    std::uint64_t epochs = 30;
    std::uint64_t batch_size = 128;
    double dropout_rate = 0.5;
    double hint_rate = 0.8;
    double label_rate = 1.0;
    double alpha = 1.0;
    double beta = 1.0;
    double pseudo_label_threshold = 0.9;
    std::uint64_t warmup_epochs = 5;
    std::uint64_t seed = 1;

    void validate() const {
        if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
        if (epochs == 0) throw ConfigError("epochs must be positive");
        if (batch_size == 0) throw ConfigError("batch_size must be positive");
        if (dropout_rate < 0.0 || dropout_rate >= 1.0) throw ConfigError("dropout_rate must lie in [0,1)");
        if (hint_rate < 0.0 || hint_rate > 1.0) throw ConfigError("hint_rate must lie in [0,1]");
        if (label_rate <= 0.0 || label_rate > 1.0) throw ConfigError("label_rate must lie in (0,1]");
        if (alpha < 0.0) throw ConfigError("alpha must be non-negative");
        if (beta < 0.0) throw ConfigError("beta must be non-negative");
        if (pseudo_label_threshold <= 0.5 || pseudo_label_threshold >= 1.0) {
            throw ConfigError("pseudo_label_threshold must lie in (0.5,1)");
        }
    }

    bool operator==(const TrainConfig&) const = default;
};

}  // namespace segan
