#pragma once

#include <cstdint>
#include <vector>

#include "labelset/losses.hpp"
#include "labelset/phantom.hpp"

namespace labelset {

// Voxel-wise linear-softmax segmentation model.
struct Model {
    std::uint32_t num_labels = 0;
    std::uint32_t feature_channels = 0;
    std::vector<double> weights;  // num_labels x feature_channels, row-major by label
    std::vector<double> bias;     // num_labels
};

Model zero_model(std::uint32_t num_labels, std::uint32_t feature_channels);

struct TrainConfig {
    double learning_rate = 0.001;
    std::size_t batch_size = 3;  // whole volumes per step
    std::size_t max_epochs = 500;
    std::size_t early_stop_patience = 50;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double split_fraction = 0.9;  // train share; the rest drives early stopping
    std::uint64_t seed = 0;

    void validate() const;
};

struct EpochLog {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    Model model;  // best early-stop-set checkpoint
    std::vector<EpochLog> log;
    std::size_t best_epoch = 0;
    double best_val_loss = 0.0;
    std::vector<std::size_t> val_indices;  // volumes held out for early stopping
};

// Per-voxel softmax(weights . features + bias).
ProbMap forward(const Model& model, const FeatureMap& features);
ProbMap forward(const Model& model, const Phantom& phantom);

struct ParamGrad {
    std::vector<double> weights;
    std::vector<double> bias;
    double loss_value = 0.0;
};

// Loss value and gradient w.r.t. model parameters for one volume, evaluated
// against the phantom's partial annotation. Chains the loss gradient through
// the softmax Jacobian.
ParamGrad model_gradient(const Model& model, const Phantom& phantom, const LossSpec& loss);

// Seeded shuffle, split_fraction/rest split, Adam over volume batches with
// averaged gradients, best-checkpoint early stopping. Deterministic given
// the seed.
TrainResult train(const std::vector<Phantom>& volumes, const LossSpec& loss, const TrainConfig& cfg);

}  // namespace labelset
