// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace scenid {

/// Fully connected network with tanh on every layer, output included.
struct MLPParams {
    std::vector<int> layer_sizes;
    std::vector<Eigen::MatrixXd> weights; // weights[h] is sizes[h+1] x sizes[h]
    std::vector<Eigen::VectorXd> biases;
    std::uint64_t train_fingerprint = 0;

    int input_size() const { return layer_sizes.front(); }
    int output_size() const { return layer_sizes.back(); }
    std::size_t layer_count() const { return weights.size(); }
    void validate() const;
};

struct TrainConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    int epochs = 2000;
    int batch_size = 32;
    std::uint64_t seed = 1;
    /// Stop when the epoch loss has not improved by a relative
    /// `plateau_tol` for `plateau_patience` epochs; 0 disables.
    int plateau_patience = 100;
    double plateau_tol = 1e-3;

    void validate() const;
    std::uint64_t fingerprint() const;
};

struct TrainReport {
    std::vector<double> epoch_loss;
    double train_accuracy = 0.0;
};

/// Column-per-sample inputs with labels in 1..output_size.
struct LabeledSet {
    Eigen::MatrixXd inputs;
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
};

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
MLPParams init_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed);

Eigen::VectorXd forward(const MLPParams& params, const Eigen::VectorXd& input);
Eigen::VectorXd forward(const MLPParams& params, const std::vector<double>& input);
/// Column-wise forward pass over a batch.
Eigen::MatrixXd forward_batch(const MLPParams& params, const Eigen::MatrixXd& inputs);

/// Targets: one column per sample, one-hot in {0, 1}.
Eigen::MatrixXd one_hot_targets(const std::vector<int>& labels, int classes);

/// Mean over the batch of the per-sample mean squared output error.
double batch_loss(const MLPParams& params, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets);

/// Exact gradient of batch_loss.
Gradients gradients(const MLPParams& params, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets);

/// Mini-batch gradient descent with momentum; seeded shuffling.
std::pair<MLPParams, TrainReport> train(MLPParams params, const LabeledSet& data, const TrainConfig& config);

/// argmax(output) + 1; the lowest index wins ties.
int classify_output(const Eigen::VectorXd& output);
int classify(const MLPParams& params, const std::vector<double>& feature);

double accuracy(const MLPParams& params, const LabeledSet& data);

/// sum_{h=1}^{H-1} 2 M q_h q_{h+1} + 2 M q_H q_o + 2 M q_o over the hidden
/// widths q_1..q_H and output width q_o.
std::uint64_t complexity_count(const MLPParams& params, std::uint64_t n_training);
std::uint64_t complexity_count(const std::vector<int>& hidden, int outputs, std::uint64_t n_training);

/// Versioned text model file; shortest round-trip number formatting makes
/// it byte-stable.
void write_model(std::ostream& out, const MLPParams& params);
MLPParams read_model(std::istream& in);
void save_model(const std::string& path, const MLPParams& params);
MLPParams load_model(const std::string& path);

} // namespace scenid
