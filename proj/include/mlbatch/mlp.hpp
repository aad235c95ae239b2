#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mlbatch/matrix.hpp"

namespace mlbatch {

// Fully connected ReLU network with sigmoid outputs, one weight matrix
// (out x in) and bias vector per layer.
struct MLPModel {
    std::vector<std::size_t> layer_sizes;  // [d, h1, ..., q]
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;

    static MLPModel init(const std::vector<std::size_t>& layer_sizes, std::mt19937_64& rng);

    std::size_t layer_count() const { return weights.size(); }
};

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
};

struct AdamState {
    std::vector<Matrix> m_weights, v_weights;
    std::vector<std::vector<double>> m_biases, v_biases;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double learning_rate = 1e-3;
    double weight_decay = 1e-4;  // coupled L2, added to the gradient
    double epsilon = 1e-8;
    std::int64_t step = 0;

    static AdamState init(const MLPModel& model, double learning_rate, double weight_decay);
};

// batch (b x d) -> per-label probabilities (b x q), all strictly in (0,1).
Matrix forward(const MLPModel& model, const Matrix& batch);

// Mean-over-labels BCE per sample; probabilities clamped to
// [1e-7, 1 - 1e-7] before the logs.
std::vector<double> bce_per_sample(const Matrix& probabilities, const Matrix& labels);

// Exact gradients of the batch-mean of bce_per_sample.
Gradients backward(const MLPModel& model, const Matrix& batch, const Matrix& labels);

// One Adam step with bias-corrected moments; mutates model parameters.
void adam_step(AdamState& state, MLPModel& model, const Gradients& grads);

// Versioned text checkpoint of layer sizes + parameters.
void save_checkpoint(const MLPModel& model, const std::string& path);
MLPModel load_checkpoint(const std::string& path);

}  // namespace mlbatch
