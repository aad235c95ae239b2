#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mlbatch/dataset.hpp"
#include "mlbatch/imbalance.hpp"
#include "mlbatch/metrics.hpp"
#include "mlbatch/mlp.hpp"
#include "mlbatch/selector.hpp"

namespace mlbatch {

struct TrainConfig {
    std::size_t batch_size = 128;
    int epochs = 30;
    double selection_pressure = 8.0;  // s_e
    int warmup_epochs = 3;            // gamma
    int k = 5;                        // kNN neighbor count
    double learning_rate = 1e-3;
    double weight_decay = 1e-4;
    std::uint64_t seed = 1;
    Strategy strategy = Strategy::Adaptive;
    bool standardize = false;
    std::vector<std::size_t> hidden;  // empty -> one layer of max(64, 4q)
    std::string select_metric = "macro_auc";  // best-epoch criterion on validation
    bool record_sample_losses = true;  // keep per-epoch full-train losses
};

struct Split {
    std::vector<std::size_t> train, valid, test;
};

// Train/valid/test from a fold assignment: fold `test_fold` is the test set,
// the next fold cyclically is validation, the rest train.
Split split_from_folds(const FoldSplit& folds, int test_fold);

struct BatchRow {
    int epoch;
    int batch;
    double wallclock_ms;
    double train_loss;  // mean BCE over the drawn batch
};

struct EpochRow {
    int epoch;
    double train_loss;  // mean BCE over the full training split
    MetricReport valid;
};

// Called after every gradient step when set; used for the JSON-lines
// batch debug stream.
using BatchHook = std::function<void(int epoch, int batch,
                                     const std::vector<std::size_t>& train_indices,
                                     const std::vector<double>& probabilities)>;

struct TrainResult {
    MLPModel model;       // final parameters
    MLPModel best_model;  // parameters at the best validation epoch
    int best_epoch;
    MetricReport test;    // test metrics of best_model
    std::vector<BatchRow> batch_rows;
    std::vector<EpochRow> epoch_rows;
    // epoch_sample_losses[e][i] = full-pass BCE of train sample i after epoch e
    std::vector<std::vector<double>> epoch_sample_losses;
    std::vector<bool> minority_mask;   // label space, from the training split
    std::vector<double> weights;       // per train sample
    SelectionState final_state;
};

// Warm-up (uniform permutation batches) for `warmup_epochs`, then the
// configured strategy. Each batch: one Adam step from the unweighted
// batch-mean BCE, then a selection-state update. Two runs with the same
// config and seed (any strategy) share the post-warm-up checkpoint.
TrainResult train(const Dataset& dataset, const Split& split, const TrainConfig& config,
                  const BatchHook& batch_hook = nullptr);

}  // namespace mlbatch
