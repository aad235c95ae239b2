#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlbatch/dataset.hpp"
#include "mlbatch/metrics.hpp"
#include "mlbatch/selector.hpp"
#include "mlbatch/trainer.hpp"

namespace mlbatch {

struct ExperimentConfig {
    std::string dataset_path;
    std::string format = "arff";     // arff | csv
    std::string labels;              // label list path, or an integer count
    std::vector<std::string> strategies = {"random", "adaptive"};
    TrainConfig train;               // shared per-run settings (seed/strategy overridden)
    int folds = 5;
    std::vector<std::uint64_t> seeds = {1};
    std::string out_dir = "out";
    bool dump_scores = false;        // per-run test score matrices
    bool debug_batches = false;      // per-run JSON-lines batch stream
};

// One (epoch, bucket) snapshot of log-scaled per-sample losses, bucketed by
// the sample's count of positive minority labels: 0, 1, 2, or ">2".
struct DensityRecord {
    int epoch;
    std::vector<std::string> bucket;  // per sample
    std::vector<double> log_loss;     // ln(loss + 1e-12)
};

DensityRecord density_snapshot(const std::vector<double>& raw_loss, const Matrix& labels,
                               const std::vector<bool>& minority_mask, int epoch);

// Trains every (strategy, fold, seed) combination and writes curves.csv,
// metrics.csv, density.csv and summary.csv under config.out_dir. Runs may
// execute in parallel (MLBATCH_THREADS); outputs are written in a fixed
// order so reruns are reproducible. Returns the out directory.
std::string run_experiment(const Dataset& dataset, const ExperimentConfig& config);

struct CompareRow {
    std::string metric;
    std::string verdict;  // win | loss | tie
    double p_value;
};

// Wilcoxon signed-rank comparison of strategy A against strategy B from two
// summary.csv files, paired by (seed, fold), one row per metric.
std::vector<CompareRow> compare(const std::string& summary_a, const std::string& summary_b,
                                double significance = 0.05);

}  // namespace mlbatch
