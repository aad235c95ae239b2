#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mlbatch/imbalance.hpp"
#include "mlbatch/matrix.hpp"

namespace mlbatch {

enum class Strategy { Random, Hard, Adaptive, AdaptiveChain };

Strategy strategy_from_name(const std::string& name);
std::string strategy_name(Strategy s);

// Per-sample loss bookkeeping plus the live selection distribution.
// Owned and mutated only by the training loop, between gradient steps.
struct SelectionState {
    Strategy strategy = Strategy::Adaptive;
    std::vector<double> raw_loss;       // latest per-sample BCE, stale off-batch
    std::vector<double> weighted_loss;  // weights ⊙ raw_loss, selection only
    std::vector<int> q_index;           // quantization indices in [0, n]
    std::vector<double> probabilities;  // sums to 1, every entry > 0
    double selection_pressure = 8.0;    // s_e >= 1; 1 means uniform
    int warmup_remaining = 0;           // batches left in the warm-up phase

    std::size_t n() const { return probabilities.size(); }
    bool in_warmup() const { return warmup_remaining > 0; }
};

// Uniform probabilities, zeroed losses; warm-up spans
// warmup_epochs * batches_per_epoch batches.
SelectionState init_state(std::size_t n, Strategy strategy, double selection_pressure,
                          int warmup_epochs, int batches_per_epoch);

// Q_i = ceil(l_i / Δ) with Δ = l_max / n; all zeros when l_max = 0.
std::vector<int> quantize(const std::vector<double>& weighted_loss);

// p(i) ∝ base^{Q_i}, base = exp(log(s_e)/n). Uniform when s_e = 1.
std::vector<double> selection_probabilities(const std::vector<int>& q_index,
                                            double selection_pressure);

// p(i) ∝ base^{rank(l_i)}, ranks ascending in loss, ties by index, in [1, n].
std::vector<double> rank_probabilities(const std::vector<double>& loss,
                                       double selection_pressure);

// Replaces the stored losses at batch_indices, then recomputes the full
// distribution under the state's strategy. Off-batch entries stay stale.
void update_after_batch(SelectionState& state, const std::vector<std::size_t>& batch_indices,
                        const std::vector<double>& batch_raw_losses,
                        const std::vector<double>& weights);

// batch_size distinct indices, drawn sequentially without replacement with
// renormalization over the remaining pool.
std::vector<std::size_t> draw_batch(const SelectionState& state, std::size_t batch_size,
                                    std::mt19937_64& rng);

// Chain variant: the seed comes from P; each subsequent draw is restricted to
// instances sharing a label correlated with the previous pick's rarest
// positive label. Falls back to the global pool when the restriction is
// empty or the seed has no positive label.
std::vector<std::size_t> draw_chain_batch(const SelectionState& state,
                                          const LabelAdjacency& adjacency, const Matrix& labels,
                                          const std::vector<double>& irlbl_values, double card,
                                          std::size_t batch_size, std::mt19937_64& rng);

}  // namespace mlbatch
