#include "mlbatch/selector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mlbatch {

Strategy strategy_from_name(const std::string& name) {
    if (name == "random") return Strategy::Random;
    if (name == "hard") return Strategy::Hard;
    if (name == "adaptive") return Strategy::Adaptive;
    if (name == "adaptive-chain" || name == "adaptive_chain") return Strategy::AdaptiveChain;
    throw std::invalid_argument("unknown strategy '" + name + "'");
}

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::Random: return "random";
        case Strategy::Hard: return "hard";
        case Strategy::Adaptive: return "adaptive";
        case Strategy::AdaptiveChain: return "adaptive-chain";
    }
    return "?";
}

SelectionState init_state(std::size_t n, Strategy strategy, double selection_pressure,
                          int warmup_epochs, int batches_per_epoch) {
    if (n == 0) throw std::invalid_argument("init_state: n must be >= 1");
    if (selection_pressure < 1.0)
        throw std::invalid_argument("init_state: selection pressure must be >= 1");
    if (warmup_epochs < 0) throw std::invalid_argument("init_state: negative warm-up");
    SelectionState st;
    st.strategy = strategy;
    st.selection_pressure = selection_pressure;
    st.raw_loss.assign(n, 0.0);
    st.weighted_loss.assign(n, 0.0);
    st.q_index.assign(n, 0);
    st.probabilities.assign(n, 1.0 / static_cast<double>(n));
    st.warmup_remaining = warmup_epochs * batches_per_epoch;
    return st;
}

std::vector<int> quantize(const std::vector<double>& weighted_loss) {
    const std::size_t n = weighted_loss.size();
    std::vector<int> q(n, 0);
    double l_max = 0.0;
    for (double v : weighted_loss) l_max = std::max(l_max, v);
    if (l_max == 0.0) return q;
    const double step = l_max / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        // clamp: rounding in l_max/step can push the argmax to n+1
        q[i] = std::min(static_cast<int>(n),
                        static_cast<int>(std::ceil(weighted_loss[i] / step)));
    }
    return q;
}

namespace {

std::vector<double> exponent_probabilities(const std::vector<double>& exponents, double s_e) {
    const std::size_t n = exponents.size();
    if (s_e == 1.0) return std::vector<double>(n, 1.0 / static_cast<double>(n));
    const double log_base = std::log(s_e) / static_cast<double>(n);
    // subtract the max exponent so the normalizer stays in range for large n
    double emax = *std::max_element(exponents.begin(), exponents.end());
    std::vector<double> p(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = std::exp(log_base * (exponents[i] - emax));
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

}  // namespace

std::vector<double> selection_probabilities(const std::vector<int>& q_index,
                                            double selection_pressure) {
    std::vector<double> e(q_index.begin(), q_index.end());
    return exponent_probabilities(e, selection_pressure);
}

std::vector<double> rank_probabilities(const std::vector<double>& loss,
                                       double selection_pressure) {
    const std::size_t n = loss.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return loss[a] < loss[b]; });
    std::vector<double> rank(n);
    for (std::size_t r = 0; r < n; ++r) rank[order[r]] = static_cast<double>(r + 1);
    return exponent_probabilities(rank, selection_pressure);
}

void update_after_batch(SelectionState& state, const std::vector<std::size_t>& batch_indices,
                        const std::vector<double>& batch_raw_losses,
                        const std::vector<double>& weights) {
    const std::size_t n = state.n();
    if (batch_indices.size() != batch_raw_losses.size())
        throw std::invalid_argument("update_after_batch: index/loss size mismatch");
    for (std::size_t b = 0; b < batch_indices.size(); ++b) {
        std::size_t i = batch_indices[b];
        if (i >= n) throw std::invalid_argument("update_after_batch: index out of range");
        state.raw_loss[i] = batch_raw_losses[b];
    }
    for (std::size_t i = 0; i < n; ++i)
        state.weighted_loss[i] = weights[i] * state.raw_loss[i];

    switch (state.strategy) {
        case Strategy::Random:
            break;  // stays uniform; batches come from per-epoch permutations
        case Strategy::Hard:
            // rank on the unweighted loss; no quantization
            state.probabilities = rank_probabilities(state.raw_loss, state.selection_pressure);
            break;
        case Strategy::Adaptive:
        case Strategy::AdaptiveChain:
            state.q_index = quantize(state.weighted_loss);
            state.probabilities =
                selection_probabilities(state.q_index, state.selection_pressure);
            break;
    }

    double sum = 0.0;
    for (double p : state.probabilities) {
        if (!(p > 0.0)) throw std::logic_error("selection distribution lost strict positivity");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::logic_error("selection distribution does not sum to 1");
}

namespace {

// One renormalized draw over the alive entries of `pool_mask`.
std::size_t draw_one(const std::vector<double>& p, const std::vector<char>& alive,
                     std::mt19937_64& rng) {
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (alive[i]) total += p[i];
    std::uniform_real_distribution<double> dist(0.0, total);
    double u = dist(rng);
    double acc = 0.0;
    std::size_t last = p.size();
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!alive[i]) continue;
        acc += p[i];
        last = i;
        if (u < acc) return i;
    }
    return last;  // u == total within rounding
}

}  // namespace

std::vector<std::size_t> draw_batch(const SelectionState& state, std::size_t batch_size,
                                    std::mt19937_64& rng) {
    const std::size_t n = state.n();
    if (batch_size > n) throw std::invalid_argument("draw_batch: batch_size > n");
    std::vector<char> alive(n, 1);
    std::vector<std::size_t> batch;
    batch.reserve(batch_size);
    for (std::size_t t = 0; t < batch_size; ++t) {
        std::size_t pick = draw_one(state.probabilities, alive, rng);
        alive[pick] = 0;
        batch.push_back(pick);
    }
    return batch;
}

std::vector<std::size_t> draw_chain_batch(const SelectionState& state,
                                          const LabelAdjacency& adjacency, const Matrix& labels,
                                          const std::vector<double>& irlbl_values, double card,
                                          std::size_t batch_size, std::mt19937_64& rng) {
    const std::size_t n = state.n();
    const std::size_t q = labels.cols();
    if (batch_size > n) throw std::invalid_argument("draw_chain_batch: batch_size > n");

    int related_count = static_cast<int>(std::ceil(card));
    related_count = std::clamp(related_count, 1, static_cast<int>(q) - 1);

    std::vector<char> alive(n, 1);
    std::vector<std::size_t> batch;
    batch.reserve(batch_size);

    std::size_t seed = draw_one(state.probabilities, alive, rng);
    alive[seed] = 0;
    batch.push_back(seed);

    std::vector<char> restricted(n, 0);
    while (batch.size() < batch_size) {
        // anchor = the seed's positive label with maximum IRLbl, ties by index
        std::size_t anchor = q;
        double best = -1.0;
        for (std::size_t j = 0; j < q; ++j)
            if (labels(seed, j) != 0.0 && irlbl_values[j] > best) {
                best = irlbl_values[j];
                anchor = j;
            }

        bool pool_ok = false;
        if (anchor < q && q >= 2) {
            auto related = top_related_labels(adjacency, anchor, related_count);
            for (std::size_t i = 0; i < n; ++i) {
                restricted[i] = 0;
                if (!alive[i]) continue;
                for (std::size_t j : related)
                    if (labels(i, j) != 0.0) {
                        restricted[i] = 1;
                        pool_ok = true;
                        break;
                    }
            }
        }
        std::size_t pick = pool_ok ? draw_one(state.probabilities, restricted, rng)
                                   : draw_one(state.probabilities, alive, rng);
        alive[pick] = 0;
        batch.push_back(pick);
        seed = pick;
    }
    return batch;
}

}  // namespace mlbatch
