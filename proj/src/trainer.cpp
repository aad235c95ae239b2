#include "mlbatch/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mlbatch {

namespace {

Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
    Matrix out(rows.size(), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(rows[i], j);
    return out;
}

// whether a larger value of the selection metric is better
bool higher_is_better(const std::string& metric) {
    return metric == "macro_f" || metric == "micro_f" || metric == "macro_auc";
}

double metric_value(const MetricReport& r, const std::string& metric) {
    if (metric == "macro_f") return r.macro_f;
    if (metric == "micro_f") return r.micro_f;
    if (metric == "macro_auc") return r.macro_auc;
    if (metric == "ranking_loss") return r.ranking_loss;
    if (metric == "hamming_loss") return r.hamming_loss;
    if (metric == "one_error") return r.one_error;
    throw std::invalid_argument("unknown selection metric '" + metric + "'");
}

MetricReport evaluate_split(const MLPModel& model, const Matrix& features,
                            const Matrix& labels) {
    Matrix scores = forward(model, features);
    MetricReport r;
    r.macro_f = macro_f(scores, labels);
    r.micro_f = micro_f(scores, labels);
    try {
        r.macro_auc = macro_auc(scores, labels);
    } catch (const std::invalid_argument&) {
        r.macro_auc = 0.5;  // split has no rankable label
    }
    r.ranking_loss = ranking_loss(scores, labels);
    r.hamming_loss = hamming_loss(scores, labels);
    r.one_error = one_error(scores, labels);
    return r;
}

}  // namespace

Split split_from_folds(const FoldSplit& folds, int test_fold) {
    if (test_fold < 0 || test_fold >= folds.fold_count)
        throw std::invalid_argument("test_fold out of range");
    const int valid_fold = (test_fold + 1) % folds.fold_count;
    Split s;
    for (std::size_t i = 0; i < folds.assignments.size(); ++i) {
        int f = folds.assignments[i];
        if (f == test_fold) s.test.push_back(i);
        else if (f == valid_fold) s.valid.push_back(i);
        else s.train.push_back(i);
    }
    return s;
}

TrainResult train(const Dataset& dataset, const Split& split, const TrainConfig& config,
                  const BatchHook& batch_hook) {
    if (split.train.empty() || split.valid.empty() || split.test.empty())
        throw std::invalid_argument("train: every split part must be non-empty");
    if (config.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");

    Matrix features = dataset.features;
    if (config.standardize) standardize_features(features, split.train);

    const Matrix x_train = take_rows(features, split.train);
    const Matrix y_train = take_rows(dataset.labels, split.train);
    const Matrix x_valid = take_rows(features, split.valid);
    const Matrix y_valid = take_rows(dataset.labels, split.valid);
    const Matrix x_test = take_rows(features, split.test);
    const Matrix y_test = take_rows(dataset.labels, split.test);

    const std::size_t n = x_train.rows();
    const std::size_t q = dataset.q();
    const std::size_t batch_size = std::min(config.batch_size, n);
    const int batches_per_epoch =
        static_cast<int>((n + batch_size - 1) / batch_size);

    const int k = std::min<int>(config.k, static_cast<int>(n) - 1);
    ImbalanceProfile profile = build_profile(x_train, y_train, k);
    LabelAdjacency adjacency = label_adjacency(y_train);
    const double card = stats(Dataset{x_train, y_train, {}, {}}).card;

    std::vector<std::size_t> layers;
    layers.push_back(dataset.d());
    if (config.hidden.empty())
        layers.push_back(std::max<std::size_t>(64, 4 * q));
    else
        layers.insert(layers.end(), config.hidden.begin(), config.hidden.end());
    layers.push_back(q);

    // one stream for parameter init, one for batch selection; the selection
    // stream is consumed identically across strategies during warm-up
    std::mt19937_64 rng_init(config.seed);
    std::mt19937_64 rng_select(config.seed ^ 0x9e3779b97f4a7c15ULL);

    TrainResult result;
    result.model = MLPModel::init(layers, rng_init);
    result.minority_mask = profile.minority_mask;
    result.weights = profile.weights;

    AdamState adam = AdamState::init(result.model, config.learning_rate, config.weight_decay);
    SelectionState state = init_state(n, config.strategy, config.selection_pressure,
                                      config.warmup_epochs, batches_per_epoch);

    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed_ms = [&t0]() {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    };

    result.best_epoch = -1;
    double best_value = 0.0;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (int b = 0; b < batches_per_epoch; ++b) {
            std::vector<std::size_t> batch;
            const bool uniform_phase =
                state.in_warmup() || config.strategy == Strategy::Random;
            if (uniform_phase) {
                if (b == 0) std::shuffle(perm.begin(), perm.end(), rng_select);
                const std::size_t lo = static_cast<std::size_t>(b) * batch_size;
                const std::size_t hi = std::min(lo + batch_size, n);
                batch.assign(perm.begin() + lo, perm.begin() + hi);
            } else if (config.strategy == Strategy::AdaptiveChain) {
                batch = draw_chain_batch(state, adjacency, y_train, profile.irlbl, card,
                                         batch_size, rng_select);
            } else {
                batch = draw_batch(state, batch_size, rng_select);
            }

            Matrix xb = take_rows(x_train, batch);
            Matrix yb = take_rows(y_train, batch);
            std::vector<double> losses = bce_per_sample(forward(result.model, xb), yb);
            Gradients grads = backward(result.model, xb, yb);
            adam_step(adam, result.model, grads);

            update_after_batch(state, batch, losses, profile.weights);
            if (state.warmup_remaining > 0) --state.warmup_remaining;

            BatchRow row;
            row.epoch = epoch;
            row.batch = b;
            row.wallclock_ms = elapsed_ms();
            row.train_loss =
                std::accumulate(losses.begin(), losses.end(), 0.0) / losses.size();
            result.batch_rows.push_back(row);
            if (batch_hook) batch_hook(epoch, b, batch, state.probabilities);
        }

        std::vector<double> full_losses =
            bce_per_sample(forward(result.model, x_train), y_train);
        EpochRow erow;
        erow.epoch = epoch;
        erow.train_loss =
            std::accumulate(full_losses.begin(), full_losses.end(), 0.0) / full_losses.size();
        erow.valid = evaluate_split(result.model, x_valid, y_valid);
        result.epoch_rows.push_back(erow);
        if (config.record_sample_losses)
            result.epoch_sample_losses.push_back(std::move(full_losses));

        const double v = metric_value(erow.valid, config.select_metric);
        const bool better = result.best_epoch < 0 ||
                            (higher_is_better(config.select_metric) ? v > best_value
                                                                    : v < best_value);
        if (better) {
            best_value = v;
            result.best_epoch = epoch;
            result.best_model = result.model;
        }
    }

    result.test = evaluate_split(result.best_model, x_test, y_test);
    result.final_state = std::move(state);
    return result;
}

}  // namespace mlbatch
