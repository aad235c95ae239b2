#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "mlbatch/trainer.hpp"

using namespace mlbatch;

namespace {

// Small synthetic multi-label dataset: labels from noisy linear scores.
Dataset synthetic(std::size_t n, std::size_t d, std::size_t q, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Dataset ds;
    ds.features = Matrix(n, d);
    ds.labels = Matrix(n, q);
    Matrix w(q, d);
    for (auto& v : w.data()) v = g(rng);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) ds.features(i, j) = g(rng);
        for (std::size_t j = 0; j < q; ++j) {
            double score = 0.0;
            for (std::size_t c = 0; c < d; ++c) score += w(j, c) * ds.features(i, c);
            score += 0.5 * g(rng);
            ds.labels(i, j) = score > 0.0 ? 1.0 : 0.0;
        }
    }
    // make sure every label has at least one positive
    for (std::size_t j = 0; j < q; ++j) ds.labels(0, j) = 1.0;
    for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("f" + std::to_string(j));
    for (std::size_t j = 0; j < q; ++j) ds.label_names.push_back("l" + std::to_string(j));
    return ds;
}

Split simple_split(std::size_t n) {
    Split s;
    for (std::size_t i = 0; i < n; ++i) {
        if (i % 5 == 3) s.valid.push_back(i);
        else if (i % 5 == 4) s.test.push_back(i);
        else s.train.push_back(i);
    }
    return s;
}

std::vector<double> batch_losses(const TrainResult& r) {
    std::vector<double> out;
    for (const auto& row : r.batch_rows) out.push_back(row.train_loss);
    return out;
}

}  // namespace

TEST_CASE("training is deterministic for a fixed config and seed") {
    Dataset ds = synthetic(60, 4, 3, 1);
    Split split = simple_split(60);
    TrainConfig cfg;
    cfg.batch_size = 16;
    cfg.epochs = 4;
    cfg.warmup_epochs = 1;
    cfg.k = 3;
    cfg.strategy = Strategy::Adaptive;
    TrainResult a = train(ds, split, cfg);
    TrainResult b = train(ds, split, cfg);
    CHECK(batch_losses(a) == batch_losses(b));
    CHECK(a.best_epoch == b.best_epoch);
    CHECK(a.test.macro_auc == b.test.macro_auc);
}

TEST_CASE("all-warm-up run is bit-identical to the random strategy") {
    Dataset ds = synthetic(50, 3, 2, 2);
    Split split = simple_split(50);
    TrainConfig cfg;
    cfg.batch_size = 10;
    cfg.epochs = 3;
    cfg.k = 3;
    cfg.strategy = Strategy::Adaptive;
    cfg.warmup_epochs = 3;  // warm-up covers the whole run
    TrainResult warm = train(ds, split, cfg);
    cfg.strategy = Strategy::Random;
    cfg.warmup_epochs = 0;
    TrainResult rnd = train(ds, split, cfg);
    CHECK(batch_losses(warm) == batch_losses(rnd));
}

TEST_CASE("warm-up batches agree across strategies for one seed") {
    Dataset ds = synthetic(40, 3, 2, 3);
    Split split = simple_split(40);
    TrainConfig cfg;
    cfg.batch_size = 8;
    cfg.epochs = 2;
    cfg.warmup_epochs = 2;
    cfg.k = 3;
    std::vector<std::vector<double>> curves;
    for (auto s : {Strategy::Random, Strategy::Hard, Strategy::Adaptive,
                   Strategy::AdaptiveChain}) {
        cfg.strategy = s;
        curves.push_back(batch_losses(train(ds, split, cfg)));
    }
    for (std::size_t i = 1; i < curves.size(); ++i) CHECK(curves[i] == curves[0]);
}

TEST_CASE("selection weights never touch the gradient path") {
    // fixed batch schedule; only update_after_batch sees the weights
    Dataset ds = synthetic(30, 3, 2, 4);
    std::vector<std::size_t> all(30);
    std::iota(all.begin(), all.end(), 0);

    auto run = [&](const std::vector<double>& weights) {
        std::mt19937_64 rng(7);
        MLPModel model = MLPModel::init({3, 8, 2}, rng);
        AdamState adam = AdamState::init(model, 1e-3, 1e-4);
        SelectionState state = init_state(30, Strategy::Adaptive, 8.0, 0, 1);
        const std::vector<std::vector<std::size_t>> schedule = {
            {0, 5, 9, 14}, {1, 2, 3, 4}, {20, 21, 25, 29}, {6, 7, 8, 10}};
        for (const auto& batch : schedule) {
            Matrix xb(batch.size(), 3), yb(batch.size(), 2);
            for (std::size_t i = 0; i < batch.size(); ++i)
                for (std::size_t j = 0; j < 3; ++j) {
                    xb(i, j) = ds.features(batch[i], j);
                    if (j < 2) yb(i, j) = ds.labels(batch[i], j);
                }
            auto losses = bce_per_sample(forward(model, xb), yb);
            Gradients g = backward(model, xb, yb);
            adam_step(adam, model, g);
            update_after_batch(state, batch, losses, weights);
        }
        return model;
    };

    std::vector<double> ones(30, 1.0), heavy(30, 1.0);
    for (std::size_t i = 0; i < 30; i += 3) heavy[i] = 2.5;
    MLPModel m1 = run(ones);
    MLPModel m2 = run(heavy);
    for (std::size_t l = 0; l < m1.layer_count(); ++l)
        CHECK(m1.weights[l].data() == m2.weights[l].data());  // bit-identical
}

TEST_CASE("random strategy visits every index exactly once per epoch") {
    Dataset ds = synthetic(25, 3, 2, 5);
    Split split = simple_split(25);
    TrainConfig cfg;
    cfg.batch_size = 4;
    cfg.epochs = 2;
    cfg.warmup_epochs = 0;
    cfg.k = 3;
    cfg.strategy = Strategy::Random;
    std::vector<std::vector<std::size_t>> per_epoch(cfg.epochs);
    BatchHook hook = [&](int epoch, int, const std::vector<std::size_t>& idx,
                         const std::vector<double>&) {
        per_epoch[epoch].insert(per_epoch[epoch].end(), idx.begin(), idx.end());
    };
    train(ds, split, cfg, hook);
    const std::size_t n_train = split.train.size();
    for (const auto& seen : per_epoch) {
        CHECK(seen.size() == n_train);
        std::vector<int> count(n_train, 0);
        for (std::size_t i : seen) ++count[i];
        for (int c : count) CHECK(c == 1);
    }
}

TEST_CASE("wall clock is nondecreasing and epochs select the best model") {
    Dataset ds = synthetic(50, 4, 2, 6);
    Split split = simple_split(50);
    TrainConfig cfg;
    cfg.batch_size = 10;
    cfg.epochs = 5;
    cfg.warmup_epochs = 1;
    cfg.k = 3;
    TrainResult r = train(ds, split, cfg);
    for (std::size_t i = 1; i < r.batch_rows.size(); ++i)
        CHECK(r.batch_rows[i].wallclock_ms >= r.batch_rows[i - 1].wallclock_ms);
    CHECK(r.best_epoch >= 0);
    CHECK(r.best_epoch < cfg.epochs);
    double best = r.epoch_rows[r.best_epoch].valid.macro_auc;
    for (const auto& row : r.epoch_rows) CHECK(best >= row.valid.macro_auc);
}

TEST_CASE("split_from_folds partitions the dataset") {
    Dataset ds = synthetic(23, 2, 2, 7);
    FoldSplit folds = kfold(ds, 5, 99);
    for (int f = 0; f < 5; ++f) {
        Split s = split_from_folds(folds, f);
        CHECK(s.train.size() + s.valid.size() + s.test.size() == 23);
        CHECK(!s.train.empty());
        CHECK(!s.valid.empty());
        CHECK(!s.test.empty());
    }
    CHECK_THROWS_AS(split_from_folds(folds, 5), std::invalid_argument);
}

TEST_CASE("empty split parts are rejected") {
    Dataset ds = synthetic(10, 2, 2, 8);
    Split s;
    for (std::size_t i = 0; i < 10; ++i) s.train.push_back(i);
    TrainConfig cfg;
    CHECK_THROWS_AS(train(ds, s, cfg), std::invalid_argument);
}
