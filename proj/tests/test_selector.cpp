#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "mlbatch/selector.hpp"

using namespace mlbatch;

TEST_CASE("strategy names round trip") {
    for (auto s : {Strategy::Random, Strategy::Hard, Strategy::Adaptive,
                   Strategy::AdaptiveChain})
        CHECK(strategy_from_name(strategy_name(s)) == s);
    CHECK_THROWS_AS(strategy_from_name("greedy"), std::invalid_argument);
}

TEST_CASE("init_state") {
    SUBCASE("uniform start") {
        SelectionState st = init_state(4, Strategy::Adaptive, 8.0, 0, 1);
        for (double p : st.probabilities) CHECK(p == 0.25);
        CHECK(!st.in_warmup());
    }
    SUBCASE("warm-up spans gamma epochs of batches") {
        SelectionState st = init_state(128, Strategy::Adaptive, 8.0, 3, 1);
        CHECK(st.warmup_remaining == 3);
    }
    SUBCASE("argument errors") {
        CHECK_THROWS_AS(init_state(0, Strategy::Adaptive, 8.0, 0, 1), std::invalid_argument);
        CHECK_THROWS_AS(init_state(4, Strategy::Adaptive, 0.5, 0, 1), std::invalid_argument);
    }
}

TEST_CASE("quantize") {
    SUBCASE("hand case") {
        CHECK(quantize({0.2, 0.5, 1.0}) == std::vector<int>{1, 2, 3});
    }
    SUBCASE("zero loss maps to zero") {
        auto q = quantize({0.0, 0.3, 0.6});
        CHECK(q[0] == 0);
    }
    SUBCASE("max loss maps to n") {
        auto q = quantize({0.1, 0.2, 0.9, 0.9});
        CHECK(q[2] == 4);
        CHECK(q[3] == 4);
    }
    SUBCASE("all-zero losses map to all-zero indices") {
        CHECK(quantize({0.0, 0.0}) == std::vector<int>{0, 0});
    }
    SUBCASE("monotone in loss") {
        std::vector<double> l = {0.11, 0.52, 0.52, 0.97, 0.3};
        auto q = quantize(l);
        for (std::size_t a = 0; a < l.size(); ++a)
            for (std::size_t b = 0; b < l.size(); ++b)
                if (l[a] <= l[b]) CHECK(q[a] <= q[b]);
    }
}

TEST_CASE("selection_probabilities") {
    SUBCASE("equal indices give uniform") {
        auto p = selection_probabilities({3, 3, 3}, 8.0);
        for (double v : p) CHECK(v == doctest::Approx(1.0 / 3));
    }
    SUBCASE("n=2, Q=[0,2], s_e=4 gives [0.2, 0.8]") {
        auto p = selection_probabilities({0, 2}, 4.0);
        CHECK(p[0] == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(p[1] == doctest::Approx(0.8).epsilon(1e-12));
    }
    SUBCASE("s_e=1 is uniform regardless of Q") {
        auto p = selection_probabilities({0, 5, 2}, 1.0);
        for (double v : p) CHECK(v == doctest::Approx(1.0 / 3));
    }
    SUBCASE("pairwise ratio law") {
        std::vector<int> q = {0, 3, 7, 7, 12, 20};
        double s_e = 16.0;
        auto p = selection_probabilities(q, s_e);
        const double n = double(q.size());
        for (std::size_t a = 0; a < q.size(); ++a)
            for (std::size_t b = 0; b < q.size(); ++b)
                CHECK(p[a] / p[b] ==
                      doctest::Approx(std::pow(s_e, (q[a] - q[b]) / n)).epsilon(1e-9));
    }
}

TEST_CASE("rank_probabilities") {
    SUBCASE("s_e=1 uniform") {
        auto p = rank_probabilities({0.4, 0.1, 0.8}, 1.0);
        for (double v : p) CHECK(v == doctest::Approx(1.0 / 3));
    }
    SUBCASE("n=2 hand case") {
        auto p = rank_probabilities({0.1, 0.9}, 4.0);
        CHECK(p[0] == doctest::Approx(1.0 / 3).epsilon(1e-12));
        CHECK(p[1] == doctest::Approx(2.0 / 3).epsilon(1e-12));
    }
    SUBCASE("highest loss attains maximal probability") {
        std::vector<double> l = {0.5, 0.2, 0.9, 0.1};
        auto p = rank_probabilities(l, 8.0);
        CHECK(*std::max_element(p.begin(), p.end()) == p[2]);
    }
    SUBCASE("ties broken by ascending index") {
        auto p = rank_probabilities({0.5, 0.5}, 4.0);
        CHECK(p[0] < p[1]);  // index 0 gets the lower rank
    }
}

namespace {

SelectionState make_state(std::size_t n, Strategy strategy, double s_e) {
    return init_state(n, strategy, s_e, 0, 1);
}

}  // namespace

TEST_CASE("update_after_batch") {
    std::vector<double> ones(3, 1.0);
    SUBCASE("identical losses are a fixed point") {
        SelectionState st = make_state(3, Strategy::Adaptive, 8.0);
        update_after_batch(st, {0, 1, 2}, {0.3, 0.6, 0.9}, ones);
        auto p1 = st.probabilities;
        update_after_batch(st, {0, 1, 2}, {0.3, 0.6, 0.9}, ones);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(st.probabilities[i] == doctest::Approx(p1[i]).epsilon(1e-12));
    }
    SUBCASE("unique maximum attains Q=n and max probability") {
        SelectionState st = make_state(3, Strategy::Adaptive, 8.0);
        update_after_batch(st, {0, 1, 2}, {0.3, 0.2, 0.1}, ones);
        update_after_batch(st, {1}, {5.0}, ones);
        CHECK(st.q_index[1] == 3);
        CHECK(*std::max_element(st.probabilities.begin(), st.probabilities.end()) ==
              st.probabilities[1]);
    }
    SUBCASE("scripted two-batch sequence matches replay oracle") {
        std::vector<double> w = {1.0, 1.5, 2.0};
        SelectionState st = make_state(3, Strategy::Adaptive, 8.0);
        update_after_batch(st, {0, 2}, {0.4, 0.2}, w);
        update_after_batch(st, {1}, {0.6}, w);
        // oracle: rebuild weighted losses, quantize, exponentiate
        std::vector<double> raw = {0.4, 0.6, 0.2};
        std::vector<double> wl(3);
        for (int i = 0; i < 3; ++i) wl[i] = w[i] * raw[i];
        double lmax = *std::max_element(wl.begin(), wl.end());
        double delta = lmax / 3.0;
        std::vector<double> expweight(3);
        double base = std::exp(std::log(8.0) / 3.0), total = 0.0;
        for (int i = 0; i < 3; ++i) {
            expweight[i] = std::pow(base, std::ceil(wl[i] / delta));
            total += expweight[i];
        }
        for (int i = 0; i < 3; ++i)
            CHECK(st.probabilities[i] == doctest::Approx(expweight[i] / total).epsilon(1e-9));
    }
    SUBCASE("hard strategy ranks the unweighted loss") {
        std::vector<double> w = {10.0, 1.0};
        SelectionState st = make_state(2, Strategy::Hard, 4.0);
        update_after_batch(st, {0, 1}, {0.1, 0.9}, w);
        CHECK(st.probabilities[1] > st.probabilities[0]);
    }
    SUBCASE("index out of range") {
        SelectionState st = make_state(3, Strategy::Adaptive, 8.0);
        CHECK_THROWS_AS(update_after_batch(st, {3}, {0.1}, ones), std::invalid_argument);
    }
    SUBCASE("strict positivity and unit sum after every update") {
        SelectionState st = make_state(50, Strategy::Adaptive, 64.0);
        std::vector<double> w(50, 1.0);
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> loss(0.0, 2.0);
        for (int step = 0; step < 100; ++step) {
            std::vector<std::size_t> idx = {rng() % 50, rng() % 50};
            update_after_batch(st, idx, {loss(rng), loss(rng)}, w);
            double sum = 0.0;
            double norm = 0.0;
            double base = std::exp(std::log(64.0) / 50.0);
            for (int qi : st.q_index) norm += std::pow(base, qi);
            for (std::size_t i = 0; i < 50; ++i) {
                CHECK(st.probabilities[i] > 0.0);
                CHECK(st.probabilities[i] >= 1.0 / norm - 1e-12);
                sum += st.probabilities[i];
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("quantization smoothing vs rank sensitivity") {
    const std::size_t n = 100;
    const double s_e = 8.0;
    std::mt19937_64 rng(7);
    std::vector<double> losses(n);
    const double base_loss = 1.0;
    const double delta = base_loss / double(n);
    std::uniform_real_distribution<double> pert(-delta / 4.0, delta / 4.0);
    for (auto& l : losses) l = base_loss + pert(rng);

    auto adaptive = selection_probabilities(quantize(losses), s_e);
    auto ranked = rank_probabilities(losses, s_e);

    const double base = std::exp(std::log(s_e) / double(n));
    double amax = *std::max_element(adaptive.begin(), adaptive.end());
    double amin = *std::min_element(adaptive.begin(), adaptive.end());
    CHECK(amax / amin <= base + 1e-12);  // near-equal losses stay near-uniform

    double rmax = *std::max_element(ranked.begin(), ranked.end());
    double rmin = *std::min_element(ranked.begin(), ranked.end());
    CHECK(rmax / rmin == doctest::Approx(std::pow(base, n - 1)).epsilon(1e-9));
}

TEST_CASE("draw_batch") {
    SUBCASE("batch_size = n is a permutation") {
        SelectionState st = make_state(6, Strategy::Adaptive, 8.0);
        std::mt19937_64 rng(1);
        auto batch = draw_batch(st, 6, rng);
        std::set<std::size_t> uniq(batch.begin(), batch.end());
        CHECK(uniq.size() == 6);
    }
    SUBCASE("batch_size > n rejected") {
        SelectionState st = make_state(3, Strategy::Adaptive, 8.0);
        std::mt19937_64 rng(1);
        CHECK_THROWS_AS(draw_batch(st, 4, rng), std::invalid_argument);
    }
    SUBCASE("deterministic for fixed seed") {
        SelectionState st = make_state(20, Strategy::Adaptive, 8.0);
        std::mt19937_64 r1(9), r2(9);
        CHECK(draw_batch(st, 5, r1) == draw_batch(st, 5, r2));
    }
    SUBCASE("uniform P gives uniform inclusion frequencies") {
        SelectionState st = make_state(5, Strategy::Adaptive, 8.0);
        std::mt19937_64 rng(123);
        std::vector<int> hits(5, 0);
        const int trials = 100000;
        for (int t = 0; t < trials; ++t)
            for (std::size_t i : draw_batch(st, 2, rng)) ++hits[i];
        // each index included with probability 2/5; 3 sigma band
        const double pexp = 0.4;
        const double sigma = std::sqrt(pexp * (1 - pexp) / trials);
        for (int h : hits)
            CHECK(std::abs(double(h) / trials - pexp) < 3.0 * sigma + 1e-3);
    }
    SUBCASE("P = [0.2, 0.8] empirical frequency") {
        SelectionState st = make_state(2, Strategy::Adaptive, 8.0);
        st.probabilities = {0.2, 0.8};
        std::mt19937_64 rng(321);
        int ones = 0;
        const int trials = 100000;
        for (int t = 0; t < trials; ++t)
            if (draw_batch(st, 1, rng)[0] == 1) ++ones;
        CHECK(std::abs(double(ones) / trials - 0.8) < 0.01);
    }
}

TEST_CASE("draw_chain_batch") {
    SUBCASE("vacuous restriction behaves like draw_batch in support") {
        // both labels always positive: D_c is everything
        Matrix labels(5, 2, 1.0);
        LabelAdjacency adj = label_adjacency(labels);
        std::vector<double> ir = irlbl(labels);
        SelectionState st = make_state(5, Strategy::AdaptiveChain, 8.0);
        std::mt19937_64 rng(4);
        auto batch = draw_chain_batch(st, adj, labels, ir, 2.0, 5, rng);
        std::set<std::size_t> uniq(batch.begin(), batch.end());
        CHECK(uniq.size() == 5);
    }
    SUBCASE("chain property: non-seed picks come from predecessor's pool") {
        // 6 instances, 3 labels, structured co-occurrence
        Matrix labels = Matrix::from_rows({{1, 0, 0},
                                           {1, 1, 0},
                                           {0, 1, 0},
                                           {0, 1, 1},
                                           {0, 0, 1},
                                           {1, 0, 1}});
        LabelAdjacency adj = label_adjacency(labels);
        std::vector<double> ir = irlbl(labels);
        double card = 1.0;  // one related label per anchor
        SelectionState st = make_state(6, Strategy::AdaptiveChain, 8.0);
        std::vector<double> w(6, 1.0);
        update_after_batch(st, {0, 1, 2, 3, 4, 5}, {0.1, 0.5, 0.3, 0.7, 0.2, 0.9}, w);

        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 2000; ++trial) {
            auto batch = draw_chain_batch(st, adj, labels, ir, card, 4, rng);
            std::set<std::size_t> seen;
            seen.insert(batch[0]);
            for (std::size_t t = 1; t < batch.size(); ++t) {
                std::size_t prev = batch[t - 1];
                // recompute predecessor pool
                std::size_t anchor = 3;
                double best = -1.0;
                for (std::size_t j = 0; j < 3; ++j)
                    if (labels(prev, j) != 0.0 && ir[j] > best) {
                        best = ir[j];
                        anchor = j;
                    }
                auto related = top_related_labels(adj, anchor, 1);
                bool pool_nonempty = false;
                std::set<std::size_t> pool;
                for (std::size_t i = 0; i < 6; ++i) {
                    if (seen.count(i)) continue;
                    for (std::size_t j : related)
                        if (labels(i, j) != 0.0) {
                            pool.insert(i);
                            pool_nonempty = true;
                            break;
                        }
                }
                if (pool_nonempty) CHECK(pool.count(batch[t]) == 1);
                seen.insert(batch[t]);
            }
        }
    }
    SUBCASE("anchor is the rarest positive label") {
        // instance 0 positive for labels 0 and 1; label 1 rarer
        Matrix labels = Matrix::from_rows({{1, 1}, {1, 0}, {1, 0}, {0, 1}});
        std::vector<double> ir = irlbl(labels);
        CHECK(ir[1] > ir[0]);
        // exercised through draw_chain_batch in the chain-property subcase;
        // here just pin the IRLbl ordering the anchor rule depends on
    }
}
