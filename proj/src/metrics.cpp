#include "mlbatch/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace mlbatch {

namespace {

struct Confusion {
    std::int64_t tp = 0, fp = 0, fn = 0;
};

double f1(const Confusion& c) {
    const double denom = static_cast<double>(2 * c.tp + c.fp + c.fn);
    if (denom == 0.0) return 1.0;  // vacuously perfect all-negative label
    return 2.0 * static_cast<double>(c.tp) / denom;
}

Confusion label_confusion(const Matrix& scores, const Matrix& labels, std::size_t j,
                          double threshold) {
    Confusion c;
    for (std::size_t i = 0; i < scores.rows(); ++i) {
        const bool pred = scores(i, j) >= threshold;
        const bool truth = labels(i, j) != 0.0;
        if (pred && truth) ++c.tp;
        else if (pred) ++c.fp;
        else if (truth) ++c.fn;
    }
    return c;
}

}  // namespace

double macro_f(const Matrix& scores, const Matrix& labels, double threshold) {
    if (!scores.same_shape(labels)) throw std::invalid_argument("macro_f: shape mismatch");
    double sum = 0.0;
    for (std::size_t j = 0; j < scores.cols(); ++j)
        sum += f1(label_confusion(scores, labels, j, threshold));
    return sum / static_cast<double>(scores.cols());
}

double micro_f(const Matrix& scores, const Matrix& labels, double threshold) {
    if (!scores.same_shape(labels)) throw std::invalid_argument("micro_f: shape mismatch");
    Confusion pooled;
    for (std::size_t j = 0; j < scores.cols(); ++j) {
        Confusion c = label_confusion(scores, labels, j, threshold);
        pooled.tp += c.tp;
        pooled.fp += c.fp;
        pooled.fn += c.fn;
    }
    return f1(pooled);
}

double macro_auc(const Matrix& scores, const Matrix& labels) {
    if (!scores.same_shape(labels)) throw std::invalid_argument("macro_auc: shape mismatch");
    const std::size_t n = scores.rows(), q = scores.cols();
    double sum = 0.0;
    std::size_t included = 0;
    std::vector<std::size_t> order(n);
    for (std::size_t j = 0; j < q; ++j) {
        std::size_t pos = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (labels(i, j) != 0.0) ++pos;
        if (pos == 0 || pos == n) continue;

        // Mann-Whitney via average ranks of the scores
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return scores(a, j) < scores(b, j); });
        double rank_sum_pos = 0.0;
        std::size_t i = 0;
        while (i < n) {
            std::size_t e = i;
            while (e + 1 < n && scores(order[e + 1], j) == scores(order[i], j)) ++e;
            const double avg_rank = 0.5 * static_cast<double>(i + e) + 1.0;
            for (std::size_t t = i; t <= e; ++t)
                if (labels(order[t], j) != 0.0) rank_sum_pos += avg_rank;
            i = e + 1;
        }
        const double neg = static_cast<double>(n - pos);
        const double u = rank_sum_pos - 0.5 * static_cast<double>(pos) * (pos + 1);
        sum += u / (static_cast<double>(pos) * neg);
        ++included;
    }
    if (included == 0)
        throw std::invalid_argument("macro_auc: no label has both positives and negatives");
    return sum / static_cast<double>(included);
}

double ranking_loss(const Matrix& scores, const Matrix& labels) {
    if (!scores.same_shape(labels)) throw std::invalid_argument("ranking_loss: shape mismatch");
    const std::size_t n = scores.rows(), q = scores.cols();
    double sum = 0.0;
    std::size_t included = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double wrong = 0.0;
        std::size_t pairs = 0;
        for (std::size_t a = 0; a < q; ++a) {
            if (labels(i, a) == 0.0) continue;
            for (std::size_t b = 0; b < q; ++b) {
                if (labels(i, b) != 0.0) continue;
                ++pairs;
                if (scores(i, a) < scores(i, b)) wrong += 1.0;
                else if (scores(i, a) == scores(i, b)) wrong += 0.5;
            }
        }
        if (pairs == 0) continue;
        sum += wrong / static_cast<double>(pairs);
        ++included;
    }
    return included ? sum / static_cast<double>(included) : 0.0;
}

double hamming_loss(const Matrix& scores, const Matrix& labels, double threshold) {
    if (!scores.same_shape(labels)) throw std::invalid_argument("hamming_loss: shape mismatch");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < scores.rows(); ++i)
        for (std::size_t j = 0; j < scores.cols(); ++j)
            if ((scores(i, j) >= threshold) != (labels(i, j) != 0.0)) ++wrong;
    return static_cast<double>(wrong) /
           static_cast<double>(scores.rows() * scores.cols());
}

double one_error(const Matrix& scores, const Matrix& labels) {
    if (!scores.same_shape(labels)) throw std::invalid_argument("one_error: shape mismatch");
    std::size_t wrong = 0, included = 0;
    for (std::size_t i = 0; i < scores.rows(); ++i) {
        bool any_pos = false;
        for (std::size_t j = 0; j < scores.cols(); ++j)
            if (labels(i, j) != 0.0) any_pos = true;
        if (!any_pos) continue;
        std::size_t top = 0;
        for (std::size_t j = 1; j < scores.cols(); ++j)
            if (scores(i, j) > scores(i, top)) top = j;
        ++included;
        if (labels(i, top) == 0.0) ++wrong;
    }
    return included ? static_cast<double>(wrong) / static_cast<double>(included) : 0.0;
}

MetricReport evaluate(const Matrix& scores, const Matrix& labels, double threshold) {
    MetricReport r;
    r.macro_f = macro_f(scores, labels, threshold);
    r.micro_f = micro_f(scores, labels, threshold);
    r.macro_auc = macro_auc(scores, labels);
    r.ranking_loss = ranking_loss(scores, labels);
    r.hamming_loss = hamming_loss(scores, labels, threshold);
    r.one_error = one_error(scores, labels);
    return r;
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("wilcoxon: samples must be paired and non-empty");

    std::vector<double> diff;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        if (d != 0.0) diff.push_back(d);
    }
    const std::size_t m = diff.size();
    if (m == 0) return {0.0, 1.0, 0};

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return std::abs(diff[x]) < std::abs(diff[y]);
    });
    // average ranks for ties; doubled so they stay integral
    std::vector<std::int64_t> rank2(m);
    std::size_t i = 0;
    while (i < m) {
        std::size_t e = i;
        while (e + 1 < m && std::abs(diff[order[e + 1]]) == std::abs(diff[order[i]])) ++e;
        const std::int64_t r2 = static_cast<std::int64_t>(i + e) + 2;  // 2 * avg rank
        for (std::size_t t = i; t <= e; ++t) rank2[order[t]] = r2;
        i = e + 1;
    }

    std::int64_t w_plus2 = 0, total2 = 0;
    for (std::size_t t = 0; t < m; ++t) {
        total2 += rank2[t];
        if (diff[t] > 0.0) w_plus2 += rank2[t];
    }
    const std::int64_t w_minus2 = total2 - w_plus2;
    const std::int64_t w_min2 = std::min(w_plus2, w_minus2);

    WilcoxonResult res;
    res.statistic = 0.5 * static_cast<double>(w_min2);
    res.nonzero_pairs = static_cast<int>(m);

    if (m <= 20) {
        // exact null: distribution of W+ over all 2^m sign assignments
        std::vector<std::uint64_t> dp(static_cast<std::size_t>(total2) + 1, 0);
        dp[0] = 1;
        for (std::size_t t = 0; t < m; ++t)
            for (std::int64_t s = total2 - rank2[t]; s >= 0; --s)
                dp[static_cast<std::size_t>(s + rank2[t])] += dp[static_cast<std::size_t>(s)];
        std::uint64_t count = 0;
        for (std::int64_t s = 0; s <= total2; ++s)
            if (s <= w_min2 || s >= total2 - w_min2) count += dp[static_cast<std::size_t>(s)];
        res.p_value = std::min(
            1.0, static_cast<double>(count) / std::pow(2.0, static_cast<double>(m)));
    } else {
        const double md = static_cast<double>(m);
        const double mu = md * (md + 1.0) / 4.0;
        double var = md * (md + 1.0) * (2.0 * md + 1.0) / 24.0;
        // tie correction: sum over tie groups of (t^3 - t) / 48
        i = 0;
        while (i < m) {
            std::size_t e = i;
            while (e + 1 < m && std::abs(diff[order[e + 1]]) == std::abs(diff[order[i]])) ++e;
            const double t = static_cast<double>(e - i + 1);
            var -= (t * t * t - t) / 48.0;
            i = e + 1;
        }
        const double w = 0.5 * static_cast<double>(w_min2);
        const double z = (w - mu + 0.5) / std::sqrt(var);  // continuity correction toward mu
        res.p_value = std::min(1.0, 2.0 * normal_cdf(z));
    }
    return res;
}

}  // namespace mlbatch
