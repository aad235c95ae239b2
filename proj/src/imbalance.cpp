#include "mlbatch/imbalance.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mlbatch {

std::vector<double> irlbl(const Matrix& labels) {
    const std::size_t n = labels.rows(), q = labels.cols();
    std::vector<std::size_t> positives(q, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < q; ++j)
            if (labels(i, j) != 0.0) ++positives[j];
    std::size_t c_max = *std::max_element(positives.begin(), positives.end());
    if (c_max == 0) throw std::invalid_argument("irlbl: label matrix has no positives");
    std::vector<double> out(q);
    for (std::size_t j = 0; j < q; ++j)
        out[j] = positives[j] == 0
                     ? std::numeric_limits<double>::infinity()
                     : static_cast<double>(c_max) / static_cast<double>(positives[j]);
    return out;
}

double mean_ir(const std::vector<double>& irlbl_values) {
    double sum = 0.0;
    std::size_t count = 0;
    for (double v : irlbl_values)
        if (std::isfinite(v)) {
            sum += v;
            ++count;
        }
    if (count == 0) throw std::invalid_argument("mean_ir: no finite IRLbl entries");
    return sum / static_cast<double>(count);
}

std::vector<bool> minority_set(const std::vector<double>& irlbl_values, double mean_ir_value) {
    std::vector<bool> mask(irlbl_values.size());
    for (std::size_t j = 0; j < irlbl_values.size(); ++j)
        mask[j] = irlbl_values[j] > mean_ir_value;
    return mask;
}

Matrix local_imbalance(const Matrix& features, const Matrix& labels, int k) {
    const std::size_t n = features.rows(), d = features.cols(), q = labels.cols();
    if (k < 1 || static_cast<std::size_t>(k) > n - 1)
        throw std::invalid_argument("local_imbalance: k out of range");

    Matrix b(n, q, 0.0);
    std::vector<std::size_t> idx(n - 1);
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = features.row_ptr(i);
        for (std::size_t m = 0; m < n; ++m) {
            const double* xm = features.row_ptr(m);
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                double diff = xi[c] - xm[c];
                s += diff * diff;
            }
            dist[m] = s;
        }
        std::size_t w = 0;
        for (std::size_t m = 0; m < n; ++m)
            if (m != i) idx[w++] = m;
        // ties by ascending instance index
        std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                          [&](std::size_t a, std::size_t c) {
                              return dist[a] != dist[c] ? dist[a] < dist[c] : a < c;
                          });
        for (std::size_t j = 0; j < q; ++j) {
            if (labels(i, j) == 0.0) continue;
            int disagree = 0;
            for (int t = 0; t < k; ++t)
                if (labels(idx[t], j) == 0.0) ++disagree;
            b(i, j) = static_cast<double>(disagree) / static_cast<double>(k);
        }
    }
    return b;
}

ImbalanceScores imbalance_scores(const Matrix& b_matrix, const std::vector<bool>& minority_mask) {
    const std::size_t n = b_matrix.rows(), q = b_matrix.cols();
    ImbalanceScores out;
    out.s_matrix = Matrix(n, q, 0.0);
    out.epsilon.assign(n, 0.0);

    for (std::size_t j = 0; j < q; ++j) {
        double denom = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (b_matrix(i, j) < 1.0) denom += b_matrix(i, j);
        for (std::size_t i = 0; i < n; ++i) {
            double bij = b_matrix(i, j);
            if (bij >= 1.0)
                out.s_matrix(i, j) = -1.0;  // outlier: every neighbor disagrees
            else
                out.s_matrix(i, j) = denom > 0.0 ? bij / denom : 0.0;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double eps = 0.0;
        for (std::size_t j = 0; j < q; ++j) {
            if (!minority_mask[j]) continue;
            double s = out.s_matrix(i, j);
            if (s != -1.0) eps += s;
        }
        out.epsilon[i] = eps;
    }
    out.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.weights[i] = 1.0 + out.epsilon[i];
    return out;
}

LabelAdjacency label_adjacency(const Matrix& labels) {
    const std::size_t n = labels.rows(), q = labels.cols();
    std::vector<std::size_t> positives(q, 0);
    Matrix co(q, q, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < q; ++a) {
            if (labels(i, a) == 0.0) continue;
            ++positives[a];
            for (std::size_t b = a + 1; b < q; ++b)
                if (labels(i, b) != 0.0) {
                    co(a, b) += 1.0;
                    co(b, a) += 1.0;
                }
        }
    LabelAdjacency adj;
    adj.a_matrix = Matrix(q, q, 0.0);
    for (std::size_t a = 0; a < q; ++a)
        for (std::size_t b = a + 1; b < q; ++b) {
            double p_ba = positives[a] ? co(a, b) / static_cast<double>(positives[a]) : 0.0;
            double p_ab = positives[b] ? co(a, b) / static_cast<double>(positives[b]) : 0.0;
            double v = 0.5 * (p_ba + p_ab);
            adj.a_matrix(a, b) = v;
            adj.a_matrix(b, a) = v;
        }
    return adj;
}

std::vector<std::size_t> top_related_labels(const LabelAdjacency& adjacency,
                                            std::size_t anchor_label, int count) {
    const std::size_t q = adjacency.a_matrix.rows();
    if (count < 1 || static_cast<std::size_t>(count) > q - 1)
        throw std::invalid_argument("top_related_labels: count out of range");
    std::vector<std::size_t> order;
    order.reserve(q - 1);
    for (std::size_t j = 0; j < q; ++j)
        if (j != anchor_label) order.push_back(j);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        double va = adjacency.a_matrix(anchor_label, a);
        double vb = adjacency.a_matrix(anchor_label, b);
        return va != vb ? va > vb : a < b;
    });
    order.resize(count);
    return order;
}

ImbalanceProfile build_profile(const Matrix& features, const Matrix& labels, int k) {
    ImbalanceProfile p;
    p.k = k;
    p.irlbl = irlbl(labels);
    p.mean_ir = mean_ir(p.irlbl);
    p.minority_mask = minority_set(p.irlbl, p.mean_ir);
    p.b_matrix = local_imbalance(features, labels, k);
    ImbalanceScores sc = imbalance_scores(p.b_matrix, p.minority_mask);
    p.s_matrix = std::move(sc.s_matrix);
    p.epsilon = std::move(sc.epsilon);
    p.weights = std::move(sc.weights);
    return p;
}

namespace {
void write_matrix_csv(const Matrix& m, const std::vector<std::string>& header,
                      const std::string& path) {
    std::ofstream out(path);
    out.precision(17);
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << "\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
        out << "\n";
    }
}
}  // namespace

void dump_profile_csv(const ImbalanceProfile& profile,
                      const std::vector<std::string>& label_names, const std::string& dir) {
    std::filesystem::create_directories(dir);
    write_matrix_csv(profile.b_matrix, label_names, dir + "/b_matrix.csv");
    write_matrix_csv(profile.s_matrix, label_names, dir + "/s_matrix.csv");

    std::ofstream lab(dir + "/labels.csv");
    lab.precision(17);
    lab << "label,irlbl,minority\n";
    for (std::size_t j = 0; j < label_names.size(); ++j)
        lab << label_names[j] << "," << profile.irlbl[j] << ","
            << (profile.minority_mask[j] ? 1 : 0) << "\n";

    std::ofstream inst(dir + "/instances.csv");
    inst.precision(17);
    inst << "index,epsilon,weight\n";
    for (std::size_t i = 0; i < profile.epsilon.size(); ++i)
        inst << i << "," << profile.epsilon[i] << "," << profile.weights[i] << "\n";
}

}  // namespace mlbatch
