#pragma once

#include <cstddef>
#include <vector>

#include "mlbatch/matrix.hpp"

namespace mlbatch {

// Everything derived from the label/feature geometry of one training split.
// Immutable once built.
struct ImbalanceProfile {
    std::vector<double> irlbl;        // q; +inf for labels with no positives
    double mean_ir;                   // mean over labels with finite irlbl
    std::vector<bool> minority_mask;  // q; irlbl > mean_ir (inf always minority)
    Matrix b_matrix;                  // n x q local imbalance, in [0,1]
    Matrix s_matrix;                  // n x q normalized, -1 marks outliers (B = 1)
    std::vector<double> epsilon;      // n; >= 0
    std::vector<double> weights;      // n; 1 + epsilon
    int k;                            // neighbor count used for b_matrix
};

struct LabelAdjacency {
    Matrix a_matrix;  // q x q symmetric, zero diagonal, entries in [0,1]
};

// irlbl_j = C1_max / C1_j; labels with zero positives get +inf.
// Throws on an all-zero label matrix.
std::vector<double> irlbl(const Matrix& labels);

// Mean of the finite entries. Throws if every entry is infinite.
double mean_ir(const std::vector<double>& irlbl_values);

// mask_j = irlbl_j > mean_ir (strict).
std::vector<bool> minority_set(const std::vector<double>& irlbl_values, double mean_ir_value);

// B_ij = fraction of x_i's k nearest neighbors (Euclidean, self excluded,
// distance ties broken by ascending index) that disagree on label j, when
// y_ij = 1; zero otherwise.
Matrix local_imbalance(const Matrix& features, const Matrix& labels, int k);

struct ImbalanceScores {
    Matrix s_matrix;
    std::vector<double> epsilon;
    std::vector<double> weights;
};

// Column-normalizes B over non-outlier entries (B < 1); outliers map to -1.
// A column whose non-outlier entries sum to zero yields S = 0 there.
ImbalanceScores imbalance_scores(const Matrix& b_matrix, const std::vector<bool>& minority_mask);

// A_ij = (P(l_j|l_i) + P(l_i|l_j)) / 2 from co-occurrence counts; zero
// diagonal; labels with no positives get zero rows.
LabelAdjacency label_adjacency(const Matrix& labels);

// Indices of the `count` labels with largest adjacency to `anchor_label`,
// ties broken by ascending index, anchor excluded.
std::vector<std::size_t> top_related_labels(const LabelAdjacency& adjacency,
                                            std::size_t anchor_label, int count);

// Convenience: run the whole pipeline on one training split.
ImbalanceProfile build_profile(const Matrix& features, const Matrix& labels, int k);

// Debug dump: one CSV per matrix/vector under `dir` (created if missing).
void dump_profile_csv(const ImbalanceProfile& profile,
                      const std::vector<std::string>& label_names, const std::string& dir);

}  // namespace mlbatch
