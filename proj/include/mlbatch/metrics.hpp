#pragma once

#include <vector>

#include "mlbatch/matrix.hpp"

namespace mlbatch {

struct MetricReport {
    double macro_f;
    double micro_f;
    double macro_auc;
    double ranking_loss;
    double hamming_loss;
    double one_error;
};

// Per-label F1 at `threshold`, averaged over labels. A label with neither
// true nor predicted positives scores 1.
double macro_f(const Matrix& scores, const Matrix& labels, double threshold = 0.5);

// F1 over globally pooled TP/FP/FN.
double micro_f(const Matrix& scores, const Matrix& labels, double threshold = 0.5);

// Mann-Whitney AUC per label (ties count 1/2), averaged over labels that
// have both a positive and a negative. Throws when no label qualifies.
double macro_auc(const Matrix& scores, const Matrix& labels);

// Mean over instances of the fraction of (positive, negative) label pairs
// ordered wrongly, ties 1/2. Instances lacking a positive or a negative
// label are excluded.
double ranking_loss(const Matrix& scores, const Matrix& labels);

// Fraction of disagreeing label entries at `threshold`.
double hamming_loss(const Matrix& scores, const Matrix& labels, double threshold = 0.5);

// Fraction of instances whose top-scored label (ties -> lowest index) is
// irrelevant; instances with no positive label are excluded.
double one_error(const Matrix& scores, const Matrix& labels);

MetricReport evaluate(const Matrix& scores, const Matrix& labels, double threshold = 0.5);

struct WilcoxonResult {
    double statistic;  // min(W+, W-) over nonzero differences
    double p_value;    // two-sided
    int nonzero_pairs;
};

// Paired signed-rank test: zero differences dropped, average ranks for tied
// |differences|, exact null by enumeration up to 20 nonzero pairs, normal
// approximation with continuity correction beyond.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace mlbatch
