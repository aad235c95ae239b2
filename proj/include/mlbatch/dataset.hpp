#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlbatch/matrix.hpp"

namespace mlbatch {

// Thrown for structurally broken input files; carries a 1-based line number
// when one is known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Thrown when a file parses but violates the dataset contract
// (non-binary label values, unknown label names, ...).
class ValidationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Immutable after construction; safe to share across threads.
struct Dataset {
    Matrix features;                        // n x d
    Matrix labels;                          // n x q, entries exactly 0 or 1
    std::vector<std::string> feature_names; // d
    std::vector<std::string> label_names;   // q

    std::size_t n() const { return features.rows(); }
    std::size_t d() const { return features.cols(); }
    std::size_t q() const { return labels.cols(); }
};

struct DatasetStats {
    double card;  // mean positive labels per instance
    double dens;  // card / q
};

struct FoldSplit {
    int fold_count;
    std::vector<int> assignments;  // per-instance fold id in [0, fold_count)
};

// Reads a label list: either a MULAN XML file with <label name="..."/>
// entries or a plain file with one label name per line.
std::vector<std::string> read_label_list(const std::string& path);

// label names identify which ARFF attributes are labels.
Dataset load_arff(const std::string& arff_path, const std::vector<std::string>& label_names);
// Trailing-count fallback: the last `label_count` attributes are labels.
Dataset load_arff(const std::string& arff_path, int label_count);

// Numeric CSV with one header row; last `label_count` columns are labels.
Dataset load_csv(const std::string& csv_path, int label_count);

// Full-precision CSV dump (header = feature names then label names).
void write_csv(const Dataset& ds, const std::string& csv_path);

DatasetStats stats(const Dataset& ds);

// Deterministic shuffled balanced fold assignment.
FoldSplit kfold(const Dataset& ds, int fold_count, std::uint64_t seed);

// Per-column mean/std standardization fitted on `fit_rows`, applied in place
// to all rows. Columns with zero variance are left centered only.
void standardize_features(Matrix& features, const std::vector<std::size_t>& fit_rows);

}  // namespace mlbatch
