#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tart/matrix.hpp"
#include "tart/rng.hpp"

namespace tart {

struct Dataset {
    Matrix features;               // n x d
    std::vector<int> labels;       // values in [0, class_count)
    int class_count = 0;
    std::vector<std::string> label_names;  // first-appearance order

    // z-score statistics this dataset was standardized with, if any
    std::vector<double> feature_means;
    std::vector<double> feature_stds;

    int size() const { return features.rows(); }
    int feature_count() const { return features.cols(); }
};

// Comma-separated values, '.'-decimal reals, optional single header row.
// label_column < 0 selects the last column. Label strings are mapped to
// class indices in first-appearance order; features must parse as reals.
Dataset load_csv(const std::string& path, int label_column = -1,
                 bool has_header = false);
Dataset parse_csv(std::istream& in, int label_column, bool has_header,
                  const std::string& name);

struct StandardizeStats {
    std::vector<double> means;
    std::vector<double> stds;  // population std; 0 marks a constant column
};

// Fit z-score statistics on the training split only.
StandardizeStats standardize_fit(const Dataset& train);
// x' = (x - mean) / std per column; zero-variance columns map to 0.
void standardize_apply(const StandardizeStats& stats, Dataset& d);

// Stratified split, deterministic for a fixed seed. Classes with a single
// example stay in the training split.
std::pair<Dataset, Dataset> split(const Dataset& d, double test_fraction,
                                  uint64_t seed);

std::vector<double> one_hot(int label, int class_count);

} // namespace tart
