#pragma once

#include <cstddef>
#include <vector>

#include "swarmtab/matrix.hpp"

namespace swarmtab {

struct PcaModel {
    std::vector<double> mean;               // column means of the training data
    Matrix components;                      // k x n_features; rows are principal directions
    std::vector<double> explained_variance; // k entries, non-increasing
    std::vector<double> explained_ratio;    // per-component share of total variance
    std::size_t k = 0;
    double retain = 0.95;

    std::size_t n_features() const { return mean.size(); }
};

// Centers by column means, eigendecomposes the covariance matrix (n-1
// denominator) and keeps the smallest k whose cumulative explained ratio
// reaches `retain`. Sign convention: each component's largest-magnitude entry
// is positive, so output is fully deterministic.
PcaModel pca_fit(const Matrix& x, double retain = 0.95);

// (x - mean) . components^T -> n_rows x k scores.
Matrix pca_transform(const PcaModel& model, const Matrix& x);

// scores . components + mean; exact inverse when k = n_features.
Matrix pca_inverse_transform(const PcaModel& model, const Matrix& z);

} // namespace swarmtab
