#pragma once

#include <cstddef>
#include <vector>

namespace swarmtab {

// Dense row-major matrix of doubles. Deliberately minimal.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
    double* row(std::size_t i) { return a.data() + i * cols; }
    const double* row(std::size_t i) const { return a.data() + i * cols; }

    // Copies the given rows, in order.
    Matrix gather_rows(const std::vector<std::size_t>& idx) const {
        Matrix out(idx.size(), cols);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const double* src = row(idx[i]);
            double* dst = out.row(i);
            for (std::size_t j = 0; j < cols; ++j) dst[j] = src[j];
        }
        return out;
    }

    // Copies the given columns, in order.
    Matrix gather_cols(const std::vector<std::size_t>& idx) const {
        Matrix out(rows, idx.size());
        for (std::size_t i = 0; i < rows; ++i) {
            const double* src = row(i);
            double* dst = out.row(i);
            for (std::size_t j = 0; j < idx.size(); ++j) dst[j] = src[idx[j]];
        }
        return out;
    }
};

} // namespace swarmtab
