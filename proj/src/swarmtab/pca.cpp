#include "swarmtab/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "swarmtab/errors.hpp"

namespace swarmtab {

namespace {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. On return eigvals
// holds the eigenvalues and the columns of eigvecs the matching eigenvectors.
void jacobi_eigen(Matrix a, std::vector<double>& eigvals, Matrix& eigvecs) {
    const std::size_t d = a.rows;
    eigvecs = Matrix(d, d);
    for (std::size_t i = 0; i < d; ++i) eigvecs.at(i, i) = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0, diag = 0.0;
        for (std::size_t p = 0; p < d; ++p) {
            diag += a.at(p, p) * a.at(p, p);
            for (std::size_t q = p + 1; q < d; ++q) off += a.at(p, q) * a.at(p, q);
        }
        if (off < 1e-30 * std::max(1.0, diag)) break;

        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                const double apq = a.at(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t i = 0; i < d; ++i) {
                    const double aip = a.at(i, p), aiq = a.at(i, q);
                    a.at(i, p) = c * aip - s * aiq;
                    a.at(i, q) = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < d; ++i) {
                    const double api = a.at(p, i), aqi = a.at(q, i);
                    a.at(p, i) = c * api - s * aqi;
                    a.at(q, i) = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < d; ++i) {
                    const double vip = eigvecs.at(i, p), viq = eigvecs.at(i, q);
                    eigvecs.at(i, p) = c * vip - s * viq;
                    eigvecs.at(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    eigvals.resize(d);
    for (std::size_t i = 0; i < d; ++i) eigvals[i] = a.at(i, i);
}

} // namespace

PcaModel pca_fit(const Matrix& x, double retain) {
    if (x.rows < 2) throw DataError("pca_fit: need at least 2 rows");
    if (!(retain > 0.0) || retain > 1.0) throw ConfigError("pca_fit: retain must be in (0, 1]");
    const std::size_t n = x.rows, d = x.cols;

    PcaModel model;
    model.retain = retain;
    model.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) model.mean[j] += x.at(i, j);
    for (double& m : model.mean) m /= static_cast<double>(n);

    // covariance with the n-1 denominator
    Matrix cov(d, d);
    std::vector<double> centered(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) centered[j] = x.at(i, j) - model.mean[j];
        for (std::size_t a = 0; a < d; ++a) {
            const double ca = centered[a];
            for (std::size_t b = a; b < d; ++b) cov.at(a, b) += ca * centered[b];
        }
    }
    const double inv_nm1 = 1.0 / static_cast<double>(n - 1);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            cov.at(a, b) *= inv_nm1;
            cov.at(b, a) = cov.at(a, b);
        }

    std::vector<double> eigvals;
    Matrix eigvecs;
    jacobi_eigen(cov, eigvals, eigvecs);

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return eigvals[a] > eigvals[b];
    });

    std::vector<double> sorted_vals(d);
    for (std::size_t i = 0; i < d; ++i) sorted_vals[i] = std::max(eigvals[order[i]], 0.0);
    double total = 0.0;
    for (double v : sorted_vals) total += v;
    if (total <= 0.0) throw DataError("pca_fit: data has zero variance");

    std::size_t k = d;
    double cum = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        cum += sorted_vals[i];
        if (cum / total >= retain) {
            k = i + 1;
            break;
        }
    }

    model.k = k;
    model.components = Matrix(k, d);
    model.explained_variance.resize(k);
    model.explained_ratio.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        const std::size_t col = order[c];
        model.explained_variance[c] = sorted_vals[c];
        model.explained_ratio[c] = sorted_vals[c] / total;
        // largest-magnitude entry positive; first occurrence wins ties
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double mag = std::abs(eigvecs.at(j, col));
            if (mag > best) {
                best = mag;
                arg = j;
            }
        }
        const double flip = eigvecs.at(arg, col) < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < d; ++j) model.components.at(c, j) = flip * eigvecs.at(j, col);
    }
    return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& x) {
    if (x.cols != model.n_features())
        throw std::invalid_argument("pca_transform: expected " +
                                    std::to_string(model.n_features()) + " columns, got " +
                                    std::to_string(x.cols));
    Matrix out(x.rows, model.k);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* row = x.row(i);
        for (std::size_t c = 0; c < model.k; ++c) {
            const double* comp = model.components.row(c);
            double acc = 0.0;
            for (std::size_t j = 0; j < x.cols; ++j) acc += (row[j] - model.mean[j]) * comp[j];
            out.at(i, c) = acc;
        }
    }
    return out;
}

Matrix pca_inverse_transform(const PcaModel& model, const Matrix& z) {
    if (z.cols != model.k)
        throw std::invalid_argument("pca_inverse_transform: expected " + std::to_string(model.k) +
                                    " columns, got " + std::to_string(z.cols));
    Matrix out(z.rows, model.n_features());
    for (std::size_t i = 0; i < z.rows; ++i) {
        double* dst = out.row(i);
        for (std::size_t j = 0; j < model.n_features(); ++j) dst[j] = model.mean[j];
        for (std::size_t c = 0; c < model.k; ++c) {
            const double zc = z.at(i, c);
            const double* comp = model.components.row(c);
            for (std::size_t j = 0; j < model.n_features(); ++j) dst[j] += zc * comp[j];
        }
    }
    return out;
}

} // namespace swarmtab
