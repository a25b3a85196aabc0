#pragma once

// Finite-difference gradient oracle: central differences at float64 with
// step h, compared against the analytic gradients from Tape::backward.
// Independent of the autodiff path it checks by construction.

#include <cmath>
#include <functional>
#include <vector>

#include "swarmtab/autodiff.hpp"
#include "swarmtab/rng.hpp"

namespace testsupport {

// Scalar loss as a pure function of flat parameter vectors.
using LossFn = std::function<double(const std::vector<std::vector<double>>&)>;

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::size_t checked = 0;
};

inline double rel_err(double analytic, double numeric) {
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    if (scale < 1e-7) return std::abs(analytic - numeric); // both ~zero: absolute
    return std::abs(analytic - numeric) / scale;
}

// Central differences on every coordinate of every input vector.
inline GradCheckResult finite_difference_check(const LossFn& loss,
                                               std::vector<std::vector<double>> inputs,
                                               const std::vector<std::vector<double>>& analytic,
                                               double h = 1e-3) {
    GradCheckResult result;
    for (std::size_t t = 0; t < inputs.size(); ++t) {
        for (std::size_t i = 0; i < inputs[t].size(); ++i) {
            const double saved = inputs[t][i];
            inputs[t][i] = saved + h;
            const double up = loss(inputs);
            inputs[t][i] = saved - h;
            const double down = loss(inputs);
            inputs[t][i] = saved;
            const double numeric = (up - down) / (2.0 * h);
            result.max_rel_err = std::max(result.max_rel_err, rel_err(analytic[t][i], numeric));
            ++result.checked;
        }
    }
    return result;
}

// Random projection weights for op-level checks (sum alone has zero gradient
// through softmax-like ops).
inline std::vector<double> random_projection(std::size_t n, swarmtab::Rng& rng) {
    std::vector<double> r(n);
    for (double& v : r) v = rng.uniform(-1.0, 1.0);
    return r;
}

inline double project(const std::vector<double>& values, const std::vector<double>& weights) {
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) acc += values[i] * weights[i];
    return acc;
}

// Weighted-sum loss node on the tape: sum_i w_i x_i.
inline swarmtab::ad::Tensor project_on_tape(swarmtab::ad::Tape& tape,
                                            const swarmtab::ad::Tensor& x,
                                            const std::vector<double>& weights) {
    using swarmtab::ad::Tensor;
    Tensor w = Tensor::constant(x.shape, weights);
    return swarmtab::ad::sum(&tape, swarmtab::ad::mul(&tape, x, w));
}

} // namespace testsupport
