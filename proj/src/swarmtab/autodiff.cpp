#include "swarmtab/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace swarmtab::ad {

std::size_t numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << ", ";
        os << s[i];
    }
    os << ')';
    return os.str();
}

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
    if (numel(shape) != values.size())
        throw std::invalid_argument("tensor value count does not match shape " + shape_str(shape));
    Tensor t;
    t.shape = std::move(shape);
    t.values = std::move(values);
    return t;
}

Tensor Tensor::zeros(Shape shape) {
    Tensor t;
    t.values.assign(numel(shape), 0.0);
    t.shape = std::move(shape);
    return t;
}

// ---- tape ---------------------------------------------------------------------

int Tape::leaf(std::size_t size) {
    nodes_.push_back(Node{size, BackFn{}, std::vector<double>(size, 0.0)});
    return static_cast<int>(nodes_.size()) - 1;
}

int Tape::record(std::size_t out_size, BackFn fn) {
    nodes_.push_back(Node{out_size, std::move(fn), std::vector<double>(out_size, 0.0)});
    return static_cast<int>(nodes_.size()) - 1;
}

void Tape::backward(const Tensor& loss) {
    if (!loss.requires_grad())
        throw std::invalid_argument("backward: loss is not recorded on this tape");
    if (loss.size() != 1) throw std::invalid_argument("backward: loss must be a scalar");
    if (loss.node >= static_cast<int>(nodes_.size()))
        throw std::invalid_argument("backward: loss node is not on this tape");
    nodes_[loss.node].grad[0] = 1.0;
    for (int i = loss.node; i >= 0; --i)
        if (nodes_[i].fn) nodes_[i].fn(*this, nodes_[i].grad);
}

const std::vector<double>& Tape::grad(int node) const {
    return nodes_.at(static_cast<std::size_t>(node)).grad;
}

std::vector<double>& Tape::grad_mut(int node) {
    return nodes_.at(static_cast<std::size_t>(node)).grad;
}

void Tape::accumulate(int node, const double* g, std::size_t n) {
    auto& grad = nodes_.at(static_cast<std::size_t>(node)).grad;
    for (std::size_t i = 0; i < n; ++i) grad[i] += g[i];
}

Tensor leaf(Tape& tape, Shape shape, std::vector<double> values) {
    Tensor t = Tensor::constant(std::move(shape), std::move(values));
    t.node = tape.leaf(t.size());
    return t;
}

namespace {

double* grad_buf(Tape& tape, int node) { return tape.grad_mut(node).data(); }

// C[m x n] += A[m x k] B[k x n]
void mm_nn(double* c, const double* a, const double* b, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a + i * k;
        double* ci = c + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            const double av = ai[l];
            const double* bl = b + l * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bl[j];
        }
    }
}

// C[m x n] += A[m x k] B[n x k]^T
void mm_nt(double* c, const double* a, const double* b, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a + i * k;
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* bj = b + j * k;
            double acc = 0.0;
            for (std::size_t l = 0; l < k; ++l) acc += ai[l] * bj[l];
            ci[j] += acc;
        }
    }
}

// C[m x n] += A[k x m]^T B[k x n]
void mm_tn(double* c, const double* a, const double* b, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t l = 0; l < k; ++l) {
        const double* al = a + l * m;
        const double* bl = b + l * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double av = al[i];
            double* ci = c + i * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bl[j];
        }
    }
}

bool tracked(Tape* tape, const Tensor& a) { return tape != nullptr && a.requires_grad(); }

} // namespace

// ---- matmul --------------------------------------------------------------------

Tensor matmul(Tape* tape, const Tensor& a, const Tensor& b, bool transpose_b) {
    const bool a3 = a.shape.size() == 3;
    const bool b3 = b.shape.size() == 3;
    if ((a.shape.size() != 2 && !a3) || (b.shape.size() != 2 && !b3) || (!a3 && b3))
        throw std::invalid_argument("matmul: unsupported ranks " + shape_str(a.shape) + " x " +
                                    shape_str(b.shape));

    const std::size_t batch = a3 ? a.shape[0] : 1;
    const std::size_t m = a3 ? a.shape[1] : a.shape[0];
    const std::size_t k = a3 ? a.shape[2] : a.shape[1];
    const std::size_t bk = b3 ? (transpose_b ? b.shape[2] : b.shape[1])
                              : (transpose_b ? b.shape[1] : b.shape[0]);
    const std::size_t n = b3 ? (transpose_b ? b.shape[1] : b.shape[2])
                             : (transpose_b ? b.shape[0] : b.shape[1]);
    if (k != bk || (b3 && b.shape[0] != batch))
        throw std::invalid_argument("matmul: shape mismatch " + shape_str(a.shape) + " x " +
                                    shape_str(b.shape) + (transpose_b ? " (b transposed)" : ""));

    Tensor out = Tensor::zeros(a3 ? Shape{batch, m, n} : Shape{m, n});
    const std::size_t a_stride = m * k;
    const std::size_t b_stride = b3 ? k * n : 0;
    const std::size_t o_stride = m * n;
    for (std::size_t bi = 0; bi < batch; ++bi) {
        const double* pa = a.values.data() + bi * a_stride;
        const double* pb = b.values.data() + bi * b_stride;
        double* po = out.values.data() + bi * o_stride;
        if (transpose_b) mm_nt(po, pa, pb, m, k, n);
        else mm_nn(po, pa, pb, m, k, n);
    }

    if (!tracked(tape, a) && !tracked(tape, b)) return out;

    const int na = a.node, nb = b.node;
    auto av = a.values;
    auto bv = b.values;
    out.node = tape->record(out.size(), [=](Tape& t, const std::vector<double>& g) {
        for (std::size_t bi = 0; bi < batch; ++bi) {
            const double* pg = g.data() + bi * o_stride;
            const double* pa = av.data() + bi * a_stride;
            const double* pb = bv.data() + bi * b_stride;
            if (na >= 0) {
                double* da = grad_buf(t, na) + bi * a_stride;
                if (transpose_b) mm_nn(da, pg, pb, m, n, k); // dA += G B
                else mm_nt(da, pg, pb, m, n, k);             // dA += G B^T
            }
            if (nb >= 0) {
                double* db = grad_buf(t, nb) + bi * b_stride;
                if (transpose_b) mm_tn(db, pg, pa, n, m, k); // dB += G^T A
                else mm_tn(db, pa, pg, k, m, n);             // dB += A^T G
            }
        }
    });
    return out;
}

// ---- elementwise ------------------------------------------------------------------

Tensor add(Tape* tape, const Tensor& a, const Tensor& b) {
    if (a.shape != b.shape)
        throw std::invalid_argument("add: shape mismatch " + shape_str(a.shape) + " vs " +
                                    shape_str(b.shape));
    Tensor out = Tensor::constant(a.shape, a.values);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += b.values[i];
    if (!tracked(tape, a) && !tracked(tape, b)) return out;
    const int na = a.node, nb = b.node;
    out.node = tape->record(out.size(), [=](Tape& t, const std::vector<double>& g) {
        if (na >= 0) t.accumulate(na, g.data(), g.size());
        if (nb >= 0) t.accumulate(nb, g.data(), g.size());
    });
    return out;
}

Tensor add_bias(Tape* tape, const Tensor& x, const Tensor& bias) {
    if (x.shape.empty() || bias.shape.size() != 1 || x.shape.back() != bias.shape[0])
        throw std::invalid_argument("add_bias: shape mismatch " + shape_str(x.shape) + " vs " +
                                    shape_str(bias.shape));
    const std::size_t n = bias.shape[0];
    const std::size_t rows = x.size() / n;
    Tensor out = Tensor::constant(x.shape, x.values);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < n; ++j) out.values[r * n + j] += bias.values[j];
    if (!tracked(tape, x) && !tracked(tape, bias)) return out;
    const int nx = x.node, nb = bias.node;
    out.node = tape->record(out.size(), [=](Tape& t, const std::vector<double>& g) {
        if (nx >= 0) t.accumulate(nx, g.data(), g.size());
        if (nb >= 0) {
            double* db = grad_buf(t, nb);
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t j = 0; j < n; ++j) db[j] += g[r * n + j];
        }
    });
    return out;
}

Tensor mul(Tape* tape, const Tensor& a, const Tensor& b) {
    if (a.shape != b.shape)
        throw std::invalid_argument("mul: shape mismatch " + shape_str(a.shape) + " vs " +
                                    shape_str(b.shape));
    Tensor out = Tensor::constant(a.shape, a.values);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] *= b.values[i];
    if (!tracked(tape, a) && !tracked(tape, b)) return out;
    const int na = a.node, nb = b.node;
    auto av = a.values;
    auto bv = b.values;
    out.node = tape->record(out.size(), [=](Tape& t, const std::vector<double>& g) {
        if (na >= 0) {
            double* da = grad_buf(t, na);
            for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * bv[i];
        }
        if (nb >= 0) {
            double* db = grad_buf(t, nb);
            for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i] * av[i];
        }
    });
    return out;
}

Tensor scale(Tape* tape, const Tensor& x, double s) {
    Tensor out = Tensor::constant(x.shape, x.values);
    for (double& v : out.values) v *= s;
    if (!tracked(tape, x)) return out;
    const int nx = x.node;
    out.node = tape->record(out.size(), [=](Tape& t, const std::vector<double>& g) {
        double* dx = grad_buf(t, nx);
        for (std::size_t i = 0; i < g.size(); ++i) dx[i] += s * g[i];
    });
    return out;
}

namespace {

double sigmoid_scalar(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

Tensor relu(Tape* tape, const Tensor& x) {
    Tensor out = Tensor::constant(x.shape, x.values);
    for (double& v : out.values) v = v > 0.0 ? v : 0.0;
    if (!tracked(tape, x)) return out;
    const int nx = x.node;
    auto xv = x.values;
    out.node = tape->record(out.size(), [=](Tape& t, const std::vector<double>& g) {
        double* dx = grad_buf(t, nx);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (xv[i] > 0.0) dx[i] += g[i];
    });
    return out;
}

Tensor sigmoid(Tape* tape, const Tensor& x) {
    Tensor out = Tensor::constant(x.shape, x.values);
    for (double& v : out.values) v = sigmoid_scalar(v);
    if (!tracked(tape, x)) return out;
    const int nx = x.node;
    auto yv = out.values;
    out.node = tape->record(out.size(), [=](Tape& t, const std::vector<double>& g) {
        double* dx = grad_buf(t, nx);
        for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * yv[i] * (1.0 - yv[i]);
    });
    return out;
}

Tensor sum(Tape* tape, const Tensor& x) {
    double acc = 0.0;
    for (double v : x.values) acc += v;
    Tensor out = Tensor::constant({1}, {acc});
    if (!tracked(tape, x)) return out;
    const int nx = x.node;
    const std::size_t n = x.size();
    out.node = tape->record(1, [=](Tape& t, const std::vector<double>& g) {
        double* dx = grad_buf(t, nx);
        for (std::size_t i = 0; i < n; ++i) dx[i] += g[0];
    });
    return out;
}

Tensor dense(Tape* tape, const Tensor& x, const Tensor& w, const Tensor& b, Activation act) {
    Tensor h = add_bias(tape, matmul(tape, x, w), b);
    switch (act) {
        case Activation::none: return h;
        case Activation::relu: return relu(tape, h);
        case Activation::sigmoid: return sigmoid(tape, h);
    }
    throw std::invalid_argument("dense: unknown activation");
}

// ---- softmax / layer norm -----------------------------------------------------------

Tensor softmax(Tape* tape, const Tensor& x) {
    if (x.shape.empty()) throw std::invalid_argument("softmax: rank-0 input");
    const std::size_t n = x.shape.back();
    const std::size_t rows = x.size() / n;
    Tensor out = Tensor::constant(x.shape, x.values);
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = out.values.data() + r * n;
        double mx = row[0];
        for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            row[j] = std::exp(row[j] - mx);
            s += row[j];
        }
        for (std::size_t j = 0; j < n; ++j) row[j] /= s;
    }
    if (!tracked(tape, x)) return out;
    const int nx = x.node;
    auto yv = out.values;
    out.node = tape->record(out.size(), [=](Tape& t, const std::vector<double>& g) {
        double* dx = grad_buf(t, nx);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* gr = g.data() + r * n;
            const double* yr = yv.data() + r * n;
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) dot += gr[j] * yr[j];
            double* dr = dx + r * n;
            for (std::size_t j = 0; j < n; ++j) dr[j] += yr[j] * (gr[j] - dot);
        }
    });
    return out;
}

Tensor layer_norm(Tape* tape, const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double epsilon) {
    if (x.shape.empty() || gamma.shape.size() != 1 || beta.shape.size() != 1 ||
        gamma.shape[0] != x.shape.back() || beta.shape[0] != x.shape.back())
        throw std::invalid_argument("layer_norm: shape mismatch " + shape_str(x.shape) + ", gamma " +
                                    shape_str(gamma.shape) + ", beta " + shape_str(beta.shape));
    const std::size_t n = x.shape.back();
    const std::size_t rows = x.size() / n;

    Tensor out = Tensor::zeros(x.shape);
    std::vector<double> xhat(x.size());
    std::vector<double> inv_std(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = x.values.data() + r * n;
        double mean = 0.0;
        for (std::size_t j = 0; j < n; ++j) mean += xr[j];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = xr[j] - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);
        const double inv = 1.0 / std::sqrt(var + epsilon);
        inv_std[r] = inv;
        for (std::size_t j = 0; j < n; ++j) {
            const double xh = (xr[j] - mean) * inv;
            xhat[r * n + j] = xh;
            out.values[r * n + j] = gamma.values[j] * xh + beta.values[j];
        }
    }

    if (!tracked(tape, x) && !tracked(tape, gamma) && !tracked(tape, beta)) return out;
    const int nx = x.node, ng = gamma.node, nb = beta.node;
    auto gv = gamma.values;
    out.node = tape->record(out.size(), [=](Tape& t, const std::vector<double>& g) {
        double* dgamma = ng >= 0 ? grad_buf(t, ng) : nullptr;
        double* dbeta = nb >= 0 ? grad_buf(t, nb) : nullptr;
        double* dx = nx >= 0 ? grad_buf(t, nx) : nullptr;
        std::vector<double> dxhat(n);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* gr = g.data() + r * n;
            const double* xh = xhat.data() + r * n;
            if (dgamma)
                for (std::size_t j = 0; j < n; ++j) dgamma[j] += gr[j] * xh[j];
            if (dbeta)
                for (std::size_t j = 0; j < n; ++j) dbeta[j] += gr[j];
            if (dx) {
                double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    dxhat[j] = gr[j] * gv[j];
                    mean_dxhat += dxhat[j];
                    mean_dxhat_xhat += dxhat[j] * xh[j];
                }
                mean_dxhat /= static_cast<double>(n);
                mean_dxhat_xhat /= static_cast<double>(n);
                double* dr = dx + r * n;
                for (std::size_t j = 0; j < n; ++j)
                    dr[j] += inv_std[r] * (dxhat[j] - mean_dxhat - xh[j] * mean_dxhat_xhat);
            }
        }
    });
    return out;
}

// ---- shape ops -----------------------------------------------------------------------

Tensor reshape(Tape* tape, const Tensor& x, Shape shape) {
    if (numel(shape) != x.size())
        throw std::invalid_argument("reshape: element count mismatch " + shape_str(x.shape) +
                                    " -> " + shape_str(shape));
    Tensor out = Tensor::constant(std::move(shape), x.values);
    if (!tracked(tape, x)) return out;
    const int nx = x.node;
    out.node = tape->record(out.size(), [=](Tape& t, const std::vector<double>& g) {
        t.accumulate(nx, g.data(), g.size());
    });
    return out;
}

Tensor slice_last(Tape* tape, const Tensor& x, std::size_t start, std::size_t len) {
    if (x.shape.empty() || start + len > x.shape.back())
        throw std::invalid_argument("slice_last: out of range for " + shape_str(x.shape));
    const std::size_t d = x.shape.back();
    const std::size_t rows = x.size() / d;
    Shape out_shape = x.shape;
    out_shape.back() = len;
    Tensor out = Tensor::zeros(out_shape);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < len; ++j) out.values[r * len + j] = x.values[r * d + start + j];
    if (!tracked(tape, x)) return out;
    const int nx = x.node;
    out.node = tape->record(out.size(), [=](Tape& t, const std::vector<double>& g) {
        double* dx = grad_buf(t, nx);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < len; ++j) dx[r * d + start + j] += g[r * len + j];
    });
    return out;
}

Tensor concat_last(Tape* tape, const std::vector<Tensor>& xs) {
    if (xs.empty()) throw std::invalid_argument("concat_last: no inputs");
    Shape lead = xs[0].shape;
    lead.pop_back();
    std::size_t total = 0;
    for (const auto& x : xs) {
        Shape l = x.shape;
        if (l.empty()) throw std::invalid_argument("concat_last: rank-0 input");
        l.pop_back();
        if (l != lead)
            throw std::invalid_argument("concat_last: leading dimensions differ: " +
                                        shape_str(xs[0].shape) + " vs " + shape_str(x.shape));
        total += x.shape.back();
    }
    const std::size_t rows = numel(lead);
    Shape out_shape = lead;
    out_shape.push_back(total);
    Tensor out = Tensor::zeros(out_shape);
    std::size_t offset = 0;
    for (const auto& x : xs) {
        const std::size_t w = x.shape.back();
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < w; ++j)
                out.values[r * total + offset + j] = x.values[r * w + j];
        offset += w;
    }

    bool any = false;
    for (const auto& x : xs) any = any || tracked(tape, x);
    if (!any) return out;

    struct Piece {
        int node;
        std::size_t offset, width;
    };
    std::vector<Piece> pieces;
    offset = 0;
    for (const auto& x : xs) {
        pieces.push_back({x.node, offset, x.shape.back()});
        offset += x.shape.back();
    }
    out.node = tape->record(out.size(), [=](Tape& t, const std::vector<double>& g) {
        for (const auto& p : pieces) {
            if (p.node < 0) continue;
            double* dx = grad_buf(t, p.node);
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t j = 0; j < p.width; ++j)
                    dx[r * p.width + j] += g[r * total + p.offset + j];
        }
    });
    return out;
}

Tensor global_average_pool(Tape* tape, const Tensor& x) {
    if (x.shape.size() != 3 || x.shape[1] == 0)
        throw std::invalid_argument("global_average_pool: expected [batch, seq, dim], got " +
                                    shape_str(x.shape));
    const std::size_t batch = x.shape[0], seq = x.shape[1], dim = x.shape[2];
    Tensor out = Tensor::zeros({batch, dim});
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t s = 0; s < seq; ++s)
            for (std::size_t d = 0; d < dim; ++d)
                out.values[b * dim + d] += x.values[(b * seq + s) * dim + d];
    for (double& v : out.values) v /= static_cast<double>(seq);
    if (!tracked(tape, x)) return out;
    const int nx = x.node;
    out.node = tape->record(out.size(), [=](Tape& t, const std::vector<double>& g) {
        double* dx = grad_buf(t, nx);
        const double inv = 1.0 / static_cast<double>(seq);
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t s = 0; s < seq; ++s)
                for (std::size_t d = 0; d < dim; ++d)
                    dx[(b * seq + s) * dim + d] += g[b * dim + d] * inv;
    });
    return out;
}

Tensor embedding_lookup(Tape* tape, const Tensor& table, const std::vector<std::int32_t>& indices) {
    if (table.shape.size() != 2)
        throw std::invalid_argument("embedding_lookup: table must be 2-D, got " +
                                    shape_str(table.shape));
    const std::size_t card = table.shape[0], dim = table.shape[1];
    for (std::size_t i = 0; i < indices.size(); ++i)
        if (indices[i] < 0 || static_cast<std::size_t>(indices[i]) >= card)
            throw std::out_of_range("embedding_lookup: index " + std::to_string(indices[i]) +
                                    " out of range [0, " + std::to_string(card) + ")");
    Tensor out = Tensor::zeros({indices.size(), dim});
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const double* src = table.values.data() + static_cast<std::size_t>(indices[i]) * dim;
        double* dst = out.values.data() + i * dim;
        std::copy(src, src + dim, dst);
    }
    if (!tracked(tape, table)) return out;
    const int nt = table.node;
    auto idx = indices;
    out.node = tape->record(out.size(), [=](Tape& t, const std::vector<double>& g) {
        double* dt = grad_buf(t, nt);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            double* drow = dt + static_cast<std::size_t>(idx[i]) * dim;
            const double* grow = g.data() + i * dim;
            for (std::size_t j = 0; j < dim; ++j) drow[j] += grow[j];
        }
    });
    return out;
}

Tensor dropout(Tape* tape, const Tensor& x, double rate, bool training, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must be in [0, 1)");
    if (!training || rate == 0.0) return x;
    const double scale = 1.0 / (1.0 - rate);
    std::vector<double> mask(x.size());
    for (double& m : mask) m = rng.uniform() < rate ? 0.0 : scale;
    Tensor out = Tensor::constant(x.shape, x.values);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] *= mask[i];
    if (!tracked(tape, x)) return out;
    const int nx = x.node;
    out.node = tape->record(out.size(), [=](Tape& t, const std::vector<double>& g) {
        double* dx = grad_buf(t, nx);
        for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * mask[i];
    });
    return out;
}

// ---- attention -----------------------------------------------------------------------

Tensor scaled_dot_product_attention(Tape* tape, const Tensor& q, const Tensor& k, const Tensor& v,
                                    std::vector<double>* weights_out) {
    if (q.shape.size() != 3 || k.shape.size() != 3 || v.shape.size() != 3)
        throw std::invalid_argument("attention: q, k, v must be [batch, seq, dim]");
    if (q.shape[2] != k.shape[2])
        throw std::invalid_argument("attention: key dim mismatch, q " + shape_str(q.shape) +
                                    " vs k " + shape_str(k.shape));
    if (k.shape[1] != v.shape[1] || k.shape[0] != v.shape[0] || q.shape[0] != k.shape[0])
        throw std::invalid_argument("attention: k/v shape mismatch, k " + shape_str(k.shape) +
                                    " vs v " + shape_str(v.shape));
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(q.shape[2]));
    Tensor scores = scale(tape, matmul(tape, q, k, /*transpose_b=*/true), inv_sqrt_dk);
    Tensor weights = softmax(tape, scores);
    if (weights_out) *weights_out = weights.values;
    return matmul(tape, weights, v);
}

Tensor multi_head_attention(Tape* tape, const Tensor& x, const MhaParams& p, std::size_t num_heads,
                            AttentionTrace* trace) {
    if (x.shape.size() != 3)
        throw std::invalid_argument("multi_head_attention: expected [batch, seq, dim], got " +
                                    shape_str(x.shape));
    const std::size_t dim = x.shape[2];
    if (num_heads == 0 || dim % num_heads != 0)
        throw std::invalid_argument("multi_head_attention: model dim " + std::to_string(dim) +
                                    " not divisible by num_heads " + std::to_string(num_heads));
    const std::size_t dk = dim / num_heads;

    Tensor q = add_bias(tape, matmul(tape, x, *p.wq), *p.bq);
    Tensor k = add_bias(tape, matmul(tape, x, *p.wk), *p.bk);
    Tensor v = add_bias(tape, matmul(tape, x, *p.wv), *p.bv);

    if (trace) {
        trace->head_weights.assign(num_heads, {});
        trace->batch = x.shape[0];
        trace->seq = x.shape[1];
    }

    std::vector<Tensor> heads;
    heads.reserve(num_heads);
    for (std::size_t h = 0; h < num_heads; ++h) {
        Tensor qh = slice_last(tape, q, h * dk, dk);
        Tensor kh = slice_last(tape, k, h * dk, dk);
        Tensor vh = slice_last(tape, v, h * dk, dk);
        std::vector<double>* w = trace ? &trace->head_weights[h] : nullptr;
        heads.push_back(scaled_dot_product_attention(tape, qh, kh, vh, w));
    }
    Tensor merged = concat_last(tape, heads);
    return add_bias(tape, matmul(tape, merged, *p.wo), *p.bo);
}

// ---- loss ----------------------------------------------------------------------------

Tensor bce_loss(Tape* tape, const Tensor& p, const std::vector<double>& y, double l2,
                const std::vector<const Tensor*>& l2_params) {
    if (p.size() != y.size())
        throw std::invalid_argument("bce_loss: got " + std::to_string(p.size()) +
                                    " probabilities for " + std::to_string(y.size()) + " targets");
    if (p.size() == 0) throw std::invalid_argument("bce_loss: empty batch");
    constexpr double kEps = 1e-7;
    const std::size_t n = p.size();

    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pc = std::clamp(p.values[i], kEps, 1.0 - kEps);
        acc -= y[i] * std::log(pc) + (1.0 - y[i]) * std::log(1.0 - pc);
    }
    double loss = acc / static_cast<double>(n);
    for (const Tensor* t : l2_params) {
        double ss = 0.0;
        for (double w : t->values) ss += w * w;
        loss += l2 * ss;
    }

    Tensor out = Tensor::constant({1}, {loss});
    bool any = tracked(tape, p);
    for (const Tensor* t : l2_params) any = any || tracked(tape, *t);
    if (!any) return out;

    const int np = p.node;
    auto pv = p.values;
    auto yv = y;
    struct Reg {
        int node;
        std::vector<double> values;
    };
    std::vector<Reg> regs;
    for (const Tensor* t : l2_params)
        if (t->node >= 0) regs.push_back({t->node, t->values});
    out.node = tape->record(1, [=](Tape& t, const std::vector<double>& g) {
        const double g0 = g[0];
        if (np >= 0) {
            double* dp = grad_buf(t, np);
            const double inv_n = 1.0 / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) {
                if (pv[i] <= kEps || pv[i] >= 1.0 - kEps) continue; // clipped: flat
                dp[i] += g0 * inv_n * (pv[i] - yv[i]) / (pv[i] * (1.0 - pv[i]));
            }
        }
        for (const auto& r : regs) {
            double* dw = grad_buf(t, r.node);
            for (std::size_t i = 0; i < r.values.size(); ++i) dw[i] += g0 * 2.0 * l2 * r.values[i];
        }
    });
    return out;
}

// ---- Adam ----------------------------------------------------------------------------

void AdamState::init(const std::vector<std::size_t>& sizes) {
    t = 0;
    m.clear();
    v.clear();
    for (std::size_t s : sizes) {
        m.emplace_back(s, 0.0);
        v.emplace_back(s, 0.0);
    }
}

void adam_step(std::vector<std::vector<double>*> params,
               const std::vector<const std::vector<double>*>& grads, AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw std::invalid_argument("adam_step: parameter/gradient/state count mismatch");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = *params[i];
        const auto& g = *grads[i];
        auto& m = state.m[i];
        auto& v = state.v[i];
        if (p.size() != g.size() || p.size() != m.size())
            throw std::invalid_argument("adam_step: shape mismatch at parameter " +
                                        std::to_string(i));
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            p[j] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

} // namespace swarmtab::ad
