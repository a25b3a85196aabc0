#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "swarmtab/rng.hpp"

namespace swarmtab::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& s);
std::string shape_str(const Shape& s);

// Value plus an optional handle onto the tape. A tensor with node >= 0
// participates in gradient computation; node == -1 marks a constant.
struct Tensor {
    Shape shape;
    std::vector<double> values;
    int node = -1;

    bool requires_grad() const { return node >= 0; }
    std::size_t size() const { return values.size(); }

    static Tensor constant(Shape shape, std::vector<double> values);
    static Tensor zeros(Shape shape);
    static Tensor scalar(double v) { return constant({1}, {v}); }
};

// Append-only record of the forward pass. Node ids are topologically ordered
// because children are always recorded after their inputs. One tape per
// training step; confined to a single thread.
class Tape {
public:
    using BackFn = std::function<void(Tape&, const std::vector<double>& upstream)>;

    // Registers a gradient-carrying leaf (parameter or tracked input).
    int leaf(std::size_t size);

    // Records an interior node whose backward distributes `upstream` to the
    // inputs captured inside fn.
    int record(std::size_t out_size, BackFn fn);

    // Reverse accumulation from a scalar loss. Gradients of nodes that do not
    // feed the loss are zero.
    void backward(const Tensor& loss);

    const std::vector<double>& grad(int node) const;
    std::vector<double>& grad_mut(int node);
    void accumulate(int node, const double* g, std::size_t n);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        std::size_t size;
        BackFn fn; // empty for leaves
        std::vector<double> grad;
    };
    std::vector<Node> nodes_;
};

// Makes a tracked leaf tensor on the tape.
Tensor leaf(Tape& tape, Shape shape, std::vector<double> values);

enum class Activation { none, relu, sigmoid };

// ---- operations ------------------------------------------------------------
// Every op computes the forward value and, when `tape` is non-null and any
// input is tracked, records the matching backward. With tape == nullptr the
// ops are pure functions (inference mode).

// 2-D x 2-D, batched 3-D x 3-D, or 3-D x 2-D (the 2-D side broadcasts over the
// leading batch axis). transpose_b treats b as transposed on its last two axes.
Tensor matmul(Tape* tape, const Tensor& a, const Tensor& b, bool transpose_b = false);

Tensor add(Tape* tape, const Tensor& a, const Tensor& b); // same shape
Tensor add_bias(Tape* tape, const Tensor& x, const Tensor& bias); // bias over last axis
Tensor mul(Tape* tape, const Tensor& a, const Tensor& b); // elementwise, same shape
Tensor scale(Tape* tape, const Tensor& x, double s);
Tensor relu(Tape* tape, const Tensor& x);
Tensor sigmoid(Tape* tape, const Tensor& x);
Tensor sum(Tape* tape, const Tensor& x); // scalar

// activation(x . W + b) over the last axis of x.
Tensor dense(Tape* tape, const Tensor& x, const Tensor& w, const Tensor& b, Activation act);

// Numerically stabilized softmax over the last axis.
Tensor softmax(Tape* tape, const Tensor& x);

// Per-row standardization over the last axis, then gamma * xhat + beta.
Tensor layer_norm(Tape* tape, const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double epsilon = 1e-5);

Tensor reshape(Tape* tape, const Tensor& x, Shape shape);
Tensor slice_last(Tape* tape, const Tensor& x, std::size_t start, std::size_t len);
Tensor concat_last(Tape* tape, const std::vector<Tensor>& xs);

// Mean over axis 1 of a [batch, seq, dim] tensor -> [batch, dim].
Tensor global_average_pool(Tape* tape, const Tensor& x);

// table: [cardinality, dim]; indices: one row per batch element.
Tensor embedding_lookup(Tape* tape, const Tensor& table, const std::vector<std::int32_t>& indices);

// Inverted dropout: training zeroes entries with probability `rate` and scales
// survivors by 1/(1-rate); inference is the identity.
Tensor dropout(Tape* tape, const Tensor& x, double rate, bool training, Rng& rng);

// softmax(q k^T / sqrt(d_k)) v for [batch, seq, d] inputs. When weights_out is
// given it receives the [batch, seq, seq] attention weights.
Tensor scaled_dot_product_attention(Tape* tape, const Tensor& q, const Tensor& k, const Tensor& v,
                                    std::vector<double>* weights_out = nullptr);

struct MhaParams {
    const Tensor* wq;
    const Tensor* bq;
    const Tensor* wk;
    const Tensor* bk;
    const Tensor* wv;
    const Tensor* bv;
    const Tensor* wo;
    const Tensor* bo;
};

// Attention weights of the most recent forward, one [batch, seq, seq] block
// per head.
struct AttentionTrace {
    std::vector<std::vector<double>> head_weights;
    std::size_t batch = 0, seq = 0;
};

// Per-head scaled dot-product attention on subspace projections, concatenated
// and projected back to model dim. Model dim must divide by num_heads.
Tensor multi_head_attention(Tape* tape, const Tensor& x, const MhaParams& p, std::size_t num_heads,
                            AttentionTrace* trace = nullptr);

// Mean over the batch of -[y ln p + (1-y) ln(1-p)] with p clipped to
// [1e-7, 1 - 1e-7], plus l2 * sum of squared entries of every tensor in
// l2_params. p holds one probability per batch element.
Tensor bce_loss(Tape* tape, const Tensor& p, const std::vector<double>& y, double l2,
                const std::vector<const Tensor*>& l2_params);

// ---- optimizer ---------------------------------------------------------------

struct AdamState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t t = 0;
    std::vector<std::vector<double>> m; // first moments, one entry per parameter
    std::vector<std::vector<double>> v; // second moments

    void init(const std::vector<std::size_t>& sizes);
};

// One Adam update with bias correction; t is incremented before correction.
void adam_step(std::vector<std::vector<double>*> params,
               const std::vector<const std::vector<double>*>& grads, AdamState& state);

} // namespace swarmtab::ad
