#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "swarmtab/autodiff.hpp"
#include "swarmtab/matrix.hpp"
#include "swarmtab/rng.hpp"

namespace swarmtab {

struct TransformerConfig {
    std::size_t input_dim = 0; // features after selection
    std::size_t model_dim = 128;
    std::size_t num_heads = 4;
    std::size_t ff_dim = 128;
    std::size_t num_layers = 2;
    double dropout_rate = 0.3;
    double l2_reg = 1e-4;
    std::size_t batch_size = 2048;
    double learning_rate = 1e-6;
    std::size_t epochs = 40;
    std::size_t early_stop_patience = 2;

    void validate() const;
};

struct TabTransformerConfig {
    std::size_t n_numerical = 0;
    std::vector<std::size_t> categorical_cardinalities;
    std::size_t embedding_dim = 8;
    std::size_t num_heads = 4;
    std::size_t ff_dim = 128;
    std::size_t num_layers = 1;
    double dropout_rate = 0.2;
    double l2_reg = 0.01;
    std::size_t batch_size = 512;
    double learning_rate = 1e-7;
    std::size_t epochs = 40;
    std::size_t early_stop_patience = 2;

    // Zero channels appended to the numerical block so total_dim divides by
    // num_heads.
    std::size_t pad_channels() const;
    std::size_t total_dim() const;

    void validate() const;
};

// ---- parameters ---------------------------------------------------------------

struct ParamTensor {
    std::string name;
    ad::Shape shape;
    std::vector<double> values;
    bool l2_penalized = false;
};

struct ModelParams {
    std::vector<ParamTensor> tensors;

    std::size_t index(const std::string& name) const; // throws when absent
    const ParamTensor& get(const std::string& name) const { return tensors[index(name)]; }
    std::size_t total_values() const;
};

// Glorot-uniform weight matrices, zero biases, unit layer-norm gains,
// N(0, 0.05) embeddings; bit-deterministic per seed.
ModelParams init_transformer_params(const TransformerConfig& config, std::uint64_t seed);
ModelParams init_tabtransformer_params(const TabTransformerConfig& config, std::uint64_t seed);

// Leaf tensors on the tape (trainable) or plain constants when tape is null.
std::vector<ad::Tensor> bind_params(ad::Tape* tape, const ModelParams& params);

// ---- forward passes --------------------------------------------------------------

struct ForwardTrace {
    std::vector<std::pair<std::string, ad::Shape>> stages;
    std::vector<ad::AttentionTrace> attention; // one entry per attention layer
    std::size_t padded_channels = 0;
};

// Categorical codes live beside the numerical block, one int32 per column.
struct TabInputs {
    Matrix numeric;                  // n x n_numerical
    std::vector<std::int32_t> codes; // row-major, n x n_cat
    std::size_t n_cat = 0;

    std::size_t n_rows() const { return numeric.rows; }
    TabInputs gather_rows(const std::vector<std::size_t>& idx) const;
};

// Graph builders (shared by training, gradient checks and inference). `params`
// supplies tensor names and flags; `bound` holds the matching tape-bound (or
// constant) tensors in the same order.
ad::Tensor transformer_graph(ad::Tape* tape, const ModelParams& params,
                             const std::vector<ad::Tensor>& bound, const TransformerConfig& config,
                             const Matrix& x, bool training, Rng* dropout_rng, ForwardTrace* trace);
ad::Tensor tabtransformer_graph(ad::Tape* tape, const ModelParams& params,
                                const std::vector<ad::Tensor>& bound,
                                const TabTransformerConfig& config, const TabInputs& x,
                                bool training, Rng* dropout_rng, ForwardTrace* trace);

// Inference-mode probability per row (dropout off, bit-deterministic).
std::vector<double> transformer_forward(const ModelParams& params, const TransformerConfig& config,
                                        const Matrix& x, ForwardTrace* trace = nullptr);
std::vector<double> tabtransformer_forward(const ModelParams& params,
                                           const TabTransformerConfig& config, const TabInputs& x,
                                           ForwardTrace* trace = nullptr);

// ---- training --------------------------------------------------------------------

struct TrainingCurves {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    std::vector<double> train_accuracy;
    std::vector<double> val_accuracy;

    std::size_t epochs() const { return train_loss.size(); }
};

struct TrainResult {
    TrainingCurves curves;
    std::size_t best_epoch = 0; // 1-based epoch whose parameters were returned
    double best_val_loss = 0.0;
    bool stopped_early = false;
};

// Stops once validation loss has failed to improve by more than min_delta for
// `patience` consecutive epochs; tracks the best epoch.
class EarlyStopping {
public:
    explicit EarlyStopping(std::size_t patience, double min_delta = 1e-6)
        : patience_(patience), min_delta_(min_delta) {}

    // Call once per epoch (1-based); returns true when training should stop.
    bool observe(double val_loss, std::size_t epoch);

    std::size_t best_epoch() const { return best_epoch_; }
    double best_loss() const { return best_loss_; }

private:
    std::size_t patience_;
    double min_delta_;
    double best_loss_ = 0.0;
    std::size_t best_epoch_ = 0;
    std::size_t streak_ = 0;
};

struct TrainOptions {
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    std::size_t epochs = 40;
    std::size_t patience = 2;
    double l2 = 0.0;
    double min_delta = 1e-6;
};

// Mini-batch Adam training with per-epoch shuffling (final short batch kept),
// BCE + L2 loss, early stopping; returns the parameters of the best-val_loss
// epoch in `params`. Aborts with epoch/batch diagnostics on non-finite loss.
using BatchForward = std::function<ad::Tensor(ad::Tape* tape, const std::vector<ad::Tensor>& bound,
                                              const std::vector<std::size_t>& rows, bool training,
                                              Rng* rng)>;

TrainResult fit_model(ModelParams& params, const BatchForward& train_forward,
                      const BatchForward& val_forward, const std::vector<int>& y_train,
                      const std::vector<int>& y_val, const TrainOptions& options, Rng& rng);

TrainResult train_transformer(ModelParams& params, const TransformerConfig& config,
                              const Matrix& x_train, const std::vector<int>& y_train,
                              const Matrix& x_val, const std::vector<int>& y_val, Rng& rng);
TrainResult train_tabtransformer(ModelParams& params, const TabTransformerConfig& config,
                                 const TabInputs& x_train, const std::vector<int>& y_train,
                                 const TabInputs& x_val, const std::vector<int>& y_val, Rng& rng);

// epoch,train_loss,val_loss,train_acc,val_acc
std::string curves_csv(const TrainingCurves& curves);

} // namespace swarmtab
