#include "swarmtab/attention_models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "swarmtab/errors.hpp"

namespace swarmtab {

void TransformerConfig::validate() const {
    if (input_dim == 0) throw ConfigError("transformer: input_dim must be >= 1");
    if (num_heads == 0 || model_dim % num_heads != 0)
        throw ConfigError("transformer: model_dim must divide by num_heads");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw ConfigError("transformer: dropout_rate must be in [0, 1)");
    if (num_layers == 0) throw ConfigError("transformer: num_layers must be >= 1");
    if (batch_size == 0) throw ConfigError("transformer: batch_size must be >= 1");
}

std::size_t TabTransformerConfig::pad_channels() const {
    const std::size_t raw = n_numerical + categorical_cardinalities.size() * embedding_dim;
    return (num_heads - raw % num_heads) % num_heads;
}

std::size_t TabTransformerConfig::total_dim() const {
    return n_numerical + categorical_cardinalities.size() * embedding_dim + pad_channels();
}

void TabTransformerConfig::validate() const {
    if (n_numerical + categorical_cardinalities.size() == 0)
        throw ConfigError("tabtransformer: no input features");
    if (num_heads == 0) throw ConfigError("tabtransformer: num_heads must be >= 1");
    if (embedding_dim == 0 && !categorical_cardinalities.empty())
        throw ConfigError("tabtransformer: embedding_dim must be >= 1");
    for (std::size_t c : categorical_cardinalities)
        if (c == 0) throw ConfigError("tabtransformer: zero-cardinality categorical feature");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw ConfigError("tabtransformer: dropout_rate must be in [0, 1)");
    if (num_layers == 0) throw ConfigError("tabtransformer: num_layers must be >= 1");
    if (batch_size == 0) throw ConfigError("tabtransformer: batch_size must be >= 1");
}

// ---- parameter specs -------------------------------------------------------------

namespace {

enum class InitKind { glorot, zeros, ones, embedding };

struct ParamSpec {
    std::string name;
    ad::Shape shape;
    bool l2 = false;
    InitKind init = InitKind::glorot;
};

void append_mha_specs(std::vector<ParamSpec>& specs, const std::string& prefix, std::size_t dim,
                      bool l2) {
    for (const char* part : {"wq", "wk", "wv", "wo"})
        specs.push_back({prefix + "." + part, {dim, dim}, l2, InitKind::glorot});
    for (const char* part : {"bq", "bk", "bv", "bo"})
        specs.push_back({prefix + "." + part, {dim}, false, InitKind::zeros});
}

std::vector<ParamSpec> transformer_param_specs(const TransformerConfig& cfg) {
    std::vector<ParamSpec> specs;
    specs.push_back({"input.w", {cfg.input_dim, cfg.model_dim}, true, InitKind::glorot});
    specs.push_back({"input.b", {cfg.model_dim}, false, InitKind::zeros});
    for (std::size_t l = 0; l < cfg.num_layers; ++l) {
        const std::string prefix = "layer" + std::to_string(l);
        append_mha_specs(specs, prefix + ".attn", cfg.model_dim, true);
        specs.push_back({prefix + ".ln1.gamma", {cfg.model_dim}, false, InitKind::ones});
        specs.push_back({prefix + ".ln1.beta", {cfg.model_dim}, false, InitKind::zeros});
        specs.push_back({prefix + ".ff.w1", {cfg.model_dim, cfg.ff_dim}, true, InitKind::glorot});
        specs.push_back({prefix + ".ff.b1", {cfg.ff_dim}, false, InitKind::zeros});
        specs.push_back({prefix + ".ff.w2", {cfg.ff_dim, cfg.model_dim}, true, InitKind::glorot});
        specs.push_back({prefix + ".ff.b2", {cfg.model_dim}, false, InitKind::zeros});
        specs.push_back({prefix + ".ln2.gamma", {cfg.model_dim}, false, InitKind::ones});
        specs.push_back({prefix + ".ln2.beta", {cfg.model_dim}, false, InitKind::zeros});
    }
    specs.push_back({"head.w", {cfg.model_dim, 1}, true, InitKind::glorot});
    specs.push_back({"head.b", {1}, false, InitKind::zeros});
    return specs;
}

std::vector<ParamSpec> tabtransformer_param_specs(const TabTransformerConfig& cfg) {
    // L2 is applied to the feed-forward layer weights only.
    std::vector<ParamSpec> specs;
    for (std::size_t j = 0; j < cfg.categorical_cardinalities.size(); ++j)
        specs.push_back({"embed" + std::to_string(j),
                         {cfg.categorical_cardinalities[j], cfg.embedding_dim},
                         false,
                         InitKind::embedding});
    const std::size_t total = cfg.total_dim();
    for (std::size_t l = 0; l < cfg.num_layers; ++l) {
        const std::string prefix = "layer" + std::to_string(l);
        append_mha_specs(specs, prefix + ".attn", total, false);
        specs.push_back({prefix + ".ln.gamma", {total}, false, InitKind::ones});
        specs.push_back({prefix + ".ln.beta", {total}, false, InitKind::zeros});
    }
    specs.push_back({"ff.w", {total, cfg.ff_dim}, true, InitKind::glorot});
    specs.push_back({"ff.b", {cfg.ff_dim}, false, InitKind::zeros});
    specs.push_back({"head.w", {cfg.ff_dim, 1}, true, InitKind::glorot});
    specs.push_back({"head.b", {1}, false, InitKind::zeros});
    return specs;
}

ModelParams init_from_specs(const std::vector<ParamSpec>& specs, std::uint64_t seed) {
    ModelParams params;
    Rng rng(seed);
    for (const auto& spec : specs) {
        ParamTensor t;
        t.name = spec.name;
        t.shape = spec.shape;
        t.l2_penalized = spec.l2;
        const std::size_t n = ad::numel(spec.shape);
        t.values.resize(n);
        switch (spec.init) {
            case InitKind::zeros:
                std::fill(t.values.begin(), t.values.end(), 0.0);
                break;
            case InitKind::ones:
                std::fill(t.values.begin(), t.values.end(), 1.0);
                break;
            case InitKind::glorot: {
                const double fan_in = static_cast<double>(spec.shape[0]);
                const double fan_out =
                    static_cast<double>(spec.shape.size() > 1 ? spec.shape[1] : 1);
                const double limit = std::sqrt(6.0 / (fan_in + fan_out));
                for (double& v : t.values) v = rng.uniform(-limit, limit);
                break;
            }
            case InitKind::embedding:
                for (double& v : t.values) v = rng.normal(0.0, 0.05);
                break;
        }
        params.tensors.push_back(std::move(t));
    }
    return params;
}

} // namespace

std::size_t ModelParams::index(const std::string& name) const {
    for (std::size_t i = 0; i < tensors.size(); ++i)
        if (tensors[i].name == name) return i;
    throw std::invalid_argument("no parameter tensor named '" + name + "'");
}

std::size_t ModelParams::total_values() const {
    std::size_t n = 0;
    for (const auto& t : tensors) n += t.values.size();
    return n;
}

ModelParams init_transformer_params(const TransformerConfig& config, std::uint64_t seed) {
    config.validate();
    return init_from_specs(transformer_param_specs(config), seed);
}

ModelParams init_tabtransformer_params(const TabTransformerConfig& config, std::uint64_t seed) {
    config.validate();
    return init_from_specs(tabtransformer_param_specs(config), seed);
}

std::vector<ad::Tensor> bind_params(ad::Tape* tape, const ModelParams& params) {
    std::vector<ad::Tensor> bound;
    bound.reserve(params.tensors.size());
    for (const auto& t : params.tensors) {
        if (tape) bound.push_back(ad::leaf(*tape, t.shape, t.values));
        else bound.push_back(ad::Tensor::constant(t.shape, t.values));
    }
    return bound;
}

// ---- forward passes -----------------------------------------------------------------

TabInputs TabInputs::gather_rows(const std::vector<std::size_t>& idx) const {
    TabInputs out;
    out.numeric = numeric.gather_rows(idx);
    out.n_cat = n_cat;
    out.codes.resize(idx.size() * n_cat);
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < n_cat; ++j) out.codes[i * n_cat + j] = codes[idx[i] * n_cat + j];
    return out;
}

namespace {

struct ParamLookup {
    const ModelParams* names;
    const std::vector<ad::Tensor>* bound;

    const ad::Tensor& operator()(const std::string& name) const {
        return (*bound)[names->index(name)];
    }
};

ad::MhaParams mha_refs(const ParamLookup& p, const std::string& prefix) {
    return ad::MhaParams{&p(prefix + ".wq"), &p(prefix + ".bq"), &p(prefix + ".wk"),
                         &p(prefix + ".bk"), &p(prefix + ".wv"), &p(prefix + ".bv"),
                         &p(prefix + ".wo"), &p(prefix + ".bo")};
}

void trace_stage(ForwardTrace* trace, const char* name, const ad::Shape& shape) {
    if (trace) trace->stages.emplace_back(name, shape);
}

} // namespace

ad::Tensor transformer_graph(ad::Tape* tape, const ModelParams& params,
                             const std::vector<ad::Tensor>& bound, const TransformerConfig& cfg,
                             const Matrix& x, bool training, Rng* dropout_rng,
                             ForwardTrace* trace) {
    if (x.cols != cfg.input_dim)
        throw std::invalid_argument("transformer: expected " + std::to_string(cfg.input_dim) +
                                    " input features, got " + std::to_string(x.cols));
    if (training && cfg.dropout_rate > 0.0 && dropout_rng == nullptr)
        throw std::invalid_argument("transformer: training mode needs a dropout rng");
    const std::size_t batch = x.rows;
    ParamLookup p{&params, &bound};

    trace_stage(trace, "input", {batch, cfg.input_dim});
    ad::Tensor h = ad::Tensor::constant({batch, cfg.input_dim}, x.a);
    h = ad::dense(tape, h, p("input.w"), p("input.b"), ad::Activation::none);
    trace_stage(trace, "dense", {batch, cfg.model_dim});
    h = ad::reshape(tape, h, {batch, 1, cfg.model_dim});
    trace_stage(trace, "sequence_expansion", {batch, 1, cfg.model_dim});

    for (std::size_t l = 0; l < cfg.num_layers; ++l) {
        const std::string prefix = "layer" + std::to_string(l);
        ad::AttentionTrace* attn_trace = nullptr;
        if (trace) {
            trace->attention.emplace_back();
            attn_trace = &trace->attention.back();
        }
        ad::Tensor attn =
            ad::multi_head_attention(tape, h, mha_refs(p, prefix + ".attn"), cfg.num_heads,
                                     attn_trace);
        trace_stage(trace, "multi_head_attention", {batch, 1, cfg.model_dim});
        if (dropout_rng) attn = ad::dropout(tape, attn, cfg.dropout_rate, training, *dropout_rng);
        h = ad::layer_norm(tape, ad::add(tape, h, attn), p(prefix + ".ln1.gamma"),
                           p(prefix + ".ln1.beta"));
        trace_stage(trace, "residual_norm", {batch, 1, cfg.model_dim});

        ad::Tensor ff =
            ad::dense(tape, h, p(prefix + ".ff.w1"), p(prefix + ".ff.b1"), ad::Activation::relu);
        ff = ad::dense(tape, ff, p(prefix + ".ff.w2"), p(prefix + ".ff.b2"), ad::Activation::none);
        trace_stage(trace, "feed_forward", {batch, 1, cfg.model_dim});
        if (dropout_rng) ff = ad::dropout(tape, ff, cfg.dropout_rate, training, *dropout_rng);
        h = ad::layer_norm(tape, ad::add(tape, h, ff), p(prefix + ".ln2.gamma"),
                           p(prefix + ".ln2.beta"));
        trace_stage(trace, "residual_norm", {batch, 1, cfg.model_dim});
    }

    h = ad::global_average_pool(tape, h);
    trace_stage(trace, "global_average_pool", {batch, cfg.model_dim});
    h = ad::dense(tape, h, p("head.w"), p("head.b"), ad::Activation::sigmoid);
    trace_stage(trace, "output", {batch, 1});
    return ad::reshape(tape, h, {batch});
}

ad::Tensor tabtransformer_graph(ad::Tape* tape, const ModelParams& params,
                                const std::vector<ad::Tensor>& bound,
                                const TabTransformerConfig& cfg, const TabInputs& x, bool training,
                                Rng* dropout_rng, ForwardTrace* trace) {
    if (x.numeric.cols != cfg.n_numerical)
        throw std::invalid_argument("tabtransformer: expected " +
                                    std::to_string(cfg.n_numerical) + " numerical features, got " +
                                    std::to_string(x.numeric.cols));
    if (x.n_cat != cfg.categorical_cardinalities.size())
        throw std::invalid_argument("tabtransformer: expected " +
                                    std::to_string(cfg.categorical_cardinalities.size()) +
                                    " categorical features, got " + std::to_string(x.n_cat));
    if (training && cfg.dropout_rate > 0.0 && dropout_rng == nullptr)
        throw std::invalid_argument("tabtransformer: training mode needs a dropout rng");
    const std::size_t batch = x.n_rows();
    ParamLookup p{&params, &bound};

    trace_stage(trace, "numerical_input", {batch, cfg.n_numerical});
    if (trace) trace->padded_channels = cfg.pad_channels();

    std::vector<ad::Tensor> blocks;
    const std::size_t padded = cfg.n_numerical + cfg.pad_channels();
    {
        // numerical block with zero padding channels appended
        Matrix num(batch, padded);
        for (std::size_t i = 0; i < batch; ++i)
            for (std::size_t j = 0; j < cfg.n_numerical; ++j) num.at(i, j) = x.numeric.at(i, j);
        blocks.push_back(ad::Tensor::constant({batch, padded}, num.a));
    }
    for (std::size_t j = 0; j < x.n_cat; ++j) {
        std::vector<std::int32_t> idx(batch);
        for (std::size_t i = 0; i < batch; ++i) idx[i] = x.codes[i * x.n_cat + j];
        try {
            blocks.push_back(ad::embedding_lookup(tape, p("embed" + std::to_string(j)), idx));
        } catch (const std::out_of_range& e) {
            throw std::out_of_range("categorical feature " + std::to_string(j) + ": " + e.what());
        }
        trace_stage(trace, "categorical_embedding", {batch, cfg.embedding_dim});
    }

    ad::Tensor h = blocks.size() == 1 ? blocks[0] : ad::concat_last(tape, blocks);
    const std::size_t total = cfg.total_dim();
    trace_stage(trace, "concatenation", {batch, total});
    h = ad::reshape(tape, h, {batch, 1, total});
    trace_stage(trace, "reshape", {batch, 1, total});

    for (std::size_t l = 0; l < cfg.num_layers; ++l) {
        const std::string prefix = "layer" + std::to_string(l);
        ad::AttentionTrace* attn_trace = nullptr;
        if (trace) {
            trace->attention.emplace_back();
            attn_trace = &trace->attention.back();
        }
        h = ad::multi_head_attention(tape, h, mha_refs(p, prefix + ".attn"), cfg.num_heads,
                                     attn_trace);
        trace_stage(trace, "multi_head_attention", {batch, 1, total});
        h = ad::layer_norm(tape, h, p(prefix + ".ln.gamma"), p(prefix + ".ln.beta"));
        trace_stage(trace, "layer_normalization", {batch, 1, total});
    }

    h = ad::dense(tape, h, p("ff.w"), p("ff.b"), ad::Activation::relu);
    trace_stage(trace, "dense_relu", {batch, 1, cfg.ff_dim});
    if (dropout_rng) h = ad::dropout(tape, h, cfg.dropout_rate, training, *dropout_rng);
    h = ad::reshape(tape, h, {batch, cfg.ff_dim});
    h = ad::dense(tape, h, p("head.w"), p("head.b"), ad::Activation::sigmoid);
    trace_stage(trace, "output", {batch, 1});
    return ad::reshape(tape, h, {batch});
}

std::vector<double> transformer_forward(const ModelParams& params, const TransformerConfig& config,
                                        const Matrix& x, ForwardTrace* trace) {
    std::vector<ad::Tensor> bound = bind_params(nullptr, params);
    return transformer_graph(nullptr, params, bound, config, x, false, nullptr, trace).values;
}

std::vector<double> tabtransformer_forward(const ModelParams& params,
                                           const TabTransformerConfig& config, const TabInputs& x,
                                           ForwardTrace* trace) {
    std::vector<ad::Tensor> bound = bind_params(nullptr, params);
    return tabtransformer_graph(nullptr, params, bound, config, x, false, nullptr, trace).values;
}

// ---- training -------------------------------------------------------------------------

bool EarlyStopping::observe(double val_loss, std::size_t epoch) {
    if (best_epoch_ == 0 || val_loss < best_loss_ - min_delta_) {
        best_loss_ = val_loss;
        best_epoch_ = epoch;
        streak_ = 0;
        return false;
    }
    ++streak_;
    return streak_ >= patience_;
}

namespace {

void check_split(const std::vector<int>& y, const char* which) {
    if (y.empty()) throw std::invalid_argument(std::string("train: ") + which + " split is empty");
    bool has0 = false, has1 = false;
    for (int v : y) (v ? has1 : has0) = true;
    if (!has0 || !has1)
        throw std::invalid_argument(std::string("train: ") + which +
                                    " split must contain both classes");
}

double batch_accuracy(const std::vector<double>& probs, const std::vector<int>& y) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < probs.size(); ++i)
        correct += static_cast<std::size_t>((probs[i] >= 0.5 ? 1 : 0) == y[i]);
    return static_cast<double>(correct) / static_cast<double>(probs.size());
}

} // namespace

TrainResult fit_model(ModelParams& params, const BatchForward& train_forward,
                      const BatchForward& val_forward, const std::vector<int>& y_train,
                      const std::vector<int>& y_val, const TrainOptions& options, Rng& rng) {
    check_split(y_train, "training");
    check_split(y_val, "validation");
    if (options.batch_size == 0) throw ConfigError("train: batch_size must be >= 1");

    const std::size_t n_train = y_train.size();
    std::vector<std::size_t> val_rows(y_val.size());
    for (std::size_t i = 0; i < val_rows.size(); ++i) val_rows[i] = i;

    ad::AdamState adam;
    adam.learning_rate = options.learning_rate;
    {
        std::vector<std::size_t> sizes;
        for (const auto& t : params.tensors) sizes.push_back(t.values.size());
        adam.init(sizes);
    }

    EarlyStopping stopper(options.patience, options.min_delta);
    TrainResult result;
    std::vector<std::vector<double>> best_snapshot;
    auto snapshot = [&] {
        best_snapshot.clear();
        for (const auto& t : params.tensors) best_snapshot.push_back(t.values);
    };

    std::vector<std::size_t> order(n_train);
    for (std::size_t i = 0; i < n_train; ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        double acc_sum = 0.0;
        std::size_t seen = 0;

        for (std::size_t start = 0, batch_index = 0; start < n_train;
             start += options.batch_size, ++batch_index) {
            const std::size_t end = std::min(start + options.batch_size, n_train);
            std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(end));
            std::vector<double> yb(rows.size());
            std::vector<int> ybi(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) {
                ybi[i] = y_train[rows[i]];
                yb[i] = static_cast<double>(ybi[i]);
            }

            ad::Tape tape;
            std::vector<ad::Tensor> bound = bind_params(&tape, params);
            ad::Tensor probs = train_forward(&tape, bound, rows, true, &rng);
            std::vector<const ad::Tensor*> penalized;
            for (std::size_t i = 0; i < bound.size(); ++i)
                if (params.tensors[i].l2_penalized) penalized.push_back(&bound[i]);
            ad::Tensor loss = ad::bce_loss(&tape, probs, yb, options.l2, penalized);
            if (!std::isfinite(loss.values[0]))
                throw std::runtime_error("non-finite training loss at epoch " +
                                         std::to_string(epoch) + ", batch " +
                                         std::to_string(batch_index));
            tape.backward(loss);

            std::vector<std::vector<double>*> values;
            std::vector<const std::vector<double>*> grads;
            for (std::size_t i = 0; i < bound.size(); ++i) {
                values.push_back(&params.tensors[i].values);
                grads.push_back(&tape.grad(bound[i].node));
            }
            ad::adam_step(values, grads, adam);

            loss_sum += loss.values[0] * static_cast<double>(rows.size());
            acc_sum += batch_accuracy(probs.values, ybi) * static_cast<double>(rows.size());
            seen += rows.size();
        }

        // Validation pass, inference mode.
        std::vector<ad::Tensor> frozen = bind_params(nullptr, params);
        ad::Tensor val_probs = val_forward(nullptr, frozen, val_rows, false, nullptr);
        std::vector<double> yv(y_val.begin(), y_val.end());
        std::vector<const ad::Tensor*> penalized;
        for (std::size_t i = 0; i < frozen.size(); ++i)
            if (params.tensors[i].l2_penalized) penalized.push_back(&frozen[i]);
        const double val_loss =
            ad::bce_loss(nullptr, val_probs, yv, options.l2, penalized).values[0];
        if (!std::isfinite(val_loss))
            throw std::runtime_error("non-finite validation loss at epoch " +
                                     std::to_string(epoch));

        result.curves.train_loss.push_back(loss_sum / static_cast<double>(seen));
        result.curves.train_accuracy.push_back(acc_sum / static_cast<double>(seen));
        result.curves.val_loss.push_back(val_loss);
        result.curves.val_accuracy.push_back(batch_accuracy(val_probs.values, y_val));

        const std::size_t prev_best = stopper.best_epoch();
        const bool stop = stopper.observe(val_loss, epoch);
        if (stopper.best_epoch() != prev_best || best_snapshot.empty()) snapshot();
        if (stop) {
            result.stopped_early = true;
            break;
        }
    }

    for (std::size_t i = 0; i < params.tensors.size(); ++i)
        params.tensors[i].values = best_snapshot[i];
    result.best_epoch = stopper.best_epoch();
    result.best_val_loss = stopper.best_loss();
    return result;
}

TrainResult train_transformer(ModelParams& params, const TransformerConfig& config,
                              const Matrix& x_train, const std::vector<int>& y_train,
                              const Matrix& x_val, const std::vector<int>& y_val, Rng& rng) {
    config.validate();
    TrainOptions opt;
    opt.batch_size = config.batch_size;
    opt.learning_rate = config.learning_rate;
    opt.epochs = config.epochs;
    opt.patience = config.early_stop_patience;
    opt.l2 = config.l2_reg;

    auto fwd = [&config, &params](const Matrix& source) {
        return [&config, &params, &source](ad::Tape* tape, const std::vector<ad::Tensor>& bound,
                                           const std::vector<std::size_t>& rows, bool training,
                                           Rng* r) {
            return transformer_graph(tape, params, bound, config, source.gather_rows(rows),
                                     training, r, nullptr);
        };
    };
    return fit_model(params, fwd(x_train), fwd(x_val), y_train, y_val, opt, rng);
}

TrainResult train_tabtransformer(ModelParams& params, const TabTransformerConfig& config,
                                 const TabInputs& x_train, const std::vector<int>& y_train,
                                 const TabInputs& x_val, const std::vector<int>& y_val, Rng& rng) {
    config.validate();
    TrainOptions opt;
    opt.batch_size = config.batch_size;
    opt.learning_rate = config.learning_rate;
    opt.epochs = config.epochs;
    opt.patience = config.early_stop_patience;
    opt.l2 = config.l2_reg;

    auto fwd = [&config, &params](const TabInputs& source) {
        return [&config, &params, &source](ad::Tape* tape, const std::vector<ad::Tensor>& bound,
                                           const std::vector<std::size_t>& rows, bool training,
                                           Rng* r) {
            return tabtransformer_graph(tape, params, bound, config, source.gather_rows(rows),
                                        training, r, nullptr);
        };
    };
    return fit_model(params, fwd(x_train), fwd(x_val), y_train, y_val, opt, rng);
}

std::string curves_csv(const TrainingCurves& curves) {
    std::ostringstream os;
    os << "epoch,train_loss,val_loss,train_acc,val_acc\n";
    char buf[160];
    for (std::size_t e = 0; e < curves.epochs(); ++e) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", e + 1,
                      curves.train_loss[e], curves.val_loss[e], curves.train_accuracy[e],
                      curves.val_accuracy[e]);
        os << buf;
    }
    return os.str();
}

} // namespace swarmtab
