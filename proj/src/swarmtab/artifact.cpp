#include "swarmtab/artifact.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <stdexcept>

#include "swarmtab/errors.hpp"

namespace swarmtab {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'S', 'T', 'A', 'B'};
constexpr std::uint32_t kFormatVersion = 1;

std::uint32_t crc32_update(std::uint32_t crc, const unsigned char* data, std::size_t n) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    crc ^= 0xFFFFFFFFu;
    for (std::size_t i = 0; i < n; ++i) crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

void put_f64(std::string& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    put_u64(out, bits);
}

double get_f64(const unsigned char* p) {
    const std::uint64_t bits = get_u64(p);
    double d;
    std::memcpy(&d, &bits, sizeof d);
    return d;
}

} // namespace

void save_model(const ModelArtifact& artifact, const std::string& path) {
    std::string bytes;
    bytes.append(kMagic, 4);
    put_u32(bytes, artifact.format_version);
    const std::string manifest = artifact.manifest.dump();
    put_u64(bytes, manifest.size());
    bytes.append(manifest);
    put_u64(bytes, artifact.blob.size());
    for (double d : artifact.blob) put_f64(bytes, d);
    const std::uint32_t crc =
        crc32_update(0, reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size());
    put_u32(bytes, crc);

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write model artifact: " + path);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw DataError("failed writing model artifact: " + path);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw DataError("cannot move model artifact into place: " + path);
}

ModelArtifact load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model artifact: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());

    if (bytes.size() < 4 + 4 + 8 || std::memcmp(p, kMagic, 4) != 0)
        throw DataError("not a model artifact: " + path);
    std::size_t off = 4;
    const std::uint32_t version = get_u32(p + off);
    off += 4;
    if (version != kFormatVersion)
        throw DataError("unsupported model artifact format_version " + std::to_string(version) +
                        " (expected " + std::to_string(kFormatVersion) + ")");

    const std::uint64_t manifest_len = get_u64(p + off);
    off += 8;
    if (off + manifest_len + 8 + 4 > bytes.size())
        throw DataError("truncated model artifact (manifest length): " + path);
    const std::string manifest_str = bytes.substr(off, manifest_len);
    off += manifest_len;

    const std::uint64_t blob_len = get_u64(p + off);
    off += 8;
    if (off + blob_len * 8 + 4 != bytes.size())
        throw DataError("truncated model artifact (blob length): " + path);

    const std::uint32_t stored_crc = get_u32(p + bytes.size() - 4);
    const std::uint32_t actual_crc = crc32_update(0, p, bytes.size() - 4);
    if (stored_crc != actual_crc) throw DataError("model artifact checksum mismatch: " + path);

    ModelArtifact artifact;
    artifact.format_version = version;
    try {
        artifact.manifest = json::parse(manifest_str);
    } catch (const json::exception& e) {
        throw DataError("corrupt model artifact manifest: " + std::string(e.what()));
    }
    artifact.kind = artifact.manifest.value("kind", "");
    artifact.blob.resize(blob_len);
    for (std::uint64_t i = 0; i < blob_len; ++i) artifact.blob[i] = get_f64(p + off + i * 8);
    return artifact;
}

// ---- pipeline <-> artifact -----------------------------------------------------------

namespace {

class BlobWriter {
public:
    explicit BlobWriter(ModelArtifact& artifact) : artifact_(artifact) {
        artifact_.manifest["tensors"] = json::array();
    }

    void add(const std::string& name, const ad::Shape& shape, const std::vector<double>& values) {
        json entry;
        entry["name"] = name;
        entry["shape"] = shape;
        entry["offset"] = artifact_.blob.size();
        artifact_.manifest["tensors"].push_back(entry);
        artifact_.blob.insert(artifact_.blob.end(), values.begin(), values.end());
    }

private:
    ModelArtifact& artifact_;
};

class BlobReader {
public:
    explicit BlobReader(const ModelArtifact& artifact) : artifact_(artifact) {}

    std::vector<double> get(const std::string& name, ad::Shape* shape_out = nullptr) const {
        for (const auto& entry : artifact_.manifest.at("tensors")) {
            if (entry.at("name") != name) continue;
            const std::size_t offset = entry.at("offset").get<std::size_t>();
            ad::Shape shape = entry.at("shape").get<ad::Shape>();
            const std::size_t n = ad::numel(shape);
            if (offset + n > artifact_.blob.size())
                throw DataError("model artifact tensor '" + name + "' exceeds blob length");
            if (shape_out) *shape_out = std::move(shape);
            return std::vector<double>(artifact_.blob.begin() + static_cast<std::ptrdiff_t>(offset),
                                       artifact_.blob.begin() +
                                           static_cast<std::ptrdiff_t>(offset + n));
        }
        throw DataError("model artifact is missing tensor '" + name + "'");
    }

private:
    const ModelArtifact& artifact_;
};

// Preorder flattening, six doubles per node.
std::vector<double> tree_to_doubles(const DecisionTreeModel& tree) {
    std::vector<double> out;
    out.reserve(tree.nodes.size() * 6);
    for (const auto& n : tree.nodes) {
        out.push_back(n.is_leaf ? 1.0 : 0.0);
        out.push_back(static_cast<double>(n.feature));
        out.push_back(n.threshold);
        out.push_back(n.positive_fraction);
        out.push_back(n.impurity);
        out.push_back(static_cast<double>(n.n_samples));
    }
    return out;
}

DecisionTreeModel tree_from_doubles(const std::vector<double>& flat, std::size_t max_depth,
                                    std::size_t n_features) {
    if (flat.size() % 6 != 0) throw DataError("model artifact tree blob has a bad length");
    DecisionTreeModel tree;
    tree.max_depth = max_depth;
    tree.n_features = n_features;
    const std::size_t count = flat.size() / 6;
    tree.nodes.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        TreeNode& n = tree.nodes[i];
        n.is_leaf = flat[i * 6] != 0.0;
        n.feature = static_cast<std::size_t>(flat[i * 6 + 1]);
        n.threshold = flat[i * 6 + 2];
        n.positive_fraction = flat[i * 6 + 3];
        n.impurity = flat[i * 6 + 4];
        n.n_samples = static_cast<std::size_t>(flat[i * 6 + 5]);
    }
    // rebuild child links from the preorder layout
    std::size_t cursor = 0;
    const std::function<std::int32_t()> link = [&]() -> std::int32_t {
        if (cursor >= count) throw DataError("model artifact tree blob is truncated");
        const std::int32_t id = static_cast<std::int32_t>(cursor++);
        if (!tree.nodes[static_cast<std::size_t>(id)].is_leaf) {
            tree.nodes[static_cast<std::size_t>(id)].left = link();
            tree.nodes[static_cast<std::size_t>(id)].right = link();
        }
        return id;
    };
    link();
    if (cursor != count) throw DataError("model artifact tree blob has trailing nodes");
    return tree;
}

json column_meta_json(const std::vector<ColumnMeta>& meta) {
    json cols = json::array();
    for (const auto& m : meta) {
        json c;
        c["name"] = m.name;
        c["kind"] = m.kind == ColumnKind::categorical ? "categorical" : "numerical";
        if (m.kind == ColumnKind::categorical) {
            c["cardinality"] = m.cardinality;
            if (!m.categories.empty()) c["categories"] = m.categories;
        } else {
            c["min"] = m.min;
            c["max"] = m.max;
        }
        cols.push_back(c);
    }
    return cols;
}

std::vector<ColumnMeta> column_meta_from_json(const json& cols) {
    std::vector<ColumnMeta> meta;
    for (const auto& c : cols) {
        ColumnMeta m;
        m.name = c.at("name").get<std::string>();
        if (c.at("kind") == "categorical") {
            m.kind = ColumnKind::categorical;
            m.cardinality = c.at("cardinality").get<std::size_t>();
            if (c.contains("categories"))
                m.categories = c.at("categories").get<std::vector<std::string>>();
        } else {
            m.kind = ColumnKind::numerical;
            m.min = c.value("min", 0.0);
            m.max = c.value("max", 0.0);
        }
        meta.push_back(std::move(m));
    }
    return meta;
}

json transformer_config_json(const TransformerConfig& c) {
    return json{{"input_dim", c.input_dim},       {"model_dim", c.model_dim},
                {"num_heads", c.num_heads},       {"ff_dim", c.ff_dim},
                {"num_layers", c.num_layers},     {"dropout_rate", c.dropout_rate},
                {"l2_reg", c.l2_reg},             {"batch_size", c.batch_size},
                {"learning_rate", c.learning_rate}, {"epochs", c.epochs},
                {"early_stop_patience", c.early_stop_patience}};
}

TransformerConfig transformer_config_from_json(const json& j) {
    TransformerConfig c;
    c.input_dim = j.at("input_dim").get<std::size_t>();
    c.model_dim = j.at("model_dim").get<std::size_t>();
    c.num_heads = j.at("num_heads").get<std::size_t>();
    c.ff_dim = j.at("ff_dim").get<std::size_t>();
    c.num_layers = j.at("num_layers").get<std::size_t>();
    c.dropout_rate = j.at("dropout_rate").get<double>();
    c.l2_reg = j.at("l2_reg").get<double>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.early_stop_patience = j.at("early_stop_patience").get<std::size_t>();
    return c;
}

json tabtransformer_config_json(const TabTransformerConfig& c) {
    return json{{"n_numerical", c.n_numerical},
                {"categorical_cardinalities", c.categorical_cardinalities},
                {"embedding_dim", c.embedding_dim},
                {"num_heads", c.num_heads},
                {"ff_dim", c.ff_dim},
                {"num_layers", c.num_layers},
                {"dropout_rate", c.dropout_rate},
                {"l2_reg", c.l2_reg},
                {"batch_size", c.batch_size},
                {"learning_rate", c.learning_rate},
                {"epochs", c.epochs},
                {"early_stop_patience", c.early_stop_patience}};
}

TabTransformerConfig tabtransformer_config_from_json(const json& j) {
    TabTransformerConfig c;
    c.n_numerical = j.at("n_numerical").get<std::size_t>();
    c.categorical_cardinalities = j.at("categorical_cardinalities").get<std::vector<std::size_t>>();
    c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
    c.num_heads = j.at("num_heads").get<std::size_t>();
    c.ff_dim = j.at("ff_dim").get<std::size_t>();
    c.num_layers = j.at("num_layers").get<std::size_t>();
    c.dropout_rate = j.at("dropout_rate").get<double>();
    c.l2_reg = j.at("l2_reg").get<double>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.early_stop_patience = j.at("early_stop_patience").get<std::size_t>();
    return c;
}

void write_model_params(BlobWriter& writer, const std::string& prefix, const ModelParams& params,
                        json& manifest_entry) {
    json names = json::array();
    json l2 = json::array();
    for (const auto& t : params.tensors) {
        writer.add(prefix + t.name, t.shape, t.values);
        names.push_back(t.name);
        l2.push_back(t.l2_penalized);
    }
    manifest_entry["param_names"] = names;
    manifest_entry["param_l2"] = l2;
}

ModelParams read_model_params(const BlobReader& reader, const std::string& prefix,
                              const json& manifest_entry) {
    ModelParams params;
    const auto names = manifest_entry.at("param_names").get<std::vector<std::string>>();
    const auto l2 = manifest_entry.at("param_l2").get<std::vector<bool>>();
    for (std::size_t i = 0; i < names.size(); ++i) {
        ParamTensor t;
        t.name = names[i];
        t.values = reader.get(prefix + names[i], &t.shape);
        t.l2_penalized = l2[i];
        params.tensors.push_back(std::move(t));
    }
    return params;
}

} // namespace

ModelArtifact make_artifact(const PipelineModel& pipeline, const json& resolved_config) {
    ModelArtifact artifact;
    artifact.format_version = kFormatVersion;
    artifact.kind = trained_model_kind(pipeline.model);
    artifact.manifest["format_version"] = kFormatVersion;
    artifact.manifest["kind"] = artifact.kind;
    artifact.manifest["config"] = resolved_config;
    artifact.manifest["preprocessing"] = {{"columns", column_meta_json(pipeline.input_meta)}};
    {
        json names = json::array();
        for (const auto& m : pipeline.input_meta) names.push_back(m.name);
        artifact.manifest["feature_names"] = names;
    }

    BlobWriter writer(artifact);

    json front;
    front["kind"] = front_end_kind_name(pipeline.front.kind);
    switch (pipeline.front.kind) {
        case FrontEndKind::none:
            break;
        case FrontEndKind::pca: {
            const PcaModel& p = pipeline.front.pca;
            front["k"] = p.k;
            front["retain"] = p.retain;
            writer.add("pca.mean", {p.mean.size()}, p.mean);
            writer.add("pca.components", {p.components.rows, p.components.cols}, p.components.a);
            writer.add("pca.explained_variance", {p.explained_variance.size()},
                       p.explained_variance);
            writer.add("pca.explained_ratio", {p.explained_ratio.size()}, p.explained_ratio);
            break;
        }
        case FrontEndKind::pso: {
            front["n_features"] = pipeline.front.mask.bits.size();
            front["selected_indices"] = pipeline.front.mask.selected_indices();
            front["selected_names"] = pipeline.front.selected_names;
            front["best_cost"] = pipeline.front.pso_best_cost;
            break;
        }
    }
    artifact.manifest["front_end"] = front;

    json model_entry;
    if (const auto* m = std::get_if<LogRegModel>(&pipeline.model)) {
        writer.add("weights", {m->weights.size()}, m->weights);
        writer.add("bias", {1}, {m->bias});
        model_entry["feature_indices"] = m->trained_feature_indices;
    } else if (const auto* m = std::get_if<DecisionTreeModel>(&pipeline.model)) {
        writer.add("tree0", {m->nodes.size(), 6}, tree_to_doubles(*m));
        model_entry["max_depth"] = m->max_depth;
        model_entry["n_features"] = m->n_features;
    } else if (const auto* m = std::get_if<RandomForestModel>(&pipeline.model)) {
        for (std::size_t i = 0; i < m->trees.size(); ++i)
            writer.add("tree" + std::to_string(i), {m->trees[i].nodes.size(), 6},
                       tree_to_doubles(m->trees[i]));
        model_entry["n_trees"] = m->trees.size();
        model_entry["max_depth"] = m->trees.empty() ? 0 : m->trees[0].max_depth;
        model_entry["n_features"] = m->n_features;
        model_entry["feature_subsample"] = m->feature_subsample;
        model_entry["bootstrap_seeds"] = m->bootstrap_seeds;
    } else if (const auto* m = std::get_if<TransformerModel>(&pipeline.model)) {
        model_entry["transformer"] = transformer_config_json(m->config);
        write_model_params(writer, "param.", m->params, model_entry);
    } else {
        const auto& tab = std::get<TabTransformerModel>(pipeline.model);
        model_entry["tabtransformer"] = tabtransformer_config_json(tab.config);
        write_model_params(writer, "param.", tab.params, model_entry);
    }
    artifact.manifest["model"] = model_entry;
    return artifact;
}

PipelineModel pipeline_from_artifact(const ModelArtifact& artifact) {
    PipelineModel pipeline;
    const json& manifest = artifact.manifest;
    BlobReader reader(artifact);

    pipeline.input_meta = column_meta_from_json(manifest.at("preprocessing").at("columns"));

    const json& front = manifest.at("front_end");
    const std::string front_kind = front.at("kind").get<std::string>();
    if (front_kind == "none") {
        pipeline.front.kind = FrontEndKind::none;
    } else if (front_kind == "pca") {
        pipeline.front.kind = FrontEndKind::pca;
        PcaModel& p = pipeline.front.pca;
        p.k = front.at("k").get<std::size_t>();
        p.retain = front.at("retain").get<double>();
        p.mean = reader.get("pca.mean");
        ad::Shape comp_shape;
        p.components.a = reader.get("pca.components", &comp_shape);
        p.components.rows = comp_shape[0];
        p.components.cols = comp_shape[1];
        p.explained_variance = reader.get("pca.explained_variance");
        p.explained_ratio = reader.get("pca.explained_ratio");
    } else if (front_kind == "pso") {
        pipeline.front.kind = FrontEndKind::pso;
        const std::size_t n = front.at("n_features").get<std::size_t>();
        pipeline.front.mask.bits.assign(n, 0);
        for (std::size_t j : front.at("selected_indices").get<std::vector<std::size_t>>())
            pipeline.front.mask.bits.at(j) = 1;
        pipeline.front.selected_names =
            front.at("selected_names").get<std::vector<std::string>>();
        pipeline.front.pso_best_cost = front.value("best_cost", 0.0);
    } else {
        throw DataError("model artifact has unknown front end kind '" + front_kind + "'");
    }

    const json& model_entry = manifest.at("model");
    const std::string kind = manifest.at("kind").get<std::string>();
    if (kind == "logreg") {
        LogRegModel m;
        m.weights = reader.get("weights");
        m.bias = reader.get("bias")[0];
        m.trained_feature_indices =
            model_entry.at("feature_indices").get<std::vector<std::size_t>>();
        pipeline.model = std::move(m);
    } else if (kind == "dt") {
        pipeline.model = tree_from_doubles(reader.get("tree0"),
                                           model_entry.at("max_depth").get<std::size_t>(),
                                           model_entry.at("n_features").get<std::size_t>());
    } else if (kind == "rf") {
        RandomForestModel m;
        const std::size_t n_trees = model_entry.at("n_trees").get<std::size_t>();
        const std::size_t max_depth = model_entry.at("max_depth").get<std::size_t>();
        m.n_features = model_entry.at("n_features").get<std::size_t>();
        m.feature_subsample = model_entry.at("feature_subsample").get<std::size_t>();
        m.bootstrap_seeds = model_entry.at("bootstrap_seeds").get<std::vector<std::uint64_t>>();
        for (std::size_t i = 0; i < n_trees; ++i)
            m.trees.push_back(tree_from_doubles(reader.get("tree" + std::to_string(i)), max_depth,
                                                m.n_features));
        pipeline.model = std::move(m);
    } else if (kind == "transformer") {
        TransformerModel m;
        m.config = transformer_config_from_json(model_entry.at("transformer"));
        m.params = read_model_params(reader, "param.", model_entry);
        pipeline.model = std::move(m);
    } else if (kind == "tabtransformer") {
        TabTransformerModel m;
        m.config = tabtransformer_config_from_json(model_entry.at("tabtransformer"));
        m.params = read_model_params(reader, "param.", model_entry);
        pipeline.model = std::move(m);
    } else {
        throw DataError("model artifact has unknown model kind '" + kind + "'");
    }
    return pipeline;
}

std::vector<double> pipeline_predict(const PipelineModel& pipeline, const Matrix& x) {
    if (x.cols != pipeline.input_meta.size())
        throw std::invalid_argument("pipeline_predict: expected " +
                                    std::to_string(pipeline.input_meta.size()) +
                                    " feature columns, got " + std::to_string(x.cols));
    FeatureBlock block;
    block.meta = pipeline.input_meta;
    block.x = x;
    for (std::size_t j = 0; j < block.meta.size(); ++j) {
        if (block.meta[j].kind != ColumnKind::categorical) continue;
        const std::size_t card = block.meta[j].cardinality;
        const double denom = card > 1 ? static_cast<double>(card - 1) : 1.0;
        for (std::size_t i = 0; i < block.x.rows; ++i) {
            const double code = block.x.at(i, j);
            if (code < 0.0 || code >= static_cast<double>(card))
                throw std::out_of_range("categorical feature '" + block.meta[j].name +
                                        "': code " + std::to_string(code) + " out of range [0, " +
                                        std::to_string(card) + ")");
            block.x.at(i, j) = code / denom;
        }
    }
    return predict_proba(pipeline.model, apply_front_end(pipeline.front, block));
}

} // namespace swarmtab
