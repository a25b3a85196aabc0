#include "swarmtab/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "swarmtab/errors.hpp"
#include "swarmtab/rng.hpp"

namespace swarmtab {

namespace {

std::string lower_trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    std::string out = s.substr(b, e - b);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

void refresh_non_null(RawTable& t) {
    for (std::size_t j = 0; j < t.n_cols(); ++j) {
        std::size_t non_null = 0;
        for (const auto& row : t.cells)
            if (row[j].has_value()) ++non_null;
        t.columns[j].non_null_fraction =
            t.cells.empty() ? 0.0 : static_cast<double>(non_null) / static_cast<double>(t.n_rows());
    }
}

// A column is numerical iff every non-missing cell parses as a number.
bool column_is_numerical(const RawTable& t, std::size_t j) {
    bool any = false;
    for (const auto& row : t.cells) {
        if (!row[j].has_value()) continue;
        any = true;
        if (!parse_number(*row[j]).has_value()) return false;
    }
    return any;
}

} // namespace

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(begin, &end);
    if (end == begin) return std::nullopt;
    while (*end != '\0') {
        if (!std::isspace(static_cast<unsigned char>(*end))) return std::nullopt;
        ++end;
    }
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

std::size_t RawTable::column_index(const std::string& name) const {
    for (std::size_t j = 0; j < columns.size(); ++j)
        if (columns[j].name == name) return j;
    throw DataError("no such column: '" + name + "'");
}

// ---- CSV --------------------------------------------------------------------

namespace {

// RFC-4180 record reader: handles quoted fields, embedded commas/quotes and
// newlines inside quotes, and both \n and \r\n line endings.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool saw_any = false;
    int c;
    while ((c = in.get()) != EOF) {
        saw_any = true;
        char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get();
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch == '\r') {
            if (in.peek() == '\n') in.get();
            fields.push_back(std::move(field));
            return true;
        } else if (ch == '\n') {
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(ch);
        }
    }
    if (!saw_any) return false;
    fields.push_back(std::move(field));
    return true;
}

} // namespace

RawTable load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open CSV file: " + path);

    std::vector<std::string> fields;
    if (!read_record(in, fields) || fields.empty())
        throw DataError("CSV file has no header row: " + path);

    RawTable table;
    table.columns.resize(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j) table.columns[j].name = fields[j];

    std::size_t row_index = 0;
    while (read_record(in, fields)) {
        // A lone trailing newline yields one empty field; skip it.
        if (fields.size() == 1 && fields[0].empty() && in.peek() == EOF && table.n_cols() != 1) break;
        if (fields.size() != table.n_cols())
            throw DataError("ragged CSV row " + std::to_string(row_index) + ": got " +
                            std::to_string(fields.size()) + " cells, expected " +
                            std::to_string(table.n_cols()));
        std::vector<std::optional<std::string>> row(fields.size());
        for (std::size_t j = 0; j < fields.size(); ++j)
            if (!fields[j].empty()) row[j] = fields[j];
        table.cells.push_back(std::move(row));
        ++row_index;
    }

    refresh_non_null(table);
    return table;
}

// ---- pipeline steps ----------------------------------------------------------

RawTable standardize_columns(RawTable table) {
    std::unordered_set<std::string> taken;
    for (auto& col : table.columns) {
        std::string base = lower_trim(col.name);
        std::string name = base;
        for (std::size_t suffix = 2; taken.count(name); ++suffix)
            name = base + "_" + std::to_string(suffix);
        taken.insert(name);
        col.name = name;
    }
    return table;
}

RawTable drop_sparse_columns(RawTable table, double min_non_null) {
    if (min_non_null < 0.0 || min_non_null > 1.0)
        throw ConfigError("min_non_null must be in [0, 1]");
    refresh_non_null(table);
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < table.n_cols(); ++j)
        if (table.columns[j].non_null_fraction >= min_non_null) keep.push_back(j);
    if (keep.empty()) throw DataError("all columns dropped by sparsity filter");
    if (keep.size() == table.n_cols()) return table;

    RawTable out;
    for (std::size_t j : keep) out.columns.push_back(table.columns[j]);
    out.cells.reserve(table.n_rows());
    for (auto& row : table.cells) {
        std::vector<std::optional<std::string>> r;
        r.reserve(keep.size());
        for (std::size_t j : keep) r.push_back(std::move(row[j]));
        out.cells.push_back(std::move(r));
    }
    return out;
}

std::pair<RawTable, PreprocessAudit> apply_selection_criteria(RawTable table,
                                                              const SelectionCriteria& criteria) {
    PreprocessAudit audit;
    audit.rows_in = table.n_rows();

    const std::size_t target = table.column_index(criteria.target_column);
    std::vector<std::size_t> any_of, non_neg, required;
    for (const auto& n : criteria.required_any_of) any_of.push_back(table.column_index(n));
    for (const auto& n : criteria.non_negative_columns) non_neg.push_back(table.column_index(n));
    for (const auto& n : criteria.required_columns) required.push_back(table.column_index(n));

    std::vector<std::vector<std::optional<std::string>>> kept;
    kept.reserve(table.n_rows());
    for (auto& row : table.cells) {
        if (!row[target].has_value()) continue;

        if (!any_of.empty()) {
            bool any = false;
            for (std::size_t j : any_of)
                if (row[j].has_value()) { any = true; break; }
            if (!any) continue;
        }

        bool ok = true;
        for (std::size_t j : non_neg) {
            if (!row[j].has_value()) continue;
            auto v = parse_number(*row[j]);
            if (!v.has_value() || *v < 0.0) { ok = false; break; }
        }
        if (!ok) continue;

        for (std::size_t j : required)
            if (!row[j].has_value()) { ok = false; break; }
        if (!ok) continue;

        kept.push_back(std::move(row));
    }

    table.cells = std::move(kept);
    refresh_non_null(table);
    audit.rows_out = table.n_rows();
    return {std::move(table), audit};
}

RawTable impute_missing(RawTable table) {
    for (std::size_t j = 0; j < table.n_cols(); ++j) {
        bool has_missing = false;
        bool has_value = false;
        for (const auto& row : table.cells) {
            if (row[j].has_value()) has_value = true;
            else has_missing = true;
        }
        if (!has_value)
            throw DataError("column '" + table.columns[j].name +
                            "' is entirely missing; drop it before imputation");
        if (!has_missing) continue;

        std::string fill;
        if (column_is_numerical(table, j)) {
            std::vector<double> vals;
            for (const auto& row : table.cells)
                if (row[j].has_value()) vals.push_back(*parse_number(*row[j]));
            std::sort(vals.begin(), vals.end());
            double median = vals.size() % 2 == 1
                                ? vals[vals.size() / 2]
                                : 0.5 * (vals[vals.size() / 2 - 1] + vals[vals.size() / 2]);
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", median);
            fill = buf;
        } else {
            // Mode; ties broken by lexicographically smallest value.
            std::map<std::string, std::size_t> counts;
            for (const auto& row : table.cells)
                if (row[j].has_value()) ++counts[*row[j]];
            std::size_t best = 0;
            for (const auto& [value, count] : counts) {
                if (count > best) {
                    best = count;
                    fill = value;
                }
            }
        }
        for (auto& row : table.cells)
            if (!row[j].has_value()) row[j] = fill;
    }
    return table;
}

Dataset encode_and_normalize(const RawTable& table, const EncodeOptions& opts) {
    const std::size_t target = table.column_index(opts.target_column);

    for (std::size_t i = 0; i < table.n_rows(); ++i)
        for (std::size_t j = 0; j < table.n_cols(); ++j)
            if (!table.cells[i][j].has_value())
                throw DataError("encode_and_normalize requires a fully imputed table (missing cell at row " +
                                std::to_string(i) + ", column '" + table.columns[j].name + "')");

    // Target labels -> {0, 1}.
    std::set<std::string> labels;
    for (const auto& row : table.cells) labels.insert(*row[target]);
    if (labels.size() != 2)
        throw DataError("target column '" + opts.target_column + "' has " +
                        std::to_string(labels.size()) + " distinct values, need exactly 2");
    std::string positive = opts.positive_label;
    if (positive.empty()) {
        positive = *labels.rbegin(); // lexicographically larger label
    } else if (!labels.count(positive)) {
        throw ConfigError("positive_label '" + positive + "' does not occur in target column");
    }

    std::vector<std::size_t> feature_cols;
    for (std::size_t j = 0; j < table.n_cols(); ++j)
        if (j != target) feature_cols.push_back(j);

    const std::size_t n = table.n_rows();
    Matrix x(n, feature_cols.size());
    std::vector<ColumnMeta> meta;
    meta.reserve(feature_cols.size());

    for (std::size_t out_j = 0; out_j < feature_cols.size(); ++out_j) {
        const std::size_t j = feature_cols[out_j];
        ColumnMeta m = table.columns[j];
        if (column_is_numerical(table, j)) {
            m.kind = ColumnKind::numerical;
            double lo = 0.0, hi = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double v = *parse_number(*table.cells[i][j]);
                if (i == 0 || v < lo) lo = v;
                if (i == 0 || v > hi) hi = v;
            }
            m.min = lo;
            m.max = hi;
            const double range = hi - lo;
            for (std::size_t i = 0; i < n; ++i) {
                double v = *parse_number(*table.cells[i][j]);
                x.at(i, out_j) = range > 0.0 ? (v - lo) / range : 0.0;
            }
        } else {
            m.kind = ColumnKind::categorical;
            std::unordered_map<std::string, std::size_t> codes; // first-appearance order
            m.categories.clear();
            for (std::size_t i = 0; i < n; ++i) {
                const std::string& v = *table.cells[i][j];
                auto it = codes.find(v);
                if (it == codes.end()) {
                    it = codes.emplace(v, m.categories.size()).first;
                    m.categories.push_back(v);
                }
                x.at(i, out_j) = static_cast<double>(it->second);
            }
            m.cardinality = m.categories.size();
        }
        meta.push_back(std::move(m));
    }

    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = (*table.cells[i][target] == positive) ? 1 : 0;

    return Dataset(std::move(x), std::move(meta), std::move(y));
}

// ---- Dataset ------------------------------------------------------------------

Dataset::Dataset(Matrix x, std::vector<ColumnMeta> meta, std::vector<int> y)
    : x_(std::move(x)), meta_(std::move(meta)), y_(std::move(y)) {
    if (meta_.size() != x_.cols) throw DataError("column metadata does not match matrix width");
    if (y_.size() != x_.rows) throw DataError("target length does not match row count");
}

Matrix Dataset::unit_scaled() const {
    Matrix out = x_;
    for (std::size_t j = 0; j < meta_.size(); ++j) {
        if (meta_[j].kind != ColumnKind::categorical) continue;
        const double denom = meta_[j].cardinality > 1
                                 ? static_cast<double>(meta_[j].cardinality - 1)
                                 : 1.0;
        for (std::size_t i = 0; i < out.rows; ++i) out.at(i, j) /= denom;
    }
    return out;
}

std::vector<std::size_t> Dataset::numerical_columns() const {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < meta_.size(); ++j)
        if (meta_[j].kind == ColumnKind::numerical) idx.push_back(j);
    return idx;
}

std::vector<std::size_t> Dataset::categorical_columns() const {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < meta_.size(); ++j)
        if (meta_[j].kind == ColumnKind::categorical) idx.push_back(j);
    return idx;
}

void Dataset::validate() const {
    for (std::size_t j = 0; j < meta_.size(); ++j) {
        for (std::size_t i = 0; i < x_.rows; ++i) {
            const double v = x_.at(i, j);
            if (meta_[j].kind == ColumnKind::numerical) {
                if (v < 0.0 || v > 1.0)
                    throw DataError("numerical cell out of [0, 1] at row " + std::to_string(i) +
                                    ", column '" + meta_[j].name + "'");
            } else {
                if (v != std::floor(v) || v < 0.0 ||
                    v >= static_cast<double>(meta_[j].cardinality))
                    throw DataError("categorical code out of range at row " + std::to_string(i) +
                                    ", column '" + meta_[j].name + "'");
            }
        }
    }
    for (int label : y_)
        if (label != 0 && label != 1) throw DataError("target is not binary");
}

// ---- synthetic data -------------------------------------------------------------

SynthResult generate_synthetic(const SynthSpec& spec) {
    const std::size_t n_features = spec.n_numerical + spec.n_categorical;
    if (spec.n_informative > n_features)
        throw ConfigError("n_informative exceeds the feature count");
    if (spec.noise_level < 0.0) throw ConfigError("noise_level must be >= 0");
    if (spec.categorical_cardinality < 2 && spec.n_categorical > 0)
        throw ConfigError("categorical_cardinality must be >= 2");

    std::vector<std::size_t> informative = spec.informative_indices;
    for (std::size_t idx : informative)
        if (idx >= n_features) throw ConfigError("informative index out of range");
    {
        std::set<std::size_t> uniq(informative.begin(), informative.end());
        if (uniq.size() != informative.size())
            throw ConfigError("informative_indices must be distinct");
        if (!informative.empty() && informative.size() != spec.n_informative)
            throw ConfigError("informative_indices length must equal n_informative");
    }

    Rng rng(spec.seed);

    if (informative.empty() && spec.n_informative > 0) {
        std::vector<std::size_t> all(n_features);
        for (std::size_t j = 0; j < n_features; ++j) all[j] = j;
        rng.shuffle(all);
        informative.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(spec.n_informative));
        std::sort(informative.begin(), informative.end());
    }

    std::vector<double> weights(informative.size());
    for (double& w : weights) w = rng.uniform(0.75, 1.5);

    Matrix x(spec.n_rows, n_features);
    std::vector<ColumnMeta> meta(n_features);
    for (std::size_t j = 0; j < n_features; ++j) {
        const bool numerical = j < spec.n_numerical;
        meta[j].kind = numerical ? ColumnKind::numerical : ColumnKind::categorical;
        meta[j].name = numerical ? "num_" + std::to_string(j)
                                 : "cat_" + std::to_string(j - spec.n_numerical);
        if (numerical) {
            meta[j].min = 0.0;
            meta[j].max = 1.0;
            for (std::size_t i = 0; i < spec.n_rows; ++i) x.at(i, j) = rng.uniform();
        } else {
            meta[j].cardinality = spec.categorical_cardinality;
            meta[j].categories.resize(spec.categorical_cardinality);
            for (std::size_t c = 0; c < spec.categorical_cardinality; ++c)
                meta[j].categories[c] = "c" + std::to_string(c);
            for (std::size_t i = 0; i < spec.n_rows; ++i)
                x.at(i, j) = static_cast<double>(rng.below(spec.categorical_cardinality));
        }
    }

    // Score = positive-weight combination of the planted columns (categorical
    // codes rescaled to [0, 1]); labels split at the noiseless median.
    std::vector<double> score(spec.n_rows, 0.0);
    for (std::size_t k = 0; k < informative.size(); ++k) {
        const std::size_t j = informative[k];
        const bool numerical = j < spec.n_numerical;
        const double denom = numerical ? 1.0 : static_cast<double>(spec.categorical_cardinality - 1);
        for (std::size_t i = 0; i < spec.n_rows; ++i)
            score[i] += weights[k] * (x.at(i, j) / denom);
    }

    std::vector<double> sorted = score;
    std::sort(sorted.begin(), sorted.end());
    const double threshold = sorted.empty()
                                 ? 0.0
                                 : (sorted.size() % 2 == 1
                                        ? sorted[sorted.size() / 2]
                                        : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]));

    std::vector<int> y(spec.n_rows);
    for (std::size_t i = 0; i < spec.n_rows; ++i) {
        const double noise = spec.noise_level > 0.0 ? rng.normal(0.0, spec.noise_level) : 0.0;
        y[i] = (score[i] + noise > threshold) ? 1 : 0;
    }

    SynthResult out{Dataset(std::move(x), std::move(meta), std::move(y)), std::move(informative)};
    return out;
}

void write_dataset_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write CSV file: " + path);
    for (const auto& m : ds.meta()) out << m.name << ',';
    out << "target\n";
    char buf[64];
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        for (std::size_t j = 0; j < ds.n_features(); ++j) {
            const double v = ds.x().at(i, j);
            if (ds.meta()[j].kind == ColumnKind::categorical) {
                out << 'c' << static_cast<std::size_t>(v) << ',';
            } else {
                std::snprintf(buf, sizeof buf, "%.17g", v);
                out << buf << ',';
            }
        }
        out << ds.y()[i] << '\n';
    }
    if (!out) throw DataError("failed writing CSV file: " + path);
}

// ---- presets ----------------------------------------------------------------------

SelectionCriteria hfea_selection_criteria() {
    SelectionCriteria c;
    c.target_column = "live birth occurrence";
    c.required_any_of = {
        "cause of infertility - tubal disease",
        "cause of infertility - ovulatory disorder",
        "cause of infertility - male factor",
        "cause of infertility - patient unexplained",
        "cause of infertility - endometriosis",
        "cause of infertility - female factors",
        "cause of infertility - partner sperm concentration",
        "cause of infertility - partner sperm morphology",
        "cause of infertility - partner sperm motility",
        "cause of infertility - partner sperm immunological factors",
    };
    c.non_negative_columns = {
        "total number of previous ivf cycles",
        "total number of previous di cycles",
        "total number of previous treatments, both ivf and di at clinic",
    };
    c.required_columns = {"elective single embryo transfer"};
    return c;
}

std::vector<std::string> hfea_selected_feature_names() {
    return {
        "cause of infertility - tubal disease",
        "cause of infertility - partner sperm immunological factors",
        "cause of infertility - partner sperm morphology",
        "cause of infertility - endometriosis",
        "cause of infertility - female factors",
        "cause of infertility - ovulatory disorder",
        "cause of infertility - patient unexplained",
        "date of egg mixing",
        "date of embryo thawing",
        "eggs mixed with donor sperm",
        "eggs mixed with partner sperm",
        "eggs thawed",
        "embryos transferred",
        "embryos transferred from eggs micro-injected",
        "embryos stored for use by patient",
        "frozen cycle",
        "stimulation used",
        "total embryos created",
        "total number of previous treatments, both ivf and di at clinic",
        "total number of previous ivf pregnancies",
        "total number of previous di pregnancies",
        "total number of live births - conceived through ivf",
        "total number of live births - conceived through ivf or di",
        "total number of previous pregnancies - ivf and di",
        "donated embryo",
        "heart one delivery date",
        "heart one week's gestation",
        "heart two delivery date",
        "heart two weeks gestation",
        "total number of previous di cycles",
        "type of infertility - female secondary",
        "type of infertility - male primary",
        "pgd (preimplantation genetic diagnosis)",
        "pgt-a treatment",
        "pgt-m treatment",
        "total eggs mixed",
        "fresh eggs stored",
        "fresh eggs stored (0/1)",
    };
}

} // namespace swarmtab
