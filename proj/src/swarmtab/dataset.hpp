#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "swarmtab/matrix.hpp"

namespace swarmtab {

enum class ColumnKind { numerical, categorical, target };

struct ColumnMeta {
    std::string name; // lowercase, trimmed
    ColumnKind kind = ColumnKind::categorical;
    std::size_t cardinality = 0;    // categorical only
    double non_null_fraction = 1.0; // in [0, 1]
    double min = 0.0;               // numerical only, post-scan (pre-scaling)
    double max = 0.0;
    std::vector<std::string> categories; // code -> value, first-appearance order
};

// Pre-encoding staging form: header metadata plus a grid of optional strings.
// An empty optional is a missing value.
struct RawTable {
    std::vector<ColumnMeta> columns;
    std::vector<std::vector<std::optional<std::string>>> cells; // row-major

    std::size_t n_rows() const { return cells.size(); }
    std::size_t n_cols() const { return columns.size(); }
    std::size_t column_index(const std::string& name) const; // throws DataError when absent
};

// Row filters applied before imputation/encoding.
struct SelectionCriteria {
    std::string target_column;
    std::vector<std::string> required_any_of;       // at least one non-missing
    std::vector<std::string> non_negative_columns;  // must parse as a number >= 0 when present
    std::vector<std::string> required_columns;      // missing value => row excluded
};

// Row/column drop bookkeeping, emitted as audit JSON by the experiment layer.
struct PreprocessAudit {
    std::size_t rows_in = 0;
    std::size_t rows_out = 0;
    std::vector<std::string> columns_dropped;
};

// Immutable encoded dataset: numerical columns min-max scaled to [0, 1],
// categorical columns as integer codes in [0, cardinality), binary target.
class Dataset {
public:
    Dataset() = default;
    Dataset(Matrix x, std::vector<ColumnMeta> meta, std::vector<int> y);

    std::size_t n_rows() const { return x_.rows; }
    std::size_t n_features() const { return x_.cols; }

    const Matrix& x() const { return x_; }
    const std::vector<ColumnMeta>& meta() const { return meta_; }
    const std::vector<int>& y() const { return y_; }

    // Copy of x with categorical codes scaled by 1/(cardinality - 1) so every
    // cell lies in [0, 1]; the form consumed by PCA, logistic regression and
    // the transformer model.
    Matrix unit_scaled() const;

    std::vector<std::size_t> numerical_columns() const;
    std::vector<std::size_t> categorical_columns() const;

    // Throws DataError when an invariant is violated.
    void validate() const;

private:
    Matrix x_;
    std::vector<ColumnMeta> meta_;
    std::vector<int> y_;
};

// ---- construction pipeline -------------------------------------------------

// RFC-4180 CSV with a header row; empty cell = missing value. Ragged rows are
// a hard error naming the offending row index.
RawTable load_csv(const std::string& path);

// Lowercases and trims names; duplicate post-standardization names get
// suffixes "_2", "_3", ... in encounter order. Idempotent.
RawTable standardize_columns(RawTable table);

// Drops columns whose non-null fraction is below min_non_null.
RawTable drop_sparse_columns(RawTable table, double min_non_null);

// Applies inclusion/exclusion rules; returns the surviving table plus row
// counts before/after in the audit.
std::pair<RawTable, PreprocessAudit> apply_selection_criteria(RawTable table,
                                                              const SelectionCriteria& criteria);

// Numerical columns get their median, categorical columns their mode
// (ties -> lexicographically smallest value). A column is numerical iff every
// non-missing cell parses as a number.
RawTable impute_missing(RawTable table);

struct EncodeOptions {
    std::string target_column;
    // When empty, the lexicographically larger of the two target labels is
    // treated as the positive class.
    std::string positive_label;
};

// Final encoding step: categorical values -> first-appearance integer codes,
// numerical columns min-max scaled to [0, 1] (constant column -> all 0),
// target extracted as {0, 1}.
Dataset encode_and_normalize(const RawTable& table, const EncodeOptions& opts);

// ---- synthetic data ---------------------------------------------------------

struct SynthSpec {
    std::size_t n_rows = 0;
    std::size_t n_numerical = 0;
    std::size_t n_categorical = 0;
    std::size_t n_informative = 0;
    std::vector<std::size_t> informative_indices; // empty -> drawn from seed
    double noise_level = 0.0;
    std::uint64_t seed = 0;
    std::size_t categorical_cardinality = 5;
};

struct SynthResult {
    Dataset dataset;
    std::vector<std::size_t> informative_indices; // the planted columns
};

// Labels are a thresholded positive-weight linear combination of the planted
// columns plus Gaussian noise; every other column is independent noise.
// Bit-deterministic for a fixed seed.
SynthResult generate_synthetic(const SynthSpec& spec);

// Writes a dataset back out as CSV loadable by load_csv. Categorical codes are
// written as "c<code>" strings so they re-infer as categorical, the target as
// 0/1 under column "target".
void write_dataset_csv(const Dataset& ds, const std::string& path);

// ---- presets ----------------------------------------------------------------

// Row filters for the HFEA registry CSV layout: non-missing live-birth target,
// at least one recorded infertility cause, non-negative prior-treatment
// counts, and a recorded elective-single-embryo-transfer flag.
SelectionCriteria hfea_selection_criteria();

// The published selected-feature column list for the same registry layout.
std::vector<std::string> hfea_selected_feature_names();

// ---- helpers shared with the rest of the pipeline ---------------------------

// Strict-ish double parser: accepts standard decimal/scientific literals,
// rejects trailing garbage. Used for kind inference.
std::optional<double> parse_number(const std::string& s);

} // namespace swarmtab
