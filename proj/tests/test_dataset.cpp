#include <doctest.h>

#include <cstring>

#include "support/test_util.hpp"
#include "swarmtab/classic_models.hpp"
#include "swarmtab/dataset.hpp"
#include "swarmtab/errors.hpp"
#include "swarmtab/evaluation.hpp"

using namespace swarmtab;
using testsupport::TempFile;

TEST_CASE("load_csv: minimal well-formed file") {
    TempFile f("mini.csv", "A,B\n1,2\n");
    RawTable t = load_csv(f.path());
    CHECK(t.n_cols() == 2);
    CHECK(t.n_rows() == 1);
    CHECK(t.columns[0].name == "A");
    CHECK(*t.cells[0][1] == "2");
}

TEST_CASE("load_csv: empty cell becomes a missing value") {
    TempFile f("missing.csv", "a,b\n1,\n,2\n");
    RawTable t = load_csv(f.path());
    CHECK(t.cells[0][0].has_value());
    CHECK_FALSE(t.cells[0][1].has_value());
    CHECK_FALSE(t.cells[1][0].has_value());
    CHECK(t.columns[1].non_null_fraction == doctest::Approx(0.5));
}

TEST_CASE("load_csv: ragged row is an error naming the row index") {
    TempFile f("ragged.csv", "a,b\n1,2\n1,2,3\n");
    CHECK_THROWS_WITH_AS(load_csv(f.path()), doctest::Contains("row 1"), DataError);
}

TEST_CASE("load_csv: quoted fields with commas and escaped quotes") {
    TempFile f("quoted.csv", "a,b\n\"x,y\",\"he said \"\"hi\"\"\"\n");
    RawTable t = load_csv(f.path());
    CHECK(*t.cells[0][0] == "x,y");
    CHECK(*t.cells[0][1] == "he said \"hi\"");
}

TEST_CASE("load_csv: missing file") {
    CHECK_THROWS_AS(load_csv("/nonexistent/definitely_not_here.csv"), DataError);
}

TEST_CASE("standardize_columns: lowercase and trim") {
    RawTable t;
    t.columns.resize(3);
    t.columns[0].name = " Patient Age ";
    t.columns[1].name = "age";
    t.columns[2].name = "X";
    t = standardize_columns(std::move(t));
    CHECK(t.columns[0].name == "patient age");
    CHECK(t.columns[1].name == "age");
    CHECK(t.columns[2].name == "x");
}

TEST_CASE("standardize_columns: duplicates get _2, _3 in encounter order") {
    RawTable t;
    t.columns.resize(3);
    t.columns[0].name = "Age";
    t.columns[1].name = "age ";
    t.columns[2].name = "AGE";
    t = standardize_columns(std::move(t));
    CHECK(t.columns[0].name == "age");
    CHECK(t.columns[1].name == "age_2");
    CHECK(t.columns[2].name == "age_3");
}

TEST_CASE("standardize_columns is idempotent") {
    RawTable t;
    t.columns.resize(4);
    t.columns[0].name = " A b ";
    t.columns[1].name = "a B";
    t.columns[2].name = "c";
    t.columns[3].name = "C ";
    RawTable once = standardize_columns(t);
    RawTable twice = standardize_columns(once);
    for (std::size_t j = 0; j < once.n_cols(); ++j)
        CHECK(once.columns[j].name == twice.columns[j].name);
}

namespace {

RawTable table_from(const std::vector<std::string>& names,
                    const std::vector<std::vector<const char*>>& rows) {
    RawTable t;
    t.columns.resize(names.size());
    for (std::size_t j = 0; j < names.size(); ++j) t.columns[j].name = names[j];
    for (const auto& row : rows) {
        std::vector<std::optional<std::string>> r;
        for (const char* cell : row)
            r.push_back(cell == nullptr ? std::optional<std::string>{} : std::optional<std::string>{cell});
        t.cells.push_back(std::move(r));
    }
    return t;
}

} // namespace

TEST_CASE("drop_sparse_columns") {
    std::vector<std::vector<const char*>> rows;
    for (int i = 0; i < 1000; ++i)
        rows.push_back({i < 5 ? "1" : nullptr, "2"});
    RawTable t = table_from({"sparse", "full"}, rows);

    SUBCASE("column below the 1% threshold is dropped") {
        RawTable out = drop_sparse_columns(t, 0.01);
        CHECK(out.n_cols() == 1);
        CHECK(out.columns[0].name == "full");
    }
    SUBCASE("threshold 0 keeps everything") {
        RawTable out = drop_sparse_columns(t, 0.0);
        CHECK(out.n_cols() == 2);
    }
    SUBCASE("dropping every column is an error") {
        RawTable all_sparse = table_from({"a"}, {{nullptr}, {nullptr}});
        CHECK_THROWS_AS(drop_sparse_columns(all_sparse, 0.5), DataError);
    }
}

TEST_CASE("apply_selection_criteria") {
    RawTable t = table_from({"target", "cause", "cycles", "eset"},
                            {{"1", "x", "2", "y"},
                             {nullptr, "x", "2", "y"},   // missing target
                             {"0", nullptr, "2", "y"},   // no cause given
                             {"1", "x", "-1", "y"},      // negative cycles
                             {"0", "x", "3", nullptr},   // missing required
                             {"1", "x", nullptr, "y"}}); // missing cycles is fine
    SelectionCriteria crit;
    crit.target_column = "target";
    crit.required_any_of = {"cause"};
    crit.non_negative_columns = {"cycles"};
    crit.required_columns = {"eset"};

    auto [filtered, audit] = apply_selection_criteria(t, crit);
    CHECK(audit.rows_in == 6);
    CHECK(audit.rows_out == 2);
    CHECK(filtered.n_rows() == 2);

    SUBCASE("vacuous criteria keep the table unchanged") {
        SelectionCriteria vac;
        vac.target_column = "target";
        RawTable all_targets = table_from({"target"}, {{"1"}, {"0"}, {"1"}});
        auto [out, a] = apply_selection_criteria(all_targets, vac);
        CHECK(out.n_rows() == 3);
        CHECK(a.rows_in == a.rows_out);
    }
    SUBCASE("criteria referencing an absent column is an error") {
        SelectionCriteria bad;
        bad.target_column = "nope";
        CHECK_THROWS_AS(apply_selection_criteria(t, bad), DataError);
    }
    SUBCASE("row count never increases") { CHECK(filtered.n_rows() <= t.n_rows()); }
}

TEST_CASE("impute_missing") {
    SUBCASE("numerical missing becomes the median") {
        RawTable t = table_from({"v"}, {{"1"}, {nullptr}, {"3"}});
        RawTable out = impute_missing(t);
        CHECK(*out.cells[1][0] == "2");
    }
    SUBCASE("categorical missing becomes the mode") {
        RawTable t = table_from({"v"}, {{"a"}, {"a"}, {nullptr}});
        RawTable out = impute_missing(t);
        CHECK(*out.cells[2][0] == "a");
    }
    SUBCASE("mode ties break to the lexicographically smallest value") {
        RawTable t = table_from({"v"}, {{"b"}, {"a"}, {nullptr}});
        RawTable out = impute_missing(t);
        CHECK(*out.cells[2][0] == "a");
    }
    SUBCASE("non-missing cells are untouched") {
        RawTable t = table_from({"v", "w"}, {{"5", "x"}, {nullptr, "y"}, {"7", nullptr}});
        RawTable out = impute_missing(t);
        CHECK(*out.cells[0][0] == "5");
        CHECK(*out.cells[2][0] == "7");
        CHECK(*out.cells[0][1] == "x");
        CHECK(*out.cells[1][1] == "y");
    }
    SUBCASE("entirely missing column is an error") {
        RawTable t = table_from({"v"}, {{nullptr}, {nullptr}});
        CHECK_THROWS_AS(impute_missing(t), DataError);
    }
}

TEST_CASE("encode_and_normalize") {
    SUBCASE("numerical min-max scaling") {
        RawTable t = table_from({"v", "y"}, {{"2", "0"}, {"4", "1"}, {"6", "0"}});
        Dataset ds = encode_and_normalize(t, {"y", ""});
        CHECK(ds.x().at(0, 0) == doctest::Approx(0.0));
        CHECK(ds.x().at(1, 0) == doctest::Approx(0.5));
        CHECK(ds.x().at(2, 0) == doctest::Approx(1.0));
        CHECK(ds.meta()[0].kind == ColumnKind::numerical);
        CHECK(ds.meta()[0].min == 2.0);
        CHECK(ds.meta()[0].max == 6.0);
    }
    SUBCASE("categorical first-appearance codes") {
        RawTable t = table_from({"v", "y"}, {{"x", "0"}, {"y", "1"}, {"x", "0"}});
        Dataset ds = encode_and_normalize(t, {"y", ""});
        CHECK(ds.x().at(0, 0) == 0.0);
        CHECK(ds.x().at(1, 0) == 1.0);
        CHECK(ds.x().at(2, 0) == 0.0);
        CHECK(ds.meta()[0].cardinality == 2);
        CHECK(ds.meta()[0].categories == std::vector<std::string>{"x", "y"});
    }
    SUBCASE("constant numerical column scales to zero") {
        RawTable t = table_from({"v", "y"}, {{"5", "0"}, {"5", "1"}});
        Dataset ds = encode_and_normalize(t, {"y", ""});
        CHECK(ds.x().at(0, 0) == 0.0);
        CHECK(ds.x().at(1, 0) == 0.0);
    }
    SUBCASE("target with != 2 distinct values is an error") {
        RawTable t = table_from({"v", "y"}, {{"1", "a"}, {"2", "b"}, {"3", "c"}});
        CHECK_THROWS_AS(encode_and_normalize(t, {"y", ""}), DataError);
        RawTable one = table_from({"v", "y"}, {{"1", "a"}, {"2", "a"}});
        CHECK_THROWS_AS(encode_and_normalize(one, {"y", ""}), DataError);
    }
    SUBCASE("positive label mapping: default is the lexicographically larger") {
        RawTable t = table_from({"v", "y"}, {{"1", "no"}, {"2", "yes"}});
        Dataset ds = encode_and_normalize(t, {"y", ""});
        CHECK(ds.y()[0] == 0);
        CHECK(ds.y()[1] == 1);
        Dataset flipped = encode_and_normalize(t, {"y", "no"});
        CHECK(flipped.y()[0] == 1);
        CHECK(flipped.y()[1] == 0);
    }
    SUBCASE("every cell satisfies the dataset invariants") {
        RawTable t = table_from({"n", "c", "y"},
                                {{"1", "a", "0"}, {"9", "b", "1"}, {"4", "c", "0"}, {"2", "a", "1"}});
        Dataset ds = encode_and_normalize(t, {"y", ""});
        CHECK_NOTHROW(ds.validate());
    }
}

TEST_CASE("generate_synthetic: noiseless single informative feature is perfectly learnable") {
    SynthSpec spec;
    spec.n_rows = 200;
    spec.n_numerical = 3;
    spec.n_informative = 1;
    spec.informative_indices = {1};
    spec.noise_level = 0.0;
    spec.seed = 5;
    SynthResult r = generate_synthetic(spec);
    REQUIRE(r.informative_indices == std::vector<std::size_t>{1});

    // a single-feature threshold rule reproduces y exactly
    double best_acc = 0.0;
    for (double t = 0.0; t <= 1.0; t += 0.001) {
        std::size_t correct = 0;
        for (std::size_t i = 0; i < spec.n_rows; ++i)
            correct += (r.dataset.x().at(i, 1) > t ? 1 : 0) == r.dataset.y()[i];
        best_acc = std::max(best_acc, static_cast<double>(correct) / spec.n_rows);
    }
    CHECK(best_acc == doctest::Approx(1.0));
}

TEST_CASE("generate_synthetic: fixed seed is bit-reproducible") {
    SynthSpec spec;
    spec.n_rows = 100;
    spec.n_numerical = 5;
    spec.n_categorical = 3;
    spec.n_informative = 4;
    spec.noise_level = 0.2;
    spec.seed = 99;
    SynthResult a = generate_synthetic(spec);
    SynthResult b = generate_synthetic(spec);
    REQUIRE(a.dataset.x().a.size() == b.dataset.x().a.size());
    CHECK(std::memcmp(a.dataset.x().a.data(), b.dataset.x().a.data(),
                      a.dataset.x().a.size() * sizeof(double)) == 0);
    CHECK(a.dataset.y() == b.dataset.y());
    CHECK(a.informative_indices == b.informative_indices);
    CHECK_NOTHROW(a.dataset.validate());
}

TEST_CASE("generate_synthetic: values survive a round trip through the CSV format") {
    SynthSpec spec;
    spec.n_rows = 50;
    spec.n_numerical = 4;
    spec.n_categorical = 2;
    spec.n_informative = 2;
    spec.seed = 3;
    SynthResult r = generate_synthetic(spec);
    TempFile f("synth.csv");
    write_dataset_csv(r.dataset, f.path());
    RawTable t = load_csv(f.path());
    Dataset ds = encode_and_normalize(standardize_columns(std::move(t)), {"target", ""});
    REQUIRE(ds.n_rows() == r.dataset.n_rows());
    REQUIRE(ds.n_features() == r.dataset.n_features());
    // %.17g round-trips doubles exactly; numerical columns land on [0,1]
    // already so min-max rescale is identity up to the same bits
    for (std::size_t j = 0; j < 4; ++j) {
        double lo = 1.0, hi = 0.0;
        for (std::size_t i = 0; i < r.dataset.n_rows(); ++i) {
            lo = std::min(lo, r.dataset.x().at(i, j));
            hi = std::max(hi, r.dataset.x().at(i, j));
        }
        for (std::size_t i = 0; i < ds.n_rows(); ++i) {
            const double expected = (r.dataset.x().at(i, j) - lo) / (hi - lo);
            CHECK(ds.x().at(i, j) == doctest::Approx(expected).epsilon(1e-15));
        }
    }
    CHECK(ds.y() == r.dataset.y());
}

TEST_CASE("generate_synthetic: planted features beat noise features for logistic regression") {
    SynthSpec spec;
    spec.n_rows = 2000;
    spec.n_numerical = 50;
    spec.n_informative = 8;
    spec.informative_indices = {2, 7, 11, 19, 23, 31, 40, 47};
    spec.noise_level = 0.0;
    spec.seed = 21;
    SynthResult r = generate_synthetic(spec);

    std::vector<std::size_t> train_rows, test_rows;
    stratified_holdout(r.dataset.y(), 0.8, 17, train_rows, test_rows);
    std::vector<int> y_train, y_test;
    for (std::size_t i : train_rows) y_train.push_back(r.dataset.y()[i]);
    for (std::size_t i : test_rows) y_test.push_back(r.dataset.y()[i]);

    std::vector<std::size_t> noise_cols = {0, 1, 3, 4, 5, 6, 8, 9};
    auto f1_for = [&](const std::vector<std::size_t>& cols) {
        Matrix xt = r.dataset.x().gather_rows(train_rows).gather_cols(cols);
        Matrix xv = r.dataset.x().gather_rows(test_rows).gather_cols(cols);
        LogRegModel m = logreg_fit(xt, y_train, {});
        return f1_score(y_test, logreg_predict_proba(m, xv));
    };
    const double planted_f1 = f1_for(spec.informative_indices);
    const double noise_f1 = f1_for(noise_cols);
    CHECK(planted_f1 > noise_f1);
    CHECK(planted_f1 > 0.8);
}

TEST_CASE("hfea preset references its own columns consistently") {
    SelectionCriteria c = hfea_selection_criteria();
    CHECK(c.target_column == "live birth occurrence");
    CHECK_FALSE(c.required_any_of.empty());
    CHECK_FALSE(c.required_columns.empty());
    CHECK_FALSE(hfea_selected_feature_names().empty());
}
