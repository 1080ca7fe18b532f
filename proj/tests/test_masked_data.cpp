#include "wlda/masked_data.hpp"
#include "wlda/random.hpp"

#include <doctest.h>

#include "test_util.hpp"

#include <algorithm>
#include <set>

using namespace wlda;

TEST_CASE("load_csv reads the bundled iris fixture") {
    const MaskedDataset d = load_csv(test_util::iris_path(), std::string("species"));
    CHECK(d.n() == 150);
    CHECK(d.p() == 4);
    CHECK(d.n_classes() == 3);
    CHECK(d.feature_names == std::vector<std::string>{"sepal_length", "sepal_width",
                                                      "petal_length", "petal_width"});
    // first-appearance order of the label column
    CHECK(d.class_names == std::vector<std::string>{"setosa", "versicolor", "virginica"});
    std::vector<int> counts(3, 0);
    for (int l : d.labels) ++counts[static_cast<std::size_t>(l - 1)];
    CHECK(counts == std::vector<int>{50, 50, 50});
    CHECK(d.mask.sum() == 150 * 4); // fully observed
    CHECK(d.values(0, 0) == 5.1);
}

TEST_CASE("load_csv marks empty and token cells missing") {
    const std::string dir = test_util::scratch_dir("csv");
    const std::string path = dir + "/t.csv";
    test_util::write_file(path, "a,b,label\n1,2,x\n3,,y\nna,4,x\n");
    const MaskedDataset d = load_csv(path, std::string("label"), "NA");
    CHECK(d.n() == 3);
    CHECK(d.p() == 2);
    CHECK(d.mask(0, 0) == 1);
    CHECK(d.mask(1, 1) == 0);   // empty cell
    CHECK(d.mask(2, 0) == 0);   // token match is case-insensitive
    CHECK(d.class_names == std::vector<std::string>{"x", "y"});
    CHECK(d.labels == std::vector<int>{1, 2, 1});
}

TEST_CASE("load_csv errors carry row and column context") {
    const std::string dir = test_util::scratch_dir("csv_err");
    const std::string path = dir + "/bad.csv";
    test_util::write_file(path, "a,b\n1,2\n1,what\n");
    CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("row 3"), data_error);
    CHECK_THROWS_AS(load_csv(path, std::string("missing_col")), config_error);
    CHECK_THROWS_AS(load_csv(dir + "/absent.csv"), data_error);
}

TEST_CASE("load_csv accepts a fully missing unlabeled row") {
    const std::string dir = test_util::scratch_dir("csv_empty_row");
    const std::string path = dir + "/t.csv";
    test_util::write_file(path, "a,b\n1,2\n,\n");
    const MaskedDataset d = load_csv(path);
    CHECK(d.n() == 2);
    CHECK(d.mask.row(1).sum() == 0);
    CHECK_FALSE(d.has_labels());
}

TEST_CASE("csv write/load round-trips values, mask, and labels bit-exactly") {
    const std::string dir = test_util::scratch_dir("roundtrip");
    Matrix v(3, 2);
    v << 0.1, 1.0 / 3.0, -2.5e-17, 123456.789012345, 3.0, 0.30000000000000004;
    Mask m = Mask::Ones(3, 2);
    m(1, 0) = 0;
    const MaskedDataset d = test_util::make_dataset(v, m, {1, 2, 1}, 2);
    const std::string path = dir + "/out.csv";
    write_csv(d, path);
    MaskedDataset back = load_csv(path, std::string("label"));
    REQUIRE(back.n() == 3);
    CHECK(back.mask == d.mask);
    CHECK(back.labels == d.labels);
    for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 2; ++j)
            if (d.mask(i, j) == 1) CHECK(back.values(i, j) == d.values(i, j));
}

TEST_CASE("simulate_mcar deletes the exact count and honors protections") {
    const MaskedDataset iris = load_csv(test_util::iris_path(), std::string("species"));
    MissingSpec spec;
    spec.rate = 0.30;
    spec.seed = 99;
    const MaskedDataset out = simulate_mcar(iris, spec);
    // pool = 149 rows × 3 unprotected features; ⌊0.30 × 447⌋ = 134 deletions
    CHECK(iris.mask.sum() - out.mask.sum() == 134);
    CHECK(out.mask.row(0).sum() == 4);                // protected first row
    CHECK(out.mask.col(0).sum() == 150);              // protected first feature
    CHECK(out.values == iris.values);                 // values untouched

    SUBCASE("rate zero is the identity") {
        MissingSpec zero;
        zero.rate = 0.0;
        zero.seed = 5;
        CHECK(simulate_mcar(iris, zero).mask == iris.mask);
    }
    SUBCASE("deterministic given seed") {
        CHECK(simulate_mcar(iris, spec).mask == out.mask);
        MissingSpec other = spec;
        other.seed = 100;
        CHECK(simulate_mcar(iris, other).mask != out.mask);
    }
    SUBCASE("invalid specs rejected") {
        MissingSpec bad = spec;
        bad.rate = 1.0;
        CHECK_THROWS_AS(simulate_mcar(iris, bad), config_error);
        // single row + protect_first_row leaves an empty pool
        Matrix v(1, 2);
        v << 1.0, 2.0;
        const MaskedDataset tiny = test_util::make_complete(v, {1}, 1);
        MissingSpec s2;
        s2.rate = 0.5;
        CHECK_THROWS_AS(simulate_mcar(tiny, s2), config_error);
    }
    SUBCASE("eligible pool must be fully observed") {
        MaskedDataset holed = iris;
        holed.mask(5, 2) = 0;
        CHECK_THROWS_AS(simulate_mcar(holed, spec), data_error);
    }
}

TEST_CASE("simulate_mcar exact-count property over random shapes") {
    rng r(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(r.next_below(30));
        const Eigen::Index p = 2 + static_cast<Eigen::Index>(r.next_below(6));
        Matrix v(n, p);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < p; ++j) v(i, j) = r.next_normal();
        std::vector<int> labels(static_cast<std::size_t>(n), 1);
        const MaskedDataset d = test_util::make_complete(v, labels, 1);
        MissingSpec spec;
        spec.rate = 0.9 * r.next_double();
        spec.seed = r.next_u64();
        spec.protect_first_row = r.next_below(2) == 0;
        spec.protect_first_feature = r.next_below(2) == 0;
        const long pool = (n - (spec.protect_first_row ? 1 : 0)) *
                          (p - (spec.protect_first_feature ? 1 : 0));
        const MaskedDataset out = simulate_mcar(d, spec);
        CHECK(d.mask.sum() - out.mask.sum() ==
              static_cast<long>(spec.rate * static_cast<double>(pool)));
        if (spec.protect_first_row) CHECK(out.mask.row(0).sum() == p);
        if (spec.protect_first_feature) CHECK(out.mask.col(0).sum() == n);
    }
}

TEST_CASE("stratified_split balances classes and partitions rows") {
    const MaskedDataset iris = load_csv(test_util::iris_path(), std::string("species"));
    auto [train, test] = stratified_split(iris, 0.2, 7);
    REQUIRE(train.n() + test.n() == 150);
    std::vector<int> test_counts(3, 0);
    for (int l : test.labels) ++test_counts[static_cast<std::size_t>(l - 1)];
    CHECK(test_counts == std::vector<int>{10, 10, 10}); // 0.2 × 50 per class

    // union of parts = input: match rows as multisets of serialized content
    std::multiset<std::string> all, parts;
    const auto row_key = [](const MaskedDataset& d, Eigen::Index i) {
        std::string k = std::to_string(d.labels[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < d.p(); ++j) k += "," + format_number(d.values(i, j));
        return k;
    };
    for (Eigen::Index i = 0; i < iris.n(); ++i) all.insert(row_key(iris, i));
    for (Eigen::Index i = 0; i < train.n(); ++i) parts.insert(row_key(train, i));
    for (Eigen::Index i = 0; i < test.n(); ++i) parts.insert(row_key(test, i));
    CHECK(all == parts);

    SUBCASE("deterministic given seed") {
        auto [train2, test2] = stratified_split(iris, 0.2, 7);
        CHECK(train2.values == train.values);
        CHECK(test2.values == test.values);
        auto [train3, test3] = stratified_split(iris, 0.2, 8);
        CHECK(test3.values != test.values);
    }
}

TEST_CASE("stratified_split edge rounding and errors") {
    // a 3-sample class at a tiny fraction still sends exactly one test row
    Matrix v(13, 1);
    for (Eigen::Index i = 0; i < 13; ++i) v(i, 0) = static_cast<double>(i);
    std::vector<int> labels(13, 1);
    labels[10] = labels[11] = labels[12] = 2;
    const MaskedDataset d = test_util::make_complete(v, labels, 2);
    auto [train, test] = stratified_split(d, 0.05, 3);
    int small_class_test = 0;
    for (int l : test.labels)
        if (l == 2) ++small_class_test;
    CHECK(small_class_test == 1);

    // a singleton class cannot be split
    std::vector<int> bad = labels;
    bad[12] = 3;
    const MaskedDataset d2 = test_util::make_complete(v, bad, 3);
    CHECK_THROWS_AS(stratified_split(d2, 0.2, 1), data_error);
    CHECK_THROWS_AS(stratified_split(d, 0.0, 1), config_error);
    CHECK_THROWS_AS(stratified_split(d, 1.0, 1), config_error);
}

TEST_CASE("feature_missing_rates counts zeros per column") {
    Mask ones = Mask::Ones(4, 3);
    CHECK(feature_missing_rates({&ones}).isZero());

    Mask m = Mask::Ones(4, 3);
    m(0, 1) = m(2, 1) = 0; // two zeros in column 2
    CHECK(feature_missing_rates({&m})(1) == 0.5);

    // concatenation across train and test masks: (3 + 1) / 20
    Mask train = Mask::Ones(10, 3);
    train(0, 1) = train(3, 1) = train(7, 1) = 0;
    Mask test = Mask::Ones(10, 3);
    test(5, 1) = 0;
    const Vector r = feature_missing_rates({&train, &test});
    CHECK(r(1) == 0.2);
    CHECK(r(0) == 0.0);

    CHECK_THROWS_AS(feature_missing_rates({}), data_error);
    Mask wide = Mask::Ones(2, 4);
    CHECK_THROWS_AS(feature_missing_rates({&train, &wide}), data_error);
}

TEST_CASE("format_number round-trips doubles through text") {
    rng r(77);
    for (int i = 0; i < 200; ++i) {
        double x = (2.0 * r.next_double() - 1.0) *
                   std::pow(10.0, static_cast<double>(r.next_below(20)) - 10.0);
        if (i == 0) x = 0.0;
        const std::string s = format_number(x);
        CHECK(std::stod(s) == x);
    }
}
