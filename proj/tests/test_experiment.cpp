#include "wlda/experiment.hpp"
#include "wlda/imputation.hpp"

#include <doctest.h>

#include "test_util.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace wlda;

namespace {

std::string write_blob_csv(const std::string& dir, double center, int per_class,
                           bool add_constant_feature = false) {
    MaskedDataset blobs = test_util::make_blobs(per_class, 3, center, 77);
    if (add_constant_feature) {
        Matrix wide(blobs.n(), 4);
        wide.leftCols(3) = blobs.values;
        wide.col(3).setConstant(1.0);
        blobs.values = wide;
        blobs.mask = Mask::Ones(blobs.n(), 4);
        blobs.feature_names.push_back("f4");
    }
    const std::string path = dir + "/blobs.csv";
    write_csv(blobs, path);
    return path;
}

ExperimentConfig base_config(const std::string& data_path) {
    ExperimentConfig c;
    c.dataset_path = data_path;
    c.label_column = "label";
    c.rates = {0.15};
    c.repeats = 3;
    c.base_seed = 11;
    return c;
}

Matrix read_matrix_csv(const std::string& path) {
    std::istringstream in(test_util::read_file(path));
    std::string line;
    std::getline(in, line); // header
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    Matrix m(static_cast<Eigen::Index>(rows.size()),
             rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

} // namespace

TEST_CASE("experiment config validation") {
    ExperimentConfig c = base_config("x.csv");
    CHECK_NOTHROW(c.validate());
    SUBCASE("rates must lie in [0,1)") {
        c.rates = {1.0};
        CHECK_THROWS_AS(c.validate(), config_error);
        c.rates = {-0.1};
        CHECK_THROWS_AS(c.validate(), config_error);
        c.rates = {};
        CHECK_THROWS_AS(c.validate(), config_error);
    }
    SUBCASE("repeats and methods") {
        c.repeats = 0;
        CHECK_THROWS_AS(c.validate(), config_error);
        c = base_config("x.csv");
        c.methods = {};
        CHECK_THROWS_AS(c.validate(), config_error);
        c.methods = {"mice"};
        CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("external"), config_error);
    }
    SUBCASE("test fraction bounds") {
        c.test_fraction = 0.0;
        CHECK_THROWS_AS(c.validate(), config_error);
        c.test_fraction = 1.0;
        CHECK_THROWS_AS(c.validate(), config_error);
    }
    SUBCASE("defaults follow the protocol") {
        const ExperimentConfig fresh;
        CHECK(fresh.rates == std::vector<double>{0.15, 0.30, 0.45, 0.60, 0.75});
        CHECK(fresh.repeats == 10);
        CHECK(fresh.test_fraction == 0.2);
        CHECK(fresh.scenario == Scenario::train_only);
        CHECK(fresh.methods == std::vector<std::string>{"wlda", "mean", "knn", "soft"});
    }
}

TEST_CASE("run_experiment on complete data reduces WLDA to classical LDA") {
    const std::string dir = test_util::scratch_dir("exp_reduce");
    ExperimentConfig c = base_config(write_blob_csv(dir, 2.0, 25));
    c.rates = {0.0};
    c.methods = {"wlda", "mean"};
    const ExperimentReport report = run_experiment(c);
    // at rate 0 mean-imputation is a no-op, so both pipelines see identical data
    CHECK(report.results.at("wlda")[0].per_repeat == report.results.at("mean")[0].per_repeat);
    CHECK(report.results.at("wlda")[0].per_repeat.size() == 3);
}

TEST_CASE("run_experiment scores well-separated blobs perfectly") {
    const std::string dir = test_util::scratch_dir("exp_blobs");
    ExperimentConfig c = base_config(write_blob_csv(dir, 10.0, 30));
    const ExperimentReport report = run_experiment(c);
    for (const auto& method : c.methods) {
        const CellResult& cell = report.results.at(method)[0];
        CHECK(cell.mean == 1.0);
        CHECK(cell.stddev == 0.0);
        CHECK(cell.failed_repeats.empty());
    }
}

TEST_CASE("run_experiment aggregates match the stored per-repeat list") {
    const std::string dir = test_util::scratch_dir("exp_agg");
    ExperimentConfig c = base_config(write_blob_csv(dir, 1.2, 20));
    c.rates = {0.2, 0.5};
    c.repeats = 5;
    c.scenario = Scenario::train_and_test;
    const ExperimentReport report = run_experiment(c);
    for (const auto& method : c.methods)
        for (std::size_t ri = 0; ri < c.rates.size(); ++ri) {
            const CellResult& cell = report.results.at(method)[ri];
            REQUIRE(cell.per_repeat.size() == 5);
            double sum = 0.0;
            for (double a : cell.per_repeat) {
                sum += a;
                CHECK(a >= 0.0);
                CHECK(a <= 1.0);
            }
            const double mean = sum / 5.0;
            CHECK(cell.mean == mean);
            double ss = 0.0;
            for (double a : cell.per_repeat) ss += (a - mean) * (a - mean);
            CHECK(cell.stddev == std::sqrt(ss / 4.0)); // sample convention
        }
}

TEST_CASE("run_experiment records method failures instead of aborting") {
    const std::string dir = test_util::scratch_dir("exp_fail");
    // the constant fourth feature breaks variance estimation for wlda
    ExperimentConfig c = base_config(write_blob_csv(dir, 3.0, 20, true));
    c.methods = {"wlda", "mean"};
    const ExperimentReport report = run_experiment(c);
    const CellResult& broken = report.results.at("wlda")[0];
    CHECK(broken.per_repeat.empty());
    CHECK(broken.failed_repeats == std::vector<int>{0, 1, 2});
    REQUIRE_FALSE(broken.failure_messages.empty());
    CHECK(broken.failure_messages[0].find("f4") != std::string::npos);
    // the healthy method still reports
    CHECK(report.results.at("mean")[0].per_repeat.size() == 3);
}

TEST_CASE("render_report formats tables and round-trips JSON") {
    const std::string dir = test_util::scratch_dir("exp_render");
    ExperimentConfig c = base_config(write_blob_csv(dir, 2.0, 20));
    c.rates = {0.15, 0.3};
    const ExperimentReport report = run_experiment(c);

    SUBCASE("markdown lays rates out as rows and methods as columns") {
        const std::string md = render_report(report, ReportFormat::markdown_table);
        CHECK(md.find("| Missing rate | wlda | mean | knn | soft |") != std::string::npos);
        CHECK(md.find("| 15% |") != std::string::npos);
        CHECK(md.find("| 30% |") != std::string::npos);
        CHECK(md.find("**") != std::string::npos); // a best cell is bolded
        CHECK(md.find("\xc2\xb1") != std::string::npos);
    }
    SUBCASE("ties are all bolded") {
        ExperimentReport tie;
        tie.config = c;
        tie.rates = {0.15};
        tie.methods = {"wlda", "mean"};
        CellResult cell;
        cell.mean = 0.9;
        cell.stddev = 0.0;
        cell.per_repeat = {0.9};
        tie.results["wlda"] = {cell};
        tie.results["mean"] = {cell};
        const std::string md = render_report(tie, ReportFormat::markdown_table);
        CHECK(md.find("**0.900 \xc2\xb1 0.000** | **0.900 \xc2\xb1 0.000**") !=
              std::string::npos);
    }
    SUBCASE("JSON round-trips exactly") {
        const std::string json = render_report(report, ReportFormat::json);
        const ExperimentReport back = report_from_json(json);
        CHECK(render_report(back, ReportFormat::json) == json);
        CHECK_THROWS_AS(report_from_json("{oops"), data_error);
        CHECK_THROWS_AS(report_from_json("{\"results\": {}}"), data_error);
    }
    SUBCASE("CSV lists one line per method and rate") {
        const std::string csv = render_report(report, ReportFormat::csv);
        std::istringstream in(csv);
        std::string line;
        int lines = 0;
        while (std::getline(in, line))
            if (!line.empty()) ++lines;
        CHECK(lines == 1 + 4 * 2); // header + methods × rates
        CHECK(csv.rfind("method,rate,mean,stddev,successful_repeats,per_repeat", 0) == 0);
    }
}

TEST_CASE("identical configs give byte-identical reports") {
    const std::string dir = test_util::scratch_dir("exp_det");
    ExperimentConfig c = base_config(write_blob_csv(dir, 1.5, 15));
    c.scenario = Scenario::train_and_test;
    c.rates = {0.3};
    const std::string a = render_report(run_experiment(c), ReportFormat::json);
    const std::string b = render_report(run_experiment(c), ReportFormat::json);
    CHECK(a == b);
}

TEST_CASE("explain_command writes the full diagnostic artifact set") {
    const MaskedDataset iris = load_csv(test_util::iris_path(), std::string("species"));
    ExperimentConfig c;
    c.dataset_path = test_util::iris_path();
    c.label_column = "species";
    c.rates = {0.0, 0.3};
    c.base_seed = 5;
    const std::string out = test_util::scratch_dir("explain_out");
    explain_command(c, out);

    // at rate zero the estimate must agree with the ground truth
    const Matrix truth = read_matrix_csv(out + "/corr_truth.csv");
    const Matrix est0 = read_matrix_csv(out + "/corr_wlda_rate0.csv");
    CHECK((truth - est0).cwiseAbs().maxCoeff() < 1e-8);
    const Matrix sub0 = read_matrix_csv(out + "/sub_wlda_rate0.csv");
    CHECK(sub0.cwiseAbs().maxCoeff() < 1e-8);

    // boundary table: 3 class pairs × 2 rates
    std::istringstream bs(test_util::read_file(out + "/boundaries.csv"));
    std::string line;
    int rows = 0;
    bool header_ok = false;
    while (std::getline(bs, line)) {
        if (rows == 0) header_ok = line.rfind("rate,pair,", 0) == 0;
        if (!line.empty()) ++rows;
    }
    CHECK(header_ok);
    CHECK(rows == 1 + 3 * 2);

    for (const std::string& name :
         {std::string("corr_mean_rate30.svg"), std::string("sqerr_soft_rate30.csv"),
          std::string("sub_knn_rate30.svg"), std::string("shapley_rate30.csv"),
          std::string("shapley_rate0_class3.svg")})
        CHECK(std::filesystem::exists(out + "/" + name));

    SUBCASE("re-running the command reproduces the artifacts byte for byte") {
        const std::string out2 = test_util::scratch_dir("explain_out2");
        explain_command(c, out2);
        CHECK(test_util::read_file(out2 + "/boundaries.csv") ==
              test_util::read_file(out + "/boundaries.csv"));
        CHECK(test_util::read_file(out2 + "/corr_wlda_rate30.svg") ==
              test_util::read_file(out + "/corr_wlda_rate30.svg"));
        CHECK(test_util::read_file(out2 + "/shapley_rate30_class1.svg") ==
              test_util::read_file(out + "/shapley_rate30_class1.svg"));
    }
}
