#include "wlda/experiment.hpp"
#include "wlda/explain.hpp"
#include "wlda/imputation.hpp"
#include "wlda/random.hpp"
#include "wlda/svg_render.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace wlda {

Scenario parse_scenario(const std::string& s) {
    if (s == "train_only") return Scenario::train_only;
    if (s == "train_and_test") return Scenario::train_and_test;
    throw config_error("unknown scenario '" + s + "' (expected train_only or train_and_test)");
}

std::string to_string(Scenario s) {
    return s == Scenario::train_only ? "train_only" : "train_and_test";
}

ReportFormat parse_format(const std::string& s) {
    if (s == "markdown" || s == "md" || s == "markdown_table") return ReportFormat::markdown_table;
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    throw config_error("unknown report format '" + s + "' (expected markdown, json, or csv)");
}

void ExperimentConfig::validate() const {
    if (dataset_path.empty()) throw config_error("experiment: dataset path required");
    if (label_column.empty()) throw config_error("experiment: label column required");
    if (rates.empty()) throw config_error("experiment: at least one missing rate required");
    for (double r : rates)
        if (!(r >= 0.0 && r < 1.0)) throw config_error("experiment: rates must lie in [0,1)");
    if (repeats < 1) throw config_error("experiment: repeats must be at least 1");
    if (methods.empty()) throw config_error("experiment: at least one method required");
    static const std::set<std::string> known = {"wlda", "mean", "knn", "soft"};
    for (const auto& m : methods)
        if (!known.count(m))
            throw config_error("experiment: unknown method '" + m +
                               "' (known: wlda, mean, knn, soft; MICE and DIMV are external "
                               "comparators and not implemented)");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw config_error("experiment: test fraction must lie in (0,1)");
    if (knn_k < 1) throw config_error("experiment: k must be at least 1");
}

namespace {

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
    int correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (pred[i] == truth[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(truth.size());
}

double run_method(const std::string& method, const ExperimentConfig& config,
                  const MaskedDataset& train_m, const MaskedDataset& test_m,
                  bool test_has_missing) {
    const int G = train_m.n_classes();
    if (method == "wlda") {
        const WldaModel model = fit(train_m, config.weight_scope, &test_m.mask);
        return accuracy(predict_batch(model, test_m.values, test_m.mask), test_m.labels);
    }
    // two-step baselines: impute, then classical LDA
    ImputedDataset imp_train;
    Matrix test_values;
    if (method == "mean") {
        imp_train = mean_impute(train_m);
        test_values = test_has_missing ? mean_impute(test_m).values : test_m.values;
    } else if (method == "knn") {
        imp_train = knn_impute(train_m, config.knn_k);
        test_values = test_has_missing ? knn_impute(test_m, config.knn_k).values : test_m.values;
    } else if (method == "soft") {
        SoftImputeOptions opts;
        opts.lambda = config.soft_lambda;
        imp_train = soft_impute(train_m, opts);
        test_values = test_has_missing ? soft_impute(test_m, opts).values : test_m.values;
    } else {
        throw config_error("unknown method '" + method + "'");
    }
    const LdaModel lda = classical_lda_fit(imp_train.values, train_m.labels, G);
    return accuracy(classical_lda_predict_batch(lda, test_values), test_m.labels);
}

void aggregate(CellResult& cell) {
    const std::size_t n = cell.per_repeat.size();
    if (n == 0) { cell.mean = 0.0; cell.stddev = 0.0; return; }
    double sum = 0.0;
    for (double a : cell.per_repeat) sum += a;
    cell.mean = sum / static_cast<double>(n);
    if (n < 2) { cell.stddev = 0.0; return; }
    double ss = 0.0;
    for (double a : cell.per_repeat) ss += (a - cell.mean) * (a - cell.mean);
    cell.stddev = std::sqrt(ss / static_cast<double>(n - 1)); // sample convention
}

std::string rate_label(double rate) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g%%", rate * 100.0);
    return buf;
}

std::string rate_file_tag(double rate) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", rate * 100.0);
    std::string s(buf);
    std::replace(s.begin(), s.end(), '.', 'p');
    return s;
}

} // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    const MaskedDataset data = load_csv(config.dataset_path, config.label_column,
                                        config.missing_token);
    if (!data.has_labels()) throw data_error("experiment: dataset has no labels");

    ExperimentReport report;
    report.config = config;
    report.rates = config.rates;
    report.methods = config.methods;
    for (const auto& m : config.methods)
        report.results[m].resize(config.rates.size());

    for (std::size_t ri = 0; ri < config.rates.size(); ++ri) {
        const double rate = config.rates[ri];
        for (int r = 0; r < config.repeats; ++r) {
            auto [train_split, test_split] =
                stratified_split(data, config.test_fraction, config.base_seed +
                                 static_cast<std::uint64_t>(r));

            MissingSpec train_spec;
            train_spec.rate = rate;
            train_spec.protect_first_row = true;
            train_spec.protect_first_feature = true;
            train_spec.seed = mix_seed(config.base_seed, static_cast<std::uint64_t>(r),
                                       static_cast<std::uint64_t>(ri), 1);
            const MaskedDataset train_m = simulate_mcar(train_split, train_spec);

            MaskedDataset test_m = test_split;
            const bool test_has_missing =
                config.scenario == Scenario::train_and_test && rate > 0.0;
            if (config.scenario == Scenario::train_and_test) {
                MissingSpec test_spec;
                test_spec.rate = rate;
                test_spec.protect_first_row = false; // estimation-side protection only
                test_spec.protect_first_feature = true;
                test_spec.seed = mix_seed(config.base_seed, static_cast<std::uint64_t>(r),
                                          static_cast<std::uint64_t>(ri), 2);
                test_m = simulate_mcar(test_split, test_spec);
            }

            for (const auto& method : config.methods) {
                CellResult& cell = report.results[method][ri];
                try {
                    cell.per_repeat.push_back(
                        run_method(method, config, train_m, test_m, test_has_missing));
                } catch (const std::exception& e) {
                    cell.failed_repeats.push_back(r);
                    cell.failure_messages.push_back(e.what());
                }
            }
        }
        for (const auto& method : config.methods) aggregate(report.results[method][ri]);
    }
    return report;
}

namespace {

nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["dataset_path"] = c.dataset_path;
    j["label_column"] = c.label_column;
    j["missing_token"] = c.missing_token;
    j["rates"] = c.rates;
    j["scenario"] = to_string(c.scenario);
    j["repeats"] = c.repeats;
    j["methods"] = c.methods;
    j["test_fraction"] = c.test_fraction;
    j["weight_scope"] = to_string(c.weight_scope);
    j["base_seed"] = c.base_seed;
    j["knn_k"] = c.knn_k;
    j["soft_lambda"] = c.soft_lambda;
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.dataset_path = j.at("dataset_path").get<std::string>();
    c.label_column = j.at("label_column").get<std::string>();
    c.missing_token = j.at("missing_token").get<std::string>();
    c.rates = j.at("rates").get<std::vector<double>>();
    c.scenario = parse_scenario(j.at("scenario").get<std::string>());
    c.repeats = j.at("repeats").get<int>();
    c.methods = j.at("methods").get<std::vector<std::string>>();
    c.test_fraction = j.at("test_fraction").get<double>();
    c.weight_scope = parse_weight_scope(j.at("weight_scope").get<std::string>());
    c.base_seed = j.at("base_seed").get<std::uint64_t>();
    c.knn_k = j.at("knn_k").get<int>();
    c.soft_lambda = j.at("soft_lambda").get<double>();
    return c;
}

std::string render_markdown(const ExperimentReport& report) {
    std::ostringstream out;
    out << "| Missing rate |";
    for (const auto& m : report.methods) out << ' ' << m << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < report.methods.size(); ++i) out << "---|";
    out << '\n';
    for (std::size_t ri = 0; ri < report.rates.size(); ++ri) {
        double best = -1.0;
        for (const auto& m : report.methods)
            best = std::max(best, report.results.at(m)[ri].mean);
        out << "| " << rate_label(report.rates[ri]) << " |";
        for (const auto& m : report.methods) {
            const CellResult& cell = report.results.at(m)[ri];
            char body[64];
            std::snprintf(body, sizeof body, "%.3f \xc2\xb1 %.3f", cell.mean, cell.stddev);
            const bool bold = cell.mean == best; // ties are all bolded
            out << ' ' << (bold ? "**" : "") << body << (bold ? "**" : "") << " |";
        }
        out << '\n';
    }
    out << "\nAccuracy as mean \xc2\xb1 sample standard deviation over repeats; "
           "best per row in bold. MICE and DIMV are external comparators and omitted.\n";
    return out.str();
}

std::string render_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "method,rate,mean,stddev,successful_repeats,per_repeat\n";
    for (const auto& m : report.methods)
        for (std::size_t ri = 0; ri < report.rates.size(); ++ri) {
            const CellResult& cell = report.results.at(m)[ri];
            out << m << ',' << format_number(report.rates[ri]) << ',' << format_number(cell.mean)
                << ',' << format_number(cell.stddev) << ',' << cell.per_repeat.size() << ',';
            for (std::size_t t = 0; t < cell.per_repeat.size(); ++t) {
                if (t) out << ';';
                out << format_number(cell.per_repeat[t]);
            }
            out << '\n';
        }
    return out.str();
}

nlohmann::json report_to_json_obj(const ExperimentReport& report) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["config"] = config_to_json(report.config);
    j["std_convention"] = "sample_n_minus_1";
    j["omitted_external_methods"] = {"MICE", "DIMV"};
    j["rates"] = report.rates;
    j["methods"] = report.methods;
    nlohmann::json results = nlohmann::json::object();
    for (const auto& m : report.methods) {
        nlohmann::json cells = nlohmann::json::array();
        for (std::size_t ri = 0; ri < report.rates.size(); ++ri) {
            const CellResult& cell = report.results.at(m)[ri];
            nlohmann::json c;
            c["rate"] = report.rates[ri];
            c["mean"] = cell.mean;
            c["stddev"] = cell.stddev;
            c["per_repeat"] = cell.per_repeat;
            c["failed_repeats"] = cell.failed_repeats;
            c["failure_messages"] = cell.failure_messages;
            cells.push_back(std::move(c));
        }
        results[m] = std::move(cells);
    }
    j["results"] = std::move(results);
    return j;
}

} // namespace

std::string render_report(const ExperimentReport& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::markdown_table: return render_markdown(report);
        case ReportFormat::csv: return render_csv(report);
        case ReportFormat::json: return report_to_json_obj(report).dump(2) + "\n";
    }
    throw config_error("unhandled report format");
}

ExperimentReport report_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw data_error(std::string("report JSON parse failure: ") + e.what());
    }
    try {
        ExperimentReport report;
        report.config = config_from_json(j.at("config"));
        report.rates = j.at("rates").get<std::vector<double>>();
        report.methods = j.at("methods").get<std::vector<std::string>>();
        for (const auto& m : report.methods) {
            const auto& cells = j.at("results").at(m);
            auto& dst = report.results[m];
            dst.resize(cells.size());
            for (std::size_t ri = 0; ri < cells.size(); ++ri) {
                const auto& c = cells.at(ri);
                dst[ri].mean = c.at("mean").get<double>();
                dst[ri].stddev = c.at("stddev").get<double>();
                dst[ri].per_repeat = c.at("per_repeat").get<std::vector<double>>();
                dst[ri].failed_repeats = c.at("failed_repeats").get<std::vector<int>>();
                dst[ri].failure_messages = c.at("failure_messages").get<std::vector<std::string>>();
            }
        }
        return report;
    } catch (const nlohmann::json::exception& e) {
        throw data_error(std::string("report JSON schema mismatch: ") + e.what());
    }
}

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write file: " + path);
    out << text;
    if (!out) throw data_error("write failed: " + path);
}

std::string matrix_csv(const Matrix& m, const std::vector<std::string>& labels) {
    std::ostringstream out;
    for (std::size_t j = 0; j < labels.size(); ++j) {
        if (j) out << ',';
        out << labels[j];
    }
    out << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_number(m(i, j));
        }
        out << '\n';
    }
    return out.str();
}

} // namespace

void explain_command(const ExperimentConfig& config, const std::string& out_dir) {
    config.validate();
    std::filesystem::create_directories(out_dir);
    const auto path = [&out_dir](const std::string& name) {
        return (std::filesystem::path(out_dir) / name).string();
    };

    const MaskedDataset data = load_csv(config.dataset_path, config.label_column,
                                        config.missing_token);
    auto [train_split, test_split] =
        stratified_split(data, config.test_fraction, config.base_seed);

    // ground truth: pooled within-class MLE correlation of the pre-deletion train split
    const LdaModel truth_lda =
        classical_lda_fit(train_split.values, train_split.labels, train_split.n_classes());
    const Matrix truth_corr = corr_from_cov(truth_lda.params.covariance);
    HeatmapOptions corr_opts;
    corr_opts.range = 1.0;
    corr_opts.title = "correlation: ground truth";
    emit_heatmap(truth_corr, data.feature_names, path("corr_truth.svg"), corr_opts);
    write_text(path("corr_truth.csv"), matrix_csv(truth_corr, data.feature_names));

    std::ostringstream boundaries;
    boundaries << "rate,pair";
    for (const auto& f : data.feature_names) boundaries << ',' << f;
    boundaries << ",intercept\n";

    for (std::size_t ri = 0; ri < config.rates.size(); ++ri) {
        const double rate = config.rates[ri];
        const std::string tag = rate_file_tag(rate);

        MissingSpec train_spec;
        train_spec.rate = rate;
        train_spec.seed = mix_seed(config.base_seed, 0, static_cast<std::uint64_t>(ri), 1);
        const MaskedDataset train_m = simulate_mcar(train_split, train_spec);

        // per-method estimated correlations with diff heatmaps against truth
        std::vector<std::pair<std::string, Matrix>> estimates;
        estimates.emplace_back("wlda", corr_from_cov(fit_params(train_m).covariance));
        estimates.emplace_back("mean",
            corr_from_cov(classical_lda_fit(mean_impute(train_m).values, train_m.labels,
                                            train_m.n_classes()).params.covariance));
        estimates.emplace_back("knn",
            corr_from_cov(classical_lda_fit(knn_impute(train_m, config.knn_k).values,
                                            train_m.labels, train_m.n_classes()).params.covariance));
        SoftImputeOptions soft_opts;
        soft_opts.lambda = config.soft_lambda;
        estimates.emplace_back("soft",
            corr_from_cov(classical_lda_fit(soft_impute(train_m, soft_opts).values,
                                            train_m.labels, train_m.n_classes()).params.covariance));

        for (const auto& [name, est] : estimates) {
            const CorrelationReport rep = correlation_report(est, &truth_corr);
            HeatmapOptions est_opts;
            est_opts.range = 1.0;
            est_opts.title = "correlation: " + name + " @ " + rate_label(rate);
            emit_heatmap(rep.estimated, data.feature_names,
                         path("corr_" + name + "_rate" + tag + ".svg"), est_opts);
            write_text(path("corr_" + name + "_rate" + tag + ".csv"),
                       matrix_csv(rep.estimated, data.feature_names));
            HeatmapOptions sub_opts;
            sub_opts.title = "truth - " + name + " @ " + rate_label(rate);
            emit_heatmap(rep.subtraction, data.feature_names,
                         path("sub_" + name + "_rate" + tag + ".svg"), sub_opts);
            write_text(path("sub_" + name + "_rate" + tag + ".csv"),
                       matrix_csv(rep.subtraction, data.feature_names));
            HeatmapOptions sq_opts;
            sq_opts.title = "squared error: " + name + " @ " + rate_label(rate);
            emit_heatmap(rep.squared_error, data.feature_names,
                         path("sqerr_" + name + "_rate" + tag + ".svg"), sq_opts);
            write_text(path("sqerr_" + name + "_rate" + tag + ".csv"),
                       matrix_csv(rep.squared_error, data.feature_names));
        }

        // WLDA boundary coefficients (all-observed mask), normalized by the intercept
        const WldaModel model = fit(train_m, config.weight_scope, nullptr);
        const Eigen::VectorXi full_mask = Eigen::VectorXi::Ones(data.p());
        for (int g = 1; g <= model.n_classes(); ++g)
            for (int h = g + 1; h <= model.n_classes(); ++h) {
                const BoundarySpec b = boundary(model, g, h, full_mask);
                // 0-based pair labels match the published table layout
                boundaries << format_number(rate) << ",(" << (g - 1) << ";" << (h - 1) << ")";
                for (Eigen::Index j = 0; j < data.p(); ++j)
                    boundaries << ','
                               << (b.normalized_defined ? format_number(b.normalized_u(j)) : "");
                boundaries << ',' << format_number(b.u0) << '\n';
            }

        // mean |Shapley| per class over the test split (masked per scenario)
        MaskedDataset test_m = test_split;
        if (config.scenario == Scenario::train_and_test && rate > 0.0) {
            MissingSpec test_spec;
            test_spec.rate = rate;
            test_spec.protect_first_row = false;
            test_spec.seed = mix_seed(config.base_seed, 0, static_cast<std::uint64_t>(ri), 2);
            test_m = simulate_mcar(test_split, test_spec);
        }
        const Matrix shap = mean_abs_shapley(model, test_m);
        write_text(path("shapley_rate" + tag + ".csv"), matrix_csv(shap, data.feature_names));
        for (int g = 1; g <= model.n_classes(); ++g)
            emit_bars(shap.row(g - 1).transpose(), data.feature_names,
                      path("shapley_rate" + tag + "_class" + std::to_string(g) + ".svg"),
                      "mean |Shapley|: class " + data.class_names[static_cast<std::size_t>(g - 1)] +
                          " @ " + rate_label(rate));
    }
    write_text(path("boundaries.csv"), boundaries.str());
}

} // namespace wlda
