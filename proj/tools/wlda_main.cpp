#include "wlda/classifier.hpp"
#include "wlda/experiment.hpp"
#include "wlda/masked_data.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw wlda::data_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw wlda::data_error("cannot write file: " + path);
    out << text;
    if (!out) throw wlda::data_error("write failed: " + path);
}

void emit(const std::optional<std::string>& out_path, const std::string& text) {
    if (out_path)
        write_text(*out_path, text);
    else
        std::cout << text;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("WLDA_SEED")) {
        const std::string s(env);
        try {
            std::size_t pos = 0;
            const unsigned long long v = std::stoull(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return static_cast<std::uint64_t>(v);
        } catch (const std::exception&) {
            throw wlda::config_error("WLDA_SEED must be a non-negative integer, got '" + s + "'");
        }
    }
    return wlda::default_base_seed;
}

struct CommonFlags {
    std::string data_path;
    std::string label_column;
    std::string missing_token;
    std::vector<double> rates;
    std::string scenario = "train_only";
    int repeats = 10;
    std::vector<std::string> methods = {"wlda", "mean", "knn", "soft"};
    std::optional<std::uint64_t> seed;
    std::string weight_scope = "train_only";
    std::optional<std::string> out_path;
    std::string format = "markdown";
    int knn_k = 5;
    double soft_lambda = -1.0;
};

wlda::ExperimentConfig to_config(const CommonFlags& f) {
    wlda::ExperimentConfig c;
    c.dataset_path = f.data_path;
    c.label_column = f.label_column;
    c.missing_token = f.missing_token;
    if (!f.rates.empty()) c.rates = f.rates;
    c.scenario = wlda::parse_scenario(f.scenario);
    c.repeats = f.repeats;
    c.methods = f.methods;
    c.weight_scope = wlda::parse_weight_scope(f.weight_scope);
    c.base_seed = resolve_seed(f.seed);
    c.knn_k = f.knn_k;
    c.soft_lambda = f.soft_lambda;
    return c;
}

void run_simulate(const CommonFlags& f) {
    if (f.rates.size() != 1)
        throw wlda::config_error("simulate: exactly one --rates value required");
    if (!f.out_path) throw wlda::config_error("simulate: --out required");
    const std::optional<std::string> label =
        f.label_column.empty() ? std::nullopt : std::make_optional(f.label_column);
    const wlda::MaskedDataset data = wlda::load_csv(f.data_path, label, f.missing_token);
    wlda::MissingSpec spec;
    spec.rate = f.rates.front();
    spec.seed = resolve_seed(f.seed);
    wlda::write_csv(wlda::simulate_mcar(data, spec), *f.out_path);
}

void run_fit(const CommonFlags& f) {
    const wlda::MaskedDataset data =
        wlda::load_csv(f.data_path, f.label_column, f.missing_token);
    const wlda::WldaModel model =
        wlda::fit(data, wlda::parse_weight_scope(f.weight_scope), nullptr);
    emit(f.out_path, wlda::model_to_json(model));
}

void run_predict(const std::string& model_path, const CommonFlags& f) {
    const wlda::WldaModel model = wlda::model_from_json(read_text(model_path));
    const std::optional<std::string> label =
        f.label_column.empty() ? std::nullopt : std::make_optional(f.label_column);
    const wlda::MaskedDataset data = wlda::load_csv(f.data_path, label, f.missing_token);
    if (data.p() != model.p())
        throw wlda::data_error("predict: data has " + std::to_string(data.p()) +
                               " features but model expects " + std::to_string(model.p()));
    const std::vector<int> pred = wlda::predict_batch(model, data.values, data.mask);
    std::ostringstream out;
    out << "row,predicted\n";
    for (std::size_t i = 0; i < pred.size(); ++i)
        out << i << ',' << model.class_names[static_cast<std::size_t>(pred[i] - 1)] << '\n';
    emit(f.out_path, out.str());
    if (data.has_labels()) {
        int correct = 0;
        for (std::size_t i = 0; i < pred.size(); ++i)
            if (pred[i] == data.labels[i]) ++correct;
        std::cerr << "accuracy: "
                  << wlda::format_number(static_cast<double>(correct) /
                                         static_cast<double>(pred.size()))
                  << '\n';
    }
}

void run_experiment_cmd(const CommonFlags& f) {
    const wlda::ExperimentReport report = wlda::run_experiment(to_config(f));
    emit(f.out_path, wlda::render_report(report, wlda::parse_format(f.format)));
}

void run_explain(const CommonFlags& f) {
    if (!f.out_path) throw wlda::config_error("explain: --out directory required");
    wlda::explain_command(to_config(f), *f.out_path);
}

void add_common(CLI::App* cmd, CommonFlags& f, bool need_label) {
    cmd->add_option("--data", f.data_path, "input CSV path")->required();
    auto* label = cmd->add_option("--label", f.label_column, "name of the label column");
    if (need_label) label->required();
    cmd->add_option("--missing-token", f.missing_token,
                    "cell text treated as missing (empty cells always are)");
    cmd->add_option("--seed", f.seed, "base random seed (overrides WLDA_SEED)");
    cmd->add_option("--out", f.out_path, "output path (default: stdout)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"weighted LDA for incomplete tabular data"};
    app.require_subcommand(1);

    CommonFlags f;
    std::string model_path;

    CLI::App* simulate = app.add_subcommand("simulate", "delete entries at random from a CSV");
    add_common(simulate, f, false);
    simulate->add_option("--rates", f.rates, "single deletion rate in [0,1)")
        ->delimiter(',')
        ->required();

    CLI::App* fit = app.add_subcommand("fit", "estimate a model from incomplete data");
    add_common(fit, f, true);
    fit->add_option("--weight-scope", f.weight_scope, "train_only or train_plus_test");

    CLI::App* predict = app.add_subcommand("predict", "classify rows with a saved model");
    predict->add_option("model", model_path, "model JSON path")->required();
    add_common(predict, f, false);

    CLI::App* experiment =
        app.add_subcommand("experiment", "accuracy sweep over missing rates");
    add_common(experiment, f, true);
    experiment->add_option("--rates", f.rates, "deletion rates in [0,1)")->delimiter(',');
    experiment->add_option("--scenario", f.scenario, "train_only or train_and_test");
    experiment->add_option("--repeats", f.repeats, "Monte Carlo repeats per rate");
    experiment->add_option("--methods", f.methods, "subset of wlda,mean,knn,soft")
        ->delimiter(',');
    experiment->add_option("--weight-scope", f.weight_scope, "train_only or train_plus_test");
    experiment->add_option("--format", f.format, "markdown, json, or csv");
    experiment->add_option("--k", f.knn_k, "neighbor count for knn imputation");
    experiment->add_option("--lambda", f.soft_lambda,
                           "soft-impute shrinkage (negative = automatic)");

    CLI::App* explain =
        app.add_subcommand("explain", "diagnostic heatmaps, boundaries, Shapley values");
    add_common(explain, f, true);
    explain->add_option("--rates", f.rates, "deletion rates in [0,1)")->delimiter(',');
    explain->add_option("--scenario", f.scenario, "train_only or train_and_test");
    explain->add_option("--weight-scope", f.weight_scope, "train_only or train_plus_test");
    explain->add_option("--k", f.knn_k, "neighbor count for knn imputation");
    explain->add_option("--lambda", f.soft_lambda,
                        "soft-impute shrinkage (negative = automatic)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // usage problems share the config exit code
    }

    try {
        if (simulate->parsed()) run_simulate(f);
        else if (fit->parsed()) run_fit(f);
        else if (predict->parsed()) run_predict(model_path, f);
        else if (experiment->parsed()) run_experiment_cmd(f);
        else if (explain->parsed()) run_explain(f);
    } catch (const wlda::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
