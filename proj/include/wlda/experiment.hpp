#pragma once

#include "wlda/classifier.hpp"

#include <map>

namespace wlda {

/// Fixed default base seed for the harness; WLDA_SEED or --seed override it.
inline constexpr std::uint64_t default_base_seed = 42;

enum class Scenario { train_only, train_and_test };

Scenario parse_scenario(const std::string& s);
std::string to_string(Scenario s);

struct ExperimentConfig {
    std::string dataset_path;
    std::string label_column;
    std::string missing_token; // empty = default
    std::vector<double> rates = {0.15, 0.30, 0.45, 0.60, 0.75};
    Scenario scenario = Scenario::train_only;
    int repeats = 10;
    std::vector<std::string> methods = {"wlda", "mean", "knn", "soft"};
    double test_fraction = 0.2;
    WeightScope weight_scope = WeightScope::train_only;
    std::uint64_t base_seed = default_base_seed;
    int knn_k = 5;
    double soft_lambda = -1.0; // < 0 = auto

    void validate() const; // throws config_error
};

/// Accuracy aggregate of one (method, rate) cell.
struct CellResult {
    double mean = 0.0;
    double stddev = 0.0;              // sample std over successful repeats
    std::vector<double> per_repeat;   // length = successful repeats, in order
    std::vector<int> failed_repeats;  // repeat indices that threw
    std::vector<std::string> failure_messages;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<double> rates;
    std::vector<std::string> methods;
    // results[method][rate index]
    std::map<std::string, std::vector<CellResult>> results;
};

/// Runs the full protocol: per repeat r, split with seed base+r, delete
/// entries per scenario, fit every method on the same masked data, score on
/// the test split. Deterministic given the config.
ExperimentReport run_experiment(const ExperimentConfig& config);

enum class ReportFormat { markdown_table, json, csv };

ReportFormat parse_format(const std::string& s);

/// Renders the report; markdown lays methods out as columns with
/// "mean ± std" cells and bolds the best per row (ties all bolded).
std::string render_report(const ExperimentReport& report, ReportFormat format);

/// JSON round-trip used by the determinism contract and tests.
ExperimentReport report_from_json(const std::string& text);

/// Emits the explainability artifact directory for the config: per rate,
/// correlation heatmaps (truth, per-method estimate, subtraction, squared
/// error) as SVG + CSV, the WLDA normalized boundary-coefficient table, and
/// per-class mean-|Shapley| bar charts.
void explain_command(const ExperimentConfig& config, const std::string& out_dir);

} // namespace wlda
