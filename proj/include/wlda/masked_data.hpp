#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wlda {

/// Raised for invalid configuration (bad flags, malformed specs). CLI maps it
/// to exit code 2.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised for data/runtime failures (unparseable cells, degenerate inputs).
/// CLI maps it to exit code 1.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
/// Observation mask; 1 = observed, 0 = missing.
using Mask = Eigen::MatrixXi;

/// A numeric table with an explicit observation mask and optional class labels.
/// Entries with mask 0 are undefined and must never be read.
struct MaskedDataset {
    Matrix values;                          // n×p, undefined where mask is 0
    Mask mask;                              // n×p, {0,1}
    std::vector<int> labels;                // empty, or length n with ids 1..G
    std::vector<std::string> feature_names; // length p, unique
    std::vector<std::string> class_names;   // id g maps to class_names[g-1]
    std::string label_column;               // name used on round-trip write

    Eigen::Index n() const { return values.rows(); }
    Eigen::Index p() const { return values.cols(); }
    bool has_labels() const { return !labels.empty(); }
    int n_classes() const { return static_cast<int>(class_names.size()); }

    /// Throws data_error if shapes or label ranges are inconsistent.
    void validate() const;
};

/// Parameters of one MCAR deletion pass.
struct MissingSpec {
    double rate = 0.0;               // in [0,1)
    bool protect_first_row = true;   // keep row 1 fully observed
    bool protect_first_feature = true; // never delete from feature 1
    std::uint64_t seed = 0;
};

/// Loads a CSV with one header row. Cells equal to missing_token
/// (case-insensitive) or empty are missing. When label_column is given, that
/// column is extracted and mapped to dense ids 1..G in first-appearance order.
MaskedDataset load_csv(const std::string& path,
                       const std::optional<std::string>& label_column = std::nullopt,
                       const std::string& missing_token = "");

/// Writes a dataset back to CSV; missing entries become empty fields. Values
/// are formatted so that load_csv(write_csv(d)) round-trips bit-exactly.
void write_csv(const MaskedDataset& data, const std::string& path);

/// Deletes exactly floor(rate × pool) entries uniformly without replacement
/// from the eligible pool (protected row/feature excluded). Input must be
/// fully observed on the eligible pool.
MaskedDataset simulate_mcar(const MaskedDataset& data, const MissingSpec& spec);

/// Stratified train/test split preserving per-class proportions to within
/// ±1 sample; every class contributes at least one test row and keeps at
/// least one train row. Row order within each part follows the input.
std::pair<MaskedDataset, MaskedDataset>
stratified_split(const MaskedDataset& data, double test_fraction, std::uint64_t seed);

/// Per-feature missing rates pooled over one or more mask matrices:
/// r_i = zeros in column i across masks / total rows.
Vector feature_missing_rates(const std::vector<const Mask*>& masks);

/// Shortest decimal string that parses back to exactly the same double; used
/// by every CSV/text emitter so numeric output is byte-stable.
std::string format_number(double v);

} // namespace wlda
