#pragma once

#include "wlda/estimation.hpp"

namespace wlda {

/// A completed matrix plus provenance, produced by one of the imputers.
struct ImputedDataset {
    Matrix values;              // n×p, fully defined
    std::string method;         // "mean", "knn", "soft"
    std::string hyperparams;    // rendered hyperparameters, e.g. "k=5"
    Mask original_mask;         // pre-imputation mask
    std::vector<std::string> warnings;
};

/// Missing entries replaced by the feature's observed mean (label-blind).
ImputedDataset mean_impute(const MaskedDataset& data);

/// Each missing (i,j) filled with the mean of feature j over the k nearest
/// rows observing j. Distance = Euclidean over coordinates observed in both
/// rows, scaled by sqrt(p / shared); no shared coordinates = infinitely far;
/// distance ties break by row index. Entries with no candidate fall back to
/// the feature mean with a warning.
ImputedDataset knn_impute(const MaskedDataset& data, int k = 5);

struct SoftImputeOptions {
    double lambda = -1.0;  // < 0 = auto: (top singular value of mean-imputed X) / 10
    int max_iters = 200;
    double tol = 1e-5;
    // when set, receives ½‖P_obs(X − Z)‖² + λ‖Z‖_* after each iteration
    std::vector<double>* objective_trace = nullptr;
};

/// SOFT-IMPUTE: iterate Z <- SVT_lambda(P_obs(X) + P_miss(Z)) from the
/// mean-imputed start until the relative change on missing entries drops
/// below tol. Observed entries are restored exactly in the output.
ImputedDataset soft_impute(const MaskedDataset& data, const SoftImputeOptions& opts = {});

/// Classical LDA on complete data: class means, pooled within-class MLE
/// covariance (PD-repaired), log priors; predicts by argmax of the standard
/// discriminant, ties to the smallest class id.
struct LdaModel {
    ModelParams params;
    Matrix precision;
};

LdaModel classical_lda_fit(const Matrix& X, const std::vector<int>& labels, int n_classes);
int classical_lda_predict(const LdaModel& model, const Vector& x);
std::vector<int> classical_lda_predict_batch(const LdaModel& model, const Matrix& X);

} // namespace wlda
