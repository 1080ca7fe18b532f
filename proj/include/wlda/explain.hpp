#pragma once

#include "wlda/classifier.hpp"

namespace wlda {

/// Estimated correlation matrix next to an optional ground truth, with the
/// subtraction and squared-error heatmap matrices.
struct CorrelationReport {
    Matrix estimated;
    bool has_truth = false;
    Matrix truth;
    Matrix subtraction;   // truth - estimated
    Matrix squared_error; // elementwise square of subtraction
};

/// Exact per-feature attributions of one sample's class-g score.
struct ShapleyReport {
    Eigen::Index sample_index = 0;
    int class_g = 0;
    Vector phi;          // length p; 0 exactly for features missing in x
    double v_full = 0.0; // score with the sample's own mask
    double v_empty = 0.0; // score with everything masked (= prior)
};

/// R = D^-1 Sigma D^-1 with D = diag(sqrt(sigma_ii)).
Matrix corr_from_cov(const Matrix& cov);

/// Builds the report; subtraction/squared_error filled when truth is given.
CorrelationReport correlation_report(const Matrix& estimated, const Matrix* truth = nullptr);

/// Exact Shapley values of score(model, x, ·, g) with coalition absence
/// expressed through WLDA's native masking: v(S) = score under mask ∧ S.
/// Enumerates all 2^p coalitions (p ≤ 20), memoizing v over bitmasks.
ShapleyReport shapley(const WldaModel& model, const Vector& x,
                      const Eigen::VectorXi& mask, int g);

/// Mean over samples of |phi_i| per class: G×p matrix.
Matrix mean_abs_shapley(const WldaModel& model, const MaskedDataset& data);

} // namespace wlda
