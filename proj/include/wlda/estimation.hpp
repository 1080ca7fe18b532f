#pragma once

#include "wlda/masked_data.hpp"

namespace wlda {

/// Estimated LDA parameters shared by the classifier and the baselines.
struct ModelParams {
    Matrix means;                    // G×p class means
    Matrix covariance;               // p×p symmetric, PD after repair
    Vector priors;                   // length G, log(n_g / n)
    std::vector<int> class_counts;   // length G
    std::vector<std::string> warnings; // estimation fallbacks, in order found
};

/// Sufficient statistics of one feature pair, pooled over classes and
/// restricted to rows where both features are observed.
struct PairStats {
    long m = 0;        // number of contributing rows
    double s_jj = 0.0; // centered sum of squares, feature j
    double s_kk = 0.0; // centered sum of squares, feature k
    double s_jk = 0.0; // centered cross-product
};

/// Per-class means of observed values. Errors if any (class, feature) cell has
/// no observations.
Matrix estimate_means(const MaskedDataset& train);

/// Pooled per-feature MLE variances: sum of squared deviations from the own
/// class mean over total observed count. Errors on constant features.
Vector estimate_diagonal(const MaskedDataset& train, const Matrix& means);

/// Pooled bivariate-normal MLE of one off-diagonal entry with the marginal
/// variances held fixed: maximizes
///   L(s) = -(m/2)·log(v_jj v_kk - s²) - [s_jj v_kk - 2 s_jk s + s_kk v_jj] / (2 (v_jj v_kk - s²))
/// over s in (-sqrt(v_jj v_kk), +sqrt(v_jj v_kk)). Stationary points are the
/// real roots of a cubic; ties go to the root of smaller magnitude.
double estimate_pair_covariance(const PairStats& stats, double vjj, double vkk);

/// Collects PairStats for features (j, k) over rows observing both, centered
/// by the row's class mean.
PairStats collect_pair_stats(const MaskedDataset& train, const Matrix& means,
                             Eigen::Index j, Eigen::Index k);

/// Full covariance assembly: diagonal from estimate_diagonal, off-diagonals
/// from estimate_pair_covariance. Pairs with fewer than 2 overlapping rows get
/// 0 plus a warning appended to `warnings`.
Matrix assemble_covariance(const MaskedDataset& train, const Matrix& means,
                           const Vector& diagonal, std::vector<std::string>& warnings);

/// Clips eigenvalues below eps = 1e-6 × trace/p up to eps and reconstructs.
/// Already-PD inputs are returned unchanged, bit for bit.
Matrix repair_pd(const Matrix& cov);

/// Eigenvalue floor at `floor_scale` × the largest eigenvalue; used to bound
/// the condition number of a covariance before inversion. No-op on matrices
/// already satisfying the bound.
Matrix condition_floor(const Matrix& cov, double floor_scale);

/// Composes means, diagonal, pairwise assembly, PD repair, and log priors.
ModelParams fit_params(const MaskedDataset& train);

} // namespace wlda
