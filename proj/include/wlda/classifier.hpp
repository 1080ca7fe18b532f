#pragma once

#include "wlda/estimation.hpp"

namespace wlda {

/// Which masks contribute to the per-feature missing rates behind the weights.
enum class WeightScope { train_only, train_plus_test };

WeightScope parse_weight_scope(const std::string& s);
std::string to_string(WeightScope scope);

/// Per-feature missing rates r and penalty weights w_i = 1/(1-r_i)
/// (0 sentinel when r_i = 1: the feature is never observed, so it can never
/// contribute to a score).
struct WeightProfile {
    Vector rates;   // length p, in [0,1]
    Vector weights; // length p
};

/// The fitted classifier: estimated parameters, weight profile, and the
/// repaired precision matrix.
struct WldaModel {
    ModelParams params;
    WeightProfile profile;
    Matrix precision; // inverse of the conditioned covariance
    WeightScope scope = WeightScope::train_only;
    std::vector<std::string> class_names;   // id g maps to class_names[g-1]
    std::vector<std::string> feature_names;

    Eigen::Index p() const { return params.means.cols(); }
    int n_classes() const { return static_cast<int>(params.class_counts.size()); }
};

/// One pairwise linear decision boundary u'x + u0 = 0 under a fixed mask.
struct BoundarySpec {
    int class_g = 0;
    int class_h = 0;
    Eigen::VectorXi mask;    // pattern the boundary applies to
    Vector u;                // length p
    double u0 = 0.0;
    Vector normalized_u;     // u / u0; empty when undefined
    bool normalized_defined = false;
};

/// Closed-form score moments under a fixed mask (expectation, variance, bias).
struct MomentReport {
    double expectation = 0.0;
    double variance = 0.0;
    double bias = 0.0;
    int class_g = 0;
    Eigen::VectorXi mask;
};

WeightProfile build_weight_profile(const Vector& rates);

/// Diagonal of W_x as a vector: d_i = m_i · w_i.
Vector weight_matrix(const Eigen::VectorXi& mask, const WeightProfile& profile);

/// Discriminant score of class g at x under its mask:
///   pi_g - 1/2 (x-mu_g)' (W_x P W_x) (x-mu_g)
/// with P the model precision; missing coordinates of the centered vector are
/// zeroed (they are annihilated by W_x either way, but must not be read).
double score(const WldaModel& model, const Vector& x, const Eigen::VectorXi& mask, int g);

/// Argmax of score over classes; ties go to the smallest class id.
int predict(const WldaModel& model, const Vector& x, const Eigen::VectorXi& mask);

std::vector<int> predict_batch(const WldaModel& model, const Matrix& X, const Mask& mask);

/// Pairwise boundary u = P(mu_g - mu_h), u0 = 1/2 (mu_h' P mu_h - mu_g' P mu_g)
/// + log(n_g/n_h), with P = W_x Sigma^-1 W_x for the given mask.
BoundarySpec boundary(const WldaModel& model, int g, int h, const Eigen::VectorXi& mask);

/// Closed forms: E = pi_g - 1/2 sum m_i^2 w_i^2, Var = 1/2 sum m_i^4 w_i^4,
/// Bias = 1/2 (p - sum m_i^2 w_i^2).
MomentReport theoretical_moments(const WeightProfile& profile, const Eigen::VectorXi& mask,
                                 int g, const Vector& log_priors);

/// Moments of the Gaussian quadratic form x'Ax with x ~ N(mean, cov):
/// E = mu'A mu + tr(A Sigma), Var = 4 mu'A Sigma A mu + 2 tr(A Sigma A Sigma).
std::pair<double, double> quadratic_form_moments(const Matrix& A, const Vector& mean,
                                                 const Matrix& cov);

/// Fits the full model: parameter estimation, PD repair, a condition-number
/// floor on the covariance before inversion, and the weight profile over the
/// missing rates of the chosen mask scope.
WldaModel fit(const MaskedDataset& train, WeightScope scope = WeightScope::train_only,
              const Mask* test_masks = nullptr);

/// JSON round-trip for fitted models.
std::string model_to_json(const WldaModel& model);
WldaModel model_from_json(const std::string& text);

} // namespace wlda
