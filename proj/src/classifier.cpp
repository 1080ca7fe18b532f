#include "wlda/classifier.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>

namespace wlda {

WeightScope parse_weight_scope(const std::string& s) {
    if (s == "train_only") return WeightScope::train_only;
    if (s == "train_plus_test") return WeightScope::train_plus_test;
    throw config_error("unknown weight scope '" + s + "' (expected train_only or train_plus_test)");
}

std::string to_string(WeightScope scope) {
    return scope == WeightScope::train_only ? "train_only" : "train_plus_test";
}

WeightProfile build_weight_profile(const Vector& rates) {
    WeightProfile profile;
    profile.rates = rates;
    profile.weights.resize(rates.size());
    for (Eigen::Index i = 0; i < rates.size(); ++i) {
        const double r = rates(i);
        if (!(r >= 0.0 && r <= 1.0))
            throw data_error("build_weight_profile: rate outside [0,1]");
        // r = 1 means the feature is never observed; its weight is a 0 sentinel
        profile.weights(i) = r < 1.0 ? 1.0 / (1.0 - r) : 0.0;
    }
    return profile;
}

Vector weight_matrix(const Eigen::VectorXi& mask, const WeightProfile& profile) {
    if (mask.size() != profile.weights.size())
        throw data_error("weight_matrix: mask and profile lengths differ");
    Vector d(mask.size());
    for (Eigen::Index i = 0; i < mask.size(); ++i)
        d(i) = mask(i) == 1 ? profile.weights(i) : 0.0;
    return d;
}

double score(const WldaModel& model, const Vector& x, const Eigen::VectorXi& mask, int g) {
    const int G = model.n_classes();
    if (g < 1 || g > G) throw data_error("score: invalid class id " + std::to_string(g));
    const Eigen::Index p = model.p();
    const Vector d = weight_matrix(mask, model.profile);
    // centered, masked, weighted deviation; missing coordinates enter as 0
    Vector z(p);
    for (Eigen::Index i = 0; i < p; ++i)
        z(i) = mask(i) == 1 ? (x(i) - model.params.means(g - 1, i)) * d(i) : 0.0;
    return model.params.priors(g - 1) - 0.5 * z.dot(model.precision * z);
}

int predict(const WldaModel& model, const Vector& x, const Eigen::VectorXi& mask) {
    int best_g = 1;
    double best = score(model, x, mask, 1);
    for (int g = 2; g <= model.n_classes(); ++g) {
        const double s = score(model, x, mask, g);
        if (s > best) { best = s; best_g = g; } // ties keep the smaller id
    }
    return best_g;
}

std::vector<int> predict_batch(const WldaModel& model, const Matrix& X, const Mask& mask) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        out.push_back(predict(model, X.row(i).transpose(), mask.row(i).transpose()));
    return out;
}

BoundarySpec boundary(const WldaModel& model, int g, int h, const Eigen::VectorXi& mask) {
    if (g == h) throw data_error("boundary: class pair must be distinct");
    const int G = model.n_classes();
    if (g < 1 || g > G || h < 1 || h > G) throw data_error("boundary: invalid class id");

    const Vector d = weight_matrix(mask, model.profile);
    const Matrix P = d.asDiagonal() * model.precision * d.asDiagonal();
    const Vector mu_g = model.params.means.row(g - 1).transpose();
    const Vector mu_h = model.params.means.row(h - 1).transpose();

    BoundarySpec spec;
    spec.class_g = g;
    spec.class_h = h;
    spec.mask = mask;
    spec.u = P * (mu_g - mu_h);
    spec.u0 = 0.5 * (mu_h.dot(P * mu_h) - mu_g.dot(P * mu_g)) +
              (model.params.priors(g - 1) - model.params.priors(h - 1));
    if (std::abs(spec.u0) > 1e-12) {
        spec.normalized_u = spec.u / spec.u0;
        spec.normalized_defined = true;
    }
    return spec;
}

MomentReport theoretical_moments(const WeightProfile& profile, const Eigen::VectorXi& mask,
                                 int g, const Vector& log_priors) {
    if (mask.size() != profile.weights.size())
        throw data_error("theoretical_moments: mask and profile lengths differ");
    const Eigen::Index p = mask.size();
    double sum_mw2 = 0.0, sum_mw4 = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
        if (mask(i) != 1) continue;
        const double w2 = profile.weights(i) * profile.weights(i);
        sum_mw2 += w2;
        sum_mw4 += w2 * w2;
    }
    MomentReport report;
    report.class_g = g;
    report.mask = mask;
    report.expectation = log_priors(g - 1) - 0.5 * sum_mw2;
    report.variance = 0.5 * sum_mw4;
    report.bias = 0.5 * (static_cast<double>(p) - sum_mw2);
    return report;
}

std::pair<double, double> quadratic_form_moments(const Matrix& A, const Vector& mean,
                                                 const Matrix& cov) {
    if (A.rows() != A.cols() || A.rows() != mean.size() || cov.rows() != A.rows() ||
        cov.cols() != A.cols())
        throw data_error("quadratic_form_moments: shapes disagree");
    if ((A - A.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff()))
        throw data_error("quadratic_form_moments: A must be symmetric");

    const Matrix AS = A * cov;
    const double expectation = mean.dot(A * mean) + AS.trace();
    const double variance = 4.0 * mean.dot(AS * A * mean) + 2.0 * (AS * AS).trace();
    return {expectation, variance};
}

WldaModel fit(const MaskedDataset& train, WeightScope scope, const Mask* test_masks) {
    WldaModel model;
    model.params = fit_params(train);
    model.scope = scope;
    model.class_names = train.class_names;
    model.feature_names = train.feature_names;

    // pairwise assembly at high missing rates can leave the repaired matrix
    // ill-conditioned; floor the spectrum before inverting so no direction is
    // amplified past 100x (a no-op for healthy estimates)
    const Matrix conditioned = condition_floor(model.params.covariance, 1e-2);
    if (!conditioned.isApprox(model.params.covariance, 0.0))
        model.params.warnings.push_back("covariance spectrum floored before inversion");
    model.params.covariance = conditioned;
    model.precision = conditioned.inverse();

    std::vector<const Mask*> masks{&train.mask};
    if (scope == WeightScope::train_plus_test) {
        if (test_masks == nullptr)
            throw config_error("weight scope train_plus_test requires test masks");
        masks.push_back(test_masks);
    }
    model.profile = build_weight_profile(feature_missing_rates(masks));
    return model;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(i, c) = j.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(c)).get<double>();
    return m;
}

nlohmann::json vector_to_json(const Vector& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Vector vector_from_json(const nlohmann::json& j) {
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
    return v;
}

} // namespace

std::string model_to_json(const WldaModel& model) {
    nlohmann::json j;
    j["schema"] = 1;
    j["scope"] = to_string(model.scope);
    j["params"]["means"] = matrix_to_json(model.params.means);
    j["params"]["covariance"] = matrix_to_json(model.params.covariance);
    j["params"]["priors"] = vector_to_json(model.params.priors);
    j["params"]["class_counts"] = model.params.class_counts;
    j["params"]["warnings"] = model.params.warnings;
    j["class_names"] = model.class_names;
    j["feature_names"] = model.feature_names;
    j["profile"]["rates"] = vector_to_json(model.profile.rates);
    j["profile"]["weights"] = vector_to_json(model.profile.weights);
    return j.dump(2) + "\n";
}

WldaModel model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw data_error(std::string("model JSON parse failure: ") + e.what());
    }
    try {
        WldaModel model;
        model.scope = parse_weight_scope(j.at("scope").get<std::string>());
        model.params.means = matrix_from_json(j.at("params").at("means"));
        model.params.covariance = matrix_from_json(j.at("params").at("covariance"));
        model.params.priors = vector_from_json(j.at("params").at("priors"));
        model.params.class_counts = j.at("params").at("class_counts").get<std::vector<int>>();
        model.params.warnings = j.at("params").at("warnings").get<std::vector<std::string>>();
        model.class_names = j.at("class_names").get<std::vector<std::string>>();
        model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        model.profile.rates = vector_from_json(j.at("profile").at("rates"));
        model.profile.weights = vector_from_json(j.at("profile").at("weights"));
        model.precision = model.params.covariance.inverse();
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw data_error(std::string("model JSON schema mismatch: ") + e.what());
    }
}

} // namespace wlda
