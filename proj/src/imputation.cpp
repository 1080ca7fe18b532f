#include "wlda/imputation.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace wlda {

namespace {

Vector observed_feature_means(const MaskedDataset& data) {
    const Eigen::Index p = data.p();
    Vector sums = Vector::Zero(p);
    Vector counts = Vector::Zero(p);
    for (Eigen::Index i = 0; i < data.n(); ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            if (data.mask(i, j) == 1) {
                sums(j) += data.values(i, j);
                counts(j) += 1.0;
            }
    for (Eigen::Index j = 0; j < p; ++j)
        if (counts(j) == 0.0)
            throw data_error("imputation: feature '" +
                             data.feature_names[static_cast<std::size_t>(j)] +
                             "' has no observed values");
    return sums.array() / counts.array();
}

Matrix mean_filled(const MaskedDataset& data, const Vector& means) {
    Matrix Z = data.values;
    for (Eigen::Index i = 0; i < data.n(); ++i)
        for (Eigen::Index j = 0; j < data.p(); ++j)
            if (data.mask(i, j) == 0) Z(i, j) = means(j);
    return Z;
}

} // namespace

ImputedDataset mean_impute(const MaskedDataset& data) {
    ImputedDataset out;
    out.method = "mean";
    out.hyperparams = "";
    out.original_mask = data.mask;
    out.values = mean_filled(data, observed_feature_means(data));
    return out;
}

ImputedDataset knn_impute(const MaskedDataset& data, int k) {
    if (k < 1) throw config_error("knn_impute: k must be at least 1");
    const Eigen::Index n = data.n();
    const Eigen::Index p = data.p();
    const Vector col_means = observed_feature_means(data);

    ImputedDataset out;
    out.method = "knn";
    out.hyperparams = "k=" + std::to_string(k);
    out.original_mask = data.mask;
    out.values = data.values;

    for (Eigen::Index i = 0; i < n; ++i) {
        bool any_missing = false;
        for (Eigen::Index j = 0; j < p; ++j)
            if (data.mask(i, j) == 0) { any_missing = true; break; }
        if (!any_missing) continue;

        // distance from row i to every other row over shared observed coords
        std::vector<std::pair<double, Eigen::Index>> dist;
        dist.reserve(static_cast<std::size_t>(n) - 1);
        for (Eigen::Index t = 0; t < n; ++t) {
            if (t == i) continue;
            double ss = 0.0;
            int shared = 0;
            for (Eigen::Index j = 0; j < p; ++j)
                if (data.mask(i, j) == 1 && data.mask(t, j) == 1) {
                    const double d = data.values(i, j) - data.values(t, j);
                    ss += d * d;
                    ++shared;
                }
            if (shared == 0) continue; // infinitely far
            dist.emplace_back(std::sqrt(ss * static_cast<double>(p) / shared), t);
        }
        std::sort(dist.begin(), dist.end()); // ties by row index via the pair

        for (Eigen::Index j = 0; j < p; ++j) {
            if (data.mask(i, j) != 0) continue;
            double sum = 0.0;
            int taken = 0;
            for (const auto& [d, t] : dist) {
                if (data.mask(t, j) != 1) continue;
                sum += data.values(t, j);
                if (++taken == k) break;
            }
            if (taken == 0) {
                out.values(i, j) = col_means(j);
                out.warnings.push_back("knn: no candidate neighbor observes feature '" +
                                       data.feature_names[static_cast<std::size_t>(j)] +
                                       "' for row " + std::to_string(i) +
                                       "; fell back to the feature mean");
            } else {
                out.values(i, j) = sum / taken;
            }
        }
    }
    return out;
}

ImputedDataset soft_impute(const MaskedDataset& data, const SoftImputeOptions& opts) {
    const Eigen::Index n = data.n();
    const Eigen::Index p = data.p();
    const Vector col_means = observed_feature_means(data);
    Matrix Z = mean_filled(data, col_means);

    double lambda = opts.lambda;
    if (lambda < 0.0) {
        Eigen::JacobiSVD<Matrix> svd0(Z);
        lambda = svd0.singularValues()(0) / 10.0;
    }

    ImputedDataset out;
    out.method = "soft";
    out.original_mask = data.mask;

    bool converged = false;
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        // P_obs(X) + P_miss(Z)
        Matrix M = Z;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < p; ++j)
                if (data.mask(i, j) == 1) M(i, j) = data.values(i, j);

        Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
        Vector sv = svd.singularValues();
        for (Eigen::Index t = 0; t < sv.size(); ++t) sv(t) = std::max(sv(t) - lambda, 0.0);
        Matrix Znew = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();

        if (opts.objective_trace) {
            double resid = 0.0;
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < p; ++j)
                    if (data.mask(i, j) == 1) {
                        const double d = data.values(i, j) - Znew(i, j);
                        resid += d * d;
                    }
            opts.objective_trace->push_back(0.5 * resid + lambda * sv.sum());
        }

        double diff = 0.0, norm = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < p; ++j)
                if (data.mask(i, j) == 0) {
                    const double d = Znew(i, j) - Z(i, j);
                    diff += d * d;
                    norm += Znew(i, j) * Znew(i, j);
                }
        Z = std::move(Znew);
        if (std::sqrt(diff) <= opts.tol * std::max(std::sqrt(norm), 1e-12)) {
            converged = true;
            break;
        }
    }
    if (!converged)
        out.warnings.push_back("soft-impute did not converge within " +
                               std::to_string(opts.max_iters) + " iterations");

    // restore observed entries exactly
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            if (data.mask(i, j) == 1) Z(i, j) = data.values(i, j);

    char hp[64];
    std::snprintf(hp, sizeof hp, "lambda=%.6g", lambda);
    out.hyperparams = hp;
    out.values = std::move(Z);
    return out;
}

LdaModel classical_lda_fit(const Matrix& X, const std::vector<int>& labels, int n_classes) {
    if (n_classes < 2) throw data_error("classical LDA requires at least 2 classes");
    if (static_cast<Eigen::Index>(labels.size()) != X.rows())
        throw data_error("classical LDA: label count does not match rows");

    const Eigen::Index p = X.cols();
    const double n = static_cast<double>(X.rows());
    LdaModel model;
    model.params.means = Matrix::Zero(n_classes, p);
    model.params.class_counts.assign(static_cast<std::size_t>(n_classes), 0);

    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const int g = labels[static_cast<std::size_t>(i)] - 1;
        if (g < 0 || g >= n_classes) throw data_error("classical LDA: label id out of range");
        model.params.means.row(g) += X.row(i);
        model.params.class_counts[static_cast<std::size_t>(g)] += 1;
    }
    for (int g = 0; g < n_classes; ++g) {
        const int c = model.params.class_counts[static_cast<std::size_t>(g)];
        if (c == 0) throw data_error("classical LDA: empty class " + std::to_string(g + 1));
        model.params.means.row(g) /= static_cast<double>(c);
    }

    Matrix scatter = Matrix::Zero(p, p);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const int g = labels[static_cast<std::size_t>(i)] - 1;
        const Vector d = X.row(i).transpose() - model.params.means.row(g).transpose();
        scatter += d * d.transpose();
    }
    model.params.covariance = repair_pd(scatter / n);
    model.precision = model.params.covariance.inverse();

    model.params.priors.resize(n_classes);
    for (int g = 0; g < n_classes; ++g)
        model.params.priors(g) =
            std::log(static_cast<double>(model.params.class_counts[static_cast<std::size_t>(g)]) / n);
    return model;
}

int classical_lda_predict(const LdaModel& model, const Vector& x) {
    const int G = static_cast<int>(model.params.class_counts.size());
    int best_g = 1;
    double best = -std::numeric_limits<double>::infinity();
    for (int g = 1; g <= G; ++g) {
        const Vector d = x - model.params.means.row(g - 1).transpose();
        const double s = model.params.priors(g - 1) - 0.5 * d.dot(model.precision * d);
        if (s > best) { best = s; best_g = g; } // ties keep the smaller id
    }
    return best_g;
}

std::vector<int> classical_lda_predict_batch(const LdaModel& model, const Matrix& X) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        out.push_back(classical_lda_predict(model, X.row(i).transpose()));
    return out;
}

} // namespace wlda
