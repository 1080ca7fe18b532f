#include "wlda/estimation.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace wlda {

Matrix estimate_means(const MaskedDataset& train) {
    if (!train.has_labels()) throw data_error("estimate_means: labels required");
    const int G = train.n_classes();
    const Eigen::Index p = train.p();
    Matrix sums = Matrix::Zero(G, p);
    Matrix counts = Matrix::Zero(G, p);
    for (Eigen::Index i = 0; i < train.n(); ++i) {
        const int g = train.labels[static_cast<std::size_t>(i)] - 1;
        for (Eigen::Index j = 0; j < p; ++j)
            if (train.mask(i, j) == 1) {
                sums(g, j) += train.values(i, j);
                counts(g, j) += 1.0;
            }
    }
    for (int g = 0; g < G; ++g)
        for (Eigen::Index j = 0; j < p; ++j)
            if (counts(g, j) == 0.0)
                throw data_error("estimate_means: no observations for class '" +
                                 train.class_names[static_cast<std::size_t>(g)] +
                                 "', feature '" + train.feature_names[static_cast<std::size_t>(j)] + "'");
    return sums.array() / counts.array();
}

Vector estimate_diagonal(const MaskedDataset& train, const Matrix& means) {
    const Eigen::Index p = train.p();
    Vector ss = Vector::Zero(p);
    Vector counts = Vector::Zero(p);
    Vector abs_scale = Vector::Zero(p);
    for (Eigen::Index i = 0; i < train.n(); ++i) {
        const int g = train.labels[static_cast<std::size_t>(i)] - 1;
        for (Eigen::Index j = 0; j < p; ++j)
            if (train.mask(i, j) == 1) {
                const double d = train.values(i, j) - means(g, j);
                ss(j) += d * d;
                counts(j) += 1.0;
                abs_scale(j) = std::max(abs_scale(j), std::abs(train.values(i, j)));
            }
    }
    Vector out(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        if (counts(j) < 2.0)
            throw data_error("estimate_diagonal: feature '" +
                             train.feature_names[static_cast<std::size_t>(j)] +
                             "' has fewer than 2 observed values");
        const double v = ss(j) / counts(j);
        // constant features yield variance at rounding-noise level
        const double tiny = 1e-24 * std::max(1.0, abs_scale(j) * abs_scale(j));
        if (v <= tiny)
            throw data_error("estimate_diagonal: feature '" +
                             train.feature_names[static_cast<std::size_t>(j)] +
                             "' is constant (degenerate variance; jitter or remove it)");
        out(j) = v;
    }
    return out;
}

PairStats collect_pair_stats(const MaskedDataset& train, const Matrix& means,
                             Eigen::Index j, Eigen::Index k) {
    PairStats st;
    for (Eigen::Index i = 0; i < train.n(); ++i) {
        if (train.mask(i, j) != 1 || train.mask(i, k) != 1) continue;
        const int g = train.labels[static_cast<std::size_t>(i)] - 1;
        const double dj = train.values(i, j) - means(g, j);
        const double dk = train.values(i, k) - means(g, k);
        st.m += 1;
        st.s_jj += dj * dj;
        st.s_kk += dk * dk;
        st.s_jk += dj * dk;
    }
    return st;
}

namespace {

// L(s) from the pooled bivariate-normal likelihood with marginals held fixed.
double pair_loglik(double s, const PairStats& st, double vjj, double vkk) {
    const double det = vjj * vkk - s * s;
    const double num = st.s_jj * vkk - 2.0 * st.s_jk * s + st.s_kk * vjj;
    return -0.5 * static_cast<double>(st.m) * std::log(det) - num / (2.0 * det);
}

// Real roots of c3 x^3 + c2 x^2 + c1 x + c0 via the companion matrix.
std::vector<double> real_cubic_roots(double c3, double c2, double c1, double c0) {
    std::vector<double> roots;
    if (c3 == 0.0) {
        // degenerate: quadratic (or lower)
        if (c2 != 0.0) {
            const double disc = c1 * c1 - 4.0 * c2 * c0;
            if (disc >= 0.0) {
                const double sq = std::sqrt(disc);
                roots.push_back((-c1 + sq) / (2.0 * c2));
                roots.push_back((-c1 - sq) / (2.0 * c2));
            }
        } else if (c1 != 0.0) {
            roots.push_back(-c0 / c1);
        }
        return roots;
    }
    Eigen::Matrix3d comp = Eigen::Matrix3d::Zero();
    comp(0, 2) = -c0 / c3;
    comp(1, 2) = -c1 / c3;
    comp(2, 2) = -c2 / c3;
    comp(1, 0) = 1.0;
    comp(2, 1) = 1.0;
    Eigen::EigenSolver<Eigen::Matrix3d> es(comp, false);
    const auto vals = es.eigenvalues();
    double scale = std::max({std::abs(c0 / c3), std::abs(c1 / c3), std::abs(c2 / c3), 1.0});
    for (int i = 0; i < 3; ++i)
        if (std::abs(vals(i).imag()) < 1e-9 * scale) roots.push_back(vals(i).real());
    return roots;
}

// Bounded scalar maximization fallback: coarse grid then golden-section.
double maximize_on_interval(const PairStats& st, double vjj, double vkk, double bound) {
    const int grid = 2000;
    double best_s = 0.0, best_l = -std::numeric_limits<double>::infinity();
    for (int t = 1; t < grid; ++t) {
        const double s = -bound + 2.0 * bound * static_cast<double>(t) / grid;
        const double l = pair_loglik(s, st, vjj, vkk);
        if (l > best_l) { best_l = l; best_s = s; }
    }
    double lo = std::max(-bound * (1.0 - 1e-12), best_s - 2.0 * bound / grid);
    double hi = std::min(bound * (1.0 - 1e-12), best_s + 2.0 * bound / grid);
    const double gr = 0.6180339887498949;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * bound; ++it) {
        const double a = hi - gr * (hi - lo);
        const double b = lo + gr * (hi - lo);
        if (pair_loglik(a, st, vjj, vkk) < pair_loglik(b, st, vjj, vkk)) lo = a;
        else hi = b;
    }
    return 0.5 * (lo + hi);
}

} // namespace

double estimate_pair_covariance(const PairStats& stats, double vjj, double vkk) {
    if (stats.m < 2)
        throw data_error("estimate_pair_covariance: fewer than 2 overlapping observations");
    if (!(vjj > 0.0) || !(vkk > 0.0))
        throw data_error("estimate_pair_covariance: marginal variances must be positive");

    const double m = static_cast<double>(stats.m);
    const double bound = std::sqrt(vjj * vkk);
    // stationary points of L: m s^3 - s_jk s^2 + (s_jj v_kk + s_kk v_jj - m v_jj v_kk) s
    //                         - s_jk v_jj v_kk = 0
    const std::vector<double> roots =
        real_cubic_roots(m, -stats.s_jk, stats.s_jj * vkk + stats.s_kk * vjj - m * vjj * vkk,
                         -stats.s_jk * vjj * vkk);

    double best_s = 0.0, best_l = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (double s : roots) {
        if (!(std::abs(s) < bound * (1.0 - 1e-12))) continue;
        const double l = pair_loglik(s, stats, vjj, vkk);
        // ties go to the root of smaller magnitude
        if (!found || l > best_l + 1e-12 * std::abs(best_l) ||
            (std::abs(l - best_l) <= 1e-12 * std::max(1.0, std::abs(best_l)) &&
             std::abs(s) < std::abs(best_s))) {
            best_s = s;
            best_l = l;
            found = true;
        }
    }
    if (!found) return maximize_on_interval(stats, vjj, vkk, bound);
    return best_s;
}

Matrix assemble_covariance(const MaskedDataset& train, const Matrix& means,
                           const Vector& diagonal, std::vector<std::string>& warnings) {
    const Eigen::Index p = train.p();
    Matrix cov = Matrix::Zero(p, p);
    cov.diagonal() = diagonal;
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index k = j + 1; k < p; ++k) {
            const PairStats st = collect_pair_stats(train, means, j, k);
            double s = 0.0;
            if (st.m < 2) {
                warnings.push_back("pair (" + train.feature_names[static_cast<std::size_t>(j)] +
                                   ", " + train.feature_names[static_cast<std::size_t>(k)] +
                                   "): fewer than 2 overlapping observations; covariance set to 0");
            } else {
                try {
                    s = estimate_pair_covariance(st, diagonal(j), diagonal(k));
                } catch (const data_error& e) {
                    throw data_error("pair (" + train.feature_names[static_cast<std::size_t>(j)] +
                                     ", " + train.feature_names[static_cast<std::size_t>(k)] +
                                     "): " + e.what());
                }
            }
            cov(j, k) = s;
            cov(k, j) = s;
        }
    return cov;
}

Matrix repair_pd(const Matrix& cov) {
    const Eigen::Index p = cov.rows();
    if (cov.cols() != p) throw data_error("repair_pd: matrix must be square");
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * std::max(1.0, cov.cwiseAbs().maxCoeff()))
        throw data_error("repair_pd: matrix must be symmetric");

    const double tr = cov.trace();
    const double eps = 1e-6 * (tr > 0.0 ? tr / static_cast<double>(p) : 1.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    if (es.info() != Eigen::Success) throw data_error("repair_pd: eigendecomposition failed");
    if (es.eigenvalues().minCoeff() >= eps) return cov; // already PD: bit-for-bit no-op
    Vector vals = es.eigenvalues().cwiseMax(eps);
    return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().transpose();
}

Matrix condition_floor(const Matrix& cov, double floor_scale) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    if (es.info() != Eigen::Success) throw data_error("condition_floor: eigendecomposition failed");
    const double floor = floor_scale * es.eigenvalues().maxCoeff();
    if (es.eigenvalues().minCoeff() >= floor) return cov;
    Vector vals = es.eigenvalues().cwiseMax(floor);
    return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().transpose();
}

ModelParams fit_params(const MaskedDataset& train) {
    ModelParams params;
    params.means = estimate_means(train);
    const Vector diagonal = estimate_diagonal(train, params.means);
    params.covariance =
        repair_pd(assemble_covariance(train, params.means, diagonal, params.warnings));

    const int G = train.n_classes();
    params.class_counts.assign(static_cast<std::size_t>(G), 0);
    for (int l : train.labels) params.class_counts[static_cast<std::size_t>(l) - 1] += 1;
    params.priors.resize(G);
    const double n = static_cast<double>(train.n());
    for (int g = 0; g < G; ++g) {
        if (params.class_counts[static_cast<std::size_t>(g)] == 0)
            throw data_error("fit_params: class '" + train.class_names[static_cast<std::size_t>(g)] +
                             "' has no training samples");
        params.priors(g) = std::log(static_cast<double>(params.class_counts[static_cast<std::size_t>(g)]) / n);
    }
    return params;
}

} // namespace wlda
