#include "wlda/explain.hpp"

#include <bit>
#include <cmath>

namespace wlda {

Matrix corr_from_cov(const Matrix& cov) {
    const Eigen::Index p = cov.rows();
    if (cov.cols() != p) throw data_error("corr_from_cov: matrix must be square");
    Vector inv_sd(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        if (!(cov(i, i) > 0.0))
            throw data_error("corr_from_cov: nonpositive diagonal entry at " + std::to_string(i));
        inv_sd(i) = 1.0 / std::sqrt(cov(i, i));
    }
    Matrix r = inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
    r.diagonal().setOnes(); // exact unit diagonal despite rounding
    return r;
}

CorrelationReport correlation_report(const Matrix& estimated, const Matrix* truth) {
    CorrelationReport report;
    report.estimated = estimated;
    if (truth != nullptr) {
        if (truth->rows() != estimated.rows() || truth->cols() != estimated.cols())
            throw data_error("correlation_report: shape mismatch between truth and estimate");
        report.has_truth = true;
        report.truth = *truth;
        report.subtraction = *truth - estimated;
        report.squared_error = report.subtraction.cwiseProduct(report.subtraction);
    }
    return report;
}

ShapleyReport shapley(const WldaModel& model, const Vector& x,
                      const Eigen::VectorXi& mask, int g) {
    const Eigen::Index p = model.p();
    if (p > 20)
        throw data_error("shapley: exact enumeration limited to p <= 20 features "
                         "(sampling approximations are out of scope)");

    // observed features are the only real players; the rest are null players
    // (masked in every coalition) and adding null players leaves Shapley
    // values of the others unchanged
    std::vector<Eigen::Index> players;
    for (Eigen::Index i = 0; i < p; ++i)
        if (mask(i) == 1) players.push_back(i);
    const int q = static_cast<int>(players.size());

    // v over all subsets of the observed set, memoized by bitmask
    std::vector<double> v(static_cast<std::size_t>(1) << q);
    Eigen::VectorXi sub(p);
    for (std::uint32_t bits = 0; bits < v.size(); ++bits) {
        sub.setZero();
        for (int t = 0; t < q; ++t)
            if (bits & (1u << t)) sub(players[static_cast<std::size_t>(t)]) = 1;
        v[bits] = score(model, x, sub, g);
    }

    // Shapley weight 1/(q * C(q-1, s)) for a coalition of size s (exact in
    // doubles for q <= 20)
    std::vector<double> weight(static_cast<std::size_t>(std::max(q, 1)));
    for (int s = 0; s < q; ++s) {
        double binom = 1.0;
        for (int t = 0; t < s; ++t) binom = binom * (q - 1 - t) / (t + 1);
        weight[static_cast<std::size_t>(s)] = 1.0 / (static_cast<double>(q) * binom);
    }

    ShapleyReport report;
    report.class_g = g;
    report.phi = Vector::Zero(p);
    report.v_empty = v.empty() ? 0.0 : v[0];
    report.v_full = v.empty() ? 0.0 : v[v.size() - 1];

    for (int t = 0; t < q; ++t) {
        const std::uint32_t bit = 1u << t;
        double phi = 0.0;
        for (std::uint32_t bits = 0; bits < v.size(); ++bits) {
            if (bits & bit) continue;
            const int s = static_cast<int>(std::popcount(bits));
            phi += weight[static_cast<std::size_t>(s)] * (v[bits | bit] - v[bits]);
        }
        report.phi(players[static_cast<std::size_t>(t)]) = phi;
    }
    return report;
}

Matrix mean_abs_shapley(const WldaModel& model, const MaskedDataset& data) {
    if (data.n() == 0) throw data_error("mean_abs_shapley: empty dataset");
    const int G = model.n_classes();
    Matrix out = Matrix::Zero(G, model.p());
    for (Eigen::Index i = 0; i < data.n(); ++i)
        for (int g = 1; g <= G; ++g) {
            ShapleyReport rep = shapley(model, data.values.row(i).transpose(),
                                        data.mask.row(i).transpose(), g);
            rep.sample_index = i;
            out.row(g - 1) += rep.phi.cwiseAbs();
        }
    return out / static_cast<double>(data.n());
}

} // namespace wlda
