#pragma once

#include "unipairs/lasso.hpp"
#include "unipairs/univariate.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace unipairs {

/// Sign-constrained lasso over univariate leave-one-out predictions,
/// recombined multiplicatively into standardized-scale coefficients.
struct UniLassoFit {
    double theta0 = 0.0;
    Vector theta;            // per candidate column; 0 for dropped columns
    Vector beta_s;           // theta_j * b1_j, per candidate column
    double beta0_s = 0.0;
    std::vector<Eigen::Index> active;   // candidate indices with beta_s != 0
    std::vector<Eigen::Index> dropped;  // candidates with degenerate univariate fits
    std::vector<double> uni_b0, uni_b1; // full-sample univariate coefficients
    CvResult cv;
    SparseFit refit;
};

/// Core composition step: given one univariate fit per candidate column
/// (nullopt = dropped), run the nonnegative lasso on the LOO prediction
/// matrix, CV the penalty, refit at lambda_best, and recombine.
inline UniLassoFit unilasso_compose(const std::vector<std::optional<UniFit>>& fits,
                                    const Vector& target, int k, std::uint64_t seed,
                                    bool one_se_rule = false) {
    const Eigen::Index n = target.size();
    const auto m = static_cast<Eigen::Index>(fits.size());

    UniLassoFit fit;
    fit.theta = Vector::Zero(m);
    fit.beta_s = Vector::Zero(m);
    fit.uni_b0.assign(static_cast<std::size_t>(m), 0.0);
    fit.uni_b1.assign(static_cast<std::size_t>(m), 0.0);

    std::vector<Eigen::Index> usable;
    for (Eigen::Index j = 0; j < m; ++j) {
        const auto& uf = fits[static_cast<std::size_t>(j)];
        if (!uf || std::abs(uf->b1) < 1e-12) {
            fit.dropped.push_back(j);
            continue;
        }
        fit.uni_b0[static_cast<std::size_t>(j)] = uf->b0;
        fit.uni_b1[static_cast<std::size_t>(j)] = uf->b1;
        usable.push_back(j);
    }

    if (usable.empty()) {
        fit.theta0 = target.mean();
        fit.beta0_s = fit.theta0;
        fit.cv.prevalidated = Vector::Constant(n, target.mean());
        return fit;
    }

    LassoProblem prob;
    prob.y = target;
    prob.intercept = true;
    prob.features.resize(n, static_cast<Eigen::Index>(usable.size()));
    for (std::size_t c = 0; c < usable.size(); ++c)
        prob.features.col(static_cast<Eigen::Index>(c)) =
            fits[static_cast<std::size_t>(usable[c])]->loo_eta;
    prob.nonneg_mask.assign(usable.size(), 1);

    fit.cv = cross_validate(prob, k, seed, one_se_rule);
    fit.refit = solve(prob, fit.cv.lambda_best);
    fit.theta0 = fit.refit.intercept;

    fit.beta0_s = fit.theta0;
    for (std::size_t c = 0; c < usable.size(); ++c) {
        const Eigen::Index j = usable[c];
        const double th = fit.refit.coefs[static_cast<Eigen::Index>(c)];
        fit.theta[j] = th;
        fit.beta_s[j] = th * fit.uni_b1[static_cast<std::size_t>(j)];
        fit.beta0_s += th * fit.uni_b0[static_cast<std::size_t>(j)];
        if (fit.beta_s[j] != 0.0) fit.active.push_back(j);
    }
    return fit;
}

/// Gaussian UniLasso on raw candidate columns: exact closed-form LOO fits
/// per column, then the composition above.
inline UniLassoFit unilasso_fit(const Matrix& columns, const Vector& y, int k,
                                std::uint64_t seed, bool one_se_rule = false) {
    std::vector<std::optional<UniFit>> fits(static_cast<std::size_t>(columns.cols()));
    for (Eigen::Index j = 0; j < columns.cols(); ++j) {
        try {
            fits[static_cast<std::size_t>(j)] = uni_fit_loo(columns.col(j), y);
        } catch (const DegenerateFeature&) {
            // dropped in composition
        }
    }
    return unilasso_compose(fits, y, k, seed, one_se_rule);
}

inline const Vector& prevalidated_predictions(const UniLassoFit& fit) {
    return fit.cv.prevalidated;
}

}  // namespace unipairs
