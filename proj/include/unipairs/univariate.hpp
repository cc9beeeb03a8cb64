#pragma once

#include "unipairs/core.hpp"

namespace unipairs {

/// Full-sample univariate OLS fit plus all n leave-one-out coefficient
/// pairs and predictions.
struct UniFit {
    double b0 = 0.0;
    double b1 = 0.0;
    Vector loo_b0;
    Vector loo_b1;
    Vector loo_eta;  // loo_eta[i] = loo_b0[i] + loo_b1[i] * x[i]
};

/// O(n) leave-one-out univariate regression via the downdating identity
/// L_{n,i}[f] = (n * P_n[f] - f(i)) / (n - 1) applied to the five
/// sufficient statistics (n, sum x, sum x^2, sum y, sum xy).
inline UniFit uni_fit_loo(const Vector& x, const Vector& y) {
    const Eigen::Index n = x.size();
    if (n < 3) throw std::invalid_argument("uni_fit_loo: need n >= 3");
    if (y.size() != n) throw DimensionMismatch("uni_fit_loo: x/y length mismatch");

    const double sx = x.sum();
    const double sxx = x.squaredNorm();
    const double sy = y.sum();
    const double sxy = x.dot(y);
    const double nd = static_cast<double>(n);

    const double var_full = sxx / nd - (sx / nd) * (sx / nd);
    if (var_full <= 0.0) throw DegenerateFeature("uni_fit_loo: constant feature");

    UniFit fit;
    fit.b1 = (sxy / nd - (sx / nd) * (sy / nd)) / var_full;
    fit.b0 = sy / nd - fit.b1 * (sx / nd);

    fit.loo_b0.resize(n);
    fit.loo_b1.resize(n);
    fit.loo_eta.resize(n);
    const double m = nd - 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lx = (sx - x[i]) / m;
        const double lxx = (sxx - x[i] * x[i]) / m;
        const double ly = (sy - y[i]) / m;
        const double lxy = (sxy - x[i] * y[i]) / m;
        const double var_i = lxx - lx * lx;
        if (var_i <= 0.0)
            throw DegenerateFeature("uni_fit_loo: zero variance in a LOO subsample");
        const double b1 = (lxy - lx * ly) / var_i;
        const double b0 = ly - b1 * lx;
        fit.loo_b1[i] = b1;
        fit.loo_b0[i] = b0;
        fit.loo_eta[i] = b0 + b1 * x[i];
    }
    return fit;
}

}  // namespace unipairs
