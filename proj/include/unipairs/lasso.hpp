#pragma once

#include "unipairs/core.hpp"
#include "unipairs/rng.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

namespace unipairs {

/// A lasso instance: minimize (1/n)||y - t0 - F theta||^2 + lambda ||theta||_1
/// with theta_j >= 0 wherever nonneg_mask[j] is set.
struct LassoProblem {
    Matrix features;               // n x m
    Vector y;
    std::vector<char> nonneg_mask; // length m
    bool intercept = true;
};

struct SparseFit {
    double lambda = 0.0;
    double intercept = 0.0;
    Vector coefs;
    double kkt_residual = 0.0;
    int n_iter = 0;
    bool converged = true;
};

struct CvResult {
    std::vector<double> lambda_path;  // descending
    std::vector<double> cv_mean;
    std::vector<double> cv_se;
    double lambda_best = 0.0;
    std::size_t best_index = 0;
    Vector prevalidated;              // out-of-fold predictions at lambda_best
    std::vector<int> fold_assignment;
};

inline double lasso_objective(const LassoProblem& prob, double t0, const Vector& theta,
                              double lambda) {
    const double n = static_cast<double>(prob.y.size());
    Vector r = prob.y - prob.features * theta;
    if (prob.intercept) r.array() -= t0;
    return r.squaredNorm() / n + lambda * theta.cwiseAbs().sum();
}

/// Cyclic coordinate descent with an active-set inner loop. The update for
/// coordinate j is soft-thresholding at lambda/2 scaled by ||F_j||^2/n
/// (the 1/n objective), clipped at zero when the coordinate is masked.
inline SparseFit solve(const LassoProblem& prob, double lambda,
                       std::optional<Vector> warm_start = std::nullopt) {
    const Eigen::Index n = prob.y.size();
    const Eigen::Index m = prob.features.cols();
    if (static_cast<Eigen::Index>(prob.nonneg_mask.size()) != m)
        throw DimensionMismatch("solve: mask length != feature count");

    const double nd = static_cast<double>(n);
    Vector col_sq(m);
    for (Eigen::Index j = 0; j < m; ++j) col_sq[j] = prob.features.col(j).squaredNorm() / nd;

    SparseFit fit;
    fit.lambda = lambda;
    fit.coefs = warm_start && warm_start->size() == m ? *warm_start : Vector::Zero(m);
    for (Eigen::Index j = 0; j < m; ++j)
        if (prob.nonneg_mask[static_cast<std::size_t>(j)] && fit.coefs[j] < 0.0)
            fit.coefs[j] = 0.0;

    Vector r = prob.y - prob.features * fit.coefs;
    if (prob.intercept) {
        fit.intercept = r.mean();
        r.array() -= fit.intercept;
    }

    const double tol = 1e-8 * std::max(1.0, prob.y.cwiseAbs().maxCoeff());
    constexpr int max_sweeps = 10000;
    const double half_lam = 0.5 * lambda;

    auto update_coord = [&](Eigen::Index j) -> double {
        if (col_sq[j] <= 0.0) return 0.0;
        const double old = fit.coefs[j];
        const double z = prob.features.col(j).dot(r) / nd + col_sq[j] * old;
        double nv;
        if (prob.nonneg_mask[static_cast<std::size_t>(j)]) {
            nv = std::max(0.0, (z - half_lam) / col_sq[j]);
        } else {
            if (z > half_lam) nv = (z - half_lam) / col_sq[j];
            else if (z < -half_lam) nv = (z + half_lam) / col_sq[j];
            else nv = 0.0;
        }
        const double delta = nv - old;
        if (delta != 0.0) {
            fit.coefs[j] = nv;
            r -= delta * prob.features.col(j);
        }
        return std::abs(delta);
    };

    int sweeps = 0;
    bool converged = false;
    while (sweeps < max_sweeps) {
        // full pass
        double max_delta = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) max_delta = std::max(max_delta, update_coord(j));
        if (prob.intercept) {
            const double d = r.mean();
            fit.intercept += d;
            r.array() -= d;
            max_delta = std::max(max_delta, std::abs(d));
        }
        ++sweeps;
        if (max_delta < tol) {
            converged = true;
            break;
        }
        // iterate on the current active set until it settles
        while (sweeps < max_sweeps) {
            double ad = 0.0;
            for (Eigen::Index j = 0; j < m; ++j)
                if (fit.coefs[j] != 0.0) ad = std::max(ad, update_coord(j));
            if (prob.intercept) {
                const double d = r.mean();
                fit.intercept += d;
                r.array() -= d;
                ad = std::max(ad, std::abs(d));
            }
            ++sweeps;
            if (ad < tol) break;
        }
    }
    fit.n_iter = sweeps;
    fit.converged = converged || sweeps < max_sweeps;

    // KKT residual on the final iterate
    double kkt = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
        if (col_sq[j] <= 0.0) continue;
        const double g = 2.0 * prob.features.col(j).dot(r) / nd;
        const bool masked = prob.nonneg_mask[static_cast<std::size_t>(j)] != 0;
        double v;
        if (fit.coefs[j] > 0.0) v = std::abs(g - lambda);
        else if (fit.coefs[j] < 0.0) v = std::abs(g + lambda);
        else if (masked) v = std::max(0.0, g - lambda);
        else v = std::max(0.0, std::abs(g) - lambda);
        kkt = std::max(kkt, v);
    }
    if (prob.intercept) kkt = std::max(kkt, std::abs(2.0 * r.mean()));
    fit.kkt_residual = kkt;
    return fit;
}

/// Log-spaced penalty grid from the smallest all-zero-solution lambda down
/// to ratio * lambda_max. A signal-free problem collapses to one tiny entry.
inline std::vector<double> lambda_grid(const LassoProblem& prob, int n_lambda = 100,
                                       double ratio = 1e-3) {
    const double nd = static_cast<double>(prob.y.size());
    Vector r = prob.y;
    if (prob.intercept) r.array() -= r.mean();

    double lam_max = 0.0;
    for (Eigen::Index j = 0; j < prob.features.cols(); ++j) {
        const double g = 2.0 * prob.features.col(j).dot(r) / nd;
        const double cand = prob.nonneg_mask[static_cast<std::size_t>(j)] ? g : std::abs(g);
        lam_max = std::max(lam_max, cand);
    }
    if (lam_max <= 0.0) return {1e-10};

    std::vector<double> grid(static_cast<std::size_t>(n_lambda));
    const double lmax = std::log(lam_max);
    const double lmin = std::log(lam_max * ratio);
    for (int i = 0; i < n_lambda; ++i)
        grid[static_cast<std::size_t>(i)] =
            std::exp(lmax + (lmin - lmax) * static_cast<double>(i) / (n_lambda - 1));
    return grid;
}

/// Deterministic K-fold CV over the lambda path with per-fold warm starts.
/// Ties at the minimum CV error resolve to the larger (sparser) lambda.
inline CvResult cross_validate(const LassoProblem& prob, int k, std::uint64_t seed,
                               bool one_se_rule = false, int n_lambda = 100,
                               double ratio = 1e-3) {
    const Eigen::Index n = prob.y.size();
    if (k < 2) throw std::invalid_argument("cross_validate: need k >= 2");
    if (n < k) throw std::invalid_argument("cross_validate: need n >= k");

    CvResult cv;
    cv.lambda_path = lambda_grid(prob, n_lambda, ratio);
    const std::size_t L = cv.lambda_path.size();

    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    Rng rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    cv.fold_assignment.assign(static_cast<std::size_t>(n), 0);
    for (std::size_t i = 0; i < perm.size(); ++i)
        cv.fold_assignment[static_cast<std::size_t>(perm[i])] = static_cast<int>(i % k);

    // per-sample out-of-fold predictions for every lambda
    Matrix oof(n, static_cast<Eigen::Index>(L));
    for (int fold = 0; fold < k; ++fold) {
        std::vector<Eigen::Index> tr, va;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (cv.fold_assignment[static_cast<std::size_t>(i)] == fold) va.push_back(i);
            else tr.push_back(i);
        }
        LassoProblem sub;
        sub.features.resize(static_cast<Eigen::Index>(tr.size()), prob.features.cols());
        sub.y.resize(static_cast<Eigen::Index>(tr.size()));
        for (std::size_t i = 0; i < tr.size(); ++i) {
            sub.features.row(static_cast<Eigen::Index>(i)) = prob.features.row(tr[i]);
            sub.y[static_cast<Eigen::Index>(i)] = prob.y[tr[i]];
        }
        sub.nonneg_mask = prob.nonneg_mask;
        sub.intercept = prob.intercept;

        std::optional<Vector> warm;
        for (std::size_t li = 0; li < L; ++li) {
            SparseFit f = solve(sub, cv.lambda_path[li], warm);
            warm = f.coefs;
            for (auto i : va)
                oof(i, static_cast<Eigen::Index>(li)) =
                    f.intercept + prob.features.row(i).dot(f.coefs);
        }
    }

    cv.cv_mean.resize(L);
    cv.cv_se.resize(L);
    for (std::size_t li = 0; li < L; ++li) {
        // per-fold MSE then mean / SE across folds
        std::vector<double> fold_mse(static_cast<std::size_t>(k), 0.0);
        std::vector<int> fold_n(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto f = static_cast<std::size_t>(cv.fold_assignment[static_cast<std::size_t>(i)]);
            const double e = prob.y[i] - oof(i, static_cast<Eigen::Index>(li));
            fold_mse[f] += e * e;
            fold_n[f] += 1;
        }
        double mean = 0.0;
        for (int f = 0; f < k; ++f) {
            fold_mse[static_cast<std::size_t>(f)] /= std::max(1, fold_n[static_cast<std::size_t>(f)]);
            mean += fold_mse[static_cast<std::size_t>(f)];
        }
        mean /= k;
        double var = 0.0;
        for (int f = 0; f < k; ++f) {
            const double d = fold_mse[static_cast<std::size_t>(f)] - mean;
            var += d * d;
        }
        var /= (k - 1);
        cv.cv_mean[li] = mean;
        cv.cv_se[li] = std::sqrt(var / k);
    }

    std::size_t best = 0;
    for (std::size_t li = 1; li < L; ++li)
        if (cv.cv_mean[li] < cv.cv_mean[best]) best = li;  // strict: ties keep larger lambda
    if (one_se_rule) {
        const double cutoff = cv.cv_mean[best] + cv.cv_se[best];
        for (std::size_t li = 0; li <= best; ++li) {
            if (cv.cv_mean[li] <= cutoff) {
                best = li;
                break;
            }
        }
    }
    cv.best_index = best;
    cv.lambda_best = cv.lambda_path[best];
    cv.prevalidated = oof.col(static_cast<Eigen::Index>(best));
    return cv;
}

}  // namespace unipairs
