#pragma once

#include "unipairs/core.hpp"
#include "unipairs/parallel.hpp"
#include "unipairs/tripletscan.hpp"
#include "unipairs/univariate.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace unipairs {

enum class FamilyTag { gaussian, binomial, cox };

inline const char* to_string(FamilyTag t) {
    switch (t) {
        case FamilyTag::binomial: return "binomial";
        case FamilyTag::cox: return "cox";
        default: return "gaussian";
    }
}

/// Response family. For cox, `time` and `status` accompany the fit and the
/// Dataset's y column is ignored in the likelihood.
struct Family {
    FamilyTag tag = FamilyTag::gaussian;
    Vector time;    // cox only
    Vector status;  // cox only, entries in {0,1}
};

struct Separation : std::runtime_error {
    Separation() : std::runtime_error("perfect separation: univariate logistic slope diverges") {}
};

struct NoEvents : std::runtime_error {
    NoEvents() : std::runtime_error("cox fit requires at least one event") {}
};

/// Per-observation likelihood pieces in the linear predictor.
struct GlmDiagnostics {
    Vector eta_hat;
    Vector g_hat;     // d loglik / d eta
    Vector h_hat;     // negative second derivative magnitudes (diagonal)
    Vector leverage;
};

// ---------------------------------------------------------------------------
// Cox partial likelihood (Breslow ties), computed in one sorted pass.
// ---------------------------------------------------------------------------

struct CoxLoglik {
    double loglik = 0.0;
    Vector gradient;
    Vector diag_hessian;  // positive magnitudes
};

inline CoxLoglik cox_partial_loglik(const Vector& eta, const Vector& times,
                                    const Vector& status) {
    const Eigen::Index n = eta.size();
    if (times.size() != n || status.size() != n)
        throw DimensionMismatch("cox_partial_loglik: length mismatch");
    if (status.sum() <= 0.0) throw NoEvents();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return times[a] < times[b]; });

    const double shift = eta.maxCoeff();
    Vector w(n);
    for (Eigen::Index i = 0; i < n; ++i) w[i] = std::exp(eta[i] - shift);

    // risk-set sums S(t_i) = sum_{t_l >= t_i} w_l, walking from the latest time
    Vector risk(n);  // aligned with sorted order
    double acc = 0.0;
    for (Eigen::Index s = n - 1; s >= 0; --s) {
        acc += w[order[static_cast<std::size_t>(s)]];
        risk[s] = acc;
    }
    // tied times are handled per block below; risk at a block's first
    // position is the Breslow risk-set sum shared by all tied events
    CoxLoglik out;
    out.gradient = Vector::Zero(n);
    out.diag_hessian = Vector::Zero(n);

    // prefix sums over event positions of d/S and d/S^2
    double a = 0.0, b = 0.0;  // cumulative 1/S and 1/S^2 per event
    Eigen::Index s = 0;
    while (s < n) {
        // process one tied-time block
        Eigen::Index e = s;
        double d_events = 0.0;
        double block_ll = 0.0;
        while (e < n && times[order[static_cast<std::size_t>(e)]] ==
                            times[order[static_cast<std::size_t>(s)]]) {
            const Eigen::Index i = order[static_cast<std::size_t>(e)];
            if (status[i] > 0.0) {
                d_events += 1.0;
                block_ll += (eta[i] - shift);
            }
            ++e;
        }
        if (d_events > 0.0) {
            out.loglik += block_ll - d_events * std::log(risk[s]);
            a += d_events / risk[s];
            b += d_events / (risk[s] * risk[s]);
        }
        // everyone in this block and later is at risk for events up to here
        for (Eigen::Index t = s; t < e; ++t) {
            const Eigen::Index i = order[static_cast<std::size_t>(t)];
            out.gradient[i] = status[i] - w[i] * a;
            out.diag_hessian[i] = w[i] * a - w[i] * w[i] * b;
        }
        s = e;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Family-generic likelihood in eta.
// ---------------------------------------------------------------------------

namespace detail {

struct EtaLik {
    double loglik = 0.0;
    Vector g;
    Vector h;  // positive curvature magnitudes
};

inline EtaLik eta_loglik(const Vector& eta, const Vector& y, const Family& fam) {
    EtaLik out;
    const Eigen::Index n = eta.size();
    if (fam.tag == FamilyTag::binomial) {
        out.g.resize(n);
        out.h.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double e = eta[i];
            // log(1 + exp(e)) computed stably
            const double lse = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
            out.loglik += y[i] * e - lse;
            const double mu = 1.0 / (1.0 + std::exp(-e));
            out.g[i] = y[i] - mu;
            out.h[i] = std::max(mu * (1.0 - mu), 1e-10);
        }
    } else if (fam.tag == FamilyTag::cox) {
        CoxLoglik cl = cox_partial_loglik(eta, fam.time, fam.status);
        out.loglik = cl.loglik;
        out.g = std::move(cl.gradient);
        out.h = cl.diag_hessian.cwiseMax(1e-10);
    } else {
        // gaussian profile likelihood; used only for the LRT consistency route
        const double rss = (y - eta).squaredNorm();
        const double n_d = static_cast<double>(n);
        out.loglik = -0.5 * n_d * std::log(rss / n_d);
        out.g = 2.0 * (y - eta) * (0.5 * n_d / rss);
        out.h = Vector::Constant(n, n_d / rss);
    }
    return out;
}

/// Newton fit of y ~ A * beta through the family likelihood, with a diagonal
/// curvature approximation for cox and step-halving throughout.
struct NewtonFit {
    Vector beta;
    double loglik = 0.0;
    bool converged = false;
    EtaLik lik;
};

inline NewtonFit newton_glm(const Matrix& A, const Vector& y, const Family& fam,
                            double tol = 1e-10, int max_iter = 100) {
    const Eigen::Index k = A.cols();
    NewtonFit fit;
    fit.beta = Vector::Zero(k);
    Vector eta = Vector::Zero(A.rows());
    fit.lik = eta_loglik(eta, y, fam);
    double score_norm = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        Vector score = A.transpose() * fit.lik.g;
        score_norm = score.cwiseAbs().maxCoeff();
        if (score_norm < tol) {
            fit.converged = true;
            break;
        }
        Matrix info = A.transpose() * fit.lik.h.asDiagonal() * A;
        Matrix inv = info;
        if (!invert_small_sym(inv)) return fit;  // not converged
        Vector step = inv * score;
        double t = 1.0;
        bool improved = false;
        for (int half = 0; half < 40; ++half) {
            Vector cand = fit.beta + t * step;
            Vector ceta = A * cand;
            EtaLik cl = eta_loglik(ceta, y, fam);
            if (std::isfinite(cl.loglik) && cl.loglik >= fit.lik.loglik - 1e-12) {
                fit.beta = std::move(cand);
                fit.lik = std::move(cl);
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if (!improved) break;
    }
    // a stalled line search at a tiny score is numerical convergence, not failure
    if (!fit.converged && score_norm < 1e-6) fit.converged = true;
    fit.loglik = fit.lik.loglik;
    return fit;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Approximate LOO for univariate GLM fits.
// ---------------------------------------------------------------------------

/// Unpenalized univariate GLM by Newton iterations, then approximate LOO
/// linear predictors eta^(-i) ~= eta_i - g_i / (H_i (1 - h_i)) with
/// leverages h_i = H_i x_i^2 / sum_k H_k x_k^2.
inline UniFit glm_uni_fit_approx_loo(const Vector& x, const Vector& y, const Family& fam) {
    const Eigen::Index n = x.size();
    const bool has_intercept = fam.tag != FamilyTag::cox;
    Matrix A(n, has_intercept ? 2 : 1);
    if (has_intercept) {
        A.col(0).setOnes();
        A.col(1) = x;
    } else {
        A.col(0) = x;
    }
    if (fam.tag == FamilyTag::binomial) {
        const double s = y.sum();
        if (s <= 0.0 || s >= static_cast<double>(n))
            throw DegenerateFeature("binomial fit needs both classes present");
    }

    detail::NewtonFit nf = detail::newton_glm(A, y, fam);
    const double slope = has_intercept ? nf.beta[1] : nf.beta[0];
    if (std::abs(slope) > 30.0) throw Separation();

    UniFit fit;
    fit.b0 = has_intercept ? nf.beta[0] : 0.0;
    fit.b1 = slope;
    Vector eta = A * nf.beta;
    const Vector& g = nf.lik.g;
    const Vector& h = nf.lik.h;

    // One-step leave-one-out: remove observation i from the optimality
    // condition and take a single Newton step from the full-data optimum.
    // With a_i the row of the design, M = (A' diag(h) A)^{-1}, and
    // s_i = a_i' M a_i, this gives eta^(-i) = eta_i - s_i g_i / (1 - h_i s_i).
    const Matrix M = (A.transpose() * h.asDiagonal() * A).inverse();
    fit.loo_eta.resize(n);
    fit.loo_b0 = Vector::Constant(n, fit.b0);
    fit.loo_b1 = Vector::Constant(n, fit.b1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = A.row(i) * M * A.row(i).transpose();
        const double lev = std::min(h[i] * s, 1.0 - 1e-8);
        fit.loo_eta[i] = eta[i] - s * g[i] / (1.0 - lev);
    }
    return fit;
}

inline GlmDiagnostics glm_diagnostics(const Vector& x, const Vector& eta, const Vector& y,
                                      const Family& fam) {
    detail::EtaLik lik = detail::eta_loglik(eta, y, fam);
    GlmDiagnostics d;
    d.eta_hat = eta;
    d.g_hat = lik.g;
    d.h_hat = lik.h;
    const double denom = (lik.h.array() * x.array().square()).sum();
    d.leverage = denom > 0.0 ? Vector((lik.h.array() * x.array().square()) / denom)
                             : Vector::Zero(eta.size());
    return d;
}

// ---------------------------------------------------------------------------
// Likelihood-ratio triplet scan.
// ---------------------------------------------------------------------------

/// Per pair: full model (intercept + j + k + jk; cox drops the intercept)
/// against the null without the product. p = P(chi2_1 >= Lambda). Fits that
/// do not converge, separate, or go rank deficient are degenerate with p = 1.
inline std::vector<PairStat> glm_triplet_scan(const Matrix& Xs, const Vector& y,
                                              const Family& fam,
                                              const std::vector<Pair>& pairs,
                                              std::size_t workers = 0) {
    const Eigen::Index n = Xs.rows();
    if (n < 10) throw std::invalid_argument("glm_triplet_scan: need n >= 10");
    const bool has_intercept = fam.tag != FamilyTag::cox;
    const Eigen::Index base = has_intercept ? 3 : 2;

    std::vector<PairStat> stats(pairs.size());
    parallel_for(pairs.size(), workers, [&](std::size_t idx) {
        const Pair pr = pairs[idx];
        PairStat st;
        st.j = pr.j;
        st.k = pr.k;

        Matrix full(n, base + 1);
        Eigen::Index c = 0;
        if (has_intercept) full.col(c++).setOnes();
        full.col(c++) = Xs.col(pr.j);
        full.col(c++) = Xs.col(pr.k);
        full.col(c) = Xs.col(pr.j).cwiseProduct(Xs.col(pr.k));
        Matrix null_m = full.leftCols(base);

        detail::NewtonFit f_full = detail::newton_glm(full, y, fam);
        detail::NewtonFit f_null = detail::newton_glm(null_m, y, fam);
        const bool diverged = f_full.beta.cwiseAbs().maxCoeff() > 100.0;
        if (!f_full.converged || !f_null.converged || diverged) {
            st.degenerate = true;
            st.p_value = 1.0;
        } else {
            double lam = 2.0 * (f_full.loglik - f_null.loglik);
            if (lam < 0.0) lam = 0.0;  // nested models; small negatives are roundoff
            st.beta_jk = f_full.beta[base];
            st.p_value = chisq1_tail(lam);
        }
        stats[idx] = st;
    });
    return stats;
}

}  // namespace unipairs
