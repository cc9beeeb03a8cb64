#pragma once

#include "unipairs/glm.hpp"
#include "unipairs/rng.hpp"
#include "unipairs/tripletscan.hpp"
#include "unipairs/unilasso.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace unipairs {

struct ScanSummary {
    std::size_t n_pairs_scanned = 0;
    std::size_t n_selected = 0;
    std::size_t r_hat = 0;
};

/// Final fitted model on the original covariate scale. Coefficient maps are
/// keyed by original column indices; dropped (constant) columns never appear.
struct InteractionModel {
    std::string method;
    HierarchyMode hierarchy = HierarchyMode::none;
    FamilyTag family = FamilyTag::gaussian;
    double beta0 = 0.0;
    std::map<Eigen::Index, double> main;
    std::map<Pair, double> interactions;
    std::vector<Eigen::Index> active_main;
    std::vector<Pair> active_interactions;
    ScanSummary scan;
    Vector mu, sigma;  // length p; sigma = 0 marks a dropped column
    std::vector<std::string> feature_names;
    std::uint64_t seed = 0;
    Eigen::Index p = 0;
    double lambda_best = 0.0;  // stage-1 penalty, for reporting
    double cv_error = 0.0;
};

struct FitOptions {
    int folds = 10;
    std::uint64_t seed = 42;
    std::size_t workers = 0;  // 0 = auto
    bool one_se_rule = false;
    FamilyTag family = FamilyTag::gaussian;
    Vector cox_time, cox_status;
};

struct BackTransformed {
    double beta0 = 0.0;
    Vector beta;                // per column position
    std::vector<double> gamma;  // per pair, aligned with the pair list
};

/// Standardized-scale coefficients to original-scale ones. The cross terms
/// from expanding the standardized products push interaction mass into the
/// main effects whenever means are nonzero.
inline BackTransformed back_transform(double beta0_s, const Vector& beta_s,
                                      const std::vector<Pair>& pairs,
                                      const std::vector<double>& gamma_s,
                                      const Vector& mu, const Vector& sigma) {
    const Eigen::Index p = beta_s.size();
    BackTransformed out;
    out.beta = Vector::Zero(p);
    out.gamma.assign(pairs.size(), 0.0);

    for (Eigen::Index j = 0; j < p; ++j) out.beta[j] = beta_s[j] / sigma[j];
    out.beta0 = beta0_s;
    for (Eigen::Index j = 0; j < p; ++j) out.beta0 -= beta_s[j] * mu[j] / sigma[j];

    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto [j, k] = pairs[i];
        const double gs = gamma_s[i];
        out.gamma[i] = gs / (sigma[j] * sigma[k]);
        out.beta[j] -= gs * mu[k] / (sigma[j] * sigma[k]);
        out.beta[k] -= gs * mu[j] / (sigma[j] * sigma[k]);
        out.beta0 += gs * mu[j] * mu[k] / (sigma[j] * sigma[k]);
    }
    return out;
}

namespace detail {

inline ScanResult select_from_stats(std::vector<PairStat> stats) {
    ScanResult res;
    if (stats.empty()) return res;
    res.stats = std::move(stats);
    std::vector<double> ps(res.stats.size());
    for (std::size_t i = 0; i < ps.size(); ++i) ps[i] = res.stats[i].p_value;
    LogGapSelection sel = log_gap_select(ps);
    res.r_hat = sel.r_hat;
    res.log_gaps = std::move(sel.log_gaps);
    res.selected.assign(res.stats.size(), 0);
    for (auto i : sel.gamma) {
        res.selected[i] = 1;
        res.gamma_hat.push_back({res.stats[i].j, res.stats[i].k});
    }
    std::sort(res.gamma_hat.begin(), res.gamma_hat.end());
    return res;
}

inline Family make_family(const FitOptions& opt) {
    Family fam;
    fam.tag = opt.family;
    fam.time = opt.cox_time;
    fam.status = opt.cox_status;
    return fam;
}

/// The lasso-stage target per family: the response for gaussian/binomial,
/// null-model martingale residuals for cox (there is no scalar response to
/// regress on the partial-likelihood scale).
inline Vector lasso_target(const Vector& y, const Family& fam) {
    if (fam.tag != FamilyTag::cox) return y;
    CoxLoglik cl = cox_partial_loglik(Vector::Zero(fam.time.size()), fam.time, fam.status);
    return cl.gradient;
}

inline std::optional<UniFit> fit_one_univariate(const Vector& col, const Vector& y,
                                                const Family& fam) {
    try {
        if (fam.tag == FamilyTag::gaussian) return uni_fit_loo(col, y);
        return glm_uni_fit_approx_loo(col, y, fam);
    } catch (const DegenerateFeature&) {
        return std::nullopt;
    } catch (const Separation&) {
        return std::nullopt;
    }
}

inline std::vector<PairStat> run_scan(const Matrix& Xs, const Vector& y, const Family& fam,
                                      const std::vector<Pair>& pairs, std::size_t workers) {
    if (fam.tag == FamilyTag::gaussian) return scan(Xs, y, pairs, workers);
    return glm_triplet_scan(Xs, y, fam, pairs, workers);
}

inline ScanSummary summarize(const ScanResult& sr) {
    return {sr.stats.size(), sr.gamma_hat.size(), sr.r_hat};
}

inline void assemble(InteractionModel& model, const StandardizedDesign& sd,
                     const BackTransformed& bt, const std::vector<Pair>& kept_pairs) {
    for (Eigen::Index c = 0; c < bt.beta.size(); ++c) {
        if (bt.beta[c] != 0.0) {
            const Eigen::Index orig = sd.kept[static_cast<std::size_t>(c)];
            model.main[orig] = bt.beta[c];
            model.active_main.push_back(orig);
        }
    }
    for (std::size_t i = 0; i < kept_pairs.size(); ++i) {
        if (bt.gamma[i] != 0.0) {
            Pair orig{sd.kept[static_cast<std::size_t>(kept_pairs[i].j)],
                      sd.kept[static_cast<std::size_t>(kept_pairs[i].k)]};
            model.interactions[orig] = bt.gamma[i];
            model.active_interactions.push_back(orig);
        }
    }
    model.beta0 = bt.beta0;
}

inline void fill_scale(InteractionModel& model, const StandardizedDesign& sd,
                       Eigen::Index p_full) {
    model.p = p_full;
    model.mu = Vector::Zero(p_full);
    model.sigma = Vector::Zero(p_full);
    for (std::size_t c = 0; c < sd.kept.size(); ++c) {
        model.mu[sd.kept[c]] = sd.mu[static_cast<Eigen::Index>(c)];
        model.sigma[sd.kept[c]] = sd.sigma[static_cast<Eigen::Index>(c)];
    }
}

}  // namespace detail

/// uniPairs: scan all pairs, augment the standardized design with the
/// selected products, run UniLasso over everything, convert back.
inline InteractionModel fit_unipairs(const Dataset& data, const FitOptions& opt = {}) {
    if (data.n() < 5) throw std::invalid_argument("fit_unipairs: need n >= 5");
    const Family fam = detail::make_family(opt);

    StandardizedDesign sd = standardize(data.X);
    const auto pk = static_cast<Eigen::Index>(sd.kept.size());
    const Vector target = detail::lasso_target(data.y, fam);

    std::vector<Pair> all_pairs = eligible_pairs(pk, HierarchyMode::none, {});
    ScanResult sr = detail::select_from_stats(
        detail::run_scan(sd.Xs, data.y, fam, all_pairs, opt.workers));

    const auto n_inter = static_cast<Eigen::Index>(sr.gamma_hat.size());
    std::vector<std::optional<UniFit>> fits(static_cast<std::size_t>(pk + n_inter));
    for (Eigen::Index j = 0; j < pk; ++j)
        fits[static_cast<std::size_t>(j)] =
            detail::fit_one_univariate(sd.Xs.col(j), data.y, fam);
    Matrix products(data.n(), n_inter);
    for (Eigen::Index i = 0; i < n_inter; ++i) {
        const Pair pr = sr.gamma_hat[static_cast<std::size_t>(i)];
        products.col(i) = sd.Xs.col(pr.j).cwiseProduct(sd.Xs.col(pr.k));
        fits[static_cast<std::size_t>(pk + i)] =
            detail::fit_one_univariate(products.col(i), data.y, fam);
    }

    UniLassoFit ul = unilasso_compose(fits, target, opt.folds,
                                      derive_seed(opt.seed, stream::cv_folds_stage1),
                                      opt.one_se_rule);

    Vector beta_s = ul.beta_s.head(pk);
    std::vector<double> gamma_s(static_cast<std::size_t>(n_inter));
    for (Eigen::Index i = 0; i < n_inter; ++i)
        gamma_s[static_cast<std::size_t>(i)] = ul.beta_s[pk + i];

    BackTransformed bt = back_transform(ul.beta0_s, beta_s, sr.gamma_hat, gamma_s,
                                        sd.mu, sd.sigma);

    InteractionModel model;
    model.method = "unipairs";
    model.hierarchy = HierarchyMode::none;
    model.family = fam.tag;
    model.seed = opt.seed;
    model.scan = detail::summarize(sr);
    model.feature_names = data.feature_names.empty() ? Dataset::default_names(data.p())
                                                     : data.feature_names;
    detail::fill_scale(model, sd, data.p());
    detail::assemble(model, sd, bt, sr.gamma_hat);
    model.lambda_best = ul.cv.lambda_best;
    if (!ul.cv.cv_mean.empty()) model.cv_error = ul.cv.cv_mean[ul.cv.best_index];
    return model;
}

/// uniPairs-2stage: UniLasso main effects, hierarchy-restricted scan with
/// target Y, then a plain lasso of the prevalidated residual on the
/// selected products. The final predictor is the sum of the two stages.
inline InteractionModel fit_unipairs_2stage(const Dataset& data, HierarchyMode hierarchy,
                                            const FitOptions& opt = {}) {
    if (data.n() < 5) throw std::invalid_argument("fit_unipairs_2stage: need n >= 5");
    if (opt.family == FamilyTag::cox)
        throw std::invalid_argument(
            "fit_unipairs_2stage: cox is not supported (no prevalidated residual); "
            "use fit_unipairs");
    const Family fam = detail::make_family(opt);

    StandardizedDesign sd = standardize(data.X);
    const auto pk = static_cast<Eigen::Index>(sd.kept.size());

    // stage 1: main effects
    std::vector<std::optional<UniFit>> fits(static_cast<std::size_t>(pk));
    for (Eigen::Index j = 0; j < pk; ++j)
        fits[static_cast<std::size_t>(j)] =
            detail::fit_one_univariate(sd.Xs.col(j), data.y, fam);
    UniLassoFit stage1 = unilasso_compose(fits, data.y, opt.folds,
                                          derive_seed(opt.seed, stream::cv_folds_stage1),
                                          opt.one_se_rule);

    std::vector<Eigen::Index> active1;  // kept-column positions
    for (Eigen::Index j = 0; j < pk; ++j)
        if (stage1.beta_s[j] != 0.0) active1.push_back(j);

    // stage 2: hierarchy-restricted scan on Y, lasso of the residual
    std::vector<Pair> eligible = eligible_pairs(pk, hierarchy, active1);
    ScanResult sr;
    double alpha0_s = 0.0;
    std::vector<double> gamma_s;
    if (!eligible.empty()) {
        sr = detail::select_from_stats(
            detail::run_scan(sd.Xs, data.y, fam, eligible, opt.workers));
        const Vector residual = data.y - stage1.cv.prevalidated;

        const auto n_inter = static_cast<Eigen::Index>(sr.gamma_hat.size());
        LassoProblem prob;
        prob.y = residual;
        prob.intercept = true;
        prob.features.resize(data.n(), n_inter);
        for (Eigen::Index i = 0; i < n_inter; ++i) {
            const Pair pr = sr.gamma_hat[static_cast<std::size_t>(i)];
            prob.features.col(i) = sd.Xs.col(pr.j).cwiseProduct(sd.Xs.col(pr.k));
        }
        prob.nonneg_mask.assign(static_cast<std::size_t>(n_inter), 0);

        CvResult cv = cross_validate(prob, opt.folds,
                                     derive_seed(opt.seed, stream::cv_folds_stage2),
                                     opt.one_se_rule);
        SparseFit stage2 = solve(prob, cv.lambda_best);
        alpha0_s = stage2.intercept;
        gamma_s.resize(static_cast<std::size_t>(n_inter));
        for (Eigen::Index i = 0; i < n_inter; ++i)
            gamma_s[static_cast<std::size_t>(i)] = stage2.coefs[i];
    }

    BackTransformed bt = back_transform(stage1.beta0_s + alpha0_s, stage1.beta_s.head(pk),
                                        sr.gamma_hat, gamma_s, sd.mu, sd.sigma);

    InteractionModel model;
    model.method = "unipairs-2stage";
    model.hierarchy = hierarchy;
    model.family = fam.tag;
    model.seed = opt.seed;
    model.scan = detail::summarize(sr);
    model.feature_names = data.feature_names.empty() ? Dataset::default_names(data.p())
                                                     : data.feature_names;
    detail::fill_scale(model, sd, data.p());
    detail::assemble(model, sd, bt, sr.gamma_hat);
    model.lambda_best = stage1.cv.lambda_best;
    if (!stage1.cv.cv_mean.empty()) model.cv_error = stage1.cv.cv_mean[stage1.cv.best_index];
    return model;
}

/// Original-scale prediction: beta0 + sum beta_j x_j + sum gamma_jk x_j x_k.
inline Vector predict(const InteractionModel& model, const Matrix& Xnew) {
    if (Xnew.cols() != model.p)
        throw DimensionMismatch("predict: feature count mismatch");
    Vector pred = Vector::Constant(Xnew.rows(), model.beta0);
    for (const auto& [j, coef] : model.main) pred += coef * Xnew.col(j);
    for (const auto& [pr, coef] : model.interactions)
        pred += coef * Xnew.col(pr.j).cwiseProduct(Xnew.col(pr.k));
    return pred;
}

}  // namespace unipairs
