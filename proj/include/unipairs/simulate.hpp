#pragma once

#include "unipairs/pipelines.hpp"
#include "unipairs/rng.hpp"

#include <cstdint>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace unipairs {

enum class Structure { mixed, hierarchical, anti_hierarchical, interaction_only, main_only };

inline const char* to_string(Structure s) {
    switch (s) {
        case Structure::mixed: return "mixed";
        case Structure::hierarchical: return "hierarchical";
        case Structure::anti_hierarchical: return "anti_hierarchical";
        case Structure::interaction_only: return "interaction_only";
        default: return "main_only";
    }
}

struct StructureTooLarge : std::runtime_error {
    StructureTooLarge() : std::runtime_error("p too small for the requested structure (need p >= 20)") {}
};

struct SimulationSpec {
    Eigen::Index n = 300;
    Eigen::Index p = 100;
    double rho = 0.0;
    Structure structure = Structure::hierarchical;
    double snr = 3.0;
    int n_reps = 20;
    std::uint64_t seed = 42;
};

struct Truth {
    std::vector<Eigen::Index> t1;
    std::vector<Pair> t3;
};

inline Truth structure_truth(Structure s) {
    const std::vector<Eigen::Index> mains = {0, 1, 2, 3, 4, 5};
    switch (s) {
        case Structure::mixed:
            return {mains, {{0, 4}, {3, 17}, {9, 10}, {8, 16}, {0, 12}, {3, 16}}};
        case Structure::hierarchical:
            return {mains, {{0, 2}, {1, 3}, {2, 3}, {0, 7}, {1, 7}, {4, 9}}};
        case Structure::anti_hierarchical:
            return {mains, {{10, 12}, {11, 13}, {12, 13}, {10, 17}, {11, 17}, {14, 19}}};
        case Structure::interaction_only:
            return {{}, {{0, 2}, {1, 3}, {2, 3}, {0, 7}, {1, 7}, {4, 9}}};
        default:
            return {mains, {}};
    }
}

struct SimulatedData {
    Dataset train;
    Dataset test;
    Truth truth;
    Vector train_mu, train_eps;  // realized signal and noise of the train draw
};

namespace detail {

inline double sample_var(const Vector& v) {
    if (v.size() < 2) return 0.0;
    const double m = v.mean();
    return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

inline Dataset draw_once(const SimulationSpec& spec, const Truth& truth, Rng& rng,
                         Vector* mu_out = nullptr, Vector* eps_out = nullptr) {
    const Eigen::Index n = spec.n;
    const Eigen::Index p = spec.p;
    std::normal_distribution<double> gauss(0.0, 1.0);

    // AR(1) rows: x_a = rho x_{a-1} + sqrt(1 - rho^2) z_a
    Matrix X(n, p);
    const double carry = std::sqrt(1.0 - spec.rho * spec.rho);
    for (Eigen::Index i = 0; i < n; ++i) {
        double prev = gauss(rng);
        X(i, 0) = prev;
        for (Eigen::Index a = 1; a < p; ++a) {
            prev = spec.rho * prev + carry * gauss(rng);
            X(i, a) = prev;
        }
    }

    Vector mu_main = Vector::Zero(n);
    for (auto j : truth.t1) mu_main += 2.0 * X.col(j);
    Vector mu_int = Vector::Zero(n);
    for (const auto& pr : truth.t3) mu_int += 3.0 * X.col(pr.j).cwiseProduct(X.col(pr.k));

    if (!truth.t1.empty() && !truth.t3.empty()) {
        Matrix F(n, static_cast<Eigen::Index>(truth.t1.size()));
        for (std::size_t c = 0; c < truth.t1.size(); ++c)
            F.col(static_cast<Eigen::Index>(c)) = X.col(truth.t1[c]);
        Vector proj = F * (F.transpose() * F).ldlt().solve(F.transpose() * mu_int);
        mu_main += proj;
        mu_int -= proj;
    }
    const double vm = sample_var(mu_main);
    const double vi = sample_var(mu_int);
    if (vm > 0.0 && vi > 0.0) mu_int *= std::sqrt(vm / vi);

    Vector mu = mu_main + mu_int;
    const double var_mu = sample_var(mu);
    const double sigma2 = var_mu / spec.snr;

    Vector z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = gauss(rng);
    const double vz = sample_var(z);
    // scale the realized draw so Var(mu)/Var(eps) hits the requested SNR exactly
    Vector eps = (sigma2 > 0.0 && vz > 0.0) ? Vector(z * std::sqrt(sigma2 / vz))
                                            : Vector(Vector::Zero(n));

    Dataset d;
    d.X = std::move(X);
    d.y = mu + eps;
    if (mu_out) *mu_out = mu;
    if (eps_out) *eps_out = std::move(eps);
    return d;
}

}  // namespace detail

/// One replicate: independent train and test draws through the same
/// mechanism (fresh X and noise, shared coefficient layout).
inline SimulatedData generate(const SimulationSpec& spec, int rep) {
    if (spec.p < 20) throw StructureTooLarge();
    SimulatedData out;
    out.truth = structure_truth(spec.structure);
    Rng rng = make_rng(derive_seed(spec.seed, stream::simulation),
                       static_cast<std::uint64_t>(rep));
    out.train = detail::draw_once(spec, out.truth, rng, &out.train_mu, &out.train_eps);
    out.test = detail::draw_once(spec, out.truth, rng);
    return out;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct MetricsRow {
    int spec_id = 0;
    Structure structure = Structure::main_only;
    Eigen::Index n = 0, p = 0;
    double rho = 0.0, snr = 0.0;
    std::string method;
    std::string rep;  // "0".."R-1", or "mean" / "se"
    double test_r2 = 0.0, train_r2 = 0.0;
    double cov_main = 0.0, cov_int = 0.0, cov_both = 0.0;
    double fdr_main = 0.0, fdr_int = 0.0, fdr_both = 0.0;
    double size_main = 0.0, size_int = 0.0, size_both = 0.0;
};

inline double r_squared(const Vector& y, const Vector& yhat) {
    const double ym = y.mean();
    const double tss = (y.array() - ym).square().sum();
    const double rss = (y - yhat).squaredNorm();
    return tss > 0.0 ? 1.0 - rss / tss : 0.0;
}

namespace detail {

template <typename T>
std::pair<double, double> cov_fdr(const std::set<T>& selected, const std::set<T>& truth) {
    std::size_t hit = 0;
    for (const auto& s : selected)
        if (truth.count(s)) ++hit;
    const double coverage = truth.empty() ? 1.0
                                          : static_cast<double>(hit) /
                                                static_cast<double>(truth.size());
    const double fdr = selected.empty() ? 0.0
                                        : static_cast<double>(selected.size() - hit) /
                                              static_cast<double>(selected.size());
    return {coverage, fdr};
}

}  // namespace detail

inline MetricsRow evaluate(const InteractionModel& model, const Truth& truth,
                           const Dataset& train, const Dataset& test) {
    MetricsRow row;
    row.train_r2 = r_squared(train.y, predict(model, train.X));
    row.test_r2 = r_squared(test.y, predict(model, test.X));

    std::set<Eigen::Index> sel_m(model.active_main.begin(), model.active_main.end());
    std::set<Pair> sel_i(model.active_interactions.begin(), model.active_interactions.end());
    std::set<Eigen::Index> tru_m(truth.t1.begin(), truth.t1.end());
    std::set<Pair> tru_i(truth.t3.begin(), truth.t3.end());

    std::tie(row.cov_main, row.fdr_main) = detail::cov_fdr(sel_m, tru_m);
    std::tie(row.cov_int, row.fdr_int) = detail::cov_fdr(sel_i, tru_i);

    const std::size_t hit_m = [&] {
        std::size_t h = 0;
        for (auto j : sel_m)
            if (tru_m.count(j)) ++h;
        return h;
    }();
    const std::size_t hit_i = [&] {
        std::size_t h = 0;
        for (const auto& pr : sel_i)
            if (tru_i.count(pr)) ++h;
        return h;
    }();
    const std::size_t tru_total = tru_m.size() + tru_i.size();
    const std::size_t sel_total = sel_m.size() + sel_i.size();
    row.cov_both = tru_total == 0 ? 1.0
                                  : static_cast<double>(hit_m + hit_i) /
                                        static_cast<double>(tru_total);
    row.fdr_both = sel_total == 0 ? 0.0
                                  : static_cast<double>(sel_total - hit_m - hit_i) /
                                        static_cast<double>(sel_total);
    row.size_main = static_cast<double>(sel_m.size());
    row.size_int = static_cast<double>(sel_i.size());
    row.size_both = static_cast<double>(sel_total);
    return row;
}

/// Average number of shared selected terms over unordered replicate pairs.
template <typename T>
double stability(const std::vector<std::set<T>>& sets) {
    if (sets.size() < 2) return 0.0;
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t a = 0; a < sets.size(); ++a) {
        for (std::size_t b = a + 1; b < sets.size(); ++b) {
            std::size_t shared = 0;
            for (const auto& x : sets[a])
                if (sets[b].count(x)) ++shared;
            total += static_cast<double>(shared);
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

template <typename T>
double jaccard(const std::set<T>& a, const std::set<T>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& x : a)
        if (b.count(x)) ++inter;
    return static_cast<double>(inter) /
           static_cast<double>(a.size() + b.size() - inter);
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

/// Plain main-effects lasso with CV, back-transformed; never selects
/// interactions.
inline InteractionModel lasso_baseline(const Dataset& train, int k, std::uint64_t seed,
                                       bool one_se_rule = false) {
    StandardizedDesign sd = standardize(train.X);
    LassoProblem prob;
    prob.features = sd.Xs;
    prob.y = train.y;
    prob.nonneg_mask.assign(static_cast<std::size_t>(sd.Xs.cols()), 0);
    prob.intercept = true;

    CvResult cv = cross_validate(prob, k, derive_seed(seed, stream::cv_folds_stage1),
                                 one_se_rule);
    SparseFit fit = solve(prob, cv.lambda_best);

    BackTransformed bt = back_transform(fit.intercept, fit.coefs, {}, {}, sd.mu, sd.sigma);
    InteractionModel model;
    model.method = "lasso-baseline";
    model.seed = seed;
    model.feature_names = train.feature_names.empty() ? Dataset::default_names(train.p())
                                                      : train.feature_names;
    detail::fill_scale(model, sd, train.p());
    detail::assemble(model, sd, bt, {});
    return model;
}

/// Unscreened control: lasso over all main effects plus every pairwise
/// product column. Deliberately ignores screening; used for head-to-head
/// FDR comparisons.
inline InteractionModel all_pairs_lasso(const Dataset& train, int k, std::uint64_t seed,
                                        bool one_se_rule = false) {
    StandardizedDesign sd = standardize(train.X);
    const auto pk = static_cast<Eigen::Index>(sd.kept.size());
    std::vector<Pair> pairs = eligible_pairs(pk, HierarchyMode::none, {});
    const auto m = pk + static_cast<Eigen::Index>(pairs.size());

    LassoProblem prob;
    prob.features.resize(train.n(), m);
    prob.features.leftCols(pk) = sd.Xs;
    for (std::size_t i = 0; i < pairs.size(); ++i)
        prob.features.col(pk + static_cast<Eigen::Index>(i)) =
            sd.Xs.col(pairs[i].j).cwiseProduct(sd.Xs.col(pairs[i].k));
    prob.y = train.y;
    prob.nonneg_mask.assign(static_cast<std::size_t>(m), 0);
    prob.intercept = true;

    // a short, coarse path keeps the O(p^2)-column control affordable
    CvResult cv = cross_validate(prob, k, derive_seed(seed, stream::cv_folds_stage1),
                                 one_se_rule, 50, 1e-2);
    SparseFit fit = solve(prob, cv.lambda_best);

    std::vector<double> gamma_s(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i)
        gamma_s[i] = fit.coefs[pk + static_cast<Eigen::Index>(i)];
    BackTransformed bt = back_transform(fit.intercept, fit.coefs.head(pk), pairs, gamma_s,
                                        sd.mu, sd.sigma);
    InteractionModel model;
    model.method = "all-pairs-lasso";
    model.seed = seed;
    model.feature_names = train.feature_names.empty() ? Dataset::default_names(train.p())
                                                      : train.feature_names;
    detail::fill_scale(model, sd, train.p());
    detail::assemble(model, sd, bt, pairs);
    return model;
}

// ---------------------------------------------------------------------------
// Replication driver
// ---------------------------------------------------------------------------

inline InteractionModel fit_method(const std::string& method, const Dataset& train, int k,
                                   std::uint64_t seed, std::size_t workers = 0) {
    FitOptions opt;
    opt.folds = k;
    opt.seed = seed;
    opt.workers = workers;
    if (method == "unipairs") return fit_unipairs(train, opt);
    if (method == "unipairs-2stage")
        return fit_unipairs_2stage(train, HierarchyMode::none, opt);
    if (method == "lasso-baseline") return lasso_baseline(train, k, seed);
    if (method == "all-pairs-lasso") return all_pairs_lasso(train, k, seed);
    throw std::invalid_argument("unknown method: " + method);
}

/// One row per (spec, method, rep), followed by mean and standard-error
/// aggregate rows per (spec, method). Deterministic given the spec seeds.
inline std::vector<MetricsRow> run_grid(const std::vector<SimulationSpec>& specs,
                                        const std::vector<std::string>& methods,
                                        int folds = 10, std::size_t workers = 0) {
    std::vector<MetricsRow> rows;
    for (std::size_t si = 0; si < specs.size(); ++si) {
        const SimulationSpec& spec = specs[si];
        std::vector<std::vector<MetricsRow>> per_method(methods.size());
        for (int rep = 0; rep < spec.n_reps; ++rep) {
            SimulatedData data = generate(spec, rep);
            for (std::size_t mi = 0; mi < methods.size(); ++mi) {
                const std::uint64_t fit_seed =
                    derive_seed(spec.seed, 1000 + static_cast<std::uint64_t>(rep));
                InteractionModel model =
                    fit_method(methods[mi], data.train, folds, fit_seed, workers);
                MetricsRow row = evaluate(model, data.truth, data.train, data.test);
                row.spec_id = static_cast<int>(si);
                row.structure = spec.structure;
                row.n = spec.n;
                row.p = spec.p;
                row.rho = spec.rho;
                row.snr = spec.snr;
                row.method = methods[mi];
                row.rep = std::to_string(rep);
                per_method[mi].push_back(row);
            }
        }
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            for (const auto& r : per_method[mi]) rows.push_back(r);
            // aggregates
            MetricsRow mean = per_method[mi].front();
            MetricsRow se = per_method[mi].front();
            mean.rep = "mean";
            se.rep = "se";
            auto agg = [&](double MetricsRow::* field) {
                double m = 0.0;
                for (const auto& r : per_method[mi]) m += r.*field;
                m /= static_cast<double>(per_method[mi].size());
                double v = 0.0;
                for (const auto& r : per_method[mi]) {
                    const double d = r.*field - m;
                    v += d * d;
                }
                const auto nr = static_cast<double>(per_method[mi].size());
                const double sd = nr > 1 ? std::sqrt(v / (nr - 1.0)) : 0.0;
                mean.*field = m;
                se.*field = sd / std::sqrt(nr);
            };
            for (auto f : {&MetricsRow::test_r2, &MetricsRow::train_r2, &MetricsRow::cov_main,
                           &MetricsRow::cov_int, &MetricsRow::cov_both, &MetricsRow::fdr_main,
                           &MetricsRow::fdr_int, &MetricsRow::fdr_both, &MetricsRow::size_main,
                           &MetricsRow::size_int, &MetricsRow::size_both})
                agg(f);
            rows.push_back(mean);
            rows.push_back(se);
        }
    }
    return rows;
}

inline void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
    os << "spec_id,structure,n,p,rho,snr,method,rep,test_r2,train_r2,"
          "cov_main,cov_int,cov_both,fdr_main,fdr_int,fdr_both,"
          "size_main,size_int,size_both\n";
    os.precision(12);
    for (const auto& r : rows) {
        os << r.spec_id << ',' << to_string(r.structure) << ',' << r.n << ',' << r.p << ','
           << r.rho << ',' << r.snr << ',' << r.method << ',' << r.rep << ',' << r.test_r2
           << ',' << r.train_r2 << ',' << r.cov_main << ',' << r.cov_int << ',' << r.cov_both
           << ',' << r.fdr_main << ',' << r.fdr_int << ',' << r.fdr_both << ',' << r.size_main
           << ',' << r.size_int << ',' << r.size_both << '\n';
    }
}

}  // namespace unipairs
