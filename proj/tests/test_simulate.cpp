#include "unipairs/simulate.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

using namespace unipairs;

TEST_CASE("structure truths match the published layouts") {
    auto mixed = structure_truth(Structure::mixed);
    CHECK(mixed.t1 == std::vector<Eigen::Index>{0, 1, 2, 3, 4, 5});
    CHECK(mixed.t3 == std::vector<Pair>{{0, 4}, {3, 17}, {9, 10}, {8, 16}, {0, 12}, {3, 16}});

    auto hier = structure_truth(Structure::hierarchical);
    CHECK(hier.t3 == std::vector<Pair>{{0, 2}, {1, 3}, {2, 3}, {0, 7}, {1, 7}, {4, 9}});

    auto anti = structure_truth(Structure::anti_hierarchical);
    CHECK(anti.t3 ==
          std::vector<Pair>{{10, 12}, {11, 13}, {12, 13}, {10, 17}, {11, 17}, {14, 19}});
    for (const auto& pr : anti.t3) {
        CHECK(std::find(anti.t1.begin(), anti.t1.end(), pr.j) == anti.t1.end());
        CHECK(std::find(anti.t1.begin(), anti.t1.end(), pr.k) == anti.t1.end());
    }

    auto io = structure_truth(Structure::interaction_only);
    CHECK(io.t1.empty());
    CHECK(io.t3 == hier.t3);

    auto mo = structure_truth(Structure::main_only);
    CHECK(mo.t3.empty());
    CHECK(mo.t1.size() == 6);
}

TEST_CASE("generate rejects p < 20") {
    SimulationSpec spec;
    spec.p = 19;
    CHECK_THROWS_AS(generate(spec, 0), StructureTooLarge);
}

TEST_CASE("realized SNR is exact") {
    SimulationSpec spec;
    spec.n = 300;
    spec.p = 30;
    spec.rho = 0.4;
    spec.snr = 3.0;
    spec.structure = Structure::hierarchical;
    auto data = generate(spec, 2);
    const double vm = detail::sample_var(data.train_mu);
    const double ve = detail::sample_var(data.train_eps);
    CHECK(vm / ve == Catch::Approx(spec.snr).margin(1e-10));
    // y is formed as mu + eps; re-subtracting only leaves addition round-off
    CHECK((data.train.y - data.train_mu - data.train_eps).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("interaction signal is orthogonal to active main columns") {
    SimulationSpec spec;
    spec.n = 200;
    spec.p = 25;
    spec.structure = Structure::mixed;
    auto truth = structure_truth(spec.structure);
    Rng rng = make_rng(derive_seed(spec.seed, stream::simulation), 0);

    Vector mu, eps;
    Dataset d = detail::draw_once(spec, truth, rng, &mu, &eps);

    // reconstruct the components the way draw_once does
    Vector mu_main_raw = Vector::Zero(spec.n);
    for (auto j : truth.t1) mu_main_raw += 2.0 * d.X.col(j);
    Vector mu_int_raw = Vector::Zero(spec.n);
    for (const auto& pr : truth.t3)
        mu_int_raw += 3.0 * d.X.col(pr.j).cwiseProduct(d.X.col(pr.k));
    Matrix F(spec.n, static_cast<Eigen::Index>(truth.t1.size()));
    for (std::size_t c = 0; c < truth.t1.size(); ++c)
        F.col(static_cast<Eigen::Index>(c)) = d.X.col(truth.t1[c]);
    Vector proj = F * (F.transpose() * F).ldlt().solve(F.transpose() * mu_int_raw);
    Vector mu_int = mu_int_raw - proj;

    for (auto j : truth.t1) {
        const double ip = std::abs(mu_int.dot(d.X.col(j)));
        CHECK(ip <= 1e-8 * mu_int.norm() * d.X.col(j).norm());
    }
}

TEST_CASE("main_only structure has pure main-effect signal") {
    SimulationSpec spec;
    spec.n = 400;
    spec.p = 20;
    spec.structure = Structure::main_only;
    spec.snr = 2.0;
    auto data = generate(spec, 0);
    Vector xb = Vector::Zero(spec.n);
    for (auto j : data.truth.t1) xb += 2.0 * data.train.X.col(j);
    CHECK((data.train_mu - xb).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("evaluate: coverage and FDR conventions") {
    Truth truth;
    truth.t1 = {0, 1};
    truth.t3 = {{0, 1}};

    Dataset train, test;
    train.X = Matrix::Random(20, 5);
    train.y = train.X.col(0);
    test = train;

    InteractionModel exact;
    exact.p = 5;
    exact.active_main = {0, 1};
    exact.main[0] = 1.0;
    exact.main[1] = 1.0;
    exact.active_interactions = {{0, 1}};
    exact.interactions[{0, 1}] = 1.0;
    auto row = evaluate(exact, truth, train, test);
    CHECK(row.cov_main == 1.0);
    CHECK(row.cov_int == 1.0);
    CHECK(row.cov_both == 1.0);
    CHECK(row.fdr_both == 0.0);
    CHECK(row.size_both == 3.0);

    InteractionModel empty;
    empty.p = 5;
    auto erow = evaluate(empty, truth, train, test);
    CHECK(erow.cov_main == 0.0);
    CHECK(erow.fdr_main == 0.0);
    CHECK(erow.size_both == 0.0);

    Truth no_truth;
    auto vrow = evaluate(empty, no_truth, train, test);
    CHECK(vrow.cov_main == 1.0);  // vacuous coverage
    CHECK(vrow.cov_both == 1.0);
}

TEST_CASE("r_squared: perfect predictions") {
    Vector y(4);
    y << 1, 2, 3, 4;
    CHECK(r_squared(y, y) == 1.0);
}

TEST_CASE("stability and jaccard metrics") {
    std::vector<std::set<int>> sets = {{1, 2, 3}, {2, 3, 4}, {3, 5}};
    // pairwise shared counts: |{2,3}|=2, |{3}|=1, |{3}|=1 → mean 4/3
    CHECK(stability(sets) == Catch::Approx(4.0 / 3.0));

    std::vector<std::set<int>> rev(sets.rbegin(), sets.rend());
    CHECK(stability(rev) == Catch::Approx(stability(sets)));

    CHECK(jaccard(std::set<int>{1, 2}, std::set<int>{2, 3}) == Catch::Approx(1.0 / 3.0));
    CHECK(jaccard(std::set<int>{}, std::set<int>{}) == 1.0);
}

TEST_CASE("lasso_baseline never selects interactions") {
    SimulationSpec spec;
    spec.n = 120;
    spec.p = 20;
    spec.structure = Structure::main_only;
    auto data = generate(spec, 0);
    auto model = lasso_baseline(data.train, 5, 3);
    CHECK(model.active_interactions.empty());
    CHECK(model.interactions.empty());
}

TEST_CASE("run_grid: determinism, aggregates, and row count") {
    SimulationSpec spec;
    spec.n = 60;
    spec.p = 20;
    spec.structure = Structure::main_only;
    spec.snr = 3.0;
    spec.n_reps = 3;
    spec.seed = 5;

    const std::vector<std::string> methods = {"lasso-baseline"};
    auto rows = run_grid({spec}, methods, 5);
    // 3 reps + mean + se
    REQUIRE(rows.size() == 5);
    CHECK(rows[3].rep == "mean");
    CHECK(rows[4].rep == "se");

    double mean = 0.0;
    for (int r = 0; r < 3; ++r) mean += rows[static_cast<std::size_t>(r)].test_r2;
    mean /= 3.0;
    CHECK(rows[3].test_r2 == Catch::Approx(mean).margin(1e-12));
    double var = 0.0;
    for (int r = 0; r < 3; ++r) {
        const double d = rows[static_cast<std::size_t>(r)].test_r2 - mean;
        var += d * d;
    }
    const double se = std::sqrt(var / 2.0) / std::sqrt(3.0);
    CHECK(rows[4].test_r2 == Catch::Approx(se).margin(1e-12));

    auto rows2 = run_grid({spec}, methods, 5);
    std::ostringstream a, b;
    write_metrics_csv(a, rows);
    write_metrics_csv(b, rows2);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("spec_id,structure,n,p,rho,snr,method,rep,test_r2,train_r2,"
                        "cov_main,cov_int,cov_both,fdr_main,fdr_int,fdr_both,"
                        "size_main,size_int,size_both\n", 0) == 0);
}
