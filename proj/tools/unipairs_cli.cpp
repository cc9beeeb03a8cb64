// Command-line frontend: fit / predict / scan / simulate over CSV data
// with JSON model artifacts.

#include "unipairs/unipairs.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_data_error = 2;
constexpr int exit_usage_error = 3;

struct Config {
    std::string input, output, model_path, target;
    std::string method = "unipairs-2stage";
    std::string hierarchy = "none";
    std::string family = "gaussian";
    std::string time_col, status_col;
    int folds = 10;
    std::uint64_t seed = 42;
    std::size_t threads = 0;
    // simulate
    std::vector<std::string> structures;
    std::vector<long> ns{300, 100};
    std::vector<long> ps{100, 200};
    std::vector<double> rhos{0.0, 0.5};
    std::vector<double> snrs{0.5, 3.0};
    int reps = 20;
};

unipairs::Dataset load_dataset(const Config& cfg, unipairs::FitOptions& opt) {
    const auto table = unipairs::read_csv(cfg.input);
    std::vector<std::string> exclude;
    if (!cfg.time_col.empty()) exclude.push_back(cfg.time_col);
    if (!cfg.status_col.empty()) exclude.push_back(cfg.status_col);
    auto data = unipairs::dataset_from_table(table, cfg.target, exclude);

    opt.family = unipairs::family_from_string(cfg.family);
    if (opt.family == unipairs::FamilyTag::cox) {
        if (cfg.time_col.empty() || cfg.status_col.empty())
            throw std::invalid_argument("family cox requires --time-col and --status-col");
        opt.cox_time = table.values.col(table.column_index(cfg.time_col));
        opt.cox_status = table.values.col(table.column_index(cfg.status_col));
    }
    opt.folds = cfg.folds;
    opt.seed = cfg.seed;
    opt.workers = cfg.threads;
    return data;
}

int cmd_fit(const Config& cfg) {
    unipairs::FitOptions opt;
    const auto data = load_dataset(cfg, opt);

    unipairs::InteractionModel model;
    if (cfg.method == "unipairs") {
        model = unipairs::fit_unipairs(data, opt);
    } else if (cfg.method == "unipairs-2stage") {
        model = unipairs::fit_unipairs_2stage(
            data, unipairs::hierarchy_from_string(cfg.hierarchy), opt);
    } else {
        throw std::invalid_argument("unknown method: " + cfg.method);
    }

    const auto j = unipairs::to_json(model);
    if (!cfg.output.empty()) {
        std::ofstream out(cfg.output);
        out << j.dump(2) << '\n';
    } else {
        std::cout << j.dump(2) << '\n';
    }
    std::cerr << "main effects selected: " << model.active_main.size() << '\n'
              << "interactions selected: " << model.active_interactions.size() << '\n'
              << "pairs scanned: " << model.scan.n_pairs_scanned << '\n'
              << "lambda chosen: " << model.lambda_best << '\n'
              << "cv error: " << model.cv_error << '\n';
    return exit_ok;
}

int cmd_predict(const Config& cfg) {
    std::ifstream mf(cfg.model_path);
    if (!mf) throw unipairs::CsvError("cannot open model file: " + cfg.model_path);
    nlohmann::json j;
    mf >> j;
    const auto model = unipairs::model_from_json(j);

    const auto table = unipairs::read_csv(cfg.input);
    unipairs::Matrix X;
    if (table.values.cols() == model.p) {
        X = table.values;
    } else if (!cfg.target.empty()) {
        std::vector<std::string> exclude;
        if (!cfg.time_col.empty()) exclude.push_back(cfg.time_col);
        if (!cfg.status_col.empty()) exclude.push_back(cfg.status_col);
        const auto data = unipairs::dataset_from_table(table, cfg.target, exclude);
        if (data.X.cols() != model.p)
            throw unipairs::DimensionMismatch("predict: feature count mismatch");
        X = data.X;
    } else {
        throw unipairs::DimensionMismatch(
            "predict: input has " + std::to_string(table.values.cols()) +
            " columns but the model expects " + std::to_string(model.p));
    }

    const auto pred = unipairs::predict(model, X);
    std::ofstream out_file;
    std::ostream& os = cfg.output.empty() ? std::cout : (out_file.open(cfg.output), out_file);
    os.precision(12);
    const bool binom = model.family == unipairs::FamilyTag::binomial;
    os << (binom ? "prediction,probability\n" : "prediction\n");
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
        os << pred[i];
        if (binom) os << ',' << std::clamp(pred[i], 0.0, 1.0);
        os << '\n';
    }
    return exit_ok;
}

int cmd_scan(const Config& cfg) {
    unipairs::FitOptions opt;
    const auto data = load_dataset(cfg, opt);

    const auto sd = unipairs::standardize(data.X);
    const auto pk = static_cast<Eigen::Index>(sd.kept.size());
    const auto pairs = unipairs::eligible_pairs(pk, unipairs::HierarchyMode::none, {});
    unipairs::ScanResult sr;
    if (opt.family == unipairs::FamilyTag::gaussian) {
        sr = unipairs::scan_and_select(sd.Xs, data.y, pairs, opt.workers);
    } else {
        unipairs::Family fam{opt.family, opt.cox_time, opt.cox_status};
        auto stats = unipairs::glm_triplet_scan(sd.Xs, data.y, fam, pairs, opt.workers);
        sr = unipairs::detail::select_from_stats(std::move(stats));
    }

    std::vector<std::size_t> order(sr.stats.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (sr.stats[a].p_value != sr.stats[b].p_value)
            return sr.stats[a].p_value < sr.stats[b].p_value;
        return unipairs::Pair{sr.stats[a].j, sr.stats[a].k} <
               unipairs::Pair{sr.stats[b].j, sr.stats[b].k};
    });

    std::ofstream out_file;
    std::ostream& os = cfg.output.empty() ? std::cout : (out_file.open(cfg.output), out_file);
    os.precision(12);
    os << "j,k,beta,p_value,selected\n";
    for (auto i : order) {
        const auto& st = sr.stats[i];
        os << sd.kept[static_cast<std::size_t>(st.j)] << ','
           << sd.kept[static_cast<std::size_t>(st.k)] << ',' << st.beta_jk << ','
           << st.p_value << ',' << int(sr.selected[i]) << '\n';
    }
    return exit_ok;
}

int cmd_simulate(const Config& cfg) {
    std::vector<unipairs::Structure> structures;
    if (cfg.structures.empty()) {
        structures = {unipairs::Structure::mixed, unipairs::Structure::hierarchical,
                      unipairs::Structure::anti_hierarchical,
                      unipairs::Structure::interaction_only, unipairs::Structure::main_only};
    } else {
        for (const auto& s : cfg.structures) {
            if (s == "mixed") structures.push_back(unipairs::Structure::mixed);
            else if (s == "hierarchical") structures.push_back(unipairs::Structure::hierarchical);
            else if (s == "anti_hierarchical")
                structures.push_back(unipairs::Structure::anti_hierarchical);
            else if (s == "interaction_only")
                structures.push_back(unipairs::Structure::interaction_only);
            else if (s == "main_only") structures.push_back(unipairs::Structure::main_only);
            else throw std::invalid_argument("unknown structure: " + s);
        }
    }
    if (cfg.ns.size() != cfg.ps.size())
        throw std::invalid_argument("--n and --p must have the same number of entries");
    if (cfg.reps < 1) throw std::invalid_argument("--reps must be >= 1");
    for (double r : cfg.rhos)
        if (r < 0.0 || r >= 1.0) throw std::invalid_argument("--rho must be in [0, 1)");
    for (double s : cfg.snrs)
        if (s <= 0.0) throw std::invalid_argument("--snr must be positive");

    std::vector<unipairs::SimulationSpec> specs;
    for (auto structure : structures)
        for (std::size_t i = 0; i < cfg.ns.size(); ++i)
            for (double rho : cfg.rhos)
                for (double snr : cfg.snrs) {
                    unipairs::SimulationSpec spec;
                    spec.n = cfg.ns[i];
                    spec.p = cfg.ps[i];
                    spec.rho = rho;
                    spec.snr = snr;
                    spec.structure = structure;
                    spec.n_reps = cfg.reps;
                    spec.seed = cfg.seed;
                    specs.push_back(spec);
                }

    const std::vector<std::string> methods = {"unipairs", "unipairs-2stage", "lasso-baseline"};
    const auto rows = unipairs::run_grid(specs, methods, cfg.folds, cfg.threads);

    std::ofstream out_file;
    std::ostream& os = cfg.output.empty() ? std::cout : (out_file.open(cfg.output), out_file);
    unipairs::write_metrics_csv(os, rows);
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Univariate-guided sparse regression with pairwise interactions"};
    app.require_subcommand(1);
    Config cfg;

    auto add_common = [&](CLI::App* sub, bool needs_input, bool needs_target) {
        if (needs_input)
            sub->add_option("--input", cfg.input, "input CSV path")->required();
        if (needs_target)
            sub->add_option("--target", cfg.target, "target column name")->required();
        sub->add_option("--family", cfg.family, "gaussian|binomial|cox");
        sub->add_option("--time-col", cfg.time_col, "survival time column (cox)");
        sub->add_option("--status-col", cfg.status_col, "event status column (cox)");
        sub->add_option("--folds", cfg.folds, "CV folds")->check(CLI::Range(2, 1000));
        sub->add_option("--seed", cfg.seed, "master seed");
        sub->add_option("--threads", cfg.threads, "worker cap (0 = auto)");
        sub->add_option("--output", cfg.output, "output path (default stdout)");
    };

    auto* fit = app.add_subcommand("fit", "fit a model and write it as JSON");
    add_common(fit, true, true);
    fit->add_option("--method", cfg.method, "unipairs|unipairs-2stage");
    fit->add_option("--hierarchy", cfg.hierarchy, "strong|weak|none (2stage only)");

    auto* predict = app.add_subcommand("predict", "predict from a saved model");
    predict->add_option("--input", cfg.input, "feature CSV path")->required();
    predict->add_option("--model", cfg.model_path, "model JSON path")->required();
    predict->add_option("--target", cfg.target, "target column to drop, if present");
    predict->add_option("--time-col", cfg.time_col, "survival time column to drop");
    predict->add_option("--status-col", cfg.status_col, "status column to drop");
    predict->add_option("--output", cfg.output, "output path (default stdout)");

    auto* scan = app.add_subcommand("scan", "dump the pair-scan table as CSV");
    add_common(scan, true, true);

    auto* simulate = app.add_subcommand("simulate", "run the simulation grid");
    simulate->add_option("--structures", cfg.structures,
                         "subset of mixed|hierarchical|anti_hierarchical|"
                         "interaction_only|main_only");
    simulate->add_option("--n", cfg.ns, "sample sizes (paired with --p)");
    simulate->add_option("--p", cfg.ps, "feature counts (paired with --n)");
    simulate->add_option("--rho", cfg.rhos, "AR(1) correlations");
    simulate->add_option("--snr", cfg.snrs, "signal-to-noise ratios");
    simulate->add_option("--reps", cfg.reps, "replicates per cell");
    simulate->add_option("--folds", cfg.folds, "CV folds")->check(CLI::Range(2, 1000));
    simulate->add_option("--seed", cfg.seed, "master seed");
    simulate->add_option("--threads", cfg.threads, "worker cap (0 = auto)");
    simulate->add_option("--output", cfg.output, "output CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_usage_error;
    }

    try {
        if (fit->parsed()) return cmd_fit(cfg);
        if (predict->parsed()) return cmd_predict(cfg);
        if (scan->parsed()) return cmd_scan(cfg);
        if (simulate->parsed()) return cmd_simulate(cfg);
    } catch (const unipairs::CsvError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return exit_data_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage_error;
    }
    return exit_usage_error;
}
