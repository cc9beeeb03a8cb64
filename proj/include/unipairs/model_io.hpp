#pragma once

#include "unipairs/pipelines.hpp"

#include <json.hpp>

#include <string>

namespace unipairs {

inline HierarchyMode hierarchy_from_string(const std::string& s) {
    if (s == "strong") return HierarchyMode::strong;
    if (s == "weak") return HierarchyMode::weak;
    if (s == "none") return HierarchyMode::none;
    throw std::invalid_argument("unknown hierarchy mode: " + s);
}

inline FamilyTag family_from_string(const std::string& s) {
    if (s == "gaussian") return FamilyTag::gaussian;
    if (s == "binomial") return FamilyTag::binomial;
    if (s == "cox") return FamilyTag::cox;
    throw std::invalid_argument("unknown family: " + s);
}

inline nlohmann::json to_json(const InteractionModel& model) {
    nlohmann::json j;
    j["schema"] = "unipairs/1";
    j["method"] = model.method;
    j["hierarchy"] = to_string(model.hierarchy);
    j["family"] = to_string(model.family);
    j["intercept"] = model.beta0;
    j["p"] = model.p;

    nlohmann::json main = nlohmann::json::array();
    for (const auto& [idx, coef] : model.main) {
        const auto name = static_cast<std::size_t>(idx) < model.feature_names.size()
                              ? model.feature_names[static_cast<std::size_t>(idx)]
                              : "x" + std::to_string(idx);
        main.push_back({{"index", idx}, {"name", name}, {"coef", coef}});
    }
    j["main"] = main;

    nlohmann::json inter = nlohmann::json::array();
    for (const auto& [pr, coef] : model.interactions)
        inter.push_back({{"i", pr.j}, {"j", pr.k}, {"coef", coef}});
    j["interactions"] = inter;

    j["scan"] = {{"n_pairs_scanned", model.scan.n_pairs_scanned},
                 {"n_selected", model.scan.n_selected},
                 {"r_hat", model.scan.r_hat}};

    nlohmann::json mu = nlohmann::json::array(), sigma = nlohmann::json::array();
    for (Eigen::Index c = 0; c < model.p; ++c) {
        mu.push_back(model.mu[c]);
        sigma.push_back(model.sigma[c]);
    }
    j["scale"] = {{"mu", mu}, {"sigma", sigma}};
    j["seed"] = model.seed;
    return j;
}

inline InteractionModel model_from_json(const nlohmann::json& j) {
    InteractionModel model;
    model.method = j.at("method").get<std::string>();
    model.hierarchy = hierarchy_from_string(j.at("hierarchy").get<std::string>());
    if (j.contains("family")) model.family = family_from_string(j.at("family").get<std::string>());
    model.beta0 = j.at("intercept").get<double>();
    model.p = j.at("p").get<Eigen::Index>();
    model.seed = j.at("seed").get<std::uint64_t>();

    model.feature_names.assign(static_cast<std::size_t>(model.p), "");
    for (const auto& e : j.at("main")) {
        const auto idx = e.at("index").get<Eigen::Index>();
        model.main[idx] = e.at("coef").get<double>();
        model.active_main.push_back(idx);
        model.feature_names[static_cast<std::size_t>(idx)] = e.at("name").get<std::string>();
    }
    for (const auto& e : j.at("interactions")) {
        Pair pr{e.at("i").get<Eigen::Index>(), e.at("j").get<Eigen::Index>()};
        model.interactions[pr] = e.at("coef").get<double>();
        model.active_interactions.push_back(pr);
    }
    const auto& scan = j.at("scan");
    model.scan.n_pairs_scanned = scan.at("n_pairs_scanned").get<std::size_t>();
    model.scan.n_selected = scan.at("n_selected").get<std::size_t>();
    model.scan.r_hat = scan.at("r_hat").get<std::size_t>();

    const auto& scale = j.at("scale");
    model.mu.resize(model.p);
    model.sigma.resize(model.p);
    for (Eigen::Index c = 0; c < model.p; ++c) {
        model.mu[c] = scale.at("mu")[static_cast<std::size_t>(c)].get<double>();
        model.sigma[c] = scale.at("sigma")[static_cast<std::size_t>(c)].get<double>();
    }
    for (std::size_t i = 0; i < model.feature_names.size(); ++i)
        if (model.feature_names[i].empty()) model.feature_names[i] = "x" + std::to_string(i);
    return model;
}

}  // namespace unipairs
