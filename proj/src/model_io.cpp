#include "erl/models.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace erl {

namespace {

using nlohmann::json;

json scaler_to_json(const Standardizer& s) {
    return {{"mean", s.mean}, {"scale", s.scale}};
}

Standardizer scaler_from_json(const json& j) {
    Standardizer s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.scale = j.at("scale").get<std::vector<double>>();
    return s;
}

json tree_to_json(const DecisionTree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
        nodes.push_back({{"f", n.feature},
                         {"t", n.threshold},
                         {"l", n.left},
                         {"r", n.right},
                         {"c", n.cover},
                         {"v", n.value}});
    }
    return nodes;
}

DecisionTree tree_from_json(const json& j) {
    DecisionTree t;
    for (const auto& nj : j) {
        TreeNode n;
        n.feature = nj.at("f").get<int>();
        n.threshold = nj.at("t").get<double>();
        n.left = nj.at("l").get<int>();
        n.right = nj.at("r").get<int>();
        n.cover = nj.at("c").get<double>();
        auto v = nj.at("v").get<std::vector<double>>();
        for (int k = 0; k < kNumClasses; ++k)
            n.value[static_cast<std::size_t>(k)] = v[static_cast<std::size_t>(k)];
        t.nodes.push_back(std::move(n));
    }
    return t;
}

} // namespace

void save_model(const Model& model, const std::string& path) {
    json j;
    j["format_version"] = 1;
    if (const auto* lr = std::get_if<SoftmaxRegressor>(&model)) {
        j["kind"] = "lr";
        j["n_features"] = lr->n_features;
        j["W"] = lr->W;
        j["b"] = lr->b;
        j["scaler"] = scaler_to_json(lr->scaler);
    } else if (const auto* mlp = std::get_if<MlpModel>(&model)) {
        j["kind"] = "mlp";
        j["n_features"] = mlp->n_features;
        json layers = json::array();
        for (const auto& L : mlp->layers)
            layers.push_back({{"in", L.in}, {"out", L.out}, {"W", L.W}, {"b", L.b}});
        j["layers"] = layers;
        j["scaler"] = scaler_to_json(mlp->scaler);
    } else {
        const auto& ens = std::get<TreeEnsemble>(model);
        j["kind"] = ens.kind == EnsembleKind::bagged ? "rf" : "gbdt";
        j["n_features"] = ens.n_features;
        j["learning_rate"] = ens.learning_rate;
        j["base_score"] = ens.base_score;
        json trees = json::array();
        for (const auto& t : ens.trees) trees.push_back(tree_to_json(t));
        j["trees"] = trees;
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file: " + path);
    out << j.dump() << "\n";
}

Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read model file: " + path);
    json j = json::parse(in);
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "lr") {
        SoftmaxRegressor m;
        m.n_features = j.at("n_features").get<std::size_t>();
        m.W = j.at("W").get<std::vector<double>>();
        m.b = j.at("b").get<std::vector<double>>();
        m.scaler = scaler_from_json(j.at("scaler"));
        return m;
    }
    if (kind == "mlp") {
        MlpModel m;
        m.n_features = j.at("n_features").get<std::size_t>();
        for (const auto& lj : j.at("layers")) {
            MlpLayer L;
            L.in = lj.at("in").get<std::size_t>();
            L.out = lj.at("out").get<std::size_t>();
            L.W = lj.at("W").get<std::vector<double>>();
            L.b = lj.at("b").get<std::vector<double>>();
            m.layers.push_back(std::move(L));
        }
        m.scaler = scaler_from_json(j.at("scaler"));
        return m;
    }
    if (kind == "rf" || kind == "gbdt") {
        TreeEnsemble m;
        m.kind = kind == "rf" ? EnsembleKind::bagged : EnsembleKind::boosted;
        m.n_features = j.at("n_features").get<std::size_t>();
        m.learning_rate = j.at("learning_rate").get<double>();
        auto base = j.at("base_score").get<std::vector<double>>();
        for (int k = 0; k < kNumClasses; ++k)
            m.base_score[static_cast<std::size_t>(k)] = base[static_cast<std::size_t>(k)];
        for (const auto& tj : j.at("trees")) m.trees.push_back(tree_from_json(tj));
        return m;
    }
    throw ModelError("unknown model kind: " + kind);
}

} // namespace erl
