#include "erl/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace erl {

namespace {

// One entry of the unique feature path maintained by the TreeSHAP recursion.
struct PathElement {
    int d = -1;      // feature of the split that created the entry
    double z = 1.0;  // fraction of zero (cover-weighted) paths flowing through
    double o = 1.0;  // fraction of one (matching) paths flowing through
    double w = 0.0;  // permutation weight
};

using Path = std::vector<PathElement>;

void extend(Path& path, double pz, double po, int pi) {
    const std::size_t l = path.size();
    path.push_back({pi, pz, po, l == 0 ? 1.0 : 0.0});
    for (std::size_t j = l; j-- > 0;) {
        path[j + 1].w += po * path[j].w * static_cast<double>(j + 1) /
                         static_cast<double>(l + 1);
        path[j].w = pz * path[j].w * static_cast<double>(l - j) /
                    static_cast<double>(l + 1);
    }
}

void unwind(Path& path, std::size_t i0) {
    const std::size_t l = path.size();
    const double one = path[i0].o;
    const double zero = path[i0].z;
    double n = path[l - 1].w;
    for (std::size_t j = l - 1; j-- > 0;) {
        if (one != 0.0) {
            const double t = path[j].w;
            path[j].w = n * static_cast<double>(l) /
                        (static_cast<double>(j + 1) * one);
            n = t - path[j].w * zero * static_cast<double>(l - 1 - j) /
                        static_cast<double>(l);
        } else {
            path[j].w = path[j].w * static_cast<double>(l) /
                        (zero * static_cast<double>(l - 1 - j));
        }
    }
    for (std::size_t j = i0; j + 1 < l; ++j) {
        path[j].d = path[j + 1].d;
        path[j].z = path[j + 1].z;
        path[j].o = path[j + 1].o;
    }
    path.pop_back();
}

double unwound_sum(const Path& path, std::size_t i0) {
    Path copy = path;
    unwind(copy, i0);
    double s = 0.0;
    for (const auto& e : copy) s += e.w;
    return s;
}

struct TreeShapWorker {
    const DecisionTree& tree;
    const double* x;
    std::vector<std::array<double, kNumClasses>>& phi;

    void recurse(int node_id, Path path, double pz, double po, int pi) {
        extend(path, pz, po, pi);
        const TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
        if (node.feature < 0) {
            for (std::size_t i = 1; i < path.size(); ++i) {
                const double w = unwound_sum(path, i);
                const double scale = w * (path[i].o - path[i].z);
                auto& target = phi[static_cast<std::size_t>(path[i].d)];
                for (int k = 0; k < kNumClasses; ++k)
                    target[static_cast<std::size_t>(k)] +=
                        scale * node.value[static_cast<std::size_t>(k)];
            }
            return;
        }
        const TreeNode& left = tree.nodes[static_cast<std::size_t>(node.left)];
        const TreeNode& right = tree.nodes[static_cast<std::size_t>(node.right)];
        const bool go_left = x[node.feature] <= node.threshold;
        const int hot = go_left ? node.left : node.right;
        const int cold = go_left ? node.right : node.left;
        const double hot_cover = go_left ? left.cover : right.cover;
        const double cold_cover = go_left ? right.cover : left.cover;

        double iz = 1.0, io = 1.0;
        for (std::size_t j = 1; j < path.size(); ++j) {
            if (path[j].d == node.feature) {
                iz = path[j].z;
                io = path[j].o;
                unwind(path, j);
                break;
            }
        }
        recurse(hot, path, iz * hot_cover / node.cover, io, node.feature);
        recurse(cold, path, iz * cold_cover / node.cover, 0.0, node.feature);
    }
};

} // namespace

ShapValues tree_shap(const TreeEnsemble& ensemble, const std::vector<double>& x) {
    if (x.size() != ensemble.n_features)
        throw DimensionMismatch("tree_shap: input length mismatch");
    for (const auto& t : ensemble.trees)
        if (t.nodes.empty() || t.nodes[0].cover <= 0.0)
            throw ExplainerUnsupported("tree_shap: tree lacks cover metadata");

    ShapValues out;
    out.phi.assign(ensemble.n_features, {});

    const bool bagged = ensemble.kind == EnsembleKind::bagged;
    const double tree_scale =
        bagged ? 1.0 / static_cast<double>(ensemble.trees.size())
               : ensemble.learning_rate;

    if (!bagged) out.base = ensemble.base_score;

    std::vector<std::array<double, kNumClasses>> tree_phi(ensemble.n_features);
    for (const auto& tree : ensemble.trees) {
        for (auto& f : tree_phi) f = {};
        TreeShapWorker worker{tree, x.data(), tree_phi};
        worker.recurse(0, Path{}, 1.0, 1.0, -1);
        for (std::size_t f = 0; f < ensemble.n_features; ++f)
            for (int k = 0; k < kNumClasses; ++k)
                out.phi[f][static_cast<std::size_t>(k)] +=
                    tree_scale * tree_phi[f][static_cast<std::size_t>(k)];
        const auto ev = tree.expected_value();
        for (int k = 0; k < kNumClasses; ++k)
            out.base[static_cast<std::size_t>(k)] +=
                tree_scale * ev[static_cast<std::size_t>(k)];
    }
    return out;
}

ShapMatrix tree_shap_all(const TreeEnsemble& ensemble, const DataMatrix& X) {
    ShapMatrix m;
    m.n_features = ensemble.n_features;
    m.rows.reserve(X.rows);
    for (std::size_t r = 0; r < X.rows; ++r) {
        std::vector<double> x(X.row(r), X.row(r) + X.cols);
        m.rows.push_back(tree_shap(ensemble, x));
    }
    return m;
}

ImportanceRanking importance(const ShapMatrix& shap, std::optional<int> class_filter) {
    if (shap.rows.empty()) throw UndefinedImportance("importance: empty SHAP matrix");
    ImportanceRanking r;
    r.by_feature.assign(shap.n_features, 0.0);
    for (const auto& row : shap.rows) {
        for (std::size_t f = 0; f < shap.n_features; ++f) {
            if (class_filter) {
                r.by_feature[f] += std::abs(
                    row.phi[f][static_cast<std::size_t>(*class_filter)]);
            } else {
                for (int k = 0; k < kNumClasses; ++k)
                    r.by_feature[f] += std::abs(row.phi[f][static_cast<std::size_t>(k)]);
            }
        }
    }
    const double total = std::accumulate(r.by_feature.begin(), r.by_feature.end(), 0.0);
    if (total <= 0.0) throw UndefinedImportance("importance: all attributions are zero");
    for (auto& v : r.by_feature) v /= total;
    r.ranked.resize(shap.n_features);
    std::iota(r.ranked.begin(), r.ranked.end(), 0);
    std::stable_sort(r.ranked.begin(), r.ranked.end(), [&](int a, int b) {
        return r.by_feature[static_cast<std::size_t>(a)] >
               r.by_feature[static_cast<std::size_t>(b)];
    });
    return r;
}

LabeledData select_columns(const LabeledData& data, const std::vector<int>& keep) {
    LabeledData out;
    out.y = data.y;
    out.X = DataMatrix(data.X.rows, keep.size());
    for (std::size_t r = 0; r < data.X.rows; ++r)
        for (std::size_t c = 0; c < keep.size(); ++c)
            out.X.at(r, c) = data.X.at(r, static_cast<std::size_t>(keep[c]));
    return out;
}

std::vector<std::vector<int>> make_default_batches(const std::vector<double>& by_feature,
                                                   double floor) {
    std::vector<int> order(by_feature.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return by_feature[static_cast<std::size_t>(a)] <
               by_feature[static_cast<std::size_t>(b)];
    });
    std::vector<std::vector<int>> batches;
    std::vector<int> bulk;
    std::size_t i = 0;
    while (i < order.size() &&
           by_feature[static_cast<std::size_t>(order[i])] < floor) {
        bulk.push_back(order[i]);
        ++i;
    }
    if (!bulk.empty()) batches.push_back(std::move(bulk));
    for (; i < order.size(); ++i) batches.push_back({order[i]});
    return batches;
}

namespace {

MetricReport evaluate_model(const Model& model, const LabeledData& test) {
    std::vector<int> truths = test.y;
    std::vector<std::vector<double>> probas;
    probas.reserve(test.X.rows);
    for (std::size_t r = 0; r < test.X.rows; ++r) {
        std::vector<double> x(test.X.row(r), test.X.row(r) + test.X.cols);
        probas.push_back(predict_proba(model, x));
    }
    return evaluate(truths, probas);
}

MetricReport evaluate_prior(const LabeledData& train, const LabeledData& test,
                            const ClassWeights& weights) {
    std::array<double, kNumClasses> prior{};
    for (int y : train.y) prior[static_cast<std::size_t>(y)] += weights.of(y);
    double total = 0.0;
    for (double p : prior) total += p;
    std::vector<double> p(kNumClasses);
    for (int k = 0; k < kNumClasses; ++k)
        p[static_cast<std::size_t>(k)] = prior[static_cast<std::size_t>(k)] / total;
    std::vector<std::vector<double>> probas(test.X.rows, p);
    return evaluate(test.y, probas);
}

} // namespace

EliminationTrace backward_eliminate(const LabeledData& train, const LabeledData& test,
                                    const ClassWeights& weights, const ModelFitter& fit,
                                    std::uint64_t seed,
                                    const std::vector<std::vector<int>>& batches) {
    // batches must partition the feature set
    std::set<int> seen;
    std::size_t covered = 0;
    for (const auto& b : batches) {
        for (int f : b) {
            if (f < 0 || static_cast<std::size_t>(f) >= train.X.cols || seen.count(f))
                throw InvalidBatching("backward_eliminate: batches must partition features");
            seen.insert(f);
            ++covered;
        }
    }
    if (covered != train.X.cols)
        throw InvalidBatching("backward_eliminate: batches do not cover every feature");

    EliminationTrace trace;
    std::vector<int> remaining(train.X.cols);
    std::iota(remaining.begin(), remaining.end(), 0);

    {
        EliminationStep full;
        full.remaining_features = static_cast<int>(remaining.size());
        full.report = evaluate_model(fit(train, seed), test);
        trace.push_back(std::move(full));
    }

    for (const auto& batch : batches) {
        std::set<int> drop(batch.begin(), batch.end());
        std::vector<int> next;
        for (int f : remaining)
            if (!drop.count(f)) next.push_back(f);
        remaining = std::move(next);

        EliminationStep step;
        step.removed_batch = batch;
        step.remaining_features = static_cast<int>(remaining.size());
        if (remaining.empty()) {
            step.report = evaluate_prior(train, test, weights);
        } else {
            const LabeledData sub_train = select_columns(train, remaining);
            const LabeledData sub_test = select_columns(test, remaining);
            step.report = evaluate_model(fit(sub_train, seed), sub_test);
        }
        trace.push_back(std::move(step));
    }
    return trace;
}

} // namespace erl
