#include "erl/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace erl {

const std::array<double, kNumClasses>& DecisionTree::eval(const double* x) const {
    int i = 0;
    while (!leaf(i)) {
        const TreeNode& n = nodes[static_cast<std::size_t>(i)];
        i = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

std::array<double, kNumClasses> DecisionTree::expected_value() const {
    std::array<double, kNumClasses> acc{};
    double total = nodes[0].cover;
    for (const auto& n : nodes) {
        if (n.feature >= 0) continue;
        for (int k = 0; k < kNumClasses; ++k)
            acc[static_cast<std::size_t>(k)] +=
                n.cover / total * n.value[static_cast<std::size_t>(k)];
    }
    return acc;
}

std::array<double, kNumClasses> TreeEnsemble::margin(const std::vector<double>& x) const {
    if (x.size() != n_features)
        throw DimensionMismatch("feature vector length " + std::to_string(x.size()) +
                                ", ensemble expects " + std::to_string(n_features));
    std::array<double, kNumClasses> out{};
    if (kind == EnsembleKind::bagged) {
        for (const auto& t : trees) {
            const auto& v = t.eval(x.data());
            for (int k = 0; k < kNumClasses; ++k)
                out[static_cast<std::size_t>(k)] += v[static_cast<std::size_t>(k)];
        }
        for (auto& v : out) v /= static_cast<double>(trees.size());
    } else {
        out = base_score;
        for (const auto& t : trees) {
            const auto& v = t.eval(x.data());
            for (int k = 0; k < kNumClasses; ++k)
                out[static_cast<std::size_t>(k)] +=
                    learning_rate * v[static_cast<std::size_t>(k)];
        }
    }
    return out;
}

std::vector<double> TreeEnsemble::predict_proba(const std::vector<double>& x) const {
    auto m = margin(x);
    std::vector<double> v(m.begin(), m.end());
    if (kind == EnsembleKind::boosted) return softmax(v);
    // bagged distributions already sum to 1
    return v;
}

double weighted_gini(const std::array<double, kNumClasses>& class_weight_sums) {
    double total = 0.0;
    for (double w : class_weight_sums) total += w;
    if (total <= 0.0) return 0.0;
    double g = 1.0;
    for (double w : class_weight_sums) {
        const double p = w / total;
        g -= p * p;
    }
    return g;
}

namespace {

void require_multiclass(const std::vector<int>& y) {
    std::array<int, kNumClasses> counts{};
    for (int label : y) counts[static_cast<std::size_t>(label)] += 1;
    int present = 0;
    for (int c : counts) present += c > 0;
    if (present < 2) throw DegenerateLabels("training set has fewer than two classes");
}

// Shared recursive builder for classification (weighted Gini) trees.
struct ClassTreeBuilder {
    const DataMatrix& X;
    const std::vector<int>& y;
    const ClassWeights& weights;
    int max_depth;
    int min_split;
    std::size_t features_per_node; // 0 = all
    std::mt19937_64& rng;
    DecisionTree tree;

    int build(std::vector<std::size_t>& idx, int depth) {
        std::array<double, kNumClasses> wsum{};
        for (std::size_t i : idx)
            wsum[static_cast<std::size_t>(y[i])] += weights.of(y[i]);
        const double node_impurity = weighted_gini(wsum);

        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.back().cover = static_cast<double>(idx.size());

        bool stop = depth >= max_depth || idx.size() < static_cast<std::size_t>(min_split) ||
                    node_impurity <= 0.0;
        int best_feature = -1;
        double best_threshold = 0.0, best_score = node_impurity;
        if (!stop) {
            std::vector<int> candidates(X.cols);
            std::iota(candidates.begin(), candidates.end(), 0);
            if (features_per_node > 0 && features_per_node < X.cols) {
                std::shuffle(candidates.begin(), candidates.end(), rng);
                candidates.resize(features_per_node);
                std::sort(candidates.begin(), candidates.end());
            }
            std::vector<std::pair<double, int>> vals(idx.size());
            const double total_w = [&] {
                double t = 0.0;
                for (double w : wsum) t += w;
                return t;
            }();
            for (int f : candidates) {
                for (std::size_t i = 0; i < idx.size(); ++i)
                    vals[i] = {X.at(idx[i], static_cast<std::size_t>(f)), y[idx[i]]};
                std::sort(vals.begin(), vals.end());
                std::array<double, kNumClasses> left{};
                std::array<double, kNumClasses> right = wsum;
                double left_w = 0.0;
                for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                    const double w = weights.of(vals[i].second);
                    left[static_cast<std::size_t>(vals[i].second)] += w;
                    right[static_cast<std::size_t>(vals[i].second)] -= w;
                    left_w += w;
                    if (vals[i].first == vals[i + 1].first) continue;
                    const double score = (left_w * weighted_gini(left) +
                                          (total_w - left_w) * weighted_gini(right)) /
                                         total_w;
                    if (score < best_score - 1e-12) {
                        best_score = score;
                        best_feature = f;
                        best_threshold = (vals[i].first + vals[i + 1].first) / 2.0;
                    }
                }
            }
        }

        if (best_feature < 0) {
            // leaf: weighted class distribution
            double total = 0.0;
            for (double w : wsum) total += w;
            auto& node = tree.nodes[static_cast<std::size_t>(node_id)];
            for (int k = 0; k < kNumClasses; ++k)
                node.value[static_cast<std::size_t>(k)] =
                    total > 0 ? wsum[static_cast<std::size_t>(k)] / total : 0.0;
            return node_id;
        }

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : idx) {
            if (X.at(i, static_cast<std::size_t>(best_feature)) <= best_threshold)
                left_idx.push_back(i);
            else
                right_idx.push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();
        const int l = build(left_idx, depth + 1);
        const int r = build(right_idx, depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(node_id)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = l;
        node.right = r;
        return node_id;
    }
};

// Regression tree on a single gradient-target column (squared-error splits);
// leaf value = sum(targets) / (count + l2).
struct RegTreeBuilder {
    const DataMatrix& X;
    const std::vector<double>& target;
    int max_depth;
    double l2;
    int cls; // class slot the leaf value occupies
    DecisionTree tree;

    int build(std::vector<std::size_t>& idx, int depth) {
        double sum = 0.0, sum2 = 0.0;
        for (std::size_t i : idx) {
            sum += target[i];
            sum2 += target[i] * target[i];
        }
        const double n = static_cast<double>(idx.size());
        const double sse = sum2 - sum * sum / n;

        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.back().cover = n;

        int best_feature = -1;
        double best_threshold = 0.0, best_sse = sse - 1e-12;
        if (depth < max_depth && idx.size() >= 2 && sse > 1e-12) {
            std::vector<std::pair<double, double>> vals(idx.size());
            for (std::size_t f = 0; f < X.cols; ++f) {
                for (std::size_t i = 0; i < idx.size(); ++i)
                    vals[i] = {X.at(idx[i], f), target[idx[i]]};
                std::sort(vals.begin(), vals.end());
                double lsum = 0.0, lsum2 = 0.0;
                for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                    lsum += vals[i].second;
                    lsum2 += vals[i].second * vals[i].second;
                    if (vals[i].first == vals[i + 1].first) continue;
                    const double ln = static_cast<double>(i + 1);
                    const double rn = n - ln;
                    const double rsum = sum - lsum;
                    const double rsum2 = sum2 - lsum2;
                    const double split_sse = (lsum2 - lsum * lsum / ln) +
                                             (rsum2 - rsum * rsum / rn);
                    if (split_sse < best_sse) {
                        best_sse = split_sse;
                        best_feature = static_cast<int>(f);
                        best_threshold = (vals[i].first + vals[i + 1].first) / 2.0;
                    }
                }
            }
        }

        if (best_feature < 0) {
            tree.nodes[static_cast<std::size_t>(node_id)].value[static_cast<std::size_t>(
                cls)] = sum / (n + l2);
            return node_id;
        }

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : idx) {
            if (X.at(i, static_cast<std::size_t>(best_feature)) <= best_threshold)
                left_idx.push_back(i);
            else
                right_idx.push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();
        const int l = build(left_idx, depth + 1);
        const int r = build(right_idx, depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(node_id)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = l;
        node.right = r;
        return node_id;
    }
};

} // namespace

TreeEnsemble fit_rf(const LabeledData& train, const ClassWeights& weights,
                    std::uint64_t seed, const RfConfig& cfg) {
    require_multiclass(train.y);
    TreeEnsemble forest;
    forest.kind = EnsembleKind::bagged;
    forest.n_features = train.X.cols;
    const std::size_t n = train.X.rows;
    const std::size_t mtry = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::sqrt(static_cast<double>(train.X.cols))));

    for (int t = 0; t < cfg.n_trees; ++t) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(t));
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::vector<std::size_t> idx(n);
        for (auto& i : idx) i = pick(rng); // bootstrap
        ClassTreeBuilder builder{train.X, train.y, weights, cfg.max_depth,
                                 cfg.min_split, mtry, rng, {}};
        builder.build(idx, 0);
        forest.trees.push_back(std::move(builder.tree));
    }
    return forest;
}

TreeEnsemble fit_gbdt(const LabeledData& train, const ClassWeights& weights,
                      std::uint64_t seed, const GbdtConfig& cfg) {
    (void)seed; // boosting here has no stochastic component
    require_multiclass(train.y);
    TreeEnsemble model;
    model.kind = EnsembleKind::boosted;
    model.n_features = train.X.cols;
    model.learning_rate = cfg.learning_rate;
    model.base_score = {};

    const std::size_t n = train.X.rows;
    std::vector<std::array<double, kNumClasses>> margins(n, model.base_score);

    for (int round = 0; round < cfg.rounds; ++round) {
        // all K trees of a round are fit from the same round-start probabilities
        std::vector<std::array<double, kNumClasses>> probs(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> z(margins[i].begin(), margins[i].end());
            auto p = softmax(z);
            std::copy(p.begin(), p.end(), probs[i].begin());
        }
        std::vector<double> target(n);
        for (int k = 0; k < kNumClasses; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                const double wi = weights.of(train.y[i]);
                target[i] = wi * ((train.y[i] == k ? 1.0 : 0.0) -
                                  probs[i][static_cast<std::size_t>(k)]);
            }
            std::vector<std::size_t> idx(n);
            std::iota(idx.begin(), idx.end(), 0);
            RegTreeBuilder builder{train.X, target, cfg.max_depth,
                                   cfg.l2_leaf_penalty, k, {}};
            builder.build(idx, 0);
            for (std::size_t i = 0; i < n; ++i) {
                const auto& v = builder.tree.eval(train.X.row(i));
                margins[i][static_cast<std::size_t>(k)] +=
                    cfg.learning_rate * v[static_cast<std::size_t>(k)];
            }
            model.trees.push_back(std::move(builder.tree));
        }
    }
    return model;
}

std::vector<double> predict_proba(const Model& model, const std::vector<double>& x) {
    return std::visit([&](const auto& m) { return m.predict_proba(x); }, model);
}

int predict(const Model& model, const std::vector<double>& x) {
    return argmax_class(predict_proba(model, x));
}

std::size_t model_n_features(const Model& model) {
    return std::visit([](const auto& m) { return m.n_features; }, model);
}

} // namespace erl
