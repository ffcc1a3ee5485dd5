#ifndef ERL_MODELS_HPP
#define ERL_MODELS_HPP

#include "erl/errors.hpp"
#include "erl/features.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace erl {

/// Cost-sensitive class weights in ER, MR, PM order.
struct ClassWeights {
    std::array<double, kNumClasses> w{0.2, 0.5, 0.3};

    double of(int label) const { return w[static_cast<std::size_t>(label)]; }
};

/// Row-major dense matrix of training features.
struct DataMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> v;

    DataMatrix() = default;
    DataMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
    double* row(std::size_t r) { return v.data() + r * cols; }
    const double* row(std::size_t r) const { return v.data() + r * cols; }
};

/// Labeled training set (y holds Label codes 0..K-1).
struct LabeledData {
    DataMatrix X;
    std::vector<int> y;
};

/// Numerically stable softmax (max subtraction).
std::vector<double> softmax(const std::vector<double>& z);

/// Weighted cross-entropy of one sample; probabilities are clamped to
/// [1e-12, 1] before the log.
double cross_entropy(int true_class, const std::vector<double>& p, double weight);

/// Per-feature z-score statistics learned on the training set.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale; // 1.0 for constant columns

    void fit(const DataMatrix& X);
    void apply(std::vector<double>& x) const;
};

struct LrConfig {
    int max_iter = 800;
    double C = 1.0; // inverse regularization strength
    double tol = 1e-6;
};

struct SoftmaxRegressor {
    std::size_t n_features = 0;
    std::vector<double> W; // K x M row-major
    std::vector<double> b; // K
    Standardizer scaler;

    std::vector<double> predict_proba(const std::vector<double>& x) const;
};

struct MlpConfig {
    std::vector<int> hidden{256, 128};
    double learning_rate = 0.01;
    int max_epochs = 800;
    int batch_size = 128;
    int patience = 20; // early-stop patience on validation Macro-F1
};

struct MlpLayer {
    std::size_t in = 0, out = 0;
    std::vector<double> W; // out x in row-major
    std::vector<double> b; // out
};

struct MlpModel {
    std::size_t n_features = 0;
    std::vector<MlpLayer> layers; // last layer feeds softmax
    Standardizer scaler;

    std::vector<double> predict_proba(const std::vector<double>& x) const;
};

struct TreeNode {
    int feature = -1; // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double cover = 0.0; // training samples reaching the node
    std::array<double, kNumClasses> value{}; // leaf payload
};

struct DecisionTree {
    std::vector<TreeNode> nodes; // node 0 is the root

    bool leaf(int i) const { return nodes[static_cast<std::size_t>(i)].feature < 0; }
    /// Leaf payload for an input (x <= threshold goes left).
    const std::array<double, kNumClasses>& eval(const double* x) const;
    /// Cover-weighted expectation of the leaf payload.
    std::array<double, kNumClasses> expected_value() const;
};

enum class EnsembleKind { bagged, boosted };

struct RfConfig {
    int n_trees = 150;
    int max_depth = 7;
    int min_split = 2;
};

struct GbdtConfig {
    int rounds = 100;
    double learning_rate = 0.01;
    int max_depth = 6;
    double l2_leaf_penalty = 10.0;
};

struct TreeEnsemble {
    EnsembleKind kind = EnsembleKind::bagged;
    std::size_t n_features = 0;
    std::vector<DecisionTree> trees;
    double learning_rate = 1.0; // boosted only
    std::array<double, kNumClasses> base_score{}; // boosted only

    /// Raw margin: mean leaf distribution (bagged) or base + lr * sum of
    /// tree outputs (boosted).
    std::array<double, kNumClasses> margin(const std::vector<double>& x) const;
    std::vector<double> predict_proba(const std::vector<double>& x) const;
};

using Model = std::variant<SoftmaxRegressor, MlpModel, TreeEnsemble>;

std::vector<double> predict_proba(const Model& model, const std::vector<double>& x);
int predict(const Model& model, const std::vector<double>& x);
int argmax_class(const std::vector<double>& p);
std::size_t model_n_features(const Model& model);

SoftmaxRegressor fit_lr(const LabeledData& train, const ClassWeights& weights,
                        std::uint64_t seed, const LrConfig& cfg = {});

MlpModel fit_mlp(const LabeledData& train, const ClassWeights& weights,
                 std::uint64_t seed, const MlpConfig& cfg = {},
                 const LabeledData* validation = nullptr);

TreeEnsemble fit_rf(const LabeledData& train, const ClassWeights& weights,
                    std::uint64_t seed, const RfConfig& cfg = {});

TreeEnsemble fit_gbdt(const LabeledData& train, const ClassWeights& weights,
                      std::uint64_t seed, const GbdtConfig& cfg = {});

// --- internals exposed for gradient verification ---

/// Loss and gradient of the LR objective at theta = [W row-major, b].
/// Objective: mean weighted cross-entropy + ||W||^2 / (2 C N).
double lr_loss_grad(const DataMatrix& X, const std::vector<int>& y,
                    const ClassWeights& weights, double C,
                    const std::vector<double>& theta, std::vector<double>* grad);

/// Loss and gradient of the MLP objective (mean weighted cross-entropy) for
/// an arbitrary layer stack; gradients returned in the same layout.
double mlp_loss_grad(const std::vector<MlpLayer>& layers, const DataMatrix& X,
                     const std::vector<int>& y, const ClassWeights& weights,
                     std::vector<MlpLayer>* grad);

/// Weighted Gini impurity of per-class weight totals.
double weighted_gini(const std::array<double, kNumClasses>& class_weight_sums);

// --- persistence ---

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

} // namespace erl

#endif
