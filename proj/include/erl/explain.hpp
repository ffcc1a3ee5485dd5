#ifndef ERL_EXPLAIN_HPP
#define ERL_EXPLAIN_HPP

#include "erl/metrics.hpp"
#include "erl/models.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace erl {

/// Per-feature, per-class attributions for one input, with the base
/// (all-features-missing) output. base[k] + sum_f phi[f][k] equals the
/// ensemble margin for class k.
struct ShapValues {
    std::vector<std::array<double, kNumClasses>> phi; // [feature][class]
    std::array<double, kNumClasses> base{};
};

/// Path-dependent TreeSHAP over cover-weighted conditional expectations.
ShapValues tree_shap(const TreeEnsemble& ensemble, const std::vector<double>& x);

/// Attributions for a batch of inputs; rows of X are explained independently.
struct ShapMatrix {
    std::size_t n_features = 0;
    std::vector<ShapValues> rows;
};

ShapMatrix tree_shap_all(const TreeEnsemble& ensemble, const DataMatrix& X);

struct ImportanceRanking {
    std::vector<double> by_feature;          // normalized to sum 1
    std::vector<int> ranked;                 // feature indices, descending importance
};

/// Mean |phi| per feature over samples (and classes unless filtered),
/// normalized so the total is 1.
ImportanceRanking importance(const ShapMatrix& shap,
                             std::optional<int> class_filter = std::nullopt);

struct EliminationStep {
    std::vector<int> removed_batch; // empty for the initial full-model entry
    int remaining_features = 0;
    MetricReport report;
};

using EliminationTrace = std::vector<EliminationStep>;

/// Refit callback: trains a model on a column-subset dataset with the run seed.
using ModelFitter =
    std::function<Model(const LabeledData& train, std::uint64_t seed)>;

/// Drop feature batches in order, refit and evaluate after each drop. The
/// final (zero-feature) entry uses the class-weighted-prior predictor.
/// Batches must partition the feature set.
EliminationTrace backward_eliminate(const LabeledData& train, const LabeledData& test,
                                    const ClassWeights& weights, const ModelFitter& fit,
                                    std::uint64_t seed,
                                    const std::vector<std::vector<int>>& batches);

/// Default batching: one bulk batch of every feature with importance below
/// the floor, then singleton batches in ascending importance order.
std::vector<std::vector<int>> make_default_batches(const std::vector<double>& by_feature,
                                                   double floor = 0.002);

/// Column-subset copy (keeps the listed feature indices, in order).
LabeledData select_columns(const LabeledData& data, const std::vector<int>& keep);

} // namespace erl

#endif
