#include "erl/metrics.hpp"
#include "erl/errors.hpp"
#include "erl/models.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace erl {

long ConfusionMatrix::total() const {
    long t = 0;
    for (const auto& row : counts)
        for (long c : row) t += c;
    return t;
}

long ConfusionMatrix::trace() const {
    long t = 0;
    for (int i = 0; i < kNumClasses; ++i)
        t += counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    return t;
}

ConfusionMatrix confusion(const std::vector<std::pair<int, int>>& pairs) {
    if (pairs.empty()) throw EmptyEvaluation("confusion: no evaluation pairs");
    ConfusionMatrix cm;
    for (const auto& [truth, pred] : pairs)
        cm.counts[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)] += 1;
    return cm;
}

double accuracy(const ConfusionMatrix& cm) {
    return static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
}

PrfReport precision_recall_f1(const ConfusionMatrix& cm) {
    PrfReport r;
    for (int k = 0; k < kNumClasses; ++k) {
        long tp = cm.counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)];
        long fp = 0, fn = 0;
        for (int j = 0; j < kNumClasses; ++j) {
            if (j == k) continue;
            fp += cm.counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
            fn += cm.counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
        }
        auto& pc = r.per_class[static_cast<std::size_t>(k)];
        if (tp + fp == 0) {
            pc.precision = 0.0;
            pc.degenerate = true;
        } else {
            pc.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        }
        if (tp + fn == 0) {
            pc.recall = 0.0;
            pc.degenerate = true;
        } else {
            pc.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
        }
        if (pc.precision + pc.recall == 0.0) {
            pc.f1 = 0.0;
        } else {
            pc.f1 = 2.0 * pc.precision * pc.recall / (pc.precision + pc.recall);
        }
        r.macro_precision += pc.precision / kNumClasses;
        r.macro_recall += pc.recall / kNumClasses;
        r.macro_f1 += pc.f1 / kNumClasses;
    }
    return r;
}

double binary_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
    long long n_pos = 0, n_neg = 0;
    for (bool p : positive) (p ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0)
        throw UndefinedAuc("binary_auc: need both a positive and a negative");
    // rank-sum with midranks for ties
    std::vector<std::size_t> idx(scores.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && scores[idx[j + 1]] == scores[idx[i]]) ++j;
        const double midrank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            if (positive[idx[k]]) pos_rank_sum += midrank;
        i = j + 1;
    }
    const double u = pos_rank_sum - static_cast<double>(n_pos) *
                                        (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auroc(const std::vector<std::vector<double>>& scores,
             const std::vector<int>& truths) {
    double sum = 0.0;
    int contributing = 0;
    for (int k = 0; k < kNumClasses; ++k) {
        std::vector<double> s(truths.size());
        std::vector<bool> pos(truths.size());
        bool any_pos = false, any_neg = false;
        for (std::size_t i = 0; i < truths.size(); ++i) {
            s[i] = scores[i][static_cast<std::size_t>(k)];
            pos[i] = truths[i] == k;
            (pos[i] ? any_pos : any_neg) = true;
        }
        if (!any_pos || !any_neg) continue; // skipped with a flag upstream
        sum += binary_auc(s, pos);
        ++contributing;
    }
    if (contributing == 0) throw UndefinedAuc("auroc: no class has both outcomes");
    return sum / contributing;
}

MetricReport evaluate(const std::vector<int>& truths,
                      const std::vector<std::vector<double>>& probas) {
    MetricReport r;
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(truths.size());
    for (std::size_t i = 0; i < truths.size(); ++i)
        pairs.emplace_back(truths[i], argmax_class(probas[i]));
    r.cm = confusion(pairs);
    r.accuracy = accuracy(r.cm);
    r.detail = precision_recall_f1(r.cm);
    r.precision = r.detail.macro_precision;
    r.recall = r.detail.macro_recall;
    r.macro_f1 = r.detail.macro_f1;
    r.auroc = auroc(probas, truths);
    return r;
}

void write_metric_json(std::ostream& out, const MetricReport& r) {
    nlohmann::json j;
    j["accuracy"] = r.accuracy;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["macro_f1"] = r.macro_f1;
    j["auroc"] = r.auroc;
    nlohmann::json per = nlohmann::json::object();
    for (int k = 0; k < kNumClasses; ++k) {
        const auto& pc = r.detail.per_class[static_cast<std::size_t>(k)];
        per[kLabelNames[static_cast<std::size_t>(k)]] = {{"precision", pc.precision},
                                                         {"recall", pc.recall},
                                                         {"f1", pc.f1},
                                                         {"degenerate", pc.degenerate}};
    }
    j["per_class"] = per;
    nlohmann::json cm = nlohmann::json::array();
    for (const auto& row : r.cm.counts) cm.push_back(row);
    j["confusion"] = cm;
    out << j.dump(2) << "\n";
}

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm) {
    out << "reference\\prediction";
    for (const auto* n : kLabelNames) out << ',' << n;
    out << '\n';
    for (int i = 0; i < kNumClasses; ++i) {
        out << kLabelNames[static_cast<std::size_t>(i)];
        for (int j = 0; j < kNumClasses; ++j)
            out << ',' << cm.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        out << '\n';
    }
}

} // namespace erl
