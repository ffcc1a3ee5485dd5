#ifndef ERL_METRICS_HPP
#define ERL_METRICS_HPP

#include "erl/features.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace erl {

/// K x K counts, rows = reference class, columns = predicted class.
struct ConfusionMatrix {
    std::array<std::array<long, kNumClasses>, kNumClasses> counts{};

    long total() const;
    long trace() const;
};

struct PerClassPRF {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool degenerate = false; // a 0/0 denominator was hit
};

struct PrfReport {
    std::array<PerClassPRF, kNumClasses> per_class{};
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
};

struct MetricReport {
    double accuracy = 0.0;
    double precision = 0.0; // macro
    double recall = 0.0;    // macro
    double macro_f1 = 0.0;
    double auroc = 0.0;     // macro one-vs-rest
    PrfReport detail;
    ConfusionMatrix cm;
};

/// Pairs are (true, predicted) class codes.
ConfusionMatrix confusion(const std::vector<std::pair<int, int>>& pairs);

double accuracy(const ConfusionMatrix& cm);

PrfReport precision_recall_f1(const ConfusionMatrix& cm);

/// Macro one-vs-rest AUC via the Mann-Whitney statistic (ties count 1/2).
/// Classes without both a positive and a negative are skipped; if none
/// contribute, throws UndefinedAuc.
double auroc(const std::vector<std::vector<double>>& scores,
             const std::vector<int>& truths);

/// One-vs-rest AUC for a single score column; same tie convention.
double binary_auc(const std::vector<double>& scores, const std::vector<bool>& positive);

MetricReport evaluate(const std::vector<int>& truths,
                      const std::vector<std::vector<double>>& probas);

void write_metric_json(std::ostream& out, const MetricReport& r);
void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm);

} // namespace erl

#endif
