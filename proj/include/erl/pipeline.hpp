#ifndef ERL_PIPELINE_HPP
#define ERL_PIPELINE_HPP

#include "erl/explain.hpp"
#include "erl/metrics.hpp"
#include "erl/models.hpp"
#include "erl/synth.hpp"

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace erl {

struct RiskConfig {
    double w_cat = 0.4, w_deg = 0.2, w_flow = 0.2, w_stay = 0.2;
    std::array<double, kNumClasses> cat_weight{1.0, 0.6, 0.3}; // ER, MR, PM
};

/// One run-level configuration document. Unknown JSON keys are rejected.
struct RunConfig {
    std::uint64_t seed = 42;
    GeoPoint center{104.0657, 30.6570};
    int tz_offset_hours = 8;

    double stay_d_max_m = 200.0;
    std::int64_t stay_t_min_s = 1800;
    int erl_min_days = 10;
    int erl_min_stays_per_day = 1;

    std::array<double, 3> split_fractions{0.7, 0.1, 0.2}; // train, val, test
    ClassWeights class_weights;

    LrConfig lr;
    MlpConfig mlp;
    GbdtConfig gbdt;
    RfConfig rf;

    int repetitions = 5;
    double importance_floor = 0.002;
    RiskConfig risk;
    SynthConfig synth;

    static RunConfig from_json_file(const std::string& path);
    static RunConfig from_json_text(const std::string& text);
};

struct SplitSets {
    std::vector<std::string> train, val, test;
    bool stratified = true;
};

/// ERL-level stratified split with largest-remainder rounding per class.
/// Falls back to an unstratified split (stratified=false) when a class has
/// fewer than 3 ERLs.
SplitSets grouped_split(const std::vector<std::pair<std::string, Label>>& registry_erls,
                        const std::array<double, 3>& fractions, std::uint64_t seed);

void write_split_json(std::ostream& out, const SplitSets& s);
SplitSets read_split_json(std::istream& in);

/// Labeled samples restricted to an ERL partition, as a training matrix.
LabeledData dataset_from_samples(const std::vector<Sample>& samples,
                                 const std::vector<std::string>& erl_ids);

/// Full ingest -> stays -> ERLs -> per-shift samples run over the data files
/// in data_dir (traces.csv, poi.csv, raster.*, registry.json).
struct FeaturizeResult {
    std::vector<Erl> erls;
    std::vector<ErlStay> stays;
    std::vector<Sample> samples; // sorted by (shift, erl_id)
    IngestReport ingest;
};

FeaturizeResult featurize_directory(const std::string& data_dir, const RunConfig& cfg);

/// Registry ERLs restricted to those present in the sample table.
std::vector<std::pair<std::string, Label>> labeled_erls(const std::vector<Sample>& samples);

enum class ModelKind { lr, mlp, gbdt, rf };
ModelKind model_kind_from_name(const std::string& name);
const char* model_kind_name(ModelKind k);

Model fit_model(ModelKind kind, const LabeledData& train, const LabeledData* validation,
                const RunConfig& cfg, std::uint64_t seed);

MetricReport evaluate_on(const Model& model, const LabeledData& test);

/// Mean and standard deviation of each metric over `repetitions` seeded
/// repetitions, for the four models on identical per-repetition splits.
struct CompareCell {
    double mean = 0.0;
    double stddev = 0.0;
    bool failed = false;
};

struct CompareReport {
    // [model][metric]; metric order: accuracy, precision, recall, macro_f1, auroc
    std::array<std::array<CompareCell, 5>, 4> cells{};
    std::vector<std::string> errors;
};

extern const std::array<const char*, 5> kMetricNames;

CompareReport run_compare(const std::vector<Sample>& samples, const RunConfig& cfg);

void write_compare_csv(std::ostream& out, const CompareReport& r);

struct RiskScore {
    std::string erl_id;
    Shift shift;
    int predicted = 0;
    double score = 0.0;
    double c_cat = 0.0, c_deg = 0.0, c_flow = 0.0, c_stay = 0.0;
};

/// Risk ranking of one shift's samples given predicted categories; min-max
/// normalization over the shift, descending score, ties by erl_id.
std::vector<RiskScore> rank_risk(const std::vector<Sample>& shift_samples,
                                 const std::vector<int>& predictions,
                                 const RiskConfig& cfg);

void write_elimination_csv(std::ostream& out, const EliminationTrace& trace);
void write_shap_csv(std::ostream& out, const ShapMatrix& shap,
                    const std::vector<Sample>& samples);

} // namespace erl

#endif
