#include "erl/pipeline.hpp"
#include "erl/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace erl {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void opt(const json& j, const char* key, T& target) {
    if (j.contains(key)) target = j.at(key).get<T>();
}

void parse_weights(const json& j, ClassWeights& w, const std::string& where) {
    reject_unknown(j, {"ER", "MR", "PM"}, where);
    opt(j, "ER", w.w[0]);
    opt(j, "MR", w.w[1]);
    opt(j, "PM", w.w[2]);
    for (double v : w.w)
        if (!(v > 0)) throw ConfigError("config: class weights must be positive");
}

} // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    RunConfig cfg;
    try {
        reject_unknown(j,
                       {"seed", "center", "tz_offset_hours", "stay_point", "erl", "split",
                        "class_weights", "models", "repetitions", "importance_floor",
                        "risk", "synth"},
                       "root");
        opt(j, "seed", cfg.seed);
        if (j.contains("center")) {
            const auto& c = j.at("center");
            reject_unknown(c, {"lon", "lat"}, "center");
            opt(c, "lon", cfg.center.lon);
            opt(c, "lat", cfg.center.lat);
        }
        opt(j, "tz_offset_hours", cfg.tz_offset_hours);
        if (j.contains("stay_point")) {
            const auto& s = j.at("stay_point");
            reject_unknown(s, {"d_max_m", "t_min_s"}, "stay_point");
            opt(s, "d_max_m", cfg.stay_d_max_m);
            opt(s, "t_min_s", cfg.stay_t_min_s);
        }
        if (j.contains("erl")) {
            const auto& e = j.at("erl");
            reject_unknown(e, {"min_days", "min_stays_per_day"}, "erl");
            opt(e, "min_days", cfg.erl_min_days);
            opt(e, "min_stays_per_day", cfg.erl_min_stays_per_day);
        }
        if (j.contains("split")) {
            const auto& s = j.at("split");
            reject_unknown(s, {"train", "val", "test"}, "split");
            opt(s, "train", cfg.split_fractions[0]);
            opt(s, "val", cfg.split_fractions[1]);
            opt(s, "test", cfg.split_fractions[2]);
            const double sum = cfg.split_fractions[0] + cfg.split_fractions[1] +
                               cfg.split_fractions[2];
            if (std::abs(sum - 1.0) > 1e-9)
                throw ConfigError("config: split fractions must sum to 1");
        }
        if (j.contains("class_weights"))
            parse_weights(j.at("class_weights"), cfg.class_weights, "class_weights");
        if (j.contains("models")) {
            const auto& m = j.at("models");
            reject_unknown(m, {"lr", "mlp", "gbdt", "rf"}, "models");
            if (m.contains("lr")) {
                const auto& x = m.at("lr");
                reject_unknown(x, {"max_iter", "C", "tol"}, "models.lr");
                opt(x, "max_iter", cfg.lr.max_iter);
                opt(x, "C", cfg.lr.C);
                opt(x, "tol", cfg.lr.tol);
            }
            if (m.contains("mlp")) {
                const auto& x = m.at("mlp");
                reject_unknown(x, {"hidden", "learning_rate", "max_epochs", "batch_size",
                                   "patience"},
                               "models.mlp");
                opt(x, "hidden", cfg.mlp.hidden);
                opt(x, "learning_rate", cfg.mlp.learning_rate);
                opt(x, "max_epochs", cfg.mlp.max_epochs);
                opt(x, "batch_size", cfg.mlp.batch_size);
                opt(x, "patience", cfg.mlp.patience);
            }
            if (m.contains("gbdt")) {
                const auto& x = m.at("gbdt");
                reject_unknown(x, {"rounds", "learning_rate", "max_depth", "l2_leaf_penalty"},
                               "models.gbdt");
                opt(x, "rounds", cfg.gbdt.rounds);
                opt(x, "learning_rate", cfg.gbdt.learning_rate);
                opt(x, "max_depth", cfg.gbdt.max_depth);
                opt(x, "l2_leaf_penalty", cfg.gbdt.l2_leaf_penalty);
            }
            if (m.contains("rf")) {
                const auto& x = m.at("rf");
                reject_unknown(x, {"n_trees", "max_depth", "min_split"}, "models.rf");
                opt(x, "n_trees", cfg.rf.n_trees);
                opt(x, "max_depth", cfg.rf.max_depth);
                opt(x, "min_split", cfg.rf.min_split);
            }
        }
        opt(j, "repetitions", cfg.repetitions);
        opt(j, "importance_floor", cfg.importance_floor);
        if (j.contains("risk")) {
            const auto& r = j.at("risk");
            reject_unknown(r, {"w_cat", "w_deg", "w_flow", "w_stay", "cat_weight"}, "risk");
            opt(r, "w_cat", cfg.risk.w_cat);
            opt(r, "w_deg", cfg.risk.w_deg);
            opt(r, "w_flow", cfg.risk.w_flow);
            opt(r, "w_stay", cfg.risk.w_stay);
            if (r.contains("cat_weight")) {
                const auto& c = r.at("cat_weight");
                reject_unknown(c, {"ER", "MR", "PM"}, "risk.cat_weight");
                opt(c, "ER", cfg.risk.cat_weight[0]);
                opt(c, "MR", cfg.risk.cat_weight[1]);
                opt(c, "PM", cfg.risk.cat_weight[2]);
            }
        }
        if (j.contains("synth")) {
            const auto& s = j.at("synth");
            reject_unknown(s, {"n_er", "n_mr", "n_pm", "n_days", "start_date",
                               "city_radius_m", "background_poi"},
                           "synth");
            opt(s, "n_er", cfg.synth.n_erls[0]);
            opt(s, "n_mr", cfg.synth.n_erls[1]);
            opt(s, "n_pm", cfg.synth.n_erls[2]);
            opt(s, "n_days", cfg.synth.n_days);
            opt(s, "start_date", cfg.synth.start_date);
            opt(s, "city_radius_m", cfg.synth.city_radius_m);
            opt(s, "background_poi", cfg.synth.background_poi);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    // the generator and the pipeline share the run-level knobs
    cfg.synth.seed = cfg.seed;
    cfg.synth.center = cfg.center;
    cfg.synth.tz_offset_hours = cfg.tz_offset_hours;
    return cfg;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

namespace {

std::array<std::size_t, 3> largest_remainder(std::size_t n,
                                             const std::array<double, 3>& fractions) {
    std::array<std::size_t, 3> sizes{};
    std::array<double, 3> remainder{};
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        const double exact = fractions[static_cast<std::size_t>(i)] * static_cast<double>(n);
        sizes[static_cast<std::size_t>(i)] = static_cast<std::size_t>(std::floor(exact));
        remainder[static_cast<std::size_t>(i)] =
            exact - std::floor(exact);
        assigned += sizes[static_cast<std::size_t>(i)];
    }
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return remainder[static_cast<std::size_t>(a)] > remainder[static_cast<std::size_t>(b)];
    });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned)
        sizes[static_cast<std::size_t>(order[i % 3])] += 1;
    return sizes;
}

void split_group(std::vector<std::string> ids, const std::array<double, 3>& fractions,
                 std::mt19937_64& rng, SplitSets& out) {
    std::sort(ids.begin(), ids.end());
    std::shuffle(ids.begin(), ids.end(), rng);
    const auto sizes = largest_remainder(ids.size(), fractions);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < sizes[0]; ++i) out.train.push_back(ids[pos++]);
    for (std::size_t i = 0; i < sizes[1]; ++i) out.val.push_back(ids[pos++]);
    for (std::size_t i = 0; i < sizes[2]; ++i) out.test.push_back(ids[pos++]);
}

} // namespace

SplitSets grouped_split(const std::vector<std::pair<std::string, Label>>& registry_erls,
                        const std::array<double, 3>& fractions, std::uint64_t seed) {
    std::array<std::vector<std::string>, kNumClasses> by_class;
    for (const auto& [id, label] : registry_erls)
        by_class[static_cast<std::size_t>(label)].push_back(id);

    SplitSets out;
    bool can_stratify = true;
    for (const auto& ids : by_class)
        if (!ids.empty() && ids.size() < 3) can_stratify = false;

    std::mt19937_64 rng(seed);
    // partition sizes follow largest-remainder rounding of the OVERALL count;
    // classes are then apportioned within those global sizes
    std::array<std::size_t, 3> rem = largest_remainder(registry_erls.size(), fractions);
    if (can_stratify) {
        // smallest classes first so each still finds room in every partition
        std::array<int, kNumClasses> class_order{0, 1, 2};
        std::stable_sort(class_order.begin(), class_order.end(), [&](int a, int b) {
            return by_class[static_cast<std::size_t>(a)].size() <
                   by_class[static_cast<std::size_t>(b)].size();
        });
        for (int ci : class_order) {
            auto& ids = by_class[static_cast<std::size_t>(ci)];
            if (ids.empty()) continue;
            std::sort(ids.begin(), ids.end());
            std::shuffle(ids.begin(), ids.end(), rng);
            const std::size_t nc = ids.size();
            const std::size_t rem_total = rem[0] + rem[1] + rem[2];

            // quotas proportional to each partition's remaining capacity
            std::array<std::size_t, 3> q{};
            std::array<double, 3> frac{};
            std::size_t assigned = 0;
            for (std::size_t i = 0; i < 3; ++i) {
                const double exact =
                    rem_total ? static_cast<double>(nc) * static_cast<double>(rem[i]) /
                                    static_cast<double>(rem_total)
                              : 0.0;
                q[i] = std::min(static_cast<std::size_t>(std::floor(exact)), rem[i]);
                frac[i] = exact - std::floor(exact);
                assigned += q[i];
            }
            while (assigned < nc) {
                int best = -1;
                for (int i = 0; i < 3; ++i)
                    if (q[static_cast<std::size_t>(i)] < rem[static_cast<std::size_t>(i)] &&
                        (best < 0 || frac[static_cast<std::size_t>(i)] >
                                         frac[static_cast<std::size_t>(best)]))
                        best = i;
                q[static_cast<std::size_t>(best)] += 1;
                frac[static_cast<std::size_t>(best)] -= 1.0;
                ++assigned;
            }
            // coverage: every partition with remaining capacity gets at least
            // one of this class when the class can spare it
            for (std::size_t i = 0; i < 3; ++i) {
                if (rem[i] == 0 || q[i] > 0) continue;
                std::size_t donor = 3;
                for (std::size_t j = 0; j < 3; ++j)
                    if (q[j] >= 2 && (donor == 3 || q[j] > q[donor])) donor = j;
                if (donor < 3) {
                    q[donor] -= 1;
                    q[i] += 1;
                }
            }
            std::size_t pos = 0;
            for (std::size_t i = 0; i < q[0]; ++i) out.train.push_back(ids[pos++]);
            for (std::size_t i = 0; i < q[1]; ++i) out.val.push_back(ids[pos++]);
            for (std::size_t i = 0; i < q[2]; ++i) out.test.push_back(ids[pos++]);
            for (std::size_t i = 0; i < 3; ++i) rem[i] -= q[i];
        }
    } else {
        out.stratified = false;
        std::vector<std::string> all;
        for (const auto& [id, label] : registry_erls) {
            (void)label;
            all.push_back(id);
        }
        split_group(std::move(all), fractions, rng, out);
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.val.begin(), out.val.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

void write_split_json(std::ostream& out, const SplitSets& s) {
    json j;
    j["train"] = s.train;
    j["val"] = s.val;
    j["test"] = s.test;
    j["stratified"] = s.stratified;
    out << j.dump(2) << "\n";
}

SplitSets read_split_json(std::istream& in) {
    json j = json::parse(in);
    SplitSets s;
    s.train = j.at("train").get<std::vector<std::string>>();
    s.val = j.at("val").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
    s.stratified = j.value("stratified", true);
    return s;
}

LabeledData dataset_from_samples(const std::vector<Sample>& samples,
                                 const std::vector<std::string>& erl_ids) {
    std::set<std::string> wanted(erl_ids.begin(), erl_ids.end());
    std::vector<const Sample*> rows;
    for (const auto& s : samples)
        if (s.label && wanted.count(s.erl_id)) rows.push_back(&s);
    LabeledData data;
    data.X = DataMatrix(rows.size(), kNumFeatures);
    data.y.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::copy(rows[r]->features.begin(), rows[r]->features.end(), data.X.row(r));
        data.y.push_back(static_cast<int>(*rows[r]->label));
    }
    return data;
}

FeaturizeResult featurize_directory(const std::string& data_dir, const RunConfig& cfg) {
    FeaturizeResult out;

    std::ifstream traces(data_dir + "/traces.csv");
    if (!traces) throw DataError("featurize: missing " + data_dir + "/traces.csv");
    auto trucks = ingest_traces(traces, out.ingest);

    std::vector<StayPoint> stays;
    for (const auto& [id, points] : trucks) {
        (void)id;
        auto s = detect_stay_points(points, cfg.center, cfg.stay_d_max_m, cfg.stay_t_min_s);
        stays.insert(stays.end(), s.begin(), s.end());
    }

    out.erls = extract_erls(stays, cfg.erl_min_days, cfg.erl_min_stays_per_day,
                            cfg.tz_offset_hours);

    std::map<GridCell, const Erl*> cell_to_erl;
    for (const auto& e : out.erls)
        for (const auto& c : e.cells) cell_to_erl[c] = &e;

    out.stays.reserve(stays.size());
    for (auto& s : stays) {
        ErlStay es;
        es.stay = std::move(s);
        if (auto it = cell_to_erl.find(cell_of(es.stay.pos)); it != cell_to_erl.end())
            es.erl_id = it->second->erl_id;
        out.stays.push_back(std::move(es));
    }

    const LandCoverRaster raster = LandCoverRaster::load(data_dir + "/raster");
    PoiIndex poi;
    {
        std::ifstream poi_in(data_dir + "/poi.csv");
        if (!poi_in) throw DataError("featurize: missing " + data_dir + "/poi.csv");
        poi = PoiIndex(load_poi_csv(poi_in, cfg.center));
    }
    Registry registry;
    {
        std::ifstream reg_in(data_dir + "/registry.json");
        if (reg_in) registry = load_registry_json(reg_in);
    }

    // group ERL stays by shift, then per-shift OD and samples
    std::map<Shift, std::map<std::string, std::vector<StayPoint>>> by_shift;
    for (const auto& es : out.stays) {
        if (!es.erl_id) continue;
        by_shift[shift_of(es.stay.t_start, cfg.tz_offset_hours)][*es.erl_id].push_back(
            es.stay);
    }
    std::map<std::string, const Erl*> erl_by_id;
    for (const auto& e : out.erls) erl_by_id[e.erl_id] = &e;

    for (const auto& [shift, per_erl] : by_shift) {
        const OdNetwork od = build_od(out.stays, shift, cfg.tz_offset_hours);
        for (const auto& [erl_id, erl_stays] : per_erl) {
            out.samples.push_back(assemble(*erl_by_id.at(erl_id), shift, raster, poi, od,
                                           erl_stays, registry, cfg.tz_offset_hours));
        }
    }
    return out;
}

std::vector<std::pair<std::string, Label>> labeled_erls(const std::vector<Sample>& samples) {
    std::map<std::string, Label> seen;
    for (const auto& s : samples)
        if (s.label) seen.emplace(s.erl_id, *s.label);
    return {seen.begin(), seen.end()};
}

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "lr") return ModelKind::lr;
    if (name == "mlp") return ModelKind::mlp;
    if (name == "gbdt") return ModelKind::gbdt;
    if (name == "rf") return ModelKind::rf;
    throw ConfigError("unknown model kind: " + name);
}

const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::lr: return "lr";
        case ModelKind::mlp: return "mlp";
        case ModelKind::gbdt: return "gbdt";
        case ModelKind::rf: return "rf";
    }
    return "?";
}

Model fit_model(ModelKind kind, const LabeledData& train, const LabeledData* validation,
                const RunConfig& cfg, std::uint64_t seed) {
    switch (kind) {
        case ModelKind::lr:
            return fit_lr(train, cfg.class_weights, seed, cfg.lr);
        case ModelKind::mlp:
            return fit_mlp(train, cfg.class_weights, seed, cfg.mlp, validation);
        case ModelKind::gbdt:
            return fit_gbdt(train, cfg.class_weights, seed, cfg.gbdt);
        case ModelKind::rf:
            return fit_rf(train, cfg.class_weights, seed, cfg.rf);
    }
    throw ModelError("unreachable model kind");
}

MetricReport evaluate_on(const Model& model, const LabeledData& test) {
    std::vector<std::vector<double>> probas;
    probas.reserve(test.X.rows);
    for (std::size_t r = 0; r < test.X.rows; ++r) {
        std::vector<double> x(test.X.row(r), test.X.row(r) + test.X.cols);
        probas.push_back(predict_proba(model, x));
    }
    return evaluate(test.y, probas);
}

const std::array<const char*, 5> kMetricNames = {"accuracy", "precision", "recall",
                                                 "macro_f1", "auroc"};

CompareReport run_compare(const std::vector<Sample>& samples, const RunConfig& cfg) {
    CompareReport report;
    const auto erls = labeled_erls(samples);
    if (erls.empty()) throw DataError("compare: no labeled ERLs");

    std::array<std::array<std::vector<double>, 5>, 4> runs;
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
        const std::uint64_t rep_seed = cfg.seed + static_cast<std::uint64_t>(rep);
        const SplitSets split = grouped_split(erls, cfg.split_fractions, rep_seed);
        const LabeledData train = dataset_from_samples(samples, split.train);
        const LabeledData val = dataset_from_samples(samples, split.val);
        const LabeledData test = dataset_from_samples(samples, split.test);
        for (int m = 0; m < 4; ++m) {
            const auto kind = static_cast<ModelKind>(m);
            try {
                const Model model = fit_model(kind, train, &val, cfg, rep_seed);
                const MetricReport r = evaluate_on(model, test);
                const std::array<double, 5> vals{r.accuracy, r.precision, r.recall,
                                                 r.macro_f1, r.auroc};
                for (int k = 0; k < 5; ++k)
                    runs[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)]
                        .push_back(vals[static_cast<std::size_t>(k)]);
            } catch (const Error& e) {
                report.errors.push_back(std::string(model_kind_name(kind)) + ": " + e.what());
                report.cells[static_cast<std::size_t>(m)][0].failed = true;
            }
        }
    }
    for (int m = 0; m < 4; ++m) {
        for (int k = 0; k < 5; ++k) {
            const auto& v = runs[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)];
            auto& cell = report.cells[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)];
            if (v.empty()) {
                cell.failed = true;
                continue;
            }
            const double mean =
                std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
            double var = 0.0;
            for (double x : v) var += (x - mean) * (x - mean);
            cell.mean = mean;
            cell.stddev = std::sqrt(var / static_cast<double>(v.size()));
        }
    }
    return report;
}

namespace {

void csv_double(std::ostream& out, double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    out.write(buf, p - buf);
}

} // namespace

void write_compare_csv(std::ostream& out, const CompareReport& r) {
    out << "model,metric,mean,std\n";
    static const char* models[4] = {"lr", "mlp", "gbdt", "rf"};
    for (int m = 0; m < 4; ++m) {
        for (int k = 0; k < 5; ++k) {
            const auto& cell =
                r.cells[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)];
            out << models[m] << ',' << kMetricNames[static_cast<std::size_t>(k)] << ',';
            if (cell.failed) {
                out << "failed,failed\n";
                continue;
            }
            csv_double(out, cell.mean);
            out << ',';
            csv_double(out, cell.stddev);
            out << '\n';
        }
    }
}

std::vector<RiskScore> rank_risk(const std::vector<Sample>& shift_samples,
                                 const std::vector<int>& predictions,
                                 const RiskConfig& cfg) {
    if (shift_samples.size() != predictions.size())
        throw DataError("rank_risk: predictions/samples length mismatch");
    std::vector<RiskScore> out;
    if (shift_samples.empty()) return out;

    auto norm_maker = [&](int feature_idx) {
        double lo = shift_samples[0].features[static_cast<std::size_t>(feature_idx)];
        double hi = lo;
        for (const auto& s : shift_samples) {
            lo = std::min(lo, s.features[static_cast<std::size_t>(feature_idx)]);
            hi = std::max(hi, s.features[static_cast<std::size_t>(feature_idx)]);
        }
        return [lo, hi](double v) { return hi > lo ? (v - lo) / (hi - lo) : 0.0; };
    };
    const auto norm_deg = norm_maker(kIdxDegree);
    const auto norm_flow = norm_maker(kIdxAllFlow);
    const auto norm_stay = norm_maker(kIdxStayTime);

    for (std::size_t i = 0; i < shift_samples.size(); ++i) {
        const auto& s = shift_samples[i];
        RiskScore r;
        r.erl_id = s.erl_id;
        r.shift = s.shift;
        r.predicted = predictions[i];
        r.c_cat = cfg.cat_weight[static_cast<std::size_t>(predictions[i])];
        r.c_deg = norm_deg(s.features[kIdxDegree]);
        r.c_flow = norm_flow(s.features[kIdxAllFlow]);
        r.c_stay = norm_stay(s.features[kIdxStayTime]);
        r.score = cfg.w_cat * r.c_cat + cfg.w_deg * r.c_deg + cfg.w_flow * r.c_flow +
                  cfg.w_stay * r.c_stay;
        out.push_back(std::move(r));
    }
    std::stable_sort(out.begin(), out.end(), [](const RiskScore& a, const RiskScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.erl_id < b.erl_id;
    });
    return out;
}

void write_elimination_csv(std::ostream& out, const EliminationTrace& trace) {
    out << "step,removed,remaining,accuracy,precision,recall,macro_f1,auroc\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const auto& s = trace[i];
        out << i << ',';
        for (std::size_t f = 0; f < s.removed_batch.size(); ++f) {
            if (f) out << ';';
            out << kFeatureNames[static_cast<std::size_t>(s.removed_batch[f])];
        }
        out << ',' << s.remaining_features;
        const double vals[5] = {s.report.accuracy, s.report.precision, s.report.recall,
                                s.report.macro_f1, s.report.auroc};
        for (double v : vals) {
            out << ',';
            csv_double(out, v);
        }
        out << '\n';
    }
}

void write_shap_csv(std::ostream& out, const ShapMatrix& shap,
                    const std::vector<Sample>& samples) {
    out << "erl_id,shift,feature,class,phi\n";
    for (std::size_t i = 0; i < shap.rows.size(); ++i) {
        const std::string id = i < samples.size() ? samples[i].erl_id : std::to_string(i);
        const std::string sh = i < samples.size() ? shift_key(samples[i].shift) : "";
        for (std::size_t f = 0; f < shap.n_features; ++f) {
            for (int k = 0; k < kNumClasses; ++k) {
                out << id << ',' << sh << ',' << kFeatureNames[f] << ','
                    << kLabelNames[static_cast<std::size_t>(k)] << ',';
                csv_double(out, shap.rows[i].phi[f][static_cast<std::size_t>(k)]);
                out << '\n';
            }
        }
    }
}

} // namespace erl
