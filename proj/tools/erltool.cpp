// erltool: end-to-end pipeline driver (synthesize, mine, featurize, train,
// evaluate, explain, simplify, rank).
#include "erl/pipeline.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::string data_dir; // defaults to out_dir
    std::uint64_t seed = 0;
    bool seed_set = false;
};

erl::RunConfig load_config(const GlobalOpts& g) {
    erl::RunConfig cfg = g.config_path.empty()
                             ? erl::RunConfig{}
                             : erl::RunConfig::from_json_file(g.config_path);
    if (g.seed_set) {
        cfg.seed = g.seed;
        cfg.synth.seed = g.seed;
    }
    return cfg;
}

std::string data_dir(const GlobalOpts& g) {
    return g.data_dir.empty() ? g.out_dir : g.data_dir;
}

std::vector<erl::Sample> load_features(const GlobalOpts& g) {
    std::ifstream in(g.out_dir + "/features.csv");
    if (!in) throw erl::DataError("missing " + g.out_dir + "/features.csv (run featurize)");
    return erl::read_feature_csv(in);
}

erl::SplitSets load_split(const GlobalOpts& g) {
    std::ifstream in(g.out_dir + "/split.json");
    if (!in) throw erl::DataError("missing " + g.out_dir + "/split.json (run split)");
    return erl::read_split_json(in);
}

void cmd_synth(const GlobalOpts& g) {
    const erl::RunConfig cfg = load_config(g);
    const auto summary = erl::generate(cfg.synth, data_dir(g));
    std::cout << "planted " << summary.erls_planted << " ERLs, " << summary.gps_points
              << " GPS points, " << summary.poi_records << " POIs -> " << data_dir(g)
              << "\n";
}

void cmd_ingest(const GlobalOpts& g) {
    fs::create_directories(g.out_dir);
    std::ifstream traces(data_dir(g) + "/traces.csv");
    if (!traces) throw erl::DataError("missing " + data_dir(g) + "/traces.csv");
    erl::IngestReport report;
    auto trucks = erl::ingest_traces(traces, report);
    json j;
    j["trucks"] = trucks.size();
    j["accepted"] = report.accepted;
    j["duplicates"] = report.duplicates;
    j["out_of_range"] = report.out_of_range;
    j["malformed"] = report.malformed;
    j["reject_samples"] = report.reject_samples;
    std::ofstream out(g.out_dir + "/ingest_report.json");
    out << j.dump(2) << "\n";
    std::cout << "ingested " << report.accepted << " points from " << trucks.size()
              << " trucks (" << report.malformed + report.out_of_range << " rejected)\n";
}

void cmd_extract(const GlobalOpts& g) {
    const erl::RunConfig cfg = load_config(g);
    fs::create_directories(g.out_dir);
    std::ifstream traces(data_dir(g) + "/traces.csv");
    if (!traces) throw erl::DataError("missing " + data_dir(g) + "/traces.csv");
    erl::IngestReport report;
    auto trucks = erl::ingest_traces(traces, report);
    std::vector<erl::StayPoint> stays;
    for (const auto& [id, points] : trucks) {
        (void)id;
        auto s = erl::detect_stay_points(points, cfg.center, cfg.stay_d_max_m,
                                         cfg.stay_t_min_s);
        stays.insert(stays.end(), s.begin(), s.end());
    }
    const auto erls = erl::extract_erls(stays, cfg.erl_min_days, cfg.erl_min_stays_per_day,
                                        cfg.tz_offset_hours);
    {
        std::ofstream out(g.out_dir + "/erls.json");
        erl::write_erls_json(out, erls);
    }
    {
        std::ofstream out(g.out_dir + "/stays.csv");
        out << "truck_id,t_start,t_end,x,y\n";
        for (const auto& s : stays)
            out << s.truck_id << ',' << s.t_start << ',' << s.t_end << ',' << s.pos.x
                << ',' << s.pos.y << '\n';
    }
    std::cout << stays.size() << " stay points, " << erls.size() << " ERLs -> "
              << g.out_dir << "/erls.json\n";
}

void cmd_featurize(const GlobalOpts& g) {
    const erl::RunConfig cfg = load_config(g);
    fs::create_directories(g.out_dir);
    const auto result = erl::featurize_directory(data_dir(g), cfg);
    {
        std::ofstream out(g.out_dir + "/erls.json");
        erl::write_erls_json(out, result.erls);
    }
    {
        std::ofstream out(g.out_dir + "/features.csv", std::ios::binary);
        erl::write_feature_csv(out, result.samples);
    }
    std::size_t labeled = 0;
    for (const auto& s : result.samples) labeled += s.label.has_value();
    std::cout << result.samples.size() << " samples (" << labeled << " labeled) over "
              << result.erls.size() << " ERLs -> " << g.out_dir << "/features.csv\n";
}

void cmd_split(const GlobalOpts& g) {
    const erl::RunConfig cfg = load_config(g);
    const auto samples = load_features(g);
    const auto erls = erl::labeled_erls(samples);
    if (erls.empty()) throw erl::DataError("split: no labeled ERLs in feature table");
    const auto split = erl::grouped_split(erls, cfg.split_fractions, cfg.seed);
    std::ofstream out(g.out_dir + "/split.json");
    erl::write_split_json(out, split);
    std::cout << "split " << erls.size() << " ERLs into " << split.train.size() << "/"
              << split.val.size() << "/" << split.test.size()
              << (split.stratified ? "" : " (unstratified fallback)") << "\n";
}

void cmd_train(const GlobalOpts& g, const std::string& kind_name) {
    const erl::RunConfig cfg = load_config(g);
    const auto kind = erl::model_kind_from_name(kind_name);
    const auto samples = load_features(g);
    const auto split = load_split(g);
    const auto train = erl::dataset_from_samples(samples, split.train);
    const auto val = erl::dataset_from_samples(samples, split.val);
    const erl::Model model = erl::fit_model(kind, train, &val, cfg, cfg.seed);
    const std::string path = g.out_dir + "/model_" + kind_name + ".json";
    erl::save_model(model, path);
    std::cout << "trained " << kind_name << " on " << train.X.rows << " samples -> "
              << path << "\n";
}

void cmd_evaluate(const GlobalOpts& g, const std::string& kind_name) {
    const auto samples = load_features(g);
    const auto split = load_split(g);
    const auto test = erl::dataset_from_samples(samples, split.test);
    const erl::Model model = erl::load_model(g.out_dir + "/model_" + kind_name + ".json");
    const erl::MetricReport r = erl::evaluate_on(model, test);
    {
        std::ofstream out(g.out_dir + "/metrics_" + kind_name + ".json");
        erl::write_metric_json(out, r);
    }
    {
        std::ofstream out(g.out_dir + "/confusion_" + kind_name + ".csv");
        erl::write_confusion_csv(out, r.cm);
    }
    std::cout << kind_name << ": accuracy=" << r.accuracy << " macro_f1=" << r.macro_f1
              << " auroc=" << r.auroc << "\n";
}

void cmd_compare(const GlobalOpts& g) {
    const erl::RunConfig cfg = load_config(g);
    const auto samples = load_features(g);
    const auto report = erl::run_compare(samples, cfg);
    std::ofstream out(g.out_dir + "/compare.csv", std::ios::binary);
    erl::write_compare_csv(out, report);
    erl::write_compare_csv(std::cout, report);
    for (const auto& e : report.errors) std::cerr << "warning: " << e << "\n";
}

void cmd_explain(const GlobalOpts& g, int limit) {
    const auto samples = load_features(g);
    const auto split = load_split(g);
    const erl::Model model = erl::load_model(g.out_dir + "/model_rf.json");
    const auto* ensemble = std::get_if<erl::TreeEnsemble>(&model);
    if (!ensemble)
        throw erl::ExplainerUnsupported("explain: model_rf.json is not a tree ensemble");

    std::set<std::string> test_ids(split.test.begin(), split.test.end());
    std::vector<erl::Sample> explained;
    for (const auto& s : samples) {
        if (!s.label || !test_ids.count(s.erl_id)) continue;
        explained.push_back(s);
        if (limit > 0 && static_cast<int>(explained.size()) >= limit) break;
    }
    if (explained.empty()) throw erl::DataError("explain: no test samples to explain");

    erl::DataMatrix X(explained.size(), erl::kNumFeatures);
    for (std::size_t r = 0; r < explained.size(); ++r)
        std::copy(explained[r].features.begin(), explained[r].features.end(), X.row(r));
    const auto shap = erl::tree_shap_all(*ensemble, X);
    {
        std::ofstream out(g.out_dir + "/shap.csv", std::ios::binary);
        erl::write_shap_csv(out, shap, explained);
    }
    {
        json base = json::object();
        for (int k = 0; k < erl::kNumClasses; ++k)
            base[erl::kLabelNames[static_cast<std::size_t>(k)]] =
                shap.rows[0].base[static_cast<std::size_t>(k)];
        std::ofstream out(g.out_dir + "/shap_base.json");
        out << base.dump(2) << "\n";
    }
    const auto ranking = erl::importance(shap);
    {
        std::ofstream out(g.out_dir + "/importance.csv");
        out << "rank,feature,importance\n";
        for (std::size_t i = 0; i < ranking.ranked.size(); ++i)
            out << i + 1 << ','
                << erl::kFeatureNames[static_cast<std::size_t>(ranking.ranked[i])] << ','
                << ranking.by_feature[static_cast<std::size_t>(ranking.ranked[i])] << '\n';
    }
    std::cout << "explained " << explained.size() << " samples; top feature: "
              << erl::kFeatureNames[static_cast<std::size_t>(ranking.ranked[0])] << "\n";
}

void cmd_simplify(const GlobalOpts& g, int shap_limit) {
    const erl::RunConfig cfg = load_config(g);
    const auto samples = load_features(g);
    const auto split = load_split(g);
    const auto train = erl::dataset_from_samples(samples, split.train);
    const auto test = erl::dataset_from_samples(samples, split.test);

    const erl::TreeEnsemble full =
        erl::fit_rf(train, cfg.class_weights, cfg.seed, cfg.rf);
    erl::DataMatrix shap_x = test.X;
    if (shap_limit > 0 && static_cast<std::size_t>(shap_limit) < shap_x.rows) {
        erl::DataMatrix capped(static_cast<std::size_t>(shap_limit), shap_x.cols);
        std::copy(shap_x.v.begin(),
                  shap_x.v.begin() + static_cast<long>(capped.v.size()), capped.v.begin());
        shap_x = std::move(capped);
    }
    const auto ranking = erl::importance(erl::tree_shap_all(full, shap_x));
    const auto batches = erl::make_default_batches(ranking.by_feature, cfg.importance_floor);

    const erl::ModelFitter fitter = [&](const erl::LabeledData& tr, std::uint64_t seed) {
        return erl::Model(erl::fit_rf(tr, cfg.class_weights, seed, cfg.rf));
    };
    const auto trace =
        erl::backward_eliminate(train, test, cfg.class_weights, fitter, cfg.seed, batches);
    std::ofstream out(g.out_dir + "/elimination.csv", std::ios::binary);
    erl::write_elimination_csv(out, trace);
    std::cout << "elimination trace with " << trace.size() << " steps -> " << g.out_dir
              << "/elimination.csv\n";
}

void cmd_rank(const GlobalOpts& g, const std::string& shift_key_str,
              const std::string& kind_name) {
    const erl::RunConfig cfg = load_config(g);
    const auto samples = load_features(g);
    const erl::Model model = erl::load_model(g.out_dir + "/model_" + kind_name + ".json");

    const auto shift = erl::parse_shift_key(shift_key_str);
    if (!shift) throw erl::ConfigError("rank: bad shift key (want YYYY-MM-DD[D|N]): " +
                                       shift_key_str);
    std::vector<erl::Sample> in_shift;
    for (const auto& s : samples)
        if (s.shift == *shift) in_shift.push_back(s);

    std::vector<int> predictions;
    predictions.reserve(in_shift.size());
    for (const auto& s : in_shift) {
        std::vector<double> x(s.features.begin(), s.features.end());
        predictions.push_back(erl::predict(model, x));
    }
    const auto ranked = erl::rank_risk(in_shift, predictions, cfg.risk);
    std::ofstream out(g.out_dir + "/risk_" + shift_key_str + ".csv");
    out << "rank,erl_id,shift,predicted,score,c_cat,c_deg,c_flow,c_stay\n";
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        const auto& r = ranked[i];
        out << i + 1 << ',' << r.erl_id << ',' << erl::shift_key(r.shift) << ','
            << erl::kLabelNames[static_cast<std::size_t>(r.predicted)] << ',' << r.score
            << ',' << r.c_cat << ',' << r.c_deg << ',' << r.c_flow << ',' << r.c_stay
            << '\n';
    }
    std::cout << "ranked " << ranked.size() << " samples for shift " << shift_key_str
              << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ERL trajectory mining and classification toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "Run configuration JSON");
    app.add_option("--out-dir", g.out_dir, "Output directory");
    app.add_option("--data-dir", g.data_dir, "Input data directory (defaults to out-dir)");
    auto* seed_opt = app.add_option("--seed", g.seed, "Override the run seed");

    app.add_subcommand("synth", "Generate a synthetic city dataset");
    app.add_subcommand("ingest", "Parse and clean raw traces");
    app.add_subcommand("extract-erls", "Detect stay points and extract ERLs");
    app.add_subcommand("featurize", "Build the per-(ERL, shift) feature table");
    app.add_subcommand("split", "Grouped train/val/test split over labeled ERLs");

    std::string train_kind = "rf";
    auto* train_cmd = app.add_subcommand("train", "Fit one model");
    train_cmd->add_option("--model", train_kind, "lr|mlp|gbdt|rf");
    std::string eval_kind = "rf";
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a trained model");
    eval_cmd->add_option("--model", eval_kind, "lr|mlp|gbdt|rf");

    app.add_subcommand("compare", "Train and evaluate all four models over repetitions");

    int explain_limit = 1000;
    auto* explain_cmd = app.add_subcommand("explain", "TreeSHAP attributions for the RF model");
    explain_cmd->add_option("--limit", explain_limit, "Max test samples to explain (0 = all)");

    int simplify_limit = 300;
    auto* simplify_cmd = app.add_subcommand("simplify", "Backward feature elimination");
    simplify_cmd->add_option("--shap-limit", simplify_limit,
                             "Max test samples for the importance ranking (0 = all)");

    std::string rank_shift, rank_kind = "rf";
    auto* rank_cmd = app.add_subcommand("rank", "Risk-rank one shift's samples");
    rank_cmd->add_option("--shift", rank_shift, "Shift key, e.g. 2023-05-01D")->required();
    rank_cmd->add_option("--model", rank_kind, "lr|mlp|gbdt|rf");

    CLI11_PARSE(app, argc, argv);
    g.seed_set = seed_opt->count() > 0;

    try {
        if (app.got_subcommand("synth")) cmd_synth(g);
        else if (app.got_subcommand("ingest")) cmd_ingest(g);
        else if (app.got_subcommand("extract-erls")) cmd_extract(g);
        else if (app.got_subcommand("featurize")) cmd_featurize(g);
        else if (app.got_subcommand("split")) cmd_split(g);
        else if (app.got_subcommand("train")) cmd_train(g, train_kind);
        else if (app.got_subcommand("evaluate")) cmd_evaluate(g, eval_kind);
        else if (app.got_subcommand("compare")) cmd_compare(g);
        else if (app.got_subcommand("explain")) cmd_explain(g, explain_limit);
        else if (app.got_subcommand("simplify")) cmd_simplify(g, simplify_limit);
        else if (app.got_subcommand("rank")) cmd_rank(g, rank_shift, rank_kind);
    } catch (const erl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const erl::ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 4;
    } catch (const erl::Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
