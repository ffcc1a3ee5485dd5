#include "erl/pipeline.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

using namespace erl;

namespace {

std::vector<std::pair<std::string, Label>> fake_registry(int n_er, int n_mr, int n_pm) {
    std::vector<std::pair<std::string, Label>> out;
    int i = 0;
    for (int k = 0; k < n_er; ++k) out.push_back({"er" + std::to_string(i++), Label::ER});
    for (int k = 0; k < n_mr; ++k) out.push_back({"mr" + std::to_string(i++), Label::MR});
    for (int k = 0; k < n_pm; ++k) out.push_back({"pm" + std::to_string(i++), Label::PM});
    return out;
}

} // namespace

TEST_CASE("grouped split of 10 erls lands at sizes 7/1/2") {
    auto erls = fake_registry(4, 3, 3);
    auto s = grouped_split(erls, {0.7, 0.1, 0.2}, 1);
    CHECK(s.train.size() == 7);
    CHECK(s.val.size() == 1);
    CHECK(s.test.size() == 2);
}

TEST_CASE("split partitions are disjoint and complete") {
    auto erls = fake_registry(30, 10, 12);
    auto s = grouped_split(erls, {0.7, 0.1, 0.2}, 5);
    std::set<std::string> all;
    for (const auto& id : s.train) CHECK(all.insert(id).second);
    for (const auto& id : s.val) CHECK(all.insert(id).second);
    for (const auto& id : s.test) CHECK(all.insert(id).second);
    CHECK(all.size() == erls.size());
}

TEST_CASE("split is deterministic per seed and stratified when possible") {
    auto erls = fake_registry(30, 10, 12);
    auto s1 = grouped_split(erls, {0.7, 0.1, 0.2}, 9);
    auto s2 = grouped_split(erls, {0.7, 0.1, 0.2}, 9);
    CHECK(s1.train == s2.train);
    CHECK(s1.val == s2.val);
    CHECK(s1.test == s2.test);
    CHECK(s1.stratified);
    auto s3 = grouped_split(erls, {0.7, 0.1, 0.2}, 10);
    CHECK((s3.train != s1.train || s3.test != s1.test));

    // every partition contains every class when counts permit
    std::map<std::string, Label> by_id(erls.begin(), erls.end());
    for (const auto* part : {&s1.train, &s1.val, &s1.test}) {
        std::set<int> classes;
        for (const auto& id : *part) classes.insert(static_cast<int>(by_id.at(id)));
        CHECK(classes.size() == 3);
    }
}

TEST_CASE("split falls back to unstratified for tiny classes") {
    auto erls = fake_registry(8, 1, 4); // MR has < 3 erls
    auto s = grouped_split(erls, {0.7, 0.1, 0.2}, 2);
    CHECK_FALSE(s.stratified);
    CHECK(s.train.size() + s.val.size() + s.test.size() == 13);
}

TEST_CASE("100 seeded splits keep integrity") {
    auto erls = fake_registry(105, 21, 32);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto s = grouped_split(erls, {0.7, 0.1, 0.2}, seed);
        std::set<std::string> all;
        for (const auto* part : {&s.train, &s.val, &s.test})
            for (const auto& id : *part) CHECK(all.insert(id).second);
        CHECK(all.size() == erls.size());
        const double n = static_cast<double>(erls.size());
        CHECK(std::abs(static_cast<double>(s.train.size()) - 0.7 * n) <= 1.0 + 1e-9);
        CHECK(std::abs(static_cast<double>(s.val.size()) - 0.1 * n) <= 1.0 + 1e-9);
        CHECK(std::abs(static_cast<double>(s.test.size()) - 0.2 * n) <= 1.0 + 1e-9);
    }
}

TEST_CASE("split json round trip") {
    auto erls = fake_registry(10, 5, 5);
    auto s = grouped_split(erls, {0.7, 0.1, 0.2}, 3);
    std::stringstream buf;
    write_split_json(buf, s);
    auto back = read_split_json(buf);
    CHECK(back.train == s.train);
    CHECK(back.val == s.val);
    CHECK(back.test == s.test);
    CHECK(back.stratified == s.stratified);
}

TEST_CASE("config parsing rejects unknown keys and bad fractions") {
    CHECK_NOTHROW(RunConfig::from_json_text("{}"));
    auto cfg = RunConfig::from_json_text(R"({"seed": 7, "repetitions": 2})");
    CHECK(cfg.seed == 7);
    CHECK(cfg.repetitions == 2);
    CHECK(cfg.synth.seed == 7);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"sede": 7})"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"models": {"lr": {"max_iters": 5}}})"),
                    ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"split_fractions": [0.5, 0.1, 0.2]})"),
                    ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"class_weights": [0.0, 0.5, 0.5]})"),
                    ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json_text("not json"), ConfigError);
}

TEST_CASE("model kind names round trip") {
    for (const char* name : {"lr", "mlp", "gbdt", "rf"}) {
        auto k = model_kind_from_name(name);
        CHECK(std::string(model_kind_name(k)) == name);
    }
    CHECK_THROWS_AS(model_kind_from_name("svm"), ConfigError);
}

TEST_CASE("dataset_from_samples filters by erl set and label") {
    std::vector<Sample> samples(4);
    samples[0].erl_id = "a";
    samples[0].label = Label::ER;
    samples[1].erl_id = "b";
    samples[1].label = Label::MR;
    samples[2].erl_id = "a";
    samples[2].label = Label::ER;
    samples[3].erl_id = "c"; // unlabeled
    for (auto& s : samples) s.features.fill(1.0);
    auto d = dataset_from_samples(samples, {"a", "c"});
    CHECK(d.X.rows == 2);
    CHECK(d.X.cols == kNumFeatures);
    CHECK(d.y == std::vector<int>{0, 0});
}

TEST_CASE("rank_risk ordering matches an independent rescoring") {
    RiskConfig cfg;
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<Sample> samples;
    std::vector<int> preds;
    const Shift shift = shift_of(1682899200, 8);
    for (int i = 0; i < 25; ++i) {
        Sample s;
        s.erl_id = "e" + std::to_string(i);
        s.shift = shift;
        s.features[kIdxDegree] = static_cast<double>(rng() % 10);
        s.features[kIdxAllFlow] = static_cast<double>(rng() % 30);
        s.features[kIdxStayTime] = 1000.0 * u(rng);
        samples.push_back(s);
        preds.push_back(static_cast<int>(rng() % 3));
    }
    auto ranked = rank_risk(samples, preds, cfg);
    REQUIRE(ranked.size() == samples.size());

    // oracle: recompute scores with min-max normalization
    auto norm = [&](auto get) {
        double lo = 1e300, hi = -1e300;
        for (const auto& s : samples) {
            lo = std::min(lo, get(s));
            hi = std::max(hi, get(s));
        }
        return [lo, hi, get](const Sample& s) {
            return hi > lo ? (get(s) - lo) / (hi - lo) : 0.0;
        };
    };
    auto nd = norm([](const Sample& s) { return s.features[kIdxDegree]; });
    auto nf = norm([](const Sample& s) { return s.features[kIdxAllFlow]; });
    auto ns = norm([](const Sample& s) { return s.features[kIdxStayTime]; });
    std::vector<std::pair<double, std::string>> want;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double score =
            cfg.w_cat * cfg.cat_weight[static_cast<std::size_t>(preds[i])] +
            cfg.w_deg * nd(samples[i]) + cfg.w_flow * nf(samples[i]) +
            cfg.w_stay * ns(samples[i]);
        want.push_back({score, samples[i].erl_id});
    }
    std::sort(want.begin(), want.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        CHECK(ranked[i].erl_id == want[i].second);
        CHECK(ranked[i].score == doctest::Approx(want[i].first).epsilon(1e-12));
    }
}

TEST_CASE("rank_risk degenerate single sample") {
    RiskConfig cfg;
    Sample s;
    s.erl_id = "only";
    s.shift = shift_of(1682899200, 8);
    s.features[kIdxDegree] = 5;
    auto ranked = rank_risk({s}, {2}, cfg);
    REQUIRE(ranked.size() == 1);
    CHECK(ranked[0].score == doctest::Approx(cfg.w_cat * cfg.cat_weight[2]));
    CHECK(rank_risk({}, {}, cfg).empty());
}

TEST_CASE("rank_risk prefers ER over PM when all else is equal") {
    RiskConfig cfg;
    Sample a, b;
    a.erl_id = "a";
    b.erl_id = "b";
    a.shift = b.shift = shift_of(1682899200, 8);
    auto ranked = rank_risk({a, b}, {2, 0}, cfg); // a predicted PM, b predicted ER
    CHECK(ranked[0].erl_id == "b");
}

TEST_CASE("compare report writer shape") {
    CompareReport r;
    for (auto& row : r.cells)
        for (auto& c : row) c = {0.5, 0.01, false};
    std::stringstream buf;
    write_compare_csv(buf, r);
    std::string line;
    int lines = 0;
    while (std::getline(buf, line)) ++lines;
    CHECK(lines == 1 + 4 * 5); // header + (model, metric) rows
}
