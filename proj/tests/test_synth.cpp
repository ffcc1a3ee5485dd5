#include "erl/synth.hpp"
#include "erl/pipeline.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace erl;
namespace fs = std::filesystem;

namespace {

SynthConfig small_config(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.n_erls = {20, 5, 8};
    cfg.background_poi = 400;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("generation is byte-identical for the same seed") {
    const fs::path a = "/tmp/erl_synth_a", b = "/tmp/erl_synth_b";
    fs::remove_all(a);
    fs::remove_all(b);
    auto cfg = small_config(7);
    generate(cfg, a.string());
    generate(cfg, b.string());
    for (const char* f : {"traces.csv", "poi.csv", "raster.bin", "raster.json",
                          "registry.json", "ground_truth.json"}) {
        INFO(f);
        CHECK(slurp(a / f) == slurp(b / f));
        CHECK_FALSE(slurp(a / f).empty());
    }
    auto cfg2 = small_config(8);
    const fs::path c = "/tmp/erl_synth_c";
    fs::remove_all(c);
    generate(cfg2, c.string());
    CHECK(slurp(a / "traces.csv") != slurp(c / "traces.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
    fs::remove_all(c);
}

TEST_CASE("registry has the configured category counts") {
    const fs::path dir = "/tmp/erl_synth_counts";
    fs::remove_all(dir);
    auto cfg = small_config(21);
    auto summary = generate(cfg, dir.string());
    CHECK(summary.erls_planted == 33);
    std::ifstream reg_in(dir / "registry.json");
    auto reg = load_registry_json(reg_in);
    std::array<int, 3> counts{};
    for (const auto& [id, label] : reg) {
        (void)id;
        ++counts[static_cast<std::size_t>(static_cast<int>(label))];
    }
    CHECK(counts[0] == 20);
    CHECK(counts[1] == 5);
    CHECK(counts[2] == 8);
    fs::remove_all(dir);
}

TEST_CASE("extraction recovers at least 95 percent of planted ERLs") {
    const fs::path dir = "/tmp/erl_synth_recover";
    fs::remove_all(dir);
    auto cfg = small_config(42);
    generate(cfg, dir.string());

    std::ifstream traces(dir / "traces.csv");
    IngestReport rep;
    auto trucks = ingest_traces(traces, rep);
    std::vector<StayPoint> stays;
    for (const auto& [id, pts] : trucks) {
        (void)id;
        auto s = detect_stay_points(pts, cfg.center, 200.0, 1800);
        stays.insert(stays.end(), s.begin(), s.end());
    }
    auto erls = extract_erls(stays, 10, 1, cfg.tz_offset_hours);

    std::ifstream reg_in(dir / "registry.json");
    auto reg = load_registry_json(reg_in);
    std::set<std::string> found;
    for (const auto& e : erls) found.insert(e.erl_id);
    int recovered = 0;
    for (const auto& [id, label] : reg) {
        (void)label;
        if (found.count(id)) ++recovered;
    }
    INFO("recovered " << recovered << " of " << reg.size() << " planted ERLs; "
                      << erls.size() << " extracted");
    CHECK(static_cast<double>(recovered) >= 0.95 * static_cast<double>(reg.size()));
    fs::remove_all(dir);
}

TEST_CASE("generated features respect the configured category orderings") {
    const fs::path dir = "/tmp/erl_synth_order";
    fs::remove_all(dir);
    auto cfg = small_config(5);
    generate(cfg, dir.string());

    RunConfig rc;
    rc.synth = cfg;
    rc.seed = cfg.seed;
    auto result = featurize_directory(dir.string(), rc);
    std::array<double, 3> stay_sum{}, dist_sum{};
    std::array<int, 3> n{};
    for (const auto& s : result.samples) {
        if (!s.label) continue;
        const auto k = static_cast<std::size_t>(static_cast<int>(*s.label));
        stay_sum[k] += s.features[kIdxStayTime];
        dist_sum[k] += s.features[3]; // distance_center
        ++n[k];
    }
    REQUIRE(n[0] > 0);
    REQUIRE(n[1] > 0);
    REQUIRE(n[2] > 0);
    CHECK(stay_sum[2] / n[2] > stay_sum[0] / n[0]); // PM stays longer than ER
    CHECK(stay_sum[2] / n[2] > stay_sum[1] / n[1]); // PM stays longer than MR
    CHECK(dist_sum[0] / n[0] < dist_sum[2] / n[2]); // ER closer to center than PM
    fs::remove_all(dir);
}

TEST_CASE("planted ERL cell sets never overlap") {
    const fs::path dir = "/tmp/erl_synth_overlap";
    fs::remove_all(dir);
    generate(small_config(13), dir.string());
    std::ifstream gt(dir / "ground_truth.json");
    const auto j = nlohmann::json::parse(gt);
    std::set<GridCell> seen;
    CHECK(j.is_array());
    for (const auto& e : j) {
        CHECK(e.contains("erl_id"));
        CHECK(e.contains("label"));
        for (const auto& c : e.at("cells")) {
            const GridCell cell{c.at(0).get<long>(), c.at(1).get<long>()};
            CHECK_FALSE(seen.count(cell));
            seen.insert(cell);
        }
    }
    CHECK_FALSE(seen.empty());
    fs::remove_all(dir);
}
