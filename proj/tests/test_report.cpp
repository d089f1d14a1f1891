#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "spo/report.hpp"

using namespace spo;

namespace {

RunMetrics metrics(const std::string& kind, std::uint64_t seed, double idle, std::uint64_t wasted) {
    RunMetrics m;
    m.kind = kind;
    m.seed = seed;
    m.success = true;
    m.idle_time = idle;
    m.wasted_predictions = wasted;
    m.generated_predictions = wasted + 10;
    return m;
}

}  // namespace

TEST_CASE("reduction percent") {
    CHECK(reduction_percent(10.0, 3.0) == doctest::Approx(70.0));
    CHECK(reduction_percent(4.0, 4.0) == 0.0);
    CHECK(reduction_percent(0.0, 3.0) == 0.0);
}

TEST_CASE("mean and sample standard deviation") {
    auto s = mean_std({2, 4, 4, 4, 5, 5, 7, 9});
    CHECK(s.mean == doctest::Approx(5.0));
    CHECK(s.std == doctest::Approx(std::sqrt(32.0 / 7.0)));
    CHECK(mean_std({3.0}).std == 0.0);
}

TEST_CASE("comparison reductions use kind means") {
    auto rep = compare_report({
        {"blocking", {metrics("blocking", 1, 10.0, 0), metrics("blocking", 2, 20.0, 0)}},
        {"nftc", {metrics("nftc", 1, 5.0, 40), metrics("nftc", 2, 5.0, 60)}},
        {"spo", {metrics("spo", 1, 3.0, 10), metrics("spo", 2, 6.0, 20)}},
    });
    CHECK(rep.seeds == std::vector<std::uint64_t>{1, 2});
    CHECK(rep.idle_reduction_pct == doctest::Approx(70.0));
    CHECK(rep.wasted_reduction_pct == doctest::Approx(70.0));
    CHECK(rep.idle_reduction_per_seed.at(1) == doctest::Approx(70.0));
    CHECK(rep.wasted_reduction_per_seed.at(2) == doctest::Approx(100.0 * (1.0 - 20.0 / 60.0)));
    REQUIRE(rep.kinds.size() == 3);
    CHECK(rep.kinds[0].kind == "blocking");
    CHECK(rep.kinds[0].idle_time.mean == doctest::Approx(15.0));
    auto j = report_to_json(rep);
    CHECK(j["idle_reduction_pct"].get<double>() == doctest::Approx(70.0));
    CHECK(!format_report(rep).empty());
}

TEST_CASE("mismatched seed lists are rejected") {
    CHECK_THROWS_AS(compare_report({{"blocking", {metrics("blocking", 1, 1, 0)}},
                                    {"spo", {metrics("spo", 2, 1, 0)}}}),
                    ComparisonError);
}

TEST_CASE("csv layout") {
    CHECK(csv_header() == "kind,seed,success,steps,idle_s,hit_rate,mean_k,wasted,generated\n");
    auto m = metrics("spo", 3, 1.5, 2);
    m.steps_taken = 80;
    m.hit_rate = 0.5;
    m.mean_horizon = 4.25;
    CHECK(csv_row(m) == "spo,3,1,80,1.500000,0.500000,4.250000,2,12\n");
}

TEST_CASE("run documents carry the schema version and settings") {
    auto doc = run_document(metrics("spo", 1, 0.0, 0), SpoConfig{}, make_environment("free_space"), ModelOptions{},
                            "virtual");
    CHECK(doc["schema_version"] == kRunSchemaVersion);
    CHECK(doc["mode"] == "virtual");
    CHECK(doc["metrics"]["kind"] == "spo");
    CHECK(doc.contains("config"));
    CHECK(doc.contains("environment"));
}

TEST_CASE("atomic write creates parent directories") {
    auto dir = std::filesystem::temp_directory_path() / "spo_report_test" / "nested";
    std::filesystem::remove_all(dir.parent_path());
    write_file_atomic(dir / "out.txt", "hello\n");
    std::ifstream in(dir / "out.txt");
    std::string line;
    std::getline(in, line);
    CHECK(line == "hello");
    std::filesystem::remove_all(dir.parent_path());
}
