#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string output;
};

Outcome spo(const std::string& args) {
    const std::string cmd = std::string("\"") + SPO_CLI_PATH + "\" " + args + " 2>&1";
    Outcome out;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.output.append(buf.data(), n);
    const int status = pclose(pipe);
    out.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("spo_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

}  // namespace

TEST_CASE("invalid configuration lists every violation") {
    auto dir = scratch("badcfg");
    {
        std::ofstream cfg(dir / "bad.cfg");
        cfg << "k_min = 5\nk_max = 3\nepsilon_base = -1\n";
    }
    auto r = spo("run --config " + (dir / "bad.cfg").string());
    CHECK(r.code == 2);
    CHECK(r.output.find("k_min") != std::string::npos);
    CHECK(r.output.find("epsilon_base") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("unknown flags are usage errors") {
    CHECK(spo("run --no-such-flag").code != 0);
    CHECK(spo("run --env nowhere").code == 2);
}

TEST_CASE("compare writes csv and json") {
    auto dir = scratch("compare");
    auto r = spo("compare --env tight_tolerance --seeds 5 --mode virtual --out " + dir.string());
    REQUIRE(r.code == 0);
    const std::string csv = slurp(dir / "compare.csv");
    CHECK(count_lines(csv) == 1 + 4 * 5);
    CHECK(csv.rfind("kind,seed,success,steps,idle_s,hit_rate,mean_k,wasted,generated\n", 0) == 0);
    auto j = nlohmann::json::parse(slurp(dir / "compare.json"));
    CHECK(j.contains("idle_reduction_pct"));
    fs::remove_all(dir);
}

TEST_CASE("sweep produces one row per value") {
    auto dir = scratch("sweep");
    auto r = spo("sweep --env free_space --seeds 1 --param rtt_base --from 0 --to 0.4 --steps 9 --kind spo --out " +
                 dir.string());
    REQUIRE(r.code == 0);
    const std::string csv = slurp(dir / "sweep_rtt_base.csv");
    CHECK(count_lines(csv) == 1 + 9);
    CHECK(csv.find("\nrtt_base,0.4,spo,") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("edge-connect to a dead port fails cleanly") {
    auto r = spo("edge-connect --env free_space --addr 127.0.0.1:1");
    CHECK(r.code == 3);
    CHECK(r.output.find("hit rate") == std::string::npos);
}
