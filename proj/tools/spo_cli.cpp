#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "spo/calibration.hpp"
#include "spo/experiment.hpp"
#include "spo/report.hpp"
#include "spo/socket_channel.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config_file;
    std::string env;
    std::string kind = "spo";
    std::string seeds;
    std::optional<std::uint64_t> seed;
    std::string mode = "virtual";
    std::optional<double> rtt;
    std::optional<double> jitter;
    std::optional<int> k_min;
    std::optional<int> k_max;
    std::optional<int> beta;
    std::optional<double> epsilon;
    std::optional<int> watermark;
    std::string out;
    int jobs = 0;
    std::string model;
    std::optional<double> drift_bias;
    std::optional<double> drift_noise;
    std::string weights_file;
    std::string addr = "127.0.0.1:7700";
    std::uint16_t port = 7700;
    std::string port_file;
    int max_sessions = 0;
    std::string param = "rtt_base";
    double from = 0.0;
    double to = 0.4;
    int steps = 9;
};

struct Resolved {
    spo::SpoConfig cfg;
    spo::EnvironmentSpec env;
    spo::ModelOptions model;
    std::vector<std::uint64_t> seeds;
};

class UsageError : public spo::Error {
public:
    using Error::Error;
};

// "N" is a count of consecutive seeds starting at `base`; "a-b" and
// "a,b,c" name seeds explicitly.
std::vector<std::uint64_t> parse_seed_list(const std::string& text, std::uint64_t base) {
    if (text.find_first_of(",-") == std::string::npos) {
        auto n = spo::parse_int("seeds", text);
        if (n < 1) throw UsageError(fmt::format("seed count must be >= 1, got `{}`", text));
        return spo::seed_range(base, static_cast<int>(n));
    }
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        if (auto dash = item.find('-'); dash != std::string::npos) {
            auto a = spo::parse_int("seeds", item.substr(0, dash));
            auto b = spo::parse_int("seeds", item.substr(dash + 1));
            if (a < 0 || b < a) throw UsageError(fmt::format("bad seed range `{}`", item));
            for (auto s = a; s <= b; ++s) out.push_back(static_cast<std::uint64_t>(s));
        } else {
            auto s = spo::parse_int("seeds", item);
            if (s < 0) throw UsageError(fmt::format("bad seed `{}`", item));
            out.push_back(static_cast<std::uint64_t>(s));
        }
    }
    if (out.empty()) throw UsageError("empty seed list");
    return out;
}

Resolved resolve(const Options& o) {
    Resolved r;
    spo::KeyValues kv;
    if (!o.config_file.empty()) kv = spo::load_key_value_file(o.config_file);

    for (const auto& key : spo::apply_config(kv, r.cfg)) {
        if (key == "env" || key.rfind("env.", 0) == 0 || key == "model" || key.rfind("model.", 0) == 0 ||
            key == "kind" || key == "seeds")
            continue;
        fmt::print(stderr, "warning: unknown config key `{}` ignored\n", key);
    }

    if (const char* s = std::getenv("SPO_SEED"); s && *s && !kv.count("rng_seed"))
        r.cfg.rng_seed = static_cast<std::uint64_t>(spo::parse_int("SPO_SEED", s));
    if (o.seed) r.cfg.rng_seed = *o.seed;
    if (o.rtt) r.cfg.rtt_base = *o.rtt;
    if (o.jitter) r.cfg.jitter_half_width = *o.jitter;
    if (o.k_min) r.cfg.k_min = *o.k_min;
    if (o.k_max) r.cfg.k_max = *o.k_max;
    if (o.beta) r.cfg.beta = *o.beta;
    if (o.epsilon) r.cfg.epsilon_base = *o.epsilon;
    if (o.watermark) r.cfg.prefetch_low_watermark = *o.watermark;

    if (!o.env.empty()) kv["env"] = o.env;
    r.env = spo::environment_from_key_values(kv, "free_space");
    r.cfg = spo::with_environment_defaults(r.cfg, r.env, o.epsilon.has_value() || kv.count("epsilon_base") > 0);
    spo::validate_config(r.cfg);

    std::string model = o.model.empty() ? (kv.count("model") ? kv["model"] : "oracle") : o.model;
    r.model.kind = spo::parse_model_kind(model);
    if (r.model.kind == spo::ModelOptions::Kind::Drifted) r.model = spo::ModelOptions::drifted();
    if (kv.count("model.drift_bias")) r.model.drift_bias = spo::parse_double("model.drift_bias", kv["model.drift_bias"]);
    if (kv.count("model.drift_noise"))
        r.model.drift_noise = spo::parse_double("model.drift_noise", kv["model.drift_noise"]);
    if (o.drift_bias) r.model.drift_bias = *o.drift_bias;
    if (o.drift_noise) r.model.drift_noise = *o.drift_noise;

    if (!o.seeds.empty())
        r.seeds = parse_seed_list(o.seeds, r.cfg.rng_seed);
    else if (kv.count("seeds"))
        r.seeds = parse_seed_list(kv["seeds"], r.cfg.rng_seed);
    else
        r.seeds = {r.cfg.rng_seed};
    return r;
}

spo::WeightMatrix load_weights(const std::string& path, std::size_t d_s) {
    std::ifstream in(path);
    if (!in) throw spo::Error("cannot open weights file " + path);
    std::vector<double> w;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        w.push_back(spo::parse_double("weight", line));
    }
    spo::require_dimension(w.size(), d_s, "weights file");
    return spo::WeightMatrix(std::move(w));
}

spo::ExperimentSetup setup_for(const Options& o, const Resolved& r) {
    if (o.weights_file.empty()) return spo::make_setup(r.env, r.cfg, r.model);
    spo::EnvironmentSpec env = r.env;
    env.control_interval = r.cfg.control_interval;
    return {env, r.cfg, load_weights(o.weights_file, env.d_s), r.model};
}

void print_metrics(const spo::RunMetrics& m) {
    fmt::print("{:<9} seed {:<4} success {}  steps {:>5}  idle {:.3f} s  hit rate {:.3f}  mean K {:.2f}  "
               "generated {}  executed {}  wasted {}\n",
               m.kind, m.seed, m.success ? "yes" : "no ", m.steps_taken, m.idle_time, m.hit_rate, m.mean_horizon,
               m.generated_predictions, m.executed_predictions, m.wasted_predictions);
    if (!m.diagnostic.empty()) fmt::print(stderr, "run aborted: {}\n", m.diagnostic);
}

std::string steps_csv(const spo::RunResult& r) {
    std::string out = "step,outcome,error,sim_time\n";
    for (const auto& rec : r.records)
        out += fmt::format("{},{},{},{:.4f}\n", rec.step_index, spo::to_string(rec.outcome),
                           rec.error ? fmt::format("{:.6g}", *rec.error) : "", rec.sim_time);
    return out;
}

spo::RunResult run_single(const Options& o, const spo::ExperimentSetup& s, spo::BaselineKind kind, std::uint64_t seed,
                          bool socket, bool keep_records) {
    spo::SessionOptions so;
    so.kind = kind;
    so.model = s.model;
    so.seed = seed;
    so.keep_records = keep_records;
    if (!socket) return spo::run_virtual_session(s.spec, s.cfg, s.weights, so);
    auto [host, port] = spo::parse_address(o.addr);
    return spo::run_socket_session(s.spec, s.cfg, s.weights, so, host, port);
}

int cmd_run(const Options& o, bool socket) {
    Resolved r = resolve(o);
    auto setup = setup_for(o, r);
    const auto kind = spo::parse_baseline_kind(o.kind);
    bool ok = true;
    for (auto seed : r.seeds) {
        auto res = run_single(o, setup, kind, seed, socket, !o.out.empty());
        print_metrics(res.metrics);
        ok = ok && res.metrics.diagnostic.empty();
        if (!o.out.empty()) {
            const std::string stem = fmt::format("run_{}_{}_{}", res.metrics.kind, setup.spec.name, seed);
            auto doc = spo::run_document(res.metrics, setup.cfg, setup.spec, setup.model, socket ? "socket" : "virtual");
            spo::write_file_atomic(fs::path(o.out) / (stem + ".json"), doc.dump(2) + "\n");
            spo::write_file_atomic(fs::path(o.out) / (stem + "_steps.csv"), steps_csv(res));
        }
    }
    return ok ? 0 : 1;
}

std::vector<spo::RunMetrics> run_kind(const Options& o, const spo::ExperimentSetup& s, spo::BaselineKind kind,
                                      const std::vector<std::uint64_t>& seeds) {
    if (o.mode == "virtual") return spo::run_experiment(kind, s, seeds, o.jobs);
    std::vector<spo::RunMetrics> out;
    for (auto seed : seeds) out.push_back(run_single(o, s, kind, seed, true, false).metrics);
    return out;
}

bool all_complete(const std::vector<spo::RunMetrics>& runs) {
    for (const auto& m : runs)
        if (!m.diagnostic.empty()) {
            fmt::print(stderr, "{} seed {} aborted: {}\n", m.kind, m.seed, m.diagnostic);
            return false;
        }
    return true;
}

int cmd_compare(const Options& o) {
    Resolved r = resolve(o);
    auto setup = setup_for(o, r);
    std::vector<std::pair<std::string, std::vector<spo::RunMetrics>>> results;
    std::string csv = spo::csv_header();
    bool ok = true;
    for (auto kind : spo::all_baseline_kinds()) {
        auto runs = run_kind(o, setup, kind, r.seeds);
        ok = all_complete(runs) && ok;
        for (const auto& m : runs) csv += spo::csv_row(m);
        results.emplace_back(spo::to_string(kind), std::move(runs));
    }
    auto report = spo::compare_report(results);
    fmt::print("environment {}  model {}  seeds {}\n", setup.spec.name, spo::to_string(setup.model.kind),
               r.seeds.size());
    fmt::print("{}", spo::format_report(report));
    if (!o.out.empty()) {
        auto j = spo::report_to_json(report);
        j["environment"] = setup.spec.name;
        j["model"] = {{"kind", spo::to_string(setup.model.kind)},
                      {"drift_bias", setup.model.drift_bias},
                      {"drift_noise", setup.model.drift_noise}};
        for (const auto& [k, v] : spo::config_to_key_values(setup.cfg)) j["config"][k] = v;
        spo::write_file_atomic(fs::path(o.out) / "compare.csv", csv);
        spo::write_file_atomic(fs::path(o.out) / "compare.json", j.dump(2) + "\n");
    }
    return ok ? 0 : 1;
}

void apply_param(spo::SpoConfig& cfg, const std::string& param, double v) {
    spo::KeyValues kv{{param, fmt::format("{}", v)}};
    if (param == "rng_seed" || !spo::apply_config(kv, cfg).empty())
        throw UsageError(fmt::format("`{}` is not a sweepable configuration key", param));
    if (param == "rtt_base") cfg.jitter_half_width = std::min(cfg.jitter_half_width, cfg.rtt_base);
}

int cmd_sweep(const Options& o) {
    if (o.steps < 1) throw UsageError("--steps must be >= 1");
    Resolved r = resolve(o);
    auto base = setup_for(o, r);
    std::vector<spo::BaselineKind> kinds =
        o.kind == "all" ? spo::all_baseline_kinds() : std::vector{spo::parse_baseline_kind(o.kind)};

    std::string csv = "param,value,kind,runs,success_rate,idle_s_mean,idle_s_std,hit_rate_mean,mean_k,wasted_mean\n";
    bool ok = true;
    for (int i = 0; i < o.steps; ++i) {
        double v = o.steps == 1 ? o.from : o.from + (o.to - o.from) * i / (o.steps - 1);
        v = std::stod(fmt::format("{:.12g}", v));
        auto setup = base;
        apply_param(setup.cfg, o.param, v);
        spo::validate_config(setup.cfg);
        std::vector<std::pair<std::string, std::vector<spo::RunMetrics>>> results;
        for (auto kind : kinds) {
            auto runs = run_kind(o, setup, kind, r.seeds);
            ok = all_complete(runs) && ok;
            results.emplace_back(spo::to_string(kind), std::move(runs));
        }
        auto rep = spo::compare_report(results);
        for (const auto& s : rep.kinds) {
            csv += fmt::format("{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", o.param, v, s.kind, s.runs,
                               s.success_rate, s.idle_time.mean, s.idle_time.std, s.hit_rate.mean,
                               s.mean_horizon.mean, s.wasted.mean);
        }
    }
    if (o.out.empty())
        fmt::print("{}", csv);
    else
        spo::write_file_atomic(fs::path(o.out) / fmt::format("sweep_{}.csv", o.param), csv);
    return ok ? 0 : 1;
}

int cmd_calibrate(const Options& o) {
    Resolved r = resolve(o);
    spo::EnvironmentSpec env = r.env;
    env.control_interval = r.cfg.control_interval;
    auto cal = spo::calibrate_weights(env, 4, r.cfg.rng_seed);
    for (const auto& w : cal.warnings) fmt::print(stderr, "warning: {}\n", w);
    std::string text = fmt::format("# inverse-variance weights for {} (d_s = {})\n", env.name, env.d_s);
    for (double w : cal.weights.values()) text += fmt::format("{}\n", w);
    if (o.out.empty()) {
        fmt::print("{}", text);
    } else {
        auto path = fs::path(o.out) / fmt::format("weights_{}.txt", env.name);
        spo::write_file_atomic(path, text);
        fmt::print("wrote {}\n", path.string());
    }
    return 0;
}

int cmd_serve(const Options& o) {
    spo::CloudServer server(o.port);
    if (!o.port_file.empty()) spo::write_file_atomic(o.port_file, fmt::format("{}\n", server.port()));
    fmt::print("cloud endpoint listening on port {}\n", server.port());
    std::fflush(stdout);
    server.run(o.max_sessions);
    return 0;
}

void add_run_options(CLI::App* app, Options& o) {
    app->add_option("--config", o.config_file, "key = value configuration file");
    app->add_option("--env", o.env, "free_space | tight_tolerance | multi_stage");
    app->add_option("--seeds", o.seeds, "seed count N, or a list such as 1-10 or 1,4,9");
    app->add_option("--seed", o.seed, "single seed (default $SPO_SEED or 1)");
    app->add_option("--rtt", o.rtt, "base round trip [s]");
    app->add_option("--jitter", o.jitter, "round-trip jitter half width [s]");
    app->add_option("--kmin", o.k_min, "minimum horizon");
    app->add_option("--kmax", o.k_max, "maximum horizon");
    app->add_option("--beta", o.beta, "additive horizon increase");
    app->add_option("--epsilon", o.epsilon, "tube radius");
    app->add_option("--watermark", o.watermark, "prefetch low watermark (0 = off)");
    app->add_option("--model", o.model, "oracle | drifted");
    app->add_option("--drift-bias", o.drift_bias, "drifted model bias per step");
    app->add_option("--drift-noise", o.drift_noise, "drifted model noise std per step");
    app->add_option("--weights", o.weights_file, "weight file written by `spo calibrate`");
    app->add_option("--out", o.out, "output directory");
    app->add_option("--addr", o.addr, "cloud endpoint host:port (socket mode)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Speculative policy orchestration: edge/cloud experiments"};
    app.require_subcommand(1);
    Options o;

    auto* run = app.add_subcommand("run", "one kind over one or more seeds");
    add_run_options(run, o);
    run->add_option("--kind", o.kind, "blocking | t1sc | nftc | spo");
    run->add_option("--mode", o.mode, "virtual | socket")->check(CLI::IsMember({"virtual", "socket"}));

    auto* compare = app.add_subcommand("compare", "all four kinds over a seed list");
    add_run_options(compare, o);
    compare->add_option("--mode", o.mode, "virtual | socket")->check(CLI::IsMember({"virtual", "socket"}));
    compare->add_option("--jobs", o.jobs, "parallel runs (0 = all cores)");

    auto* sweep = app.add_subcommand("sweep", "vary one parameter and emit a CSV curve");
    add_run_options(sweep, o);
    sweep->add_option("--kind", o.kind, "a kind or `all` (default all)");
    sweep->add_option("--param", o.param, "configuration key, e.g. rtt_base or epsilon_base");
    sweep->add_option("--from", o.from, "first value");
    sweep->add_option("--to", o.to, "last value");
    sweep->add_option("--steps", o.steps, "number of values");
    sweep->add_option("--jobs", o.jobs, "parallel runs (0 = all cores)");
    sweep->add_option("--mode", o.mode, "virtual | socket")->check(CLI::IsMember({"virtual", "socket"}));

    auto* calibrate = app.add_subcommand("calibrate", "write the inverse-variance weight file");
    calibrate->add_option("--config", o.config_file, "key = value configuration file");
    calibrate->add_option("--env", o.env, "environment name");
    calibrate->add_option("--seed", o.seed, "calibration seed");
    calibrate->add_option("--out", o.out, "output directory");

    auto* serve = app.add_subcommand("serve", "cloud endpoint on a TCP port");
    serve->add_option("--port", o.port, "listen port (0 = any free port)");
    serve->add_option("--port-file", o.port_file, "write the bound port to this file");
    serve->add_option("--max-sessions", o.max_sessions, "exit after this many sessions (0 = never)");
    serve->add_option("--mode", o.mode, "must be socket");

    auto* edge = app.add_subcommand("edge-connect", "edge loop against a remote cloud endpoint");
    add_run_options(edge, o);
    edge->add_option("--kind", o.kind, "blocking | t1sc | nftc | spo");
    edge->add_option("--port", o.port, "shorthand for --addr 127.0.0.1:PORT");
    edge->add_option("--mode", o.mode, "must be socket");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(o, o.mode == "socket");
        if (compare->parsed()) return cmd_compare(o);
        if (sweep->parsed()) {
            if (!sweep->count("--kind")) o.kind = "all";
            return cmd_sweep(o);
        }
        if (calibrate->parsed()) return cmd_calibrate(o);
        if ((serve->parsed() || edge->parsed()) && serve->count("--mode") + edge->count("--mode") > 0 &&
            o.mode != "socket")
            throw UsageError("serve and edge-connect run in socket mode only");
        if (serve->parsed()) return cmd_serve(o);
        if (edge->parsed()) {
            if (edge->count("--port") && !edge->count("--addr")) o.addr = fmt::format("127.0.0.1:{}", o.port);
            return cmd_run(o, true);
        }
    } catch (const spo::ConfigError& e) {
        fmt::print(stderr, "invalid configuration:\n");
        for (const auto& v : e.violations()) fmt::print(stderr, "  {}\n", v);
        return 2;
    } catch (const spo::SocketError& e) {
        fmt::print(stderr, "socket error: {}\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
    return 2;
}
