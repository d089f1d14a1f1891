#include "spo/report.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <unistd.h>

namespace spo {

Stat mean_std(const std::vector<double>& xs) {
    Stat s;
    if (xs.empty()) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return s;
}

double reduction_percent(double baseline, double value) {
    if (baseline == 0.0) return 0.0;
    return 100.0 * (1.0 - value / baseline);
}

namespace {

template <class F>
Stat stat_of(const std::vector<RunMetrics>& runs, F field) {
    std::vector<double> xs;
    xs.reserve(runs.size());
    for (const auto& r : runs) xs.push_back(static_cast<double>(field(r)));
    return mean_std(xs);
}

const std::vector<RunMetrics>* find_kind(const std::vector<std::pair<std::string, std::vector<RunMetrics>>>& results,
                                         const std::string& kind) {
    for (const auto& [k, runs] : results)
        if (k == kind) return &runs;
    return nullptr;
}

}  // namespace

ComparisonReport compare_report(const std::vector<std::pair<std::string, std::vector<RunMetrics>>>& results) {
    ComparisonReport rep;
    if (results.empty()) return rep;

    for (const auto& r : results.front().second) rep.seeds.push_back(r.seed);
    for (const auto& [kind, runs] : results) {
        std::vector<std::uint64_t> seeds;
        for (const auto& r : runs) seeds.push_back(r.seed);
        if (seeds != rep.seeds) throw ComparisonError(fmt::format("seed set of `{}` differs from `{}`", kind, results.front().first));
    }

    for (const auto& [kind, runs] : results) {
        KindSummary s;
        s.kind = kind;
        s.runs = runs.size();
        std::size_t ok = 0;
        for (const auto& r : runs) ok += r.success ? 1 : 0;
        s.success_rate = runs.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(runs.size());
        s.steps = stat_of(runs, [](const RunMetrics& r) { return r.steps_taken; });
        s.idle_time = stat_of(runs, [](const RunMetrics& r) { return r.idle_time; });
        s.hit_rate = stat_of(runs, [](const RunMetrics& r) { return r.hit_rate; });
        s.mean_horizon = stat_of(runs, [](const RunMetrics& r) { return r.mean_horizon; });
        s.wasted = stat_of(runs, [](const RunMetrics& r) { return r.wasted_predictions; });
        s.generated = stat_of(runs, [](const RunMetrics& r) { return r.generated_predictions; });
        rep.kinds.push_back(std::move(s));
    }

    const auto* blocking = find_kind(results, "blocking");
    const auto* nftc = find_kind(results, "nftc");
    const auto* spo = find_kind(results, "spo");
    auto summary = [&](const std::string& k) -> const KindSummary& {
        for (const auto& s : rep.kinds)
            if (s.kind == k) return s;
        throw ComparisonError("missing kind " + k);
    };
    if (spo && blocking) {
        rep.idle_reduction_pct = reduction_percent(summary("blocking").idle_time.mean, summary("spo").idle_time.mean);
        for (std::size_t i = 0; i < spo->size(); ++i)
            rep.idle_reduction_per_seed[(*spo)[i].seed] = reduction_percent((*blocking)[i].idle_time, (*spo)[i].idle_time);
    }
    if (spo && nftc) {
        rep.wasted_reduction_pct = reduction_percent(summary("nftc").wasted.mean, summary("spo").wasted.mean);
        for (std::size_t i = 0; i < spo->size(); ++i)
            rep.wasted_reduction_per_seed[(*spo)[i].seed] =
                reduction_percent(static_cast<double>((*nftc)[i].wasted_predictions),
                                  static_cast<double>((*spo)[i].wasted_predictions));
    }
    return rep;
}

std::string format_report(const ComparisonReport& report) {
    std::string out = fmt::format("{:<10} {:>5} {:>8} {:>16} {:>16} {:>14} {:>12} {:>16}\n", "kind", "runs", "success",
                                  "steps", "idle [s]", "hit rate", "mean K", "wasted");
    for (const auto& s : report.kinds) {
        out += fmt::format("{:<10} {:>5} {:>7.0f}% {:>8.1f} ± {:<5.1f} {:>8.3f} ± {:<5.3f} {:>6.3f} ± {:<5.3f} {:>5.2f} ± {:<4.2f} {:>8.1f} ± {:<5.1f}\n",
                           s.kind, s.runs, 100.0 * s.success_rate, s.steps.mean, s.steps.std, s.idle_time.mean,
                           s.idle_time.std, s.hit_rate.mean, s.hit_rate.std, s.mean_horizon.mean, s.mean_horizon.std,
                           s.wasted.mean, s.wasted.std);
    }
    out += fmt::format("idle-time reduction (spo vs blocking): {:.1f}%\n", report.idle_reduction_pct);
    out += fmt::format("wasted-prediction reduction (spo vs nftc): {:.1f}%\n", report.wasted_reduction_pct);
    return out;
}

nlohmann::json report_to_json(const ComparisonReport& report) {
    auto stat = [](const Stat& s) { return nlohmann::json{{"mean", s.mean}, {"std", s.std}}; };
    nlohmann::json j;
    j["schema_version"] = kRunSchemaVersion;
    j["seeds"] = report.seeds;
    j["idle_reduction_pct"] = report.idle_reduction_pct;
    j["wasted_reduction_pct"] = report.wasted_reduction_pct;
    for (const auto& s : report.kinds) {
        j["kinds"].push_back({{"kind", s.kind},
                              {"runs", s.runs},
                              {"success_rate", s.success_rate},
                              {"steps", stat(s.steps)},
                              {"idle_s", stat(s.idle_time)},
                              {"hit_rate", stat(s.hit_rate)},
                              {"mean_k", stat(s.mean_horizon)},
                              {"wasted", stat(s.wasted)},
                              {"generated", stat(s.generated)}});
    }
    for (const auto& [seed, v] : report.idle_reduction_per_seed) j["idle_reduction_per_seed"][std::to_string(seed)] = v;
    for (const auto& [seed, v] : report.wasted_reduction_per_seed)
        j["wasted_reduction_per_seed"][std::to_string(seed)] = v;
    return j;
}

std::string csv_header() { return "kind,seed,success,steps,idle_s,hit_rate,mean_k,wasted,generated\n"; }

std::string csv_row(const RunMetrics& m) {
    return fmt::format("{},{},{},{},{:.6f},{:.6f},{:.6f},{},{}\n", m.kind, m.seed, m.success ? 1 : 0, m.steps_taken,
                       m.idle_time, m.hit_rate, m.mean_horizon, m.wasted_predictions, m.generated_predictions);
}

nlohmann::json metrics_to_json(const RunMetrics& m) {
    return {{"kind", m.kind},
            {"seed", m.seed},
            {"success", m.success},
            {"steps_taken", m.steps_taken},
            {"sim_wall_time_s", m.sim_wall_time},
            {"idle_time_s", m.idle_time},
            {"hits", m.hits},
            {"misses", m.misses},
            {"holds", m.holds},
            {"awaiting", m.awaiting},
            {"direct", m.direct},
            {"hit_rate", m.hit_rate},
            {"mean_horizon", m.mean_horizon},
            {"refills", m.refills},
            {"generated_predictions", m.generated_predictions},
            {"executed_predictions", m.executed_predictions},
            {"wasted_predictions", m.wasted_predictions},
            {"leftover_predictions", m.leftover_predictions},
            {"subgoals_completed", m.subgoals_completed},
            {"bytes_up", m.bytes_up},
            {"bytes_down", m.bytes_down},
            {"diagnostic", m.diagnostic}};
}

nlohmann::json run_document(const RunMetrics& m, const SpoConfig& cfg, const EnvironmentSpec& env,
                            const ModelOptions& model, const std::string& mode) {
    nlohmann::json config;
    for (const auto& [k, v] : config_to_key_values(cfg)) config[k] = v;
    return {{"schema_version", kRunSchemaVersion},
            {"mode", mode},
            {"environment", {{"name", env.name}, {"d_s", env.d_s}, {"d_a", env.d_a}, {"max_steps", env.max_steps}}},
            {"model", {{"kind", to_string(model.kind)}, {"drift_bias", model.drift_bias}, {"drift_noise", model.drift_noise}}},
            {"config", config},
            {"metrics", metrics_to_json(m)}};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += fmt::format(".tmp.{}", ::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace spo
