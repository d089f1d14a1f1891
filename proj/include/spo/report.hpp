#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "spo/cloud.hpp"
#include "spo/config.hpp"
#include "spo/environments.hpp"
#include "spo/session.hpp"

namespace spo {

class ComparisonError : public Error {
public:
    using Error::Error;
};

constexpr int kRunSchemaVersion = 1;

struct Stat {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation, 0 for a single value
};

Stat mean_std(const std::vector<double>& xs);

struct KindSummary {
    std::string kind;
    std::size_t runs = 0;
    double success_rate = 0.0;
    Stat steps;
    Stat idle_time;
    Stat hit_rate;
    Stat mean_horizon;
    Stat wasted;
    Stat generated;
};

struct ComparisonReport {
    std::vector<KindSummary> kinds;           // in the order given
    std::vector<std::uint64_t> seeds;
    double idle_reduction_pct = 0.0;          // SPO vs Blocking, on mean idle time
    double wasted_reduction_pct = 0.0;        // SPO vs NFTC, on mean wasted predictions
    std::map<std::uint64_t, double> idle_reduction_per_seed;
    std::map<std::uint64_t, double> wasted_reduction_per_seed;
};

/// 100 * (1 - value / baseline); 0 when the baseline is 0.
double reduction_percent(double baseline, double value);

/// Requires identical seed lists for every kind. Reductions are computed
/// when the blocking / nftc / spo entries are present.
ComparisonReport compare_report(const std::vector<std::pair<std::string, std::vector<RunMetrics>>>& results);

std::string format_report(const ComparisonReport& report);
nlohmann::json report_to_json(const ComparisonReport& report);

// Aggregate CSV: kind,seed,success,steps,idle_s,hit_rate,mean_k,wasted,generated
std::string csv_header();
std::string csv_row(const RunMetrics& m);

nlohmann::json metrics_to_json(const RunMetrics& m);

/// One run document: schema version, metrics, and the effective settings.
nlohmann::json run_document(const RunMetrics& m, const SpoConfig& cfg, const EnvironmentSpec& env,
                            const ModelOptions& model, const std::string& mode);

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace spo
