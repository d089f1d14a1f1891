#include "spo/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace spo {

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += "; ";
        out += s;
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error("invalid configuration: " + join(violations)), violations_(std::move(violations)) {}

std::vector<std::string> config_violations(const SpoConfig& cfg) {
    std::vector<std::string> v;
    if (!(cfg.epsilon_base > 0.0) || !std::isfinite(cfg.epsilon_base))
        v.push_back(fmt::format("epsilon_base > 0 violated (epsilon_base = {})", cfg.epsilon_base));
    if (cfg.k_min < 1) v.push_back(fmt::format("k_min >= 1 violated (k_min = {})", cfg.k_min));
    if (cfg.k_max < 1) v.push_back(fmt::format("k_max >= 1 violated (k_max = {})", cfg.k_max));
    if (cfg.k_min > cfg.k_max)
        v.push_back(fmt::format("k_min <= k_max violated (k_min = {}, k_max = {})", cfg.k_min, cfg.k_max));
    if (cfg.beta < 1) v.push_back(fmt::format("beta >= 1 violated (beta = {})", cfg.beta));
    if (!(cfg.control_interval > 0.0) || !std::isfinite(cfg.control_interval))
        v.push_back(fmt::format("control_interval > 0 violated (control_interval = {})", cfg.control_interval));
    if (!(cfg.rtt_base >= 0.0) || !std::isfinite(cfg.rtt_base))
        v.push_back(fmt::format("rtt_base >= 0 violated (rtt_base = {})", cfg.rtt_base));
    if (!(cfg.jitter_half_width >= 0.0) || !std::isfinite(cfg.jitter_half_width))
        v.push_back(fmt::format("jitter_half_width >= 0 violated (jitter_half_width = {})", cfg.jitter_half_width));
    else if (cfg.jitter_half_width > cfg.rtt_base)
        v.push_back(fmt::format("jitter_half_width <= rtt_base violated (jitter_half_width = {}, rtt_base = {})",
                                cfg.jitter_half_width, cfg.rtt_base));
    if (cfg.prefetch_low_watermark < 0)
        v.push_back(fmt::format("prefetch_low_watermark >= 0 violated (prefetch_low_watermark = {})",
                                cfg.prefetch_low_watermark));
    else if (cfg.prefetch_low_watermark > 0 && cfg.prefetch_low_watermark >= cfg.k_min)
        v.push_back(fmt::format("prefetch_low_watermark < k_min violated (prefetch_low_watermark = {}, k_min = {})",
                                cfg.prefetch_low_watermark, cfg.k_min));
    return v;
}

const SpoConfig& validate_config(const SpoConfig& cfg) {
    auto v = config_violations(cfg);
    if (!v.empty()) throw ConfigError(std::move(v));
    return cfg;
}

KeyValues parse_key_values(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument(fmt::format("line {}: expected `key = value`", line_no));
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw InvalidArgument(fmt::format("line {}: empty key", line_no));
        kv[key] = value;
    }
    return kv;
}

KeyValues load_key_value_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str());
}

double parse_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end)
        throw InvalidArgument(fmt::format("{}: `{}` is not a number", key, value));
    return out;
}

long long parse_int(const std::string& key, const std::string& value) {
    long long out = 0;
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end)
        throw InvalidArgument(fmt::format("{}: `{}` is not an integer", key, value));
    return out;
}

std::vector<std::string> apply_config(const KeyValues& kv, SpoConfig& cfg) {
    std::vector<std::string> unknown;
    for (const auto& [key, value] : kv) {
        if (key == "epsilon_base") cfg.epsilon_base = parse_double(key, value);
        else if (key == "k_min") cfg.k_min = static_cast<int>(parse_int(key, value));
        else if (key == "k_max") cfg.k_max = static_cast<int>(parse_int(key, value));
        else if (key == "beta") cfg.beta = static_cast<int>(parse_int(key, value));
        else if (key == "control_interval") cfg.control_interval = parse_double(key, value);
        else if (key == "rtt_base") cfg.rtt_base = parse_double(key, value);
        else if (key == "jitter_half_width") cfg.jitter_half_width = parse_double(key, value);
        else if (key == "rng_seed") cfg.rng_seed = static_cast<std::uint64_t>(parse_int(key, value));
        else if (key == "prefetch_low_watermark") cfg.prefetch_low_watermark = static_cast<int>(parse_int(key, value));
        else unknown.push_back(key);
    }
    return unknown;
}

KeyValues config_to_key_values(const SpoConfig& cfg) {
    return {
        {"epsilon_base", fmt::format("{}", cfg.epsilon_base)},
        {"k_min", fmt::format("{}", cfg.k_min)},
        {"k_max", fmt::format("{}", cfg.k_max)},
        {"beta", fmt::format("{}", cfg.beta)},
        {"control_interval", fmt::format("{}", cfg.control_interval)},
        {"rtt_base", fmt::format("{}", cfg.rtt_base)},
        {"jitter_half_width", fmt::format("{}", cfg.jitter_half_width)},
        {"rng_seed", fmt::format("{}", cfg.rng_seed)},
        {"prefetch_low_watermark", fmt::format("{}", cfg.prefetch_low_watermark)},
    };
}

}  // namespace spo
