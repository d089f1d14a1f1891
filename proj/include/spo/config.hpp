#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "spo/types.hpp"

namespace spo {

/// Runtime parameters. Defaults are the reference experimental setup:
/// 150 ms RTT with +/-30 ms jitter, 50 Hz control, K in [2, 10], beta = 1,
/// epsilon = 20.
struct SpoConfig {
    double epsilon_base = 20.0;
    int k_min = 2;
    int k_max = 10;
    int beta = 1;
    double control_interval = 0.02;   // seconds
    double rtt_base = 0.150;          // seconds, round trip
    double jitter_half_width = 0.030; // seconds, round trip
    std::uint64_t rng_seed = 1;
    int prefetch_low_watermark = 0;   // 0 = request only when blocked

    double control_frequency() const { return 1.0 / control_interval; }
};

/// Thrown by validate_config; carries every violated invariant.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// Every violated invariant, each naming the field and its bound. Empty iff valid.
std::vector<std::string> config_violations(const SpoConfig& cfg);

/// Returns cfg unchanged when valid, throws ConfigError otherwise.
const SpoConfig& validate_config(const SpoConfig& cfg);

// ---------------------------------------------------------------------------
// Flat `key = value` files, `#` starts a comment.
// ---------------------------------------------------------------------------

using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text);
KeyValues load_key_value_file(const std::filesystem::path& path);

/// Applies recognised SpoConfig keys, returns the keys it did not recognise.
std::vector<std::string> apply_config(const KeyValues& kv, SpoConfig& cfg);

/// Inverse of apply_config; keys in a stable order.
KeyValues config_to_key_values(const SpoConfig& cfg);

double parse_double(const std::string& key, const std::string& value);
long long parse_int(const std::string& key, const std::string& value);

}  // namespace spo
