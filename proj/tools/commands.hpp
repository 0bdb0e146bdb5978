#pragma once

// Subcommand bodies of the entb92 command-line tool. Each returns the text it
// would write, so the outputs can be compared byte for byte in tests.

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "entb92/session.hpp"

namespace entb92::cli {

enum class Format { Csv, Json };

/// Exit codes of the tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitInsufficientStatistics = 3;

/// 12 significant digits, '.' decimal separator.
std::string format_number(double v);

/// theta_k = 90 k / (points + 1) degrees, k = 1..points.
std::vector<double> theta_grid_degrees(int points);

struct CurveOptions {
    int points = 179;
    Format format = Format::Csv;
};

/// Columns: theta_deg, theta_rad, s_ch, s_ch_max, bob_angle_deg.
std::string curve(const CurveOptions& options);

struct RateCurveOptions {
    double p_min = 0.0;
    double p_max = 0.04;
    int points = 41;
    Format format = Format::Csv;
};

/// Columns: p, normalized_rate, theta_star_deg, gain, qber, pm_b92_p_max.
std::string rate_curve(const RateCurveOptions& options);

std::string thresholds(Format format);

struct AttackDemoOptions {
    int points = 89;
    Format format = Format::Csv;
};

/// Columns: theta_deg, s_ch_clean, s_ch_attacked, both from Born-rule tables.
std::string attack_demo(const AttackDemoOptions& options);

std::string table_csv(const CorrelationTable& table);

struct SimulateOutput {
    SessionResult result;
    std::string json;
    std::string table_csv;
};

SimulateOutput simulate(const SessionConfig& config, unsigned workers);

std::string sha256_hex(std::string_view data);

struct EmittedFile {
    std::string path;
    std::string contents;
};

nlohmann::json manifest(const std::string& subcommand, const nlohmann::json& parameters,
                        const std::optional<std::uint64_t>& seed, const std::vector<EmittedFile>& files);

}  // namespace entb92::cli
