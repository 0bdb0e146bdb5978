#pragma once

// Device-independent secure gain and rate of the protocol, and the solvers
// built on top of it: optimal source angle, tolerable depolarization and
// detection-efficiency thresholds.

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "entb92/channels.hpp"

namespace entb92 {

struct RateReport {
    double s_ch = 0.0;
    double s_chsh = 0.0;
    double qber = 0.0;                 // n_err / n_con
    double conclusive_fraction = 0.0;  // conclusive events per detected event
    double gain = 0.0;                 // secure bits per conclusive event
    double rate = 0.0;                 // n_con * gain
    double normalized_rate = 0.0;      // secure bits per detected event
};

nlohmann::json to_json(const RateReport& report);

struct ThresholdResult {
    std::string parameter;
    double critical_value = 0.0;
    double lower = 0.0;  // bracket after bisection
    double upper = 0.0;
    double tolerance = 0.0;
    /// Optimal source angle at the threshold, for depolarization thresholds.
    std::optional<double> theta;
};

nlohmann::json to_json(const ThresholdResult& result);

/// How Bob's measurement is chosen when estimating the CH value.
/// FixedSettings uses the protocol's own conjugate states; ChMax rotates Bob
/// to theta' (tan theta' = sin theta), which reaches the maximal violation of
/// the source state but makes his conclusive outcomes less reliable.
enum class Strategy { FixedSettings, ChMax };

std::string to_string(Strategy strategy);

enum class EfficiencyMode { AlicePerfect, BobPerfect, Symmetric };

std::string to_string(EfficiencyMode mode);

namespace rates {

/// Maximum depolarization tolerated by prepare-and-measure B92, kept as a
/// reference value for comparisons only.
inline constexpr double kPmB92MaxDepolarization = 0.034;

double binary_entropy(double q);

/// -log2(1/2 + sqrt(2 - S^2/4)/2) - h(q). Throws std::domain_error beyond
/// the Tsirelson bound |S| <= 2 sqrt2.
double gain_from_chsh(double s_chsh, double q);

/// 1 - log2(1 + sqrt(1 - 4s - 4s^2)) - h(q); identical to
/// gain_from_chsh(4s + 2, q).
double gain_from_ch(double s_ch, double q);

/// r = n_con * gain. Negative gains are returned unchanged.
double key_rate(double n_con, double gain);

/// CH value after depolarizing Bob's qubit: (1 - 4p/3) s - 2p/3.
double depolarized_ch(double s_ch, double p);

struct KeyStatistics {
    double qber;
    double conclusive_fraction;
};

/// QBER and fraction of conclusive results among events detected by both
/// parties, for Alice measuring Z and Bob picking B_0/B_1 uniformly.
/// Computed from the channel-processed density matrix. Throws
/// std::invalid_argument if an attacker is configured and std::domain_error
/// when no conclusive event can occur.
KeyStatistics qber_and_conclusive(double theta, const ChannelModel& channel);
/// As above, with Bob's conjugate states built from `bob_theta`.
KeyStatistics qber_and_conclusive(double theta, double bob_theta, const ChannelModel& channel);

/// Full analytic report at source angle theta and depolarization p, with the
/// test-round fraction taken to zero.
RateReport normalized_rate(double theta, double p, Strategy strategy = Strategy::FixedSettings);

struct OptimalAngle {
    double theta;
    RateReport report;
};

/// Source angle maximizing the secure gain at depolarization p in [0, 0.05]:
/// a 200-point grid followed by golden-section refinement.
OptimalAngle optimal_theta(double p, Strategy strategy = Strategy::FixedSettings);

/// Largest p with a positive optimized rate, by bisection on [0, 0.05].
ThresholdResult max_depolarization(Strategy strategy);

/// Smallest efficiency allowing a CH violation in the given configuration.
ThresholdResult efficiency_threshold(EfficiencyMode mode);

}  // namespace rates
}  // namespace entb92
