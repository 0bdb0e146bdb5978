#pragma once

// Seeded Monte-Carlo simulation of protocol sessions, round by round.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "entb92/bell.hpp"
#include "entb92/philox.hpp"
#include "entb92/rates.hpp"

namespace entb92 {

struct SessionConfig {
    ProtocolAngle angle = ProtocolAngle::from_degrees(60.0);
    std::uint64_t n_rounds = 1;
    /// Probability that Alice measures X (the test basis).
    double test_fraction = 0.5;
    ChannelModel channel;
    std::uint64_t seed = 0;
    /// The session aborts when the CH estimate is at or below this value.
    double abort_threshold = 0.0;
    std::uint64_t chunk_size = 1 << 16;

    /// Throws std::domain_error on out-of-range fields.
    void validate() const;
};

nlohmann::json to_json(const SessionConfig& config);

enum class AliceOutcome { Zero, One, Vacuum };
enum class BobOutcome { Conclusive, Inconclusive, Vacuum };

struct KeyBits {
    int alice;
    int bob;
};

struct RoundRecord {
    AliceBasis alice_basis = AliceBasis::Z;
    AliceOutcome alice_outcome = AliceOutcome::Vacuum;
    int bob_basis = 0;
    BobOutcome bob_outcome = BobOutcome::Vacuum;
    /// Eve's POVM index (1..4) when the attacker is active.
    std::optional<int> eve_outcome;
    /// Present iff Alice measured Z and detected, and Bob was conclusive.
    std::optional<KeyBits> key;
};

/// Precomputed per-round outcome distributions for one configuration.
class RoundSampler {
public:
    explicit RoundSampler(const SessionConfig& config);

    RoundRecord sample(RoundStream& rng) const;
    const SessionConfig& config() const { return config_; }

private:
    using CellDistribution = std::array<double, 9>;  // cumulative, row-major [alice][bob]

    struct Branch {
        int eve_outcome;  // 0 when there is no attacker
        double cumulative_weight;
        std::array<CellDistribution, 4> cells;  // per setting pair
    };

    SessionConfig config_;
    std::vector<Branch> branches_;
};

RoundRecord sample_round(RoundStream& rng, const RoundSampler& sampler);

struct SiftResult {
    std::vector<std::uint8_t> alice_key;
    std::vector<std::uint8_t> bob_key;
    std::uint64_t n_con = 0;
    std::uint64_t n_err = 0;
    /// Rounds where both parties registered a detection.
    std::uint64_t n_detected = 0;
    /// The subset of n_detected where Alice measured Z.
    std::uint64_t n_key_detected = 0;
};

SiftResult sift(std::span<const RoundRecord> records);

/// Count-mode table: Alice's Z rounds feed setting a_0 (target |0_z>), X
/// rounds feed a_1 (target |1_x>); Bob's basis B_k feeds b_k (target
/// conclusive).
CorrelationTable estimate_table(std::span<const RoundRecord> records);

struct SessionResult {
    SessionConfig config;
    CorrelationTable table = CorrelationTable::empty_counts();
    std::uint64_t n_con = 0;
    std::uint64_t n_err = 0;
    std::uint64_t n_detected = 0;
    std::uint64_t n_key_detected = 0;
    std::optional<BellValue> s_ch;
    std::optional<double> qber;
    std::optional<double> qber_standard_error;
    /// Raw rates, with the configured test fraction in the denominator.
    std::optional<RateReport> rate_report;
    /// Normalized rate as if every detected round were a key round.
    std::optional<double> normalized_rate_extrapolated;
    bool insufficient_statistics = true;
    bool aborted = true;
};

nlohmann::json to_json(const SessionResult& result);

/// Runs config.n_rounds rounds split into chunks executed by up to `workers`
/// threads. The result does not depend on `workers` or the chunk size.
SessionResult run_session(const SessionConfig& config, unsigned workers = 1);

}  // namespace entb92
