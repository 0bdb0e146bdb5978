#pragma once

// Correlation tables and the Clauser-Horne / CHSH functionals evaluated on
// them, plus the closed-form CH curves of the protocol.

#include <array>
#include <cstdint>

#include <nlohmann/json.hpp>

#include "entb92/channels.hpp"
#include "entb92/states.hpp"

namespace entb92 {

/// Cell index of a party's outcome for one setting.
enum Outcome : int { kTarget = 0, kOrthogonal = 1, kVacuum = 2 };

using ProbabilityGrid = std::array<std::array<double, 3>, 3>;
using CountGrid = std::array<std::array<std::uint64_t, 3>, 3>;

enum class TableMode { Probability, Counts };

/// Joint outcome statistics for the four setting pairs (i, j), i = Alice's
/// setting, j = Bob's. Each pair holds a 3x3 grid indexed
/// [Alice outcome][Bob outcome] over {target, orthogonal, vacuum}.
class CorrelationTable {
public:
    /// Each grid must sum to 1 within 1e-9 and have nonnegative cells.
    static CorrelationTable from_probabilities(const std::array<ProbabilityGrid, 4>& grids);
    static CorrelationTable from_counts(const std::array<CountGrid, 4>& grids);
    static CorrelationTable empty_counts();

    static constexpr int pair_index(int i, int j) { return 2 * i + j; }

    TableMode mode() const { return mode_; }

    /// Cell probability; in count mode the cell count over the pair total
    /// (0 for a pair without rounds).
    double probability(int i, int j, int a, int b) const;
    ProbabilityGrid probabilities(int i, int j) const;
    /// Throws std::logic_error in probability mode.
    std::uint64_t count(int i, int j, int a, int b) const;
    /// Rounds recorded for the pair; 0 in probability mode.
    std::uint64_t total(int i, int j) const;
    std::uint64_t total() const;

    /// P(a_i) within pair (i, j), summing over all of Bob's outcomes.
    double alice_marginal(int i, int j) const;
    /// P(b_j) within pair (i, j), summing over all of Alice's outcomes.
    double bob_marginal(int i, int j) const;

    /// Cell-wise addition of two count-mode tables.
    CorrelationTable merged(const CorrelationTable& other) const;
    CorrelationTable to_probability_mode() const;

    /// Largest disagreement between the two estimates of each single-party
    /// marginal. In count mode it is expressed in standard errors.
    double marginal_inconsistency() const;

    friend bool operator==(const CorrelationTable&, const CorrelationTable&) = default;

private:
    CorrelationTable() = default;

    TableMode mode_ = TableMode::Probability;
    std::array<ProbabilityGrid, 4> probabilities_{};
    std::array<CountGrid, 4> counts_{};
    std::array<std::uint64_t, 4> totals_{};
};

nlohmann::json to_json(const CorrelationTable& table);
CorrelationTable correlation_table_from_json(const nlohmann::json& j);

struct BellValue {
    double value = 0.0;
    double standard_error = 0.0;
};

namespace bell {

/// Tolerance for marginal consistency of probability-mode tables.
inline constexpr double kMarginalTol = 1e-9;

/// S_CH = P(a1,b1) + P(a0,b1) + P(a1,b0) - P(a0,b0) - P(a1) - P(b1).
/// The single-party marginals include vacuum partners and are averaged over
/// the two pairs that measure them. Count-mode tables get a delta-method
/// standard error; probability-mode tables with inconsistent marginals throw
/// std::domain_error.
BellValue ch_value(const CorrelationTable& table);

/// <A_i B_j> with vacuum counted as the orthogonal outcome.
double correlator(const CorrelationTable& table, int i, int j);

/// <A1B1> + <A0B1> + <A1B0> - <A0B0>.
BellValue chsh_value(const CorrelationTable& table);

/// S_CHSH = 4 S_CH + 2.
BellValue chsh_from_ch(const BellValue& ch);

/// cos(theta) (1 - cos(theta)) / 2 for the protocol's own settings.
double analytic_ch(double theta);

struct ChMax {
    double value;      // (sqrt(sin^2 theta + 1) - 1) / 2
    double bob_angle;  // theta' with tan theta' = sin theta
};

ChMax analytic_ch_max(double theta);

/// (eta_a - 1/2) eta_b sin^2 theta - eta_a sin^2(theta/2).
double ch_with_loss(double theta, double eta_a, double eta_b);

/// Exact Born-rule table of a channel-processed state measured with the
/// given settings, detector efficiencies taken from `channel`.
CorrelationTable table_from_state(const channels::PipelineState& state, const states::SettingPairSpec& settings,
                                  const ChannelModel& channel);

}  // namespace bell
}  // namespace entb92
