#include "entb92/bell.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace entb92 {

namespace {

constexpr std::array<const char*, 4> kPairKeys{"00", "01", "10", "11"};

void require_setting(int i, int j) {
    if (i < 0 || i > 1 || j < 0 || j > 1) throw std::out_of_range("setting index must be 0 or 1");
}

void require_cell(int a, int b) {
    if (a < 0 || a > 2 || b < 0 || b > 2) throw std::out_of_range("outcome index must be 0, 1 or 2");
}

}  // namespace

CorrelationTable CorrelationTable::from_probabilities(const std::array<ProbabilityGrid, 4>& grids) {
    for (std::size_t p = 0; p < 4; ++p) {
        double sum = 0.0;
        for (const auto& row : grids[p]) {
            for (double v : row) {
                if (!(v >= 0.0) || v > 1.0 + 1e-12) {
                    throw std::invalid_argument("correlation table: probability outside [0, 1] in pair " +
                                                std::string(kPairKeys[p]));
                }
                sum += v;
            }
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw std::invalid_argument("correlation table: pair " + std::string(kPairKeys[p]) +
                                        " does not sum to 1");
        }
    }
    CorrelationTable t;
    t.mode_ = TableMode::Probability;
    t.probabilities_ = grids;
    return t;
}

CorrelationTable CorrelationTable::from_counts(const std::array<CountGrid, 4>& grids) {
    CorrelationTable t;
    t.mode_ = TableMode::Counts;
    t.counts_ = grids;
    for (std::size_t p = 0; p < 4; ++p) {
        std::uint64_t n = 0;
        for (const auto& row : grids[p]) {
            for (auto c : row) n += c;
        }
        t.totals_[p] = n;
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                t.probabilities_[p][a][b] = n == 0 ? 0.0 : static_cast<double>(grids[p][a][b]) / static_cast<double>(n);
            }
        }
    }
    return t;
}

CorrelationTable CorrelationTable::empty_counts() { return from_counts({}); }

double CorrelationTable::probability(int i, int j, int a, int b) const {
    require_setting(i, j);
    require_cell(a, b);
    return probabilities_[pair_index(i, j)][a][b];
}

ProbabilityGrid CorrelationTable::probabilities(int i, int j) const {
    require_setting(i, j);
    return probabilities_[pair_index(i, j)];
}

std::uint64_t CorrelationTable::count(int i, int j, int a, int b) const {
    if (mode_ != TableMode::Counts) throw std::logic_error("correlation table: counts requested in probability mode");
    require_setting(i, j);
    require_cell(a, b);
    return counts_[pair_index(i, j)][a][b];
}

std::uint64_t CorrelationTable::total(int i, int j) const {
    require_setting(i, j);
    return totals_[pair_index(i, j)];
}

std::uint64_t CorrelationTable::total() const { return totals_[0] + totals_[1] + totals_[2] + totals_[3]; }

double CorrelationTable::alice_marginal(int i, int j) const {
    require_setting(i, j);
    const auto& g = probabilities_[pair_index(i, j)];
    return g[kTarget][0] + g[kTarget][1] + g[kTarget][2];
}

double CorrelationTable::bob_marginal(int i, int j) const {
    require_setting(i, j);
    const auto& g = probabilities_[pair_index(i, j)];
    return g[0][kTarget] + g[1][kTarget] + g[2][kTarget];
}

CorrelationTable CorrelationTable::merged(const CorrelationTable& other) const {
    if (mode_ != TableMode::Counts || other.mode_ != TableMode::Counts) {
        throw std::logic_error("correlation table: only count-mode tables can be merged");
    }
    std::array<CountGrid, 4> sum = counts_;
    for (std::size_t p = 0; p < 4; ++p) {
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) sum[p][a][b] += other.counts_[p][a][b];
        }
    }
    return from_counts(sum);
}

CorrelationTable CorrelationTable::to_probability_mode() const {
    if (mode_ == TableMode::Probability) return *this;
    for (auto n : totals_) {
        if (n == 0) throw std::domain_error("correlation table: a setting pair has no rounds");
    }
    return from_probabilities(probabilities_);
}

double CorrelationTable::marginal_inconsistency() const {
    auto gap = [&](double p1, std::uint64_t n1, double p2, std::uint64_t n2) {
        const double diff = std::abs(p1 - p2);
        if (mode_ == TableMode::Probability) return diff;
        if (n1 == 0 || n2 == 0) return 0.0;
        const double var = p1 * (1.0 - p1) / static_cast<double>(n1) + p2 * (1.0 - p2) / static_cast<double>(n2);
        if (var == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        return diff / std::sqrt(var);
    };
    double worst = 0.0;
    for (int s = 0; s < 2; ++s) {
        worst = std::max(worst, gap(alice_marginal(s, 0), total(s, 0), alice_marginal(s, 1), total(s, 1)));
        worst = std::max(worst, gap(bob_marginal(0, s), total(0, s), bob_marginal(1, s), total(1, s)));
    }
    return worst;
}

nlohmann::json to_json(const CorrelationTable& table) {
    nlohmann::json pairs = nlohmann::json::object();
    nlohmann::json totals = table.mode() == TableMode::Counts ? nlohmann::json::object() : nlohmann::json(nullptr);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const std::string key = kPairKeys[CorrelationTable::pair_index(i, j)];
            nlohmann::json rows = nlohmann::json::array();
            for (int a = 0; a < 3; ++a) {
                nlohmann::json row = nlohmann::json::array();
                for (int b = 0; b < 3; ++b) {
                    if (table.mode() == TableMode::Counts) {
                        row.push_back(table.count(i, j, a, b));
                    } else {
                        row.push_back(table.probability(i, j, a, b));
                    }
                }
                rows.push_back(row);
            }
            pairs[key] = rows;
            if (table.mode() == TableMode::Counts) totals[key] = table.total(i, j);
        }
    }
    return {{"mode", table.mode() == TableMode::Counts ? "counts" : "probability"}, {"pairs", pairs}, {"totals", totals}};
}

CorrelationTable correlation_table_from_json(const nlohmann::json& j) {
    const std::string mode = j.at("mode").get<std::string>();
    const auto& pairs = j.at("pairs");
    if (mode == "counts") {
        std::array<CountGrid, 4> grids{};
        for (std::size_t p = 0; p < 4; ++p) {
            const auto& rows = pairs.at(kPairKeys[p]);
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) grids[p][a][b] = rows.at(a).at(b).get<std::uint64_t>();
            }
        }
        return CorrelationTable::from_counts(grids);
    }
    if (mode == "probability") {
        std::array<ProbabilityGrid, 4> grids{};
        for (std::size_t p = 0; p < 4; ++p) {
            const auto& rows = pairs.at(kPairKeys[p]);
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) grids[p][a][b] = rows.at(a).at(b).get<double>();
            }
        }
        return CorrelationTable::from_probabilities(grids);
    }
    throw std::invalid_argument("correlation table: unknown mode '" + mode + "'");
}

namespace bell {
namespace {

using Coefficients = std::array<ProbabilityGrid, 4>;

// Value and delta-method standard error of a linear functional of the cell
// frequencies. Pairs are independent multinomial samples.
BellValue evaluate(const CorrelationTable& table, const Coefficients& c) {
    BellValue out;
    double variance = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const int p = CorrelationTable::pair_index(i, j);
            double mean = 0.0;
            double second = 0.0;
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                    const double f = table.probability(i, j, a, b);
                    mean += c[p][a][b] * f;
                    second += c[p][a][b] * c[p][a][b] * f;
                }
            }
            out.value += mean;
            if (table.mode() == TableMode::Counts) {
                variance += std::max(0.0, second - mean * mean) / static_cast<double>(table.total(i, j));
            }
        }
    }
    out.standard_error = std::sqrt(variance);
    return out;
}

void require_usable(const CorrelationTable& table) {
    if (table.mode() == TableMode::Probability) {
        if (table.marginal_inconsistency() > kMarginalTol) {
            throw std::domain_error("correlation table: inconsistent single-party marginals");
        }
        return;
    }
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            if (table.total(i, j) == 0) throw std::domain_error("correlation table: a setting pair has no rounds");
        }
    }
}

constexpr double pair_sign(int i, int j) { return (i == 0 && j == 0) ? -1.0 : 1.0; }

Coefficients ch_coefficients() {
    Coefficients c{};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            auto& g = c[CorrelationTable::pair_index(i, j)];
            g[kTarget][kTarget] += pair_sign(i, j);
            // -P(a_1), averaged over Bob's two settings.
            if (i == 1) {
                for (int b = 0; b < 3; ++b) g[kTarget][b] -= 0.5;
            }
            // -P(b_1), averaged over Alice's two settings.
            if (j == 1) {
                for (int a = 0; a < 3; ++a) g[a][kTarget] -= 0.5;
            }
        }
    }
    return c;
}

// Outcome sign of a +-1 observable; vacuum counts as the orthogonal result.
constexpr double outcome_sign(int o) { return o == kTarget ? 1.0 : -1.0; }

}  // namespace

BellValue ch_value(const CorrelationTable& table) {
    require_usable(table);
    return evaluate(table, ch_coefficients());
}

double correlator(const CorrelationTable& table, int i, int j) {
    require_setting(i, j);
    if (table.mode() == TableMode::Counts && table.total(i, j) == 0) {
        throw std::domain_error("correlation table: a setting pair has no rounds");
    }
    const auto p = [&](int a, int b) { return table.probability(i, j, a, b); };
    return p(kTarget, kTarget) +
           (p(kOrthogonal, kOrthogonal) + p(kVacuum, kOrthogonal) + p(kOrthogonal, kVacuum) + p(kVacuum, kVacuum)) -
           (p(kOrthogonal, kTarget) + p(kVacuum, kTarget)) - (p(kTarget, kOrthogonal) + p(kTarget, kVacuum));
}

BellValue chsh_value(const CorrelationTable& table) {
    require_usable(table);
    Coefficients c{};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            auto& g = c[CorrelationTable::pair_index(i, j)];
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) g[a][b] = pair_sign(i, j) * outcome_sign(a) * outcome_sign(b);
            }
        }
    }
    return evaluate(table, c);
}

BellValue chsh_from_ch(const BellValue& ch) { return {4.0 * ch.value + 2.0, 4.0 * ch.standard_error}; }

// Both closed forms are written without the 1 - cos and sqrt(1 + x) - 1
// cancellations, which otherwise swamp their difference at small theta.
double analytic_ch(double theta) {
    const double h = std::sin(theta / 2.0);
    return std::cos(theta) * h * h;
}

ChMax analytic_ch_max(double theta) {
    const double s = std::sin(theta);
    return {0.5 * s * s / (std::sqrt(s * s + 1.0) + 1.0), states::max_violation_bob_angle(theta)};
}

double ch_with_loss(double theta, double eta_a, double eta_b) {
    const double s = std::sin(theta);
    const double h = std::sin(theta / 2.0);
    return (eta_a - 0.5) * eta_b * s * s - eta_a * h * h;
}

CorrelationTable table_from_state(const channels::PipelineState& state, const states::SettingPairSpec& settings,
                                  const ChannelModel& channel) {
    channel.validate();
    std::array<ProbabilityGrid, 4> grids{};
    for (int i = 0; i < 2; ++i) {
        const qcore::Povm alice = channels::lossy_povm(settings.alice[i].povm(), channel.eta_a);
        for (int j = 0; j < 2; ++j) {
            const qcore::Povm bob = channels::lossy_povm(settings.bob[j].povm(), channel.eta_b);
            auto& g = grids[CorrelationTable::pair_index(i, j)];
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                    g[a][b] = qcore::born_probability(state.clicked, qcore::tensor(alice.element(a), bob.element(b)));
                }
                g[a][kVacuum] += qcore::born_probability(state.alice_given_vacuum, alice.element(a));
            }
        }
    }
    return CorrelationTable::from_probabilities(grids);
}

}  // namespace bell
}  // namespace entb92
