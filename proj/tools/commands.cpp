#include "commands.hpp"

#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace entb92::cli {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Rows of named numeric columns, rendered as CSV or a JSON array of objects.
class Table {
public:
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add(std::vector<double> row) {
        if (row.size() != columns_.size()) throw std::logic_error("row width does not match header");
        rows_.push_back(std::move(row));
    }

    std::string render(Format format) const {
        if (format == Format::Json) {
            nlohmann::json out = nlohmann::json::array();
            for (const auto& row : rows_) {
                nlohmann::json obj = nlohmann::json::object();
                for (std::size_t c = 0; c < columns_.size(); ++c) obj[columns_[c]] = row[c];
                out.push_back(obj);
            }
            return out.dump(2) + "\n";
        }
        std::ostringstream os;
        for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << columns_[c];
        os << "\n";
        for (const auto& row : rows_) {
            for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_number(row[c]);
            os << "\n";
        }
        return os.str();
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

void require_points(int points) {
    if (points < 1) throw std::invalid_argument("--points must be at least 1");
}

double born_rule_ch(const ProtocolAngle& angle, const ChannelModel& channel) {
    const auto state = channels::analytic_pipeline_state(angle, channel);
    return bell::ch_value(bell::table_from_state(state, states::protocol_settings(angle), channel)).value;
}

}  // namespace

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);  // no "-0"
    return buf;
}

std::vector<double> theta_grid_degrees(int points) {
    require_points(points);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(points));
    for (int k = 1; k <= points; ++k) out.push_back(90.0 * k / (points + 1));
    return out;
}

std::string curve(const CurveOptions& options) {
    Table t({"theta_deg", "theta_rad", "s_ch", "s_ch_max", "bob_angle_deg"});
    for (double deg : theta_grid_degrees(options.points)) {
        const double theta = deg * kDeg;
        const auto max = bell::analytic_ch_max(theta);
        t.add({deg, theta, bell::analytic_ch(theta), max.value, max.bob_angle / kDeg});
    }
    return t.render(options.format);
}

std::string rate_curve(const RateCurveOptions& options) {
    if (options.points < 2) throw std::invalid_argument("--points must be at least 2");
    if (!(options.p_min >= 0.0 && options.p_max <= 0.05 && options.p_min < options.p_max)) {
        throw std::invalid_argument("noise range must satisfy 0 <= p-min < p-max <= 0.05");
    }
    Table t({"p", "normalized_rate", "theta_star_deg", "gain", "qber", "pm_b92_p_max"});
    for (int k = 0; k < options.points; ++k) {
        const double p = options.p_min + (options.p_max - options.p_min) * k / (options.points - 1);
        const auto best = rates::optimal_theta(p);
        t.add({p, best.report.normalized_rate, best.theta / kDeg, best.report.gain, best.report.qber,
               rates::kPmB92MaxDepolarization});
    }
    return t.render(options.format);
}

std::string thresholds(Format format) {
    const auto symmetric = rates::efficiency_threshold(EfficiencyMode::Symmetric);
    const auto alice = rates::efficiency_threshold(EfficiencyMode::AlicePerfect);
    const auto bob = rates::efficiency_threshold(EfficiencyMode::BobPerfect);
    const auto fixed = rates::max_depolarization(Strategy::FixedSettings);
    const auto chmax = rates::max_depolarization(Strategy::ChMax);

    if (format == Format::Csv) {
        std::ostringstream os;
        os << "name,critical_value,theta_deg\n";
        auto row = [&](const char* name, const ThresholdResult& r) {
            os << name << "," << format_number(r.critical_value) << ","
               << (r.theta ? format_number(*r.theta / kDeg) : "") << "\n";
        };
        row("efficiency.symmetric", symmetric);
        row("efficiency.alice_perfect", alice);
        row("efficiency.bob_perfect", bob);
        row("depolarization.fixed_settings", fixed);
        row("depolarization.ch_max", chmax);
        os << "pm_b92_p_max," << format_number(rates::kPmB92MaxDepolarization) << ",\n";
        return os.str();
    }
    nlohmann::json j = {
        {"efficiency", {{"symmetric", to_json(symmetric)}, {"alice_perfect", to_json(alice)}, {"bob_perfect", to_json(bob)}}},
        {"depolarization", {{"fixed_settings", to_json(fixed)}, {"ch_max", to_json(chmax)}}},
        {"pm_b92_p_max", rates::kPmB92MaxDepolarization}};
    return j.dump(2) + "\n";
}

std::string attack_demo(const AttackDemoOptions& options) {
    Table t({"theta_deg", "s_ch_clean", "s_ch_attacked"});
    const ChannelModel clean{};
    const ChannelModel attacked{1.0, 1.0, 0.0, Attacker::Usd};
    for (double deg : theta_grid_degrees(options.points)) {
        const ProtocolAngle angle = ProtocolAngle::from_degrees(deg);
        t.add({deg, born_rule_ch(angle, clean), born_rule_ch(angle, attacked)});
    }
    return t.render(options.format);
}

std::string table_csv(const CorrelationTable& table) {
    static constexpr const char* kOutcomes[] = {"target", "orthogonal", "vacuum"};
    std::ostringstream os;
    os << "alice_setting,bob_setting,alice_outcome,bob_outcome,count,probability\n";
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                    os << i << "," << j << "," << kOutcomes[a] << "," << kOutcomes[b] << ",";
                    if (table.mode() == TableMode::Counts) os << table.count(i, j, a, b);
                    os << "," << format_number(table.probability(i, j, a, b)) << "\n";
                }
            }
        }
    }
    return os.str();
}

SimulateOutput simulate(const SessionConfig& config, unsigned workers) {
    SimulateOutput out{run_session(config, workers), {}, {}};
    out.json = to_json(out.result).dump(2) + "\n";
    out.table_csv = table_csv(out.result.table);
    return out;
}

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex += kHex[md[i] >> 4];
        hex += kHex[md[i] & 0xF];
    }
    return hex;
}

nlohmann::json manifest(const std::string& subcommand, const nlohmann::json& parameters,
                        const std::optional<std::uint64_t>& seed, const std::vector<EmittedFile>& files) {
    nlohmann::json outputs = nlohmann::json::array();
    for (const auto& f : files) {
        outputs.push_back({{"path", f.path}, {"sha256", sha256_hex(f.contents)}, {"bytes", f.contents.size()}});
    }
    return {{"subcommand", subcommand},
            {"parameters", parameters},
            {"seed", seed ? nlohmann::json(*seed) : nlohmann::json(nullptr)},
            {"outputs", outputs}};
}

}  // namespace entb92::cli
