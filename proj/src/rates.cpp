#include "entb92/rates.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "entb92/bell.hpp"

namespace entb92 {

nlohmann::json to_json(const RateReport& r) {
    return {{"s_ch", r.s_ch},
            {"s_chsh", r.s_chsh},
            {"qber", r.qber},
            {"conclusive_fraction", r.conclusive_fraction},
            {"gain", r.gain},
            {"rate", r.rate},
            {"normalized_rate", r.normalized_rate}};
}

nlohmann::json to_json(const ThresholdResult& t) {
    nlohmann::json j = {{"parameter", t.parameter},
                        {"critical_value", t.critical_value},
                        {"bracket", {t.lower, t.upper}},
                        {"tolerance", t.tolerance}};
    if (t.theta) {
        j["theta_rad"] = *t.theta;
        j["theta_deg"] = *t.theta * 180.0 / std::numbers::pi;
    }
    return j;
}

std::string to_string(Strategy strategy) { return strategy == Strategy::ChMax ? "ch_max" : "fixed_settings"; }

std::string to_string(EfficiencyMode mode) {
    switch (mode) {
        case EfficiencyMode::AlicePerfect: return "alice_perfect";
        case EfficiencyMode::BobPerfect: return "bob_perfect";
        case EfficiencyMode::Symmetric: return "symmetric";
    }
    return "symmetric";
}

namespace rates {
namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kMaxNoise = 0.05;

void require_probability(double q, const char* name) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error(std::string(name) + " must lie in [0, 1]");
}

// Maximizes f on [lo, hi] to a bracket width of `tol`.
template <class F>
double golden_section_max(F&& f, double lo, double hi, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    while (hi - lo > tol) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double binary_entropy(double q) {
    require_probability(q, "binary_entropy argument");
    if (q == 0.0 || q == 1.0) return 0.0;
    return -q * std::log2(q) - (1.0 - q) * std::log2(1.0 - q);
}

double gain_from_chsh(double s_chsh, double q) {
    const double radicand = 2.0 - s_chsh * s_chsh / 4.0;
    if (radicand < -1e-12) throw std::domain_error("CHSH value beyond the Tsirelson bound");
    return -std::log2(0.5 + 0.5 * std::sqrt(std::max(radicand, 0.0))) - binary_entropy(q);
}

double gain_from_ch(double s_ch, double q) {
    const double radicand = 1.0 - 4.0 * s_ch - 4.0 * s_ch * s_ch;
    if (radicand < -1e-12) throw std::domain_error("CH value beyond (sqrt2 - 1)/2");
    return 1.0 - std::log2(1.0 + std::sqrt(std::max(radicand, 0.0))) - binary_entropy(q);
}

double key_rate(double n_con, double gain) { return n_con * gain; }

double depolarized_ch(double s_ch, double p) {
    require_probability(p, "depolarization probability");
    return (1.0 - 4.0 * p / 3.0) * s_ch - 2.0 * p / 3.0;
}

KeyStatistics qber_and_conclusive(double theta, const ChannelModel& channel) {
    return qber_and_conclusive(theta, theta, channel);
}

KeyStatistics qber_and_conclusive(double theta, double bob_theta, const ChannelModel& channel) {
    if (channel.attacker != Attacker::None) {
        throw std::invalid_argument("qber_and_conclusive: analytic key statistics assume no attacker");
    }
    const ProtocolAngle angle = ProtocolAngle::from_radians(theta);
    const ProtocolAngle bob_angle = ProtocolAngle::from_radians(bob_theta);
    const channels::PipelineState state = channels::analytic_pipeline_state(angle, channel);
    const qcore::Povm alice = channels::lossy_povm(states::protocol_settings(angle).alice[0].povm(), channel.eta_a);

    double detected = 0.0;
    double conclusive = 0.0;
    double errors = 0.0;
    for (int k = 0; k < 2; ++k) {
        const qcore::Povm bob = channels::lossy_povm(states::bob_basis(k, bob_angle), channel.eta_b);
        // Alice's target outcome |0_z> is bit 0; Bob's conclusive result in
        // B_k decodes bit k xor 1.
        for (int bit = 0; bit < 2; ++bit) {
            const qcore::Operator& a = alice.element(bit == 0 ? kTarget : kOrthogonal);
            const double p_con = 0.5 * qcore::born_probability(state.clicked, qcore::tensor(a, bob.element(0)));
            const double p_inc = 0.5 * qcore::born_probability(state.clicked, qcore::tensor(a, bob.element(1)));
            detected += p_con + p_inc;
            conclusive += p_con;
            if (bit == k) errors += p_con;
        }
    }
    if (conclusive <= 0.0) throw std::domain_error("qber_and_conclusive: no conclusive events, QBER undefined");
    return {errors / conclusive, conclusive / detected};
}

RateReport normalized_rate(double theta, double p, Strategy strategy) {
    double clean = 0.0;
    double bob_theta = theta;
    if (strategy == Strategy::ChMax) {
        const auto m = bell::analytic_ch_max(theta);
        clean = m.value;
        bob_theta = m.bob_angle;
    } else {
        clean = bell::analytic_ch(theta);
    }
    const KeyStatistics stats = qber_and_conclusive(theta, bob_theta, ChannelModel{1.0, 1.0, p, Attacker::None});

    RateReport r;
    r.s_ch = depolarized_ch(clean, p);
    r.s_chsh = bell::chsh_from_ch({r.s_ch, 0.0}).value;
    r.qber = stats.qber;
    r.conclusive_fraction = stats.conclusive_fraction;
    r.gain = gain_from_ch(r.s_ch, r.qber);
    // Per detected event the expected number of conclusive events is the
    // conclusive fraction itself.
    r.rate = key_rate(r.conclusive_fraction, r.gain);
    r.normalized_rate = r.rate;
    return r;
}

OptimalAngle optimal_theta(double p, Strategy strategy) {
    if (!(p >= 0.0 && p <= kMaxNoise)) throw std::domain_error("optimal_theta: p must lie in [0, 0.05]");
    constexpr int kGrid = 200;
    const double step = kHalfPi / kGrid;
    auto objective = [&](double theta) { return normalized_rate(theta, p, strategy).gain; };

    int best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < kGrid; ++k) {
        const double v = objective((k + 0.5) * step);
        if (v > best_value) {
            best_value = v;
            best = k;
        }
    }
    const double lo = std::max((best - 0.5) * step, 1e-9);
    const double hi = std::min((best + 1.5) * step, kHalfPi - 1e-9);
    const double theta = golden_section_max(objective, lo, hi, 1e-7);
    return {theta, normalized_rate(theta, p, strategy)};
}

ThresholdResult max_depolarization(Strategy strategy) {
    auto g = [&](double p) { return optimal_theta(p, strategy).report.gain; };
    double lo = 0.0;
    double hi = kMaxNoise;
    if (!(g(lo) > 0.0) || !(g(hi) < 0.0)) {
        throw std::runtime_error("max_depolarization: rate does not change sign on [0, 0.05]");
    }
    constexpr double kTol = 1e-5;
    while (hi - lo > kTol) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    const double critical = 0.5 * (lo + hi);
    ThresholdResult out{"depol_p", critical, lo, hi, kTol, std::nullopt};
    out.theta = optimal_theta(critical, strategy).theta;
    return out;
}

ThresholdResult efficiency_threshold(EfficiencyMode mode) {
    // The supremum over theta is approached as theta -> 0, so the grid is
    // log-spaced down to 1e-4 rad.
    constexpr int kGrid = 400;
    std::vector<double> thetas(kGrid);
    const double log_lo = std::log(1e-4);
    const double log_hi = std::log(kHalfPi - 1e-9);
    for (int k = 0; k < kGrid; ++k) thetas[k] = std::exp(log_lo + (log_hi - log_lo) * k / (kGrid - 1));

    auto sup_ch = [&](double eta) {
        double eta_a = eta;
        double eta_b = eta;
        if (mode == EfficiencyMode::AlicePerfect) eta_a = 1.0;
        if (mode == EfficiencyMode::BobPerfect) eta_b = 1.0;
        double best = -std::numeric_limits<double>::infinity();
        for (double t : thetas) best = std::max(best, bell::ch_with_loss(t, eta_a, eta_b));
        return best;
    };

    double lo = 0.0;
    double hi = 1.0;
    constexpr double kTol = 1e-4;
    while (hi - lo > kTol) {
        const double mid = 0.5 * (lo + hi);
        (sup_ch(mid) > 0.0 ? hi : lo) = mid;
    }
    const std::string parameter = mode == EfficiencyMode::AlicePerfect ? "eta_b"
                                  : mode == EfficiencyMode::BobPerfect ? "eta_a"
                                                                       : "eta";
    return {parameter, 0.5 * (lo + hi), lo, hi, kTol, std::nullopt};
}

}  // namespace rates
}  // namespace entb92
