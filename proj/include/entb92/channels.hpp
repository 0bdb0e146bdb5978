#pragma once

// Noise, loss and adversary models acting between the source and the
// detectors.

#include <array>
#include <string>
#include <vector>

#include "entb92/qcore.hpp"
#include "entb92/states.hpp"

namespace entb92 {

enum class Attacker { None, Usd };

std::string to_string(Attacker attacker);
/// Accepts "none" and "usd"; throws std::invalid_argument otherwise.
Attacker attacker_from_string(const std::string& name);

/// Per-side detection efficiencies, depolarization on the A->B wire and an
/// optional intercept-and-resend attacker.
struct ChannelModel {
    double eta_a = 1.0;
    double eta_b = 1.0;
    double depol_p = 0.0;
    Attacker attacker = Attacker::None;

    /// Throws std::domain_error when a probability is outside [0, 1].
    void validate() const;
};

namespace channels {

inline constexpr const char* kVacuum = "vacuum";

std::vector<qcore::Operator> depolarizing_kraus(double p);

/// (1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z). A two-qubit input is
/// depolarized on subsystem B only.
qcore::DensityMatrix depolarize(const qcore::DensityMatrix& rho, double p);

/// Scales every element by eta and appends a (1-eta) identity element
/// labelled "vacuum".
qcore::Povm lossy_povm(const qcore::Povm& measurement, double eta);

/// Eve's measurement: Pi_1 = |phibar_0><phibar_0|/2, Pi_2 = |phibar_1><phibar_1|/2,
/// Pi_3 = |phi_0><phi_0|/2, Pi_4 = |phi_1><phi_1|/2.
qcore::Povm usd_povm(const ProtocolAngle& angle);

enum class ResendState { Phi1, Phi0, Vacuum };

struct AttackOutcome {
    int povm_index;  // 1..4
    ResendState resend;
};

/// Resend table: 1 -> phi_1, 2 -> phi_0, 3 and 4 -> vacuum.
AttackOutcome attack_outcome(int povm_index);

/// Joint state after the channel, split by whether Bob's wire still carries a
/// photon. `clicked` is the (possibly subnormalized) two-qubit part;
/// `alice_given_vacuum` is Alice's unnormalized reduced state in the branch
/// where nothing reaches Bob. Their traces sum to one.
struct PipelineState {
    qcore::DensityMatrix clicked;
    qcore::DensityMatrix alice_given_vacuum;

    double vacuum_weight() const { return alice_given_vacuum.trace(); }
};

/// Wraps a two-qubit state with an empty vacuum branch.
PipelineState without_vacuum(const qcore::DensityMatrix& joint);

/// sum_i Tr_B[rho (I x Pi_i)] x |chi_i><chi_i|, with the vacuum resends
/// collected in the vacuum branch.
PipelineState usd_attack_channel(const qcore::DensityMatrix& joint, const ProtocolAngle& angle);

/// Source, then attacker, then depolarization of Bob's qubit. Detector
/// efficiencies are not applied here; they belong to the measurements.
PipelineState analytic_pipeline_state(const ProtocolAngle& angle, const ChannelModel& channel);

}  // namespace channels
}  // namespace entb92
