#pragma once

// States and measurement settings of the entanglement-based B92 protocol,
// all parameterized by the protocol angle theta.

#include <array>

#include "entb92/qcore.hpp"

namespace entb92 {

/// theta in the open interval (0, pi/2). The source amplitudes are
/// alpha = sin(theta/2) and beta = cos(theta/2).
class ProtocolAngle {
public:
    /// Throws std::domain_error for theta outside (0, pi/2) or non-finite.
    static ProtocolAngle from_radians(double theta);
    static ProtocolAngle from_degrees(double degrees);

    double radians() const { return theta_; }
    double degrees() const;
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }

private:
    explicit ProtocolAngle(double theta);

    double theta_;
    double alpha_;
    double beta_;
};

enum class AliceBasis { Z, X };

namespace states {

/// |j_z>
qcore::StateVector z_state(int j);
/// |j_x> = (|0_z> + (-1)^j |1_z>) / sqrt2
qcore::StateVector x_state(int j);

/// beta |0_x 0_x> + alpha |1_x 1_x>
qcore::StateVector entangled_state(const ProtocolAngle& angle);
/// The same state written as (|0_z>|phi_0> + |1_z>|phi_1>) / sqrt2.
qcore::StateVector entangled_state_z_form(const ProtocolAngle& angle);

/// |phi_j> = beta |0_x> + (-1)^j alpha |1_x>
qcore::StateVector signal_state(int j, const ProtocolAngle& angle);
/// |phibar_k> = alpha |0_x> - (-1)^k beta |1_x>, orthogonal to |phi_k>.
qcore::StateVector conjugate_state(int k, const ProtocolAngle& angle);

inline constexpr const char* kConclusive = "conclusive";
inline constexpr const char* kInconclusive = "inconclusive";

/// Bob's basis B_k = {|phibar_k> (conclusive), |phi_k> (inconclusive)}.
qcore::Povm bob_basis(int k, const ProtocolAngle& angle);

/// beta^2 |0_x><0_x| + alpha^2 |1_x><1_x|
qcore::DensityMatrix signal_mixture(const ProtocolAngle& angle);
/// (|phi_0><phi_0| + |phi_1><phi_1|) / 2
qcore::DensityMatrix signal_mixture_from_signals(const ProtocolAngle& angle);

struct UninformativeStates {
    qcore::StateVector first;   // |0_x>
    qcore::StateVector second;  // |1_x>
    double first_weight;        // beta^2
    double second_weight;       // alpha^2

    qcore::DensityMatrix mixture() const;
};

UninformativeStates uninformative_states(const ProtocolAngle& angle);

struct SteeredState {
    qcore::StateVector state;
    double probability;
};

/// Bob's conditional state and its probability after Alice obtains
/// `outcome` in `basis` on the shared entangled state.
SteeredState steered_state(AliceBasis basis, int outcome, const ProtocolAngle& angle);

/// Two-outcome projective setting: the target projector and its complement.
struct Setting {
    qcore::Operator target;
    qcore::Operator orthogonal;

    qcore::Povm povm() const;
};

/// Alice's a_0 = |0_z>, a_1 = |1_x>; Bob's b_k = |phibar_k>.
struct SettingPairSpec {
    std::array<Setting, 2> alice;
    std::array<Setting, 2> bob;
};

/// Alice's settings do not depend on theta. Bob's conjugate states are built
/// from `bob_angle`, which is the source angle for the protocol's own
/// settings and theta' for the maximal-violation measurement.
SettingPairSpec protocol_settings(const ProtocolAngle& bob_angle);

/// theta' with tan(theta') = sin(theta).
double max_violation_bob_angle(double theta);

}  // namespace states
}  // namespace entb92
