#include "entb92/states.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace entb92 {

using qcore::DensityMatrix;
using qcore::Operator;
using qcore::Povm;
using qcore::StateVector;
using qcore::Vector;

ProtocolAngle::ProtocolAngle(double theta)
    : theta_(theta), alpha_(std::sin(theta / 2.0)), beta_(std::cos(theta / 2.0)) {}

ProtocolAngle ProtocolAngle::from_radians(double theta) {
    if (!std::isfinite(theta) || theta <= 0.0 || theta >= std::numbers::pi / 2.0) {
        throw std::domain_error("protocol angle must lie strictly between 0 and pi/2 radians, got " +
                                std::to_string(theta));
    }
    return ProtocolAngle(theta);
}

ProtocolAngle ProtocolAngle::from_degrees(double degrees) {
    return from_radians(degrees * std::numbers::pi / 180.0);
}

double ProtocolAngle::degrees() const { return theta_ * 180.0 / std::numbers::pi; }

namespace states {
namespace {

void require_bit(int b, const char* what) {
    if (b != 0 && b != 1) throw std::invalid_argument(std::string(what) + ": index must be 0 or 1");
}

double sign(int j) { return j == 0 ? 1.0 : -1.0; }

StateVector combine(double c0, const StateVector& s0, double c1, const StateVector& s1) {
    Vector v = c0 * s0.amplitudes() + c1 * s1.amplitudes();
    // Renormalize round-off from the trigonometric amplitudes.
    v /= v.norm();
    return StateVector(v);
}

}  // namespace

StateVector z_state(int j) {
    require_bit(j, "z_state");
    return j == 0 ? StateVector{1.0, 0.0} : StateVector{0.0, 1.0};
}

StateVector x_state(int j) {
    require_bit(j, "x_state");
    const double h = 1.0 / std::numbers::sqrt2;
    return StateVector{h, sign(j) * h};
}

StateVector entangled_state(const ProtocolAngle& angle) {
    Vector v = angle.beta() * qcore::tensor(x_state(0), x_state(0)).amplitudes() +
               angle.alpha() * qcore::tensor(x_state(1), x_state(1)).amplitudes();
    v /= v.norm();
    return StateVector(v);
}

StateVector entangled_state_z_form(const ProtocolAngle& angle) {
    Vector v = (qcore::tensor(z_state(0), signal_state(0, angle)).amplitudes() +
                qcore::tensor(z_state(1), signal_state(1, angle)).amplitudes()) /
               std::numbers::sqrt2;
    v /= v.norm();
    return StateVector(v);
}

StateVector signal_state(int j, const ProtocolAngle& angle) {
    require_bit(j, "signal_state");
    return combine(angle.beta(), x_state(0), sign(j) * angle.alpha(), x_state(1));
}

StateVector conjugate_state(int k, const ProtocolAngle& angle) {
    require_bit(k, "conjugate_state");
    return combine(angle.alpha(), x_state(0), -sign(k) * angle.beta(), x_state(1));
}

Povm bob_basis(int k, const ProtocolAngle& angle) {
    return Povm({conjugate_state(k, angle).projector(), signal_state(k, angle).projector()},
                {kConclusive, kInconclusive});
}

DensityMatrix signal_mixture(const ProtocolAngle& angle) {
    const double b2 = angle.beta() * angle.beta();
    const double a2 = angle.alpha() * angle.alpha();
    return DensityMatrix((b2 * x_state(0).projector() + a2 * x_state(1).projector()).entries());
}

DensityMatrix signal_mixture_from_signals(const ProtocolAngle& angle) {
    return DensityMatrix((0.5 * (signal_state(0, angle).projector() + signal_state(1, angle).projector())).entries());
}

DensityMatrix UninformativeStates::mixture() const {
    return DensityMatrix((first_weight * first.projector() + second_weight * second.projector()).entries());
}

UninformativeStates uninformative_states(const ProtocolAngle& angle) {
    return {x_state(0), x_state(1), angle.beta() * angle.beta(), angle.alpha() * angle.alpha()};
}

SteeredState steered_state(AliceBasis basis, int outcome, const ProtocolAngle& angle) {
    require_bit(outcome, "steered_state");
    if (basis == AliceBasis::Z) return {signal_state(outcome, angle), 0.5};
    const double p = outcome == 0 ? angle.beta() * angle.beta() : angle.alpha() * angle.alpha();
    return {x_state(outcome), p};
}

Povm Setting::povm() const { return Povm({target, orthogonal}, {"target", "orthogonal"}); }

namespace {

Setting setting_for(const StateVector& target) {
    const Operator p = target.projector();
    return {p, Operator::identity(2) - p};
}

}  // namespace

SettingPairSpec protocol_settings(const ProtocolAngle& bob_angle) {
    return {{setting_for(z_state(0)), setting_for(x_state(1))},
            {setting_for(conjugate_state(0, bob_angle)), setting_for(conjugate_state(1, bob_angle))}};
}

double max_violation_bob_angle(double theta) { return std::atan(std::sin(theta)); }

}  // namespace states
}  // namespace entb92
