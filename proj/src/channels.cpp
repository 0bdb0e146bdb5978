#include "entb92/channels.hpp"

#include <cmath>
#include <stdexcept>

namespace entb92 {

using qcore::DensityMatrix;
using qcore::Matrix;
using qcore::Normalization;
using qcore::Operator;
using qcore::Povm;

std::string to_string(Attacker attacker) { return attacker == Attacker::Usd ? "usd" : "none"; }

Attacker attacker_from_string(const std::string& name) {
    if (name == "none") return Attacker::None;
    if (name == "usd") return Attacker::Usd;
    throw std::invalid_argument("unknown attacker '" + name + "' (expected none or usd)");
}

namespace {

void require_probability(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw std::domain_error(std::string(name) + " must lie in [0, 1], got " + std::to_string(v));
    }
}

}  // namespace

void ChannelModel::validate() const {
    require_probability(eta_a, "eta_a");
    require_probability(eta_b, "eta_b");
    require_probability(depol_p, "depol_p");
}

namespace channels {

std::vector<Operator> depolarizing_kraus(double p) {
    require_probability(p, "depolarization probability");
    const double c = std::sqrt(p / 3.0);
    return {std::sqrt(1.0 - p) * Operator::identity(2), c * qcore::pauli_x(), c * qcore::pauli_y(),
            c * qcore::pauli_z()};
}

DensityMatrix depolarize(const DensityMatrix& rho, double p) {
    auto kraus = depolarizing_kraus(p);
    if (rho.dim() == 4) {
        for (auto& k : kraus) k = qcore::tensor(Operator::identity(2), k);
    }
    return qcore::apply_channel(rho, kraus, rho.normalization());
}

Povm lossy_povm(const Povm& measurement, double eta) {
    require_probability(eta, "detection efficiency");
    std::vector<Operator> elements;
    std::vector<std::string> labels = measurement.labels();
    for (const auto& e : measurement.elements()) elements.push_back(eta * e);
    elements.push_back((1.0 - eta) * Operator::identity(measurement.dim()));
    labels.emplace_back(kVacuum);
    return Povm(std::move(elements), std::move(labels));
}

Povm usd_povm(const ProtocolAngle& angle) {
    using states::conjugate_state;
    using states::signal_state;
    return Povm({0.5 * conjugate_state(0, angle).projector(), 0.5 * conjugate_state(1, angle).projector(),
                 0.5 * signal_state(0, angle).projector(), 0.5 * signal_state(1, angle).projector()},
                {"pi1", "pi2", "pi3", "pi4"});
}

AttackOutcome attack_outcome(int povm_index) {
    switch (povm_index) {
        case 1: return {1, ResendState::Phi1};
        case 2: return {2, ResendState::Phi0};
        case 3:
        case 4: return {povm_index, ResendState::Vacuum};
        default: throw std::invalid_argument("attack_outcome: POVM index must be in 1..4");
    }
}

PipelineState without_vacuum(const DensityMatrix& joint) {
    return {joint, DensityMatrix(Matrix::Zero(2, 2), Normalization::Subnormalized)};
}

PipelineState usd_attack_channel(const DensityMatrix& joint, const ProtocolAngle& angle) {
    if (joint.dim() != 4) throw qcore::DimensionError("usd_attack_channel: joint state must have dimension 4");
    const Povm eve = usd_povm(angle);
    Matrix clicked = Matrix::Zero(4, 4);
    Matrix vacuum = Matrix::Zero(2, 2);
    for (std::size_t i = 0; i < eve.size(); ++i) {
        // Each Pi_i is half a rank-one projector, so sqrt(Pi_i) = Pi_i * sqrt2.
        const Operator root = std::sqrt(2.0) * eve.element(i);
        const Operator lifted = qcore::tensor(Operator::identity(2), root);
        const std::array<Operator, 1> kraus{lifted};
        const DensityMatrix conditioned = qcore::apply_channel(joint, kraus, Normalization::Subnormalized);
        const DensityMatrix alice = qcore::partial_trace(conditioned, qcore::Subsystem::A);
        const AttackOutcome outcome = attack_outcome(static_cast<int>(i) + 1);
        if (outcome.resend == ResendState::Vacuum) {
            vacuum += alice.entries();
            continue;
        }
        const int j = outcome.resend == ResendState::Phi0 ? 0 : 1;
        const Operator resend = states::signal_state(j, angle).projector();
        clicked += qcore::tensor(Operator(alice.entries()), resend).entries();
    }
    return {DensityMatrix(clicked, Normalization::Subnormalized), DensityMatrix(vacuum, Normalization::Subnormalized)};
}

PipelineState analytic_pipeline_state(const ProtocolAngle& angle, const ChannelModel& channel) {
    channel.validate();
    const DensityMatrix source = DensityMatrix::pure(states::entangled_state(angle));
    PipelineState state =
        channel.attacker == Attacker::Usd ? usd_attack_channel(source, angle) : without_vacuum(source);
    if (channel.depol_p > 0.0) state.clicked = depolarize(state.clicked, channel.depol_p);
    return state;
}

}  // namespace channels
}  // namespace entb92
