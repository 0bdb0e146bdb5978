#include <doctest.h>

#include <cmath>
#include <random>

#include "entb92/qcore.hpp"
#include "entb92/states.hpp"
#include "oracle.hpp"

using namespace entb92;
using namespace entb92::qcore;

namespace {

Matrix diag(std::initializer_list<double> d) {
    Matrix m = Matrix::Zero(static_cast<int>(d.size()), static_cast<int>(d.size()));
    int i = 0;
    for (double v : d) m(i, i) = v, ++i;
    return m;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Povm z_basis() { return Povm({StateVector{1.0, 0.0}.projector(), StateVector{0.0, 1.0}.projector()}, {"0", "1"}); }

}  // namespace

TEST_CASE("tensor of basis vectors orders A as the high bit") {
    const StateVector zero{1.0, 0.0};
    const StateVector one{0.0, 1.0};
    const StateVector v = tensor(zero, one);
    CHECK(v.dim() == 4);
    CHECK(std::abs(v[1] - 1.0) < 1e-15);
    CHECK(std::abs(v[0]) + std::abs(v[2]) + std::abs(v[3]) < 1e-15);

    const StateVector plus = states::x_state(0);
    const StateVector pp = tensor(plus, plus);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(pp[i] - 0.5) < 1e-15);
}

TEST_CASE("tensor of operators matches the Kronecker product") {
    const Operator k = tensor(pauli_x(), pauli_z());
    Matrix expected = Matrix::Zero(4, 4);
    expected(0, 2) = 1;
    expected(1, 3) = -1;
    expected(2, 0) = 1;
    expected(3, 1) = -1;
    CHECK(max_abs(k.entries() - expected) < 1e-15);
}

TEST_CASE("state vectors are validated") {
    CHECK_THROWS_AS(StateVector({1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(StateVector({1.0, 0.0, 0.0}), std::invalid_argument);
    CHECK_NOTHROW(StateVector({oracle::kInvSqrt2, oracle::C(0, oracle::kInvSqrt2)}));
}

TEST_CASE("density matrices are validated") {
    Matrix non_hermitian = diag({0.5, 0.5});
    non_hermitian(0, 1) = 0.1;
    CHECK_THROWS_AS(DensityMatrix{non_hermitian}, std::invalid_argument);
    CHECK_THROWS_AS(DensityMatrix(diag({0.6, 0.6})), std::invalid_argument);
    CHECK_THROWS_AS(DensityMatrix(diag({1.2, -0.2})), std::invalid_argument);
    CHECK_NOTHROW(DensityMatrix(diag({0.3, 0.2}), Normalization::Subnormalized));
    CHECK_THROWS_AS(DensityMatrix(diag({0.3, 0.2})), std::invalid_argument);
    CHECK_THROWS_AS(DensityMatrix(Matrix::Identity(3, 3) / 3.0), DimensionError);
}

TEST_CASE("POVMs must be positive and complete") {
    CHECK_THROWS(Povm({Operator(diag({1, 0}))}, {"only"}));
    CHECK_THROWS(Povm({Operator(diag({1.5, 1})), Operator(diag({-0.5, 0}))}, {"a", "b"}));
    CHECK_THROWS(Povm({Operator::identity(2), Operator::identity(4)}, {"a", "b"}));
    const Povm z = z_basis();
    CHECK(z.index_of("1") == 1);
    CHECK_THROWS_AS(z.index_of("2"), std::out_of_range);
}

TEST_CASE("Born rule on single qubits") {
    const auto p0 = born_probabilities(DensityMatrix::pure(states::z_state(0)), z_basis());
    CHECK(p0[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p0[1] == doctest::Approx(0.0).epsilon(1e-15));
    const auto pm = born_probabilities(DensityMatrix::maximally_mixed(2), z_basis());
    CHECK(std::abs(pm[0] - 0.5) < 1e-15);
    CHECK(std::abs(pm[1] - 0.5) < 1e-15);
    CHECK_THROWS_AS(born_probabilities(DensityMatrix::maximally_mixed(4), z_basis()), DimensionError);
    CHECK_THROWS(born_probability(DensityMatrix::maximally_mixed(2), -1.0 * Operator::identity(2)));
}

TEST_CASE("joint click P(a1, b1) at theta = pi/3") {
    // alpha^2 beta^2 = sin^2(theta)/4 = 3/16.
    const auto angle = ProtocolAngle::from_radians(oracle::kPi / 3);
    const auto rho = DensityMatrix::pure(states::entangled_state(angle));
    const Operator a1 = states::x_state(1).projector();
    const Operator b1 = states::conjugate_state(1, angle).projector();
    CHECK(std::abs(born_probability(rho, tensor(a1, b1)) - 3.0 / 16.0) < 1e-12);
}

TEST_CASE("Born probabilities of random states sum to one") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const oracle::M4 r = oracle::random_density(rng);
        Matrix m(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) m(i, j) = r[i][j];
        const DensityMatrix rho(m);
        const auto a = oracle::random_qubit(rng);
        const StateVector va{a[0], a[1]};
        const StateVector vb{-std::conj(a[1]), std::conj(a[0])};
        const Povm basis({tensor(va.projector(), Operator::identity(2)), tensor(vb.projector(), Operator::identity(2))},
                         {"a", "b"});
        const auto p = born_probabilities(rho, basis);
        CHECK(std::abs(p[0] + p[1] - 1.0) < 1e-12);
        CHECK(p[0] >= 0.0);
    }
}

TEST_CASE("apply_channel") {
    const auto rho = DensityMatrix::pure(states::x_state(0));
    const std::vector<Operator> id{Operator::identity(2)};
    CHECK(max_abs(apply_channel(rho, id).entries() - rho.entries()) < 1e-15);

    // Uniform Pauli twirl sends every state to I/2.
    const std::vector<Operator> twirl{0.5 * Operator::identity(2), 0.5 * pauli_x(), 0.5 * pauli_y(), 0.5 * pauli_z()};
    CHECK(max_abs(apply_channel(rho, twirl).entries() - Matrix::Identity(2, 2) / 2.0) < 1e-15);

    // Depolarizing |0><0| with p = 0.03 gives diag(0.98, 0.02).
    const double p = 0.03;
    const std::vector<Operator> dep{std::sqrt(1 - p) * Operator::identity(2), std::sqrt(p / 3) * pauli_x(),
                                    std::sqrt(p / 3) * pauli_y(), std::sqrt(p / 3) * pauli_z()};
    const auto out = apply_channel(DensityMatrix::pure(states::z_state(0)), dep);
    CHECK(max_abs(out.entries() - diag({0.98, 0.02})) < 1e-12);

    const std::vector<Operator> lossy{std::sqrt(0.5) * Operator::identity(2)};
    CHECK_THROWS(apply_channel(rho, lossy));
    CHECK(apply_channel(rho, lossy, Normalization::Subnormalized).trace() == doctest::Approx(0.5));
    const std::vector<Operator> amplifying{std::sqrt(2.0) * Operator::identity(2)};
    CHECK_THROWS(apply_channel(rho, amplifying, Normalization::Subnormalized));
}

TEST_CASE("partial trace of the source state") {
    const auto angle = ProtocolAngle::from_radians(oracle::kPi / 3);
    const auto rho = DensityMatrix::pure(states::entangled_state(angle));
    const Matrix expected = (angle.beta() * angle.beta()) * states::x_state(0).projector().entries() +
                            (angle.alpha() * angle.alpha()) * states::x_state(1).projector().entries();
    CHECK(max_abs(partial_trace(rho, Subsystem::B).entries() - expected) < 1e-12);
    CHECK(max_abs(partial_trace(rho, Subsystem::A).entries() - expected) < 1e-12);
}

TEST_CASE("partial trace inverts the tensor product") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = oracle::random_qubit(rng);
        const auto b = oracle::random_qubit(rng);
        const auto ra = DensityMatrix::pure(StateVector{a[0], a[1]});
        const auto rb = DensityMatrix::pure(StateVector{b[0], b[1]});
        const auto joint = tensor(ra, rb);
        CHECK(max_abs(partial_trace(joint, Subsystem::A).entries() - ra.entries()) < 1e-12);
        CHECK(max_abs(partial_trace(joint, Subsystem::B).entries() - rb.entries()) < 1e-12);
    }
    const auto bell = DensityMatrix::pure(StateVector{oracle::kInvSqrt2, 0.0, 0.0, oracle::kInvSqrt2});
    CHECK(max_abs(partial_trace(bell, Subsystem::A).entries() - Matrix::Identity(2, 2) / 2.0) < 1e-15);
    CHECK_THROWS_AS(partial_trace(DensityMatrix::maximally_mixed(2), Subsystem::A), DimensionError);
}

TEST_CASE("source states are unit vectors over a random angle sample") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(1e-6, oracle::kPi / 2 - 1e-6);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto angle = ProtocolAngle::from_radians(u(rng));
        CHECK(std::abs(states::entangled_state(angle).amplitudes().squaredNorm() - 1.0) < 1e-12);
        const auto rho = DensityMatrix::pure(states::entangled_state(angle));
        CHECK(rho.eigenvalues().front() > -1e-12);
    }
}
