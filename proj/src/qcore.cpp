#include "entb92/qcore.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace entb92::qcore {
namespace {

void require_supported_dim(Eigen::Index n, const char* what) {
    if (n != 2 && n != 4) {
        throw DimensionError(std::string(what) + ": dimension must be 2 or 4, got " + std::to_string(n));
    }
}

void require_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols()) {
        throw DimensionError(std::string(what) + ": matrix is not square");
    }
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

double hermitian_min_eigenvalue(const Matrix& m) {
    Matrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

}  // namespace

Operator::Operator(Matrix entries) : entries_(std::move(entries)) {
    require_square(entries_, "Operator");
    if (entries_.rows() == 0) {
        throw DimensionError("Operator: empty matrix");
    }
}

Operator Operator::identity(int dim) { return Operator(Matrix::Identity(dim, dim)); }

Operator Operator::zero(int dim) { return Operator(Matrix::Zero(dim, dim)); }

bool Operator::is_hermitian(double tol) const {
    return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double Operator::min_eigenvalue() const { return hermitian_min_eigenvalue(entries_); }

Operator operator+(const Operator& a, const Operator& b) {
    if (a.dim() != b.dim()) throw DimensionError("Operator sum: dimension mismatch");
    return Operator(a.entries_ + b.entries_);
}

Operator operator-(const Operator& a, const Operator& b) {
    if (a.dim() != b.dim()) throw DimensionError("Operator difference: dimension mismatch");
    return Operator(a.entries_ - b.entries_);
}

Operator operator*(const Operator& a, const Operator& b) {
    if (a.dim() != b.dim()) throw DimensionError("Operator product: dimension mismatch");
    return Operator(a.entries_ * b.entries_);
}

Operator operator*(Complex s, const Operator& a) { return Operator(s * a.entries_); }

StateVector::StateVector(Vector amplitudes) : amplitudes_(std::move(amplitudes)) {
    require_supported_dim(amplitudes_.size(), "StateVector");
    const double norm2 = amplitudes_.squaredNorm();
    if (std::abs(norm2 - 1.0) > kConstructionTol) {
        throw std::invalid_argument("StateVector: squared norm " + std::to_string(norm2) + " is not 1");
    }
}

StateVector::StateVector(std::initializer_list<Complex> amplitudes)
    : StateVector(Vector(Eigen::Map<const Vector>(amplitudes.begin(), static_cast<Eigen::Index>(amplitudes.size())))) {}

Complex StateVector::inner(const StateVector& other) const {
    if (dim() != other.dim()) throw DimensionError("inner product: dimension mismatch");
    return amplitudes_.dot(other.amplitudes_);
}

Operator StateVector::projector() const { return Operator(amplitudes_ * amplitudes_.adjoint()); }

DensityMatrix::DensityMatrix(Matrix entries, Normalization normalization)
    : entries_(std::move(entries)), normalization_(normalization) {
    require_square(entries_, "DensityMatrix");
    require_supported_dim(entries_.rows(), "DensityMatrix");
    if ((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() > kConstructionTol) {
        throw std::invalid_argument("DensityMatrix: not Hermitian");
    }
    // Symmetrize away round-off so downstream traces are exactly real.
    entries_ = 0.5 * (entries_ + entries_.adjoint()).eval();
    const double tr = entries_.trace().real();
    if (normalization_ == Normalization::Normalized) {
        if (std::abs(tr - 1.0) > kConstructionTol) {
            throw std::invalid_argument("DensityMatrix: trace " + std::to_string(tr) + " is not 1");
        }
    } else if (tr < -kConstructionTol || tr > 1.0 + kConstructionTol) {
        throw std::invalid_argument("DensityMatrix: subnormalized trace " + std::to_string(tr) + " outside [0, 1]");
    }
    if (hermitian_min_eigenvalue(entries_) < -kDerivedTol) {
        throw std::invalid_argument("DensityMatrix: negative eigenvalue");
    }
}

DensityMatrix DensityMatrix::pure(const StateVector& state) {
    return DensityMatrix(state.amplitudes() * state.amplitudes().adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
    return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

std::vector<double> DensityMatrix::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(entries_, Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

Povm::Povm(std::vector<Operator> elements, std::vector<std::string> labels)
    : elements_(std::move(elements)), labels_(std::move(labels)) {
    if (elements_.empty()) throw std::invalid_argument("Povm: no elements");
    if (elements_.size() != labels_.size()) throw std::invalid_argument("Povm: one label per element required");
    const int d = elements_.front().dim();
    Matrix sum = Matrix::Zero(d, d);
    for (const auto& e : elements_) {
        if (e.dim() != d) throw DimensionError("Povm: elements of different dimension");
        if (!e.is_hermitian(kDerivedTol)) throw std::invalid_argument("Povm: element not Hermitian");
        if (e.min_eigenvalue() < -kDerivedTol) throw std::invalid_argument("Povm: element not positive semidefinite");
        sum += e.entries();
    }
    if ((sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > kDerivedTol) {
        throw std::invalid_argument("Povm: elements do not sum to identity");
    }
}

std::size_t Povm::index_of(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw std::out_of_range("Povm: no outcome labelled '" + label + "'");
    return static_cast<std::size_t>(it - labels_.begin());
}

StateVector tensor(const StateVector& a, const StateVector& b) {
    if (a.dim() != 2 || b.dim() != 2) throw DimensionError("tensor: both operands must have dimension 2");
    return StateVector(Vector(kron(a.amplitudes(), b.amplitudes())));
}

Operator tensor(const Operator& a, const Operator& b) {
    if (a.dim() != 2 || b.dim() != 2) throw DimensionError("tensor: both operands must have dimension 2");
    return Operator(kron(a.entries(), b.entries()));
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.dim() != 2 || b.dim() != 2) throw DimensionError("tensor: both operands must have dimension 2");
    const bool sub = a.normalization() == Normalization::Subnormalized ||
                     b.normalization() == Normalization::Subnormalized;
    return DensityMatrix(kron(a.entries(), b.entries()), sub ? Normalization::Subnormalized : Normalization::Normalized);
}

double born_probability(const DensityMatrix& rho, const Operator& element) {
    if (rho.dim() != element.dim()) throw DimensionError("born_probabilities: dimension mismatch");
    // Tr(E rho) without forming the product.
    const double p = (element.entries().transpose().cwiseProduct(rho.entries())).sum().real();
    if (p < -1e-8) throw std::invalid_argument("born_probabilities: significantly negative probability");
    return std::clamp(p, 0.0, 1.0);
}

std::vector<double> born_probabilities(const DensityMatrix& rho, const Povm& measurement) {
    std::vector<double> out;
    out.reserve(measurement.size());
    for (const auto& e : measurement.elements()) out.push_back(born_probability(rho, e));
    return out;
}

DensityMatrix apply_channel(const DensityMatrix& rho, std::span<const Operator> kraus, Normalization normalization) {
    if (kraus.empty()) throw std::invalid_argument("apply_channel: empty Kraus set");
    const int d = rho.dim();
    Matrix completeness = Matrix::Zero(d, d);
    Matrix out = Matrix::Zero(d, d);
    for (const auto& k : kraus) {
        if (k.dim() != d) throw DimensionError("apply_channel: Kraus operator dimension mismatch");
        completeness += k.entries().adjoint() * k.entries();
        out += k.entries() * rho.entries() * k.entries().adjoint();
    }
    const Matrix deficit = Matrix::Identity(d, d) - completeness;
    if (normalization == Normalization::Normalized) {
        if (deficit.cwiseAbs().maxCoeff() > kDerivedTol) {
            throw std::invalid_argument("apply_channel: Kraus set is not trace preserving");
        }
    } else if (hermitian_min_eigenvalue(deficit) < -kDerivedTol) {
        throw std::invalid_argument("apply_channel: Kraus set increases trace");
    }
    const bool sub = normalization == Normalization::Subnormalized ||
                     rho.normalization() == Normalization::Subnormalized;
    return DensityMatrix(out, sub ? Normalization::Subnormalized : Normalization::Normalized);
}

DensityMatrix partial_trace(const DensityMatrix& rho, Subsystem keep) {
    if (rho.dim() != 4) throw DimensionError("partial_trace: input must have dimension 4");
    Matrix out = Matrix::Zero(2, 2);
    // Index of |ab> is 2a + b.
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            for (int t = 0; t < 2; ++t) {
                out(i, j) += keep == Subsystem::A ? rho(2 * i + t, 2 * j + t) : rho(2 * t + i, 2 * t + j);
            }
        }
    }
    return DensityMatrix(out, rho.normalization());
}

Operator pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return Operator(m);
}

Operator pauli_y() {
    Matrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return Operator(m);
}

Operator pauli_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return Operator(m);
}

}  // namespace entb92::qcore
