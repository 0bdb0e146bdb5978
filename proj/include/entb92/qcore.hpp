#pragma once

// Dense complex linear algebra for one and two qubits.
//
// The computational (Z) basis is the storage basis everywhere: a two-qubit
// vector is ordered |00>, |01>, |10>, |11> with subsystem A as the left
// (most significant) factor.

#include <complex>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace entb92::qcore {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Tolerance applied when constructing states and operators.
inline constexpr double kConstructionTol = 1e-12;
/// Tolerance applied to derived quantities (probabilities, completeness).
inline constexpr double kDerivedTol = 1e-10;

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Subsystem { A, B };

/// Whether a density matrix has unit trace or carries a detected-probability
/// mass below one (post-loss states).
enum class Normalization { Normalized, Subnormalized };

class Operator {
public:
    explicit Operator(Matrix entries);

    static Operator identity(int dim);
    static Operator zero(int dim);

    int dim() const { return static_cast<int>(entries_.rows()); }
    const Matrix& entries() const { return entries_; }
    Complex operator()(int row, int col) const { return entries_(row, col); }

    Operator adjoint() const { return Operator(entries_.adjoint()); }
    Complex trace() const { return entries_.trace(); }
    bool is_hermitian(double tol = kConstructionTol) const;
    /// Smallest eigenvalue of the Hermitian part.
    double min_eigenvalue() const;

    friend Operator operator+(const Operator& a, const Operator& b);
    friend Operator operator-(const Operator& a, const Operator& b);
    friend Operator operator*(const Operator& a, const Operator& b);
    friend Operator operator*(Complex s, const Operator& a);
    friend Operator operator*(double s, const Operator& a) { return Complex(s, 0.0) * a; }

private:
    Matrix entries_;
};

class StateVector {
public:
    /// Throws std::invalid_argument unless the squared norm is 1 within
    /// kConstructionTol and the dimension is 2 or 4.
    explicit StateVector(Vector amplitudes);
    StateVector(std::initializer_list<Complex> amplitudes);

    int dim() const { return static_cast<int>(amplitudes_.size()); }
    const Vector& amplitudes() const { return amplitudes_; }
    Complex operator[](int i) const { return amplitudes_(i); }

    /// <this|other>
    Complex inner(const StateVector& other) const;
    Operator projector() const;

private:
    Vector amplitudes_;
};

class DensityMatrix {
public:
    /// Validates Hermiticity, trace and positivity. Subnormalized matrices
    /// must have trace in [0, 1] instead of exactly 1.
    explicit DensityMatrix(Matrix entries, Normalization normalization = Normalization::Normalized);

    static DensityMatrix pure(const StateVector& state);
    static DensityMatrix maximally_mixed(int dim);

    int dim() const { return static_cast<int>(entries_.rows()); }
    const Matrix& entries() const { return entries_; }
    Complex operator()(int row, int col) const { return entries_(row, col); }
    Normalization normalization() const { return normalization_; }
    double trace() const { return entries_.trace().real(); }
    Operator as_operator() const { return Operator(entries_); }

    /// Eigenvalues in ascending order.
    std::vector<double> eigenvalues() const;

private:
    Matrix entries_;
    Normalization normalization_;
};

/// A finite measurement: positive elements summing to the identity.
class Povm {
public:
    Povm(std::vector<Operator> elements, std::vector<std::string> labels);

    int dim() const { return elements_.front().dim(); }
    std::size_t size() const { return elements_.size(); }
    const Operator& element(std::size_t i) const { return elements_.at(i); }
    const std::string& label(std::size_t i) const { return labels_.at(i); }
    const std::vector<Operator>& elements() const { return elements_; }
    const std::vector<std::string>& labels() const { return labels_; }
    /// Index of the element with the given label; throws std::out_of_range.
    std::size_t index_of(const std::string& label) const;

private:
    std::vector<Operator> elements_;
    std::vector<std::string> labels_;
};

StateVector tensor(const StateVector& a, const StateVector& b);
Operator tensor(const Operator& a, const Operator& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

/// p_k = Tr(Pi_k rho), clamped into [0, 1].
std::vector<double> born_probabilities(const DensityMatrix& rho, const Povm& measurement);
/// Tr(op rho) for a single positive operator, with the same validation and
/// clamping as born_probabilities.
double born_probability(const DensityMatrix& rho, const Operator& element);

/// rho' = sum K rho K^dagger. Trace-increasing Kraus sets are always rejected;
/// trace-decreasing ones only pass with Normalization::Subnormalized.
DensityMatrix apply_channel(const DensityMatrix& rho, std::span<const Operator> kraus,
                            Normalization normalization = Normalization::Normalized);

DensityMatrix partial_trace(const DensityMatrix& rho, Subsystem keep);

Operator pauli_x();
Operator pauli_y();
Operator pauli_z();

}  // namespace entb92::qcore
