#pragma once

// Hand-rolled reference model used by the tests. It shares no code with the
// library: plain std::complex arrays, explicit index loops, closed forms typed
// in separately.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "entb92/bell.hpp"

namespace oracle {

using C = std::complex<double>;
using V2 = std::array<C, 2>;
using V4 = std::array<C, 4>;
using M2 = std::array<std::array<C, 2>, 2>;
using M4 = std::array<std::array<C, 4>, 4>;

inline constexpr double kPi = std::numbers::pi;
inline const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

inline V2 z0() { return {1.0, 0.0}; }
inline V2 z1() { return {0.0, 1.0}; }
inline V2 x0() { return {kInvSqrt2, kInvSqrt2}; }
inline V2 x1() { return {kInvSqrt2, -kInvSqrt2}; }

inline V2 add(V2 a, C sa, V2 b, C sb) { return {sa * a[0] + sb * b[0], sa * a[1] + sb * b[1]}; }

inline V2 phi(int j, double theta) {
    return add(x0(), std::cos(theta / 2), x1(), (j ? -1.0 : 1.0) * std::sin(theta / 2));
}
inline V2 phibar(int k, double theta) {
    return add(x0(), std::sin(theta / 2), x1(), -(k ? -1.0 : 1.0) * std::cos(theta / 2));
}

inline V4 kron(const V2& a, const V2& b) { return {a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]}; }

inline V4 source(double theta) {
    const V4 p = kron(x0(), x0());
    const V4 q = kron(x1(), x1());
    V4 out{};
    for (int i = 0; i < 4; ++i) out[i] = std::cos(theta / 2) * p[i] + std::sin(theta / 2) * q[i];
    return out;
}

inline M4 outer(const V4& v) {
    M4 m{};
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) m[r][c] = v[r] * std::conj(v[c]);
    return m;
}

inline M2 proj(const V2& v) {
    M2 m{};
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) m[r][c] = v[r] * std::conj(v[c]);
    return m;
}

inline M2 complement(const M2& p) {
    M2 m{};
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) m[r][c] = (r == c ? 1.0 : 0.0) - p[r][c];
    return m;
}

inline M4 kron(const M2& a, const M2& b) {
    M4 m{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) m[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
    return m;
}

inline M4 mul(const M4& a, const M4& b) {
    M4 m{};
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            for (int k = 0; k < 4; ++k) m[r][c] += a[r][k] * b[k][c];
    return m;
}

inline double trace_product(const M4& a, const M4& b) {
    C t = 0.0;
    for (int r = 0; r < 4; ++r)
        for (int k = 0; k < 4; ++k) t += a[r][k] * b[k][r];
    return t.real();
}

// (1-p) rho + p/3 sum_s (I x s) rho (I x s) on the second qubit.
inline M4 depolarize_b(const M4& rho, double p) {
    const M2 id{{{1.0, 0.0}, {0.0, 1.0}}};
    const M2 sx{{{0.0, 1.0}, {1.0, 0.0}}};
    const M2 sy{{{0.0, C(0, -1)}, {C(0, 1), 0.0}}};
    const M2 sz{{{1.0, 0.0}, {0.0, -1.0}}};
    M4 out{};
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) out[r][c] = (1 - p) * rho[r][c];
    for (const M2& s : {sx, sy, sz}) {
        const M4 k = kron(id, s);
        const M4 t = mul(mul(k, rho), k);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) out[r][c] += p / 3 * t[r][c];
    }
    return out;
}

struct Settings {
    std::array<M2, 2> alice;  // target projectors a_0, a_1
    std::array<M2, 2> bob;    // target projectors b_0, b_1
};

inline Settings protocol_settings(double bob_theta) {
    return {{proj(z0()), proj(x1())}, {proj(phibar(0, bob_theta)), proj(phibar(1, bob_theta))}};
}

// Born-rule probability grids with lossy detectors: each click probability is
// scaled by the efficiency and the remainder goes to the vacuum column/row.
inline std::array<entb92::ProbabilityGrid, 4> table(const M4& rho, const Settings& s, double eta_a, double eta_b) {
    std::array<entb92::ProbabilityGrid, 4> grids{};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const std::array<M2, 2> a{s.alice[i], complement(s.alice[i])};
            const std::array<M2, 2> b{s.bob[j], complement(s.bob[j])};
            auto& g = grids[2 * i + j];
            for (int x = 0; x < 2; ++x) {
                for (int y = 0; y < 2; ++y) {
                    const double p = trace_product(kron(a[x], b[y]), rho);
                    g[x][y] = eta_a * eta_b * p;
                    g[x][2] += eta_a * (1 - eta_b) * p;
                    g[2][y] += (1 - eta_a) * eta_b * p;
                    g[2][2] += (1 - eta_a) * (1 - eta_b) * p;
                }
            }
        }
    }
    return grids;
}

// S_CH straight from the cells, marginals read from pair (1,0) and (0,1).
inline double ch(const std::array<entb92::ProbabilityGrid, 4>& g) {
    auto joint = [&](int i, int j) { return g[2 * i + j][0][0]; };
    double pa1 = 0, pb1 = 0;
    for (int y = 0; y < 3; ++y) pa1 += g[2][0][y];
    for (int x = 0; x < 3; ++x) pb1 += g[1][x][0];
    return joint(1, 1) + joint(0, 1) + joint(1, 0) - joint(0, 0) - pa1 - pb1;
}

// CH value of the protocol from the reference model.
inline double protocol_ch(double theta, double bob_theta, double eta_a, double eta_b, double p) {
    const M4 rho = depolarize_b(outer(source(theta)), p);
    return ch(table(rho, protocol_settings(bob_theta), eta_a, eta_b));
}

inline double binary_entropy(double q) {
    if (q <= 0 || q >= 1) return 0.0;
    return -q * std::log2(q) - (1 - q) * std::log2(1 - q);
}

// Closed-form QBER and conclusive fraction under depolarization, derived by
// hand from the steered states: errors need the flipped Bloch component.
inline double qber(double theta, double p) {
    const double lambda = 1 - 4 * p / 3;
    return (2 * p / 3) / (4 * p / 3 + lambda * std::sin(theta) * std::sin(theta));
}
inline double conclusive_fraction(double theta, double p) {
    const double lambda = 1 - 4 * p / 3;
    return 0.5 * (lambda * std::sin(theta) * std::sin(theta) + 4 * p / 3);
}

// Random helpers for property tests.
inline V2 random_qubit(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    V2 v{C(n(rng), n(rng)), C(n(rng), n(rng))};
    const double norm = std::sqrt(std::norm(v[0]) + std::norm(v[1]));
    return {v[0] / norm, v[1] / norm};
}

inline M4 random_density(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    M4 g{};
    for (auto& row : g)
        for (auto& e : row) e = C(n(rng), n(rng));
    M4 rho{};
    double tr = 0;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c)
            for (int k = 0; k < 4; ++k) rho[r][c] += g[r][k] * std::conj(g[c][k]);
        tr += rho[r][r].real();
    }
    for (auto& row : rho)
        for (auto& e : row) e /= tr;
    return rho;
}

inline Settings random_settings(std::mt19937_64& rng) {
    return {{proj(random_qubit(rng)), proj(random_qubit(rng))}, {proj(random_qubit(rng)), proj(random_qubit(rng))}};
}

// A unimodal maximizer kept separate from the library's.
template <class F>
double golden_argmax(F f, double lo, double hi, double tol) {
    const double r = (std::sqrt(5.0) - 1) / 2;
    while (hi - lo > tol) {
        const double a = hi - r * (hi - lo);
        const double b = lo + r * (hi - lo);
        if (f(a) < f(b)) {
            lo = a;
        } else {
            hi = b;
        }
    }
    return (lo + hi) / 2;
}

}  // namespace oracle
