#include "dualbath/sectors.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>

#include "dualbath/errors.hpp"

namespace dualbath {

double binomial(int n, int k) {
    if (n < 0) throw ValidationError("N", "binomial needs n >= 0");
    if (k < 0 || k > n) return 0.0;
    if (k > n - k) k = n - k;
    if (n <= 60) {
        unsigned __int128 c = 1;
        for (int i = 1; i <= k; ++i) c = c * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
        return static_cast<double>(static_cast<std::uint64_t>(c));
    }
    return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

double degeneracy(int l, int N) {
    if (N < 0 || N % 2 != 0) throw ValidationError("N", "spin count must be even");
    if (l < 0 || l > N / 2) throw ValidationError("l", "must lie in [0, N/2]");
    if (N <= 60) {
        // exact integer difference before the conversion to double
        auto exact = [](int n, int k) -> std::uint64_t {
            if (k < 0 || k > n) return 0;
            if (k > n - k) k = n - k;
            unsigned __int128 c = 1;
            for (int i = 1; i <= k; ++i) c = c * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
            return static_cast<std::uint64_t>(c);
        };
        return static_cast<double>(exact(N, l + N / 2) - exact(N, l + 1 + N / 2));
    }
    return binomial(N, l + N / 2) - binomial(N, l + 1 + N / 2);
}

SectorTable SectorTable::build(int N) {
    if (N < 0 || N % 2 != 0) throw ValidationError("N", "spin count must be even");
    SectorTable t;
    t.N = N;
    for (int l = 0; l <= N / 2; ++l) {
        const double nu = degeneracy(l, N);
        for (int m = -l; m <= l; ++m) t.entries.push_back({l, m, nu});
    }
    return t;
}

double SectorTable::weight(int m) const {
    double w = 0.0;
    for (int l = std::abs(m); l <= N / 2; ++l) w += degeneracy(l, N);
    return w;
}

SectorEigens sector_eigens(int m, double eps, const PolaronConstants& c, double alpha) {
    SectorEigens e;
    e.m = m;
    e.eps_tilde = eps + 2.0 * c.gamma_tilde * m;
    const double two_j = 2.0 * c.j_tilde;
    e.eps = std::hypot(two_j, e.eps_tilde);
    if (two_j == 0.0 && e.eps_tilde == 0.0) {
        e.degenerate = true;
        e.theta = 0.5 * std::numbers::pi;
    } else {
        e.theta = std::atan2(two_j, e.eps_tilde);
    }
    e.C = std::cos(e.theta);
    e.S = std::sin(e.theta);
    e.scalar = alpha * m - c.eta * m * m;
    e.E_plus = e.scalar + 0.5 * e.eps;
    e.E_minus = e.scalar - 0.5 * e.eps;
    return e;
}

cplx Harmonic3::operator()(double t) const {
    const cplx ph{std::cos(eps * t), std::sin(eps * t)};
    return minus * std::conj(ph) + zero + plus * ph;
}

Harmonic3 Harmonic3::conj() const {
    return {std::conj(plus), std::conj(zero), std::conj(minus), eps};
}

Harmonic3 Harmonic3::operator+(const Harmonic3& o) const {
    return {minus + o.minus, zero + o.zero, plus + o.plus, eps};
}

Harmonic3 Harmonic3::operator-(const Harmonic3& o) const {
    return {minus - o.minus, zero - o.zero, plus - o.plus, eps};
}

Harmonic3 Harmonic3::operator*(cplx s) const { return {minus * s, zero * s, plus * s, eps}; }

Harmonic3 k_harmonics(Axis i, const SectorEigens& eig) {
    const double C = eig.C, S = eig.S;
    const cplx I{0.0, 1.0};
    switch (i) {
    case Axis::x: return {-(1.0 - C) / 4.0, 0.0, (1.0 + C) / 4.0, eig.eps};
    case Axis::y: return {I * (1.0 - C) / 4.0, 0.0, I * (1.0 + C) / 4.0, eig.eps};
    case Axis::z: break;
    }
    return {0.0, S / 2.0, 0.0, eig.eps};
}

Harmonic3 k_tilde_harmonics(Axis i, const SectorEigens& eig) {
    const Harmonic3 kx = k_harmonics(Axis::x, eig);
    const Harmonic3 kz = k_harmonics(Axis::z, eig);
    switch (i) {
    case Axis::x: return kx * eig.C + kz * eig.S;
    case Axis::y: return k_harmonics(Axis::y, eig);
    case Axis::z: break;
    }
    return kx * (-eig.S) + kz * eig.C;
}

cplx kernel_K(Axis i, double t, const SectorEigens& eig) { return k_harmonics(i, eig)(t); }
cplx kernel_K_tilde(Axis i, double t, const SectorEigens& eig) { return k_tilde_harmonics(i, eig)(t); }

cplx kernel_K_tilde_plus(Axis i, double t, const SectorEigens& eig) {
    const cplx k = kernel_K_tilde(i, t, eig);
    return k + std::conj(k);
}

cplx kernel_K_tilde_minus(Axis i, double t, const SectorEigens& eig) {
    const cplx k = kernel_K_tilde(i, t, eig);
    return k - std::conj(k);
}

Eigen::Matrix2cd sector_hamiltonian(const SectorEigens& eig) {
    Eigen::Matrix2cd h;
    const double half = 0.5 * eig.eps;
    h << half * eig.C, half * eig.S, half * eig.S, -half * eig.C;
    return h;
}

Eigen::Matrix2cd sector_propagator(const SectorEigens& eig, double t) {
    // exp(-i (eps/2) n.sigma t) = cos(eps t/2) - i sin(eps t/2) n.sigma
    const double a = 0.5 * eig.eps * t;
    const double c = std::cos(a), s = std::sin(a);
    const cplx I{0.0, 1.0};
    Eigen::Matrix2cd u;
    u << c - I * s * eig.C, -I * s * eig.S, -I * s * eig.S, c + I * s * eig.C;
    return u;
}

PairEigens pair_eigens(const SectorEigens& n, const SectorEigens& m, double alpha, double eta) {
    PairEigens p;
    p.n = n.m;
    p.m = m.m;
    const double zc = n.eps * n.C - m.eps * m.C;
    const double xc = n.eps * n.S - m.eps * m.S;
    p.gap = std::hypot(zc, xc);
    p.theta = (n.m == m.m || p.gap == 0.0) ? 0.0 : std::atan2(xc, zc);
    const double scalar = alpha * (n.m - m.m) - eta * (n.m * n.m - m.m * m.m);
    p.E_plus = scalar + 0.5 * p.gap;
    p.E_minus = scalar - 0.5 * p.gap;
    return p;
}

Eigen::VectorXcd spin_coherent_coeffs(double theta, double phi, int N) {
    if (N < 0 || N % 2 != 0) throw ValidationError("N", "spin count must be even");
    const int j = N / 2;
    Eigen::VectorXcd v(N + 1);
    const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    for (int m = -j; m <= j; ++m) {
        const double mag = std::sqrt(binomial(N, j + m)) * std::pow(c, j + m) * std::pow(s, j - m);
        v(m + j) = mag * cplx{std::cos(m * phi), -std::sin(m * phi)};
    }
    return v;
}

Eigen::VectorXd x_state_coeffs(int sign, int N) {
    if (N < 0 || N % 2 != 0) throw ValidationError("N", "spin count must be even");
    const int j = N / 2;
    Eigen::VectorXd q(N + 1);
    const double norm = std::pow(2.0, -0.5 * N);
    for (int m = -j; m <= j; ++m) {
        const double sgn = (sign < 0 && (m % 2 != 0)) ? -1.0 : 1.0;
        q(m + j) = sgn * norm * std::sqrt(binomial(N, j + m));
    }
    return q;
}

} // namespace dualbath
