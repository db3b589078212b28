// sectors.hpp — Dicke sectors, per-sector diagonalization and interaction-picture kernels

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "dualbath/bath.hpp"

namespace dualbath {

enum class Axis { x = 0, y = 1, z = 2 };

constexpr int kMaxSpins = 24; // default cap applied by config validation

double binomial(int n, int k);
double degeneracy(int l, int N);

struct SectorEntry {
    int l{0};
    int m{0};
    double nu{1.0}; // degeneracy of the (l, m) sector
};

struct SectorTable {
    int N{0};
    std::vector<SectorEntry> entries; // l ascending, then m ascending

    static SectorTable build(int N);
    // sum over l >= |m| of nu(l), equal to C(N, N/2 + m)
    double weight(int m) const;
};

struct SectorEigens {
    int m{0};
    double eps_tilde{0.0};  // eps + 2*gamma_tilde*m
    double eps{0.0};        // gap sqrt(4 J_tilde^2 + eps_tilde^2)
    double theta{0.0};      // atan2(2 J_tilde, eps_tilde)
    double C{1.0};
    double S{0.0};
    double E_plus{0.0};
    double E_minus{0.0};
    double scalar{0.0};     // alpha*m - eta*m^2
    bool degenerate{false}; // J_tilde = 0 and eps_tilde = 0
};

SectorEigens sector_eigens(int m, double eps, const PolaronConstants& c, double alpha);

// c_minus e^{-i eps t} + c_zero + c_plus e^{i eps t}
struct Harmonic3 {
    cplx minus{0.0, 0.0};
    cplx zero{0.0, 0.0};
    cplx plus{0.0, 0.0};
    double eps{0.0};

    cplx operator()(double t) const;
    Harmonic3 conj() const; // complex conjugate as a function of t
    Harmonic3 operator+(const Harmonic3& o) const;
    Harmonic3 operator-(const Harmonic3& o) const;
    Harmonic3 operator*(cplx s) const;
};

Harmonic3 k_harmonics(Axis i, const SectorEigens& eig);
Harmonic3 k_tilde_harmonics(Axis i, const SectorEigens& eig);

cplx kernel_K(Axis i, double t, const SectorEigens& eig);
cplx kernel_K_tilde(Axis i, double t, const SectorEigens& eig);
cplx kernel_K_tilde_plus(Axis i, double t, const SectorEigens& eig);  // K~ + K~*
cplx kernel_K_tilde_minus(Axis i, double t, const SectorEigens& eig); // K~ - K~*

// Sector Hamiltonian without the scalar part, eps_tilde/2 sigma_z + J_tilde sigma_x,
// in the basis (|1>, |1bar>) = (up, down).
Eigen::Matrix2cd sector_hamiltonian(const SectorEigens& eig);
// exp(-i H t) for the same Hamiltonian.
Eigen::Matrix2cd sector_propagator(const SectorEigens& eig, double t);

struct PairEigens {
    int n{0};
    int m{0};
    double theta{0.0};   // angle of H_n - H_m
    double gap{0.0};     // E_nm
    double E_plus{0.0};
    double E_minus{0.0};
};

PairEigens pair_eigens(const SectorEigens& n, const SectorEigens& m, double alpha, double eta);

// Coefficients of exp(-i Lz phi) exp(-i Ly theta)|N/2, N/2> over m = -N/2..N/2.
Eigen::VectorXcd spin_coherent_coeffs(double theta, double phi, int N);
// (+-1)^m q_m with q_m = 2^{-N/2} sqrt(C(N, N/2+m)).
Eigen::VectorXd x_state_coeffs(int sign, int N);

} // namespace dualbath
