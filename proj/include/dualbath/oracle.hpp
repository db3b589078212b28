// oracle.hpp — exact propagation of the TLS with a small spin bath and truncated boson modes

#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "dualbath/bath.hpp"
#include "dualbath/spinbath.hpp"
#include "dualbath/tls.hpp"

namespace dualbath {

constexpr int kOracleMaxSpins = 4;
constexpr int kOracleMaxModes = 3;
constexpr int kOracleMaxFock = 8;
constexpr std::size_t kOracleMaxDimension = 20000;

struct OracleModel {
    SystemParams system{1.0, 1.0, 0.01, 0.3, 2}; // eps, J, alpha, gamma, N
    std::vector<Mode> modes;
    int n_max{6};          // Fock cutoff per mode
    double beta{100.0};    // initial bath and spin-bath temperature

    void validate() const;
    std::size_t boson_dimension() const;
    std::size_t dimension() const; // 2 * 2^N * (n_max+1)^K
};

// K modes on a logarithmic grid over [omega_c/20, 6 omega_c]. Bin weights of J(w)/w^2 are scaled so
// that sum xi^2/w^2, sum eta^2/w^2 and sum xi eta/w^2 equal the continuum moments kappa_i omega_c^2.
std::vector<Mode> discretize_modes(const BathParams& p, int K);

// Full Hamiltonian on TLS (x) spins (x) modes, spins in the product basis (bit j = 1 for spin j up).
Eigen::SparseMatrix<cplx> build_hamiltonian(const OracleModel& model);
// L^2 on the same space.
Eigen::SparseMatrix<cplx> total_spin_squared(const OracleModel& model);

enum class OracleInitial {
    thermal_spins, // TLS down, spins e^{-beta alpha Lz}/Z, thermal bosons
    x_state        // TLS down, spins in |+x>, thermal bosons
};

struct OracleTrajectory {
    std::vector<double> t;
    std::vector<double> sigma_z, sigma_x, P1;
    std::vector<ThetaElements> theta;      // x_state only
    std::vector<Eigen::MatrixXcd> theta_s; // x_state only, [Theta_S]_mn in the l = N/2 sector
    double norm_drift{0.0};
    double energy_drift{0.0};
    double tail_population{0.0}; // largest population on Fock states at the cutoff
};

OracleTrajectory propagate(const OracleModel& model, OracleInitial init, const std::vector<double>& t_grid);

// Truncated-Fock expectation Tr_B{delta^{mm'}_B D_1(t) D_2(s)} and Tr_B{delta^{mm'}_B D(t)}, the
// references for the closed-form Q-correlators.
cplx oracle_q_correlator_D(const std::vector<Mode>& modes, int n_max, double beta, bool dagger, int m, int mp,
                           int s0, double t);
cplx oracle_q_correlator_DD(const std::vector<Mode>& modes, int n_max, double beta, DDKind kind, int m, int mp,
                            int s0, double t, double s);

} // namespace dualbath
