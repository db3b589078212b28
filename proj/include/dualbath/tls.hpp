// tls.hpp — TCL2 Bloch equations of the TLS per spin-bath sector

#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "dualbath/bath.hpp"
#include "dualbath/sectors.hpp"

namespace dualbath {

struct SystemParams {
    double eps{1.0};    // TLS bias
    double J{1.0};      // tunneling
    double alpha{1.0};  // spin-bath Zeeman energy
    double gamma{0.0};  // TLS-spin bath Ising coupling
    int N{10};          // number of bath spins (even)

    void validate(int max_spins = kMaxSpins) const;
};

// Rates for one sector at one time; entries indexed by Axis (x, y, z).
struct RateSet {
    std::array<double, 3> G1_minus{};
    std::array<double, 3> G1_plus{};
    std::array<double, 3> G2_plus{};
    std::array<double, 3> G2_minus{};
};

// gamma^1 and gamma^2 combined into G^{xi+-} = J^2(gamma +- gamma*) forms.
RateSet rates_from_gamma(const std::array<cplx, 3>& gamma1, const std::array<cplx, 3>& gamma2, double J);

// Rates on every node of the kernel grid up to index n-1 (cumulative quadrature).
std::vector<RateSet> homogeneous_rate_table(const SectorEigens& eig, const BathKernels& k, double J, std::size_t n);
// Rates at a single grid time t.
RateSet homogeneous_rates(const SectorEigens& eig, double t, const BathKernels& k, double J);

Eigen::Matrix3d bloch_matrix(const SectorEigens& eig, const RateSet& r, double j_tilde);
Eigen::Vector3d inhomogeneous_Re(const RateSet& r, double alpha_e);

// First-order inhomogeneous term in closed form for the initial down state.
Eigen::Vector3d inhomogeneous_R1(const SectorEigens& eig, double t, const BathKernels& k, double J, double alpha_e);

// Operator-form inhomogeneous terms for initial TLS state s0 (+1 up, -1 down), at grid index.
Eigen::Vector3d inhomogeneous_R1_operator(const SectorEigens& eig, std::size_t index, const BathKernels& k,
                                          double J, double alpha_e, int s0 = -1);
Eigen::Vector3d inhomogeneous_R2(const SectorEigens& eig, double t, const BathKernels& k, double J,
                                 double alpha_e, int s0 = -1);

struct TlsRun {
    SystemParams system;
    BathParams bath;
    double t_max{20.0};
    double dt{0.0};            // 0 selects min(0.01, 2 pi/(100 max eps_m))
    int initial_state{-1};     // -1: |1bar> (down), +1: |1> (up)
    bool second_order{true};   // include the second-order inhomogeneous term
    std::size_t output_every{1};
};

struct Trajectory {
    double dt{0.0};
    std::vector<double> t;
    std::vector<double> sigma_z, sigma_x_P, sigma_y_P, P1;
    std::vector<int> m;                                // sector labels, ascending
    std::vector<double> alpha_e;                       // per sector
    std::vector<std::vector<Eigen::Vector3d>> alpha;   // [sector][output step]
};

double default_time_step(const SystemParams& s, const PolaronConstants& c);

// Sector weights alpha^e_m = e^{-beta alpha m}/Z_S, evaluated in log form.
std::vector<double> sector_populations(const SystemParams& s, double beta);

Trajectory integrate(const TlsRun& run, int threads = 1);
Trajectory integrate(const TlsRun& run, const BathKernels& kernels, int threads = 1);

// Probability of the up state for vanishing TLS-boson coupling.
double exact_xi0_P1(double t, const SystemParams& s, double beta);

struct SteadyState {
    std::vector<int> m;
    std::vector<Eigen::Vector3d> alpha;
    std::vector<double> alpha_e;
    double sigma_z{0.0};
    double P1{0.0};
    double t_ss{0.0};
    double rate_change{0.0}; // relative change of the rates over the trailing window
};

SteadyState steady_state(const SystemParams& s, const BathParams& b, double dt = 0.01);

double gibbs_P1(double eps, double J, double beta);

// Ordered, compensated reduction sum_{l,m} nu(l) x_m over a sector table.
double sector_sum(const SectorTable& table, const std::vector<double>& per_m);

} // namespace dualbath
