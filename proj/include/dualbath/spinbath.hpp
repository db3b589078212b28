// spinbath.hpp — reduced dynamics of the spin bath in the maximal Dicke sector l = N/2

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "dualbath/bath.hpp"
#include "dualbath/sectors.hpp"
#include "dualbath/tls.hpp"

namespace dualbath {

// Interaction-picture operator h_{sm,s'm'}; row/column index 2*(m + N/2) + s with s = 0 for |1>, 1 for |1bar>.
struct HMatrix {
    int N{0};
    double t{0.0};
    Eigen::MatrixXcd h;

    static HMatrix zero(int N, double t = 0.0);
    static int index(int N, int s, int m) { return 2 * (m + N / 2) + s; }
    Eigen::Matrix2cd block(int m, int n) const;
    void set_block(int m, int n, const Eigen::Matrix2cd& b);
    double hermiticity_error() const; // max |h - h^dagger|
};

enum class DDKind { DD, DDdag, DdagD, DdagDdag };

// <D(t)>_Q for sectors (m, m') and initial TLS state s0; dagger selects <D^dagger(t)>_Q.
cplx q_correlator_D(bool dagger, int m, int mp, double t, const BathKernels& k, int s0 = -1);
// <D_1(t) D_2(s)>_Q for the four operator orderings.
cplx q_correlator_DD(DDKind kind, int m, int mp, double t, double s, const BathKernels& k, int s0 = -1);

enum class RelevantForm {
    printed, // free evolution approximated by e^{i(H_n - H_m)t} in the pair eigenbasis of H_n - H_m
    ordered  // free evolution U_n^dagger U_m applied in order (exact for the uncoupled problem)
};

struct SpinBathRun {
    SystemParams system{0.0, 0.1, 0.0, 0.0, 10}; // eps, J, alpha, gamma, N
    BathParams bath{0.0, 0.0, 0.5, 1.0, 1.0, 100.0};
    double t_max{4.0};
    double dt{0.0};                 // 0 selects the TLS time-step policy
    bool second_order{true};
    RelevantForm relevant{RelevantForm::ordered};
    std::size_t output_every{1};
};

struct ThetaElements {
    cplx pp, pm, mp, mm; // <+x|Theta|+x>, <+x|Theta|-x>, <-x|Theta|+x>, <-x|Theta|-x>
};

struct ThetaSeries {
    double dt{0.0};
    std::vector<double> t;
    std::vector<ThetaElements> theta;
    std::vector<double> trace;        // sum_m [Theta_S]_mm
    std::vector<double> hermiticity;  // max |h - h^dagger| at each output
    std::vector<Eigen::MatrixXcd> theta_s; // full [Theta_S]_mn when requested
};

// Spin-bath model on a fixed kernel grid; grid step is half the integration step.
class SpinBathModel {
public:
    SpinBathModel(const SpinBathRun& run, BathKernels kernels);

    const BathKernels& kernels() const { return kernels_; }
    const PolaronConstants& constants() const { return pc_; }
    double step() const { return 2.0 * kernels_.dt; }
    int N() const { return run_.system.N; }

    HMatrix initial() const;
    // dh/dt at kernel-grid index k.
    HMatrix h_rhs(const HMatrix& h, std::size_t k) const;
    // [Theta_S]^P_mn and [Theta_S]^Q_mn at kernel-grid index k.
    Eigen::MatrixXcd relevant_theta(const HMatrix& h, std::size_t k) const;
    Eigen::MatrixXcd irrelevant_theta(std::size_t k) const;
    cplx irrelevant_element(int m, int n, std::size_t k) const;

    // RK4 evolution of all sector pairs; keep_matrices stores [Theta_S] at each output.
    ThetaSeries evolve(int threads = 1, bool keep_matrices = false) const;

private:
    Eigen::Matrix2cd pair_rhs(int m, int n, const Eigen::Matrix2cd& rho, std::size_t k) const;
    Eigen::Matrix2cd inhomogeneous(int m, int n, std::size_t k) const;
    const SectorEigens& eig(int m) const { return eigs_[static_cast<std::size_t>(m + N() / 2)]; }
    double q(int m) const { return q_[m + N() / 2]; }
    double gauss(int m, int n) const;

    SpinBathRun run_;
    BathKernels kernels_;
    PolaronConstants pc_;
    std::vector<SectorEigens> eigs_;
    Eigen::VectorXd q_;
    std::vector<std::vector<std::array<Eigen::Matrix2cd, 2>>> lambda_; // [sector][index]
    bool coupled_{true}; // false when phi vanishes identically
};

ThetaSeries evolve_spin_bath(const SpinBathRun& run, int threads = 1, bool keep_matrices = false);

// Sum_mn c^a_m c^b_n [Theta_S]_mn with c^{+-}_m = (+-1)^m q_m.
cplx theta_pm(const Eigen::MatrixXcd& theta_s, int sign_row, int sign_col);
ThetaElements theta_elements(const Eigen::MatrixXcd& theta_s);

// tau_MQS from t f(t) = pi/2 by bisection on [0, 10/omega_c].
double tau_mqs(const BathParams& p);
// Decoherence-free reference q_m q_n e^{i(m^2 - n^2) t f(t)}; with_decoherence multiplies by
// e^{-(m-n)^2 (psi1(0) - psi1(t))}, the exact result without the TLS.
Eigen::MatrixXcd mqs_reference(double t, int N, const BathParams& p, bool with_decoherence = false);
// Same with decoherence, psi1 taken from kernel tables (t within the table).
Eigen::MatrixXcd mqs_reference(double t, int N, const BathParams& p, const BathKernels& k);

} // namespace dualbath
