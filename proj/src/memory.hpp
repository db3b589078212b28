// memory.hpp — quadrature of memory integrals on the shared kernel grid (internal)

#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "dualbath/bath.hpp"
#include "dualbath/sectors.hpp"

namespace dualbath::detail {

// int_0^h (1 - u/h) e^{i w u} du; linear interpolation of the smooth factor with the
// oscillating factor integrated exactly. Reduces to the trapezoid rule as w -> 0.
cplx filon_edge(double w, double h);

// Running value of int_0^{t_k} g(s) e^{i w s} ds on the grid s_j = j*h. Panels use the Filon
// rule; the leading h^2 interpolation error -h^2/12 int g'' e^{iws} ds is removed by parts
// with one-sided differences for g' at both ends, giving fourth order from three nodes on.
class CumulativeFilon {
public:
    CumulativeFilon(double w, double h);
    // Extend by one panel using g at the previous and the new node; returns the integral.
    cplx push(cplx g);
    cplx value() const;
    std::size_t index() const { return count_ == 0 ? 0 : count_ - 1; }

private:
    double w_, h_;
    cplx edge_, step_;
    cplx phase_{1.0, 0.0}; // e^{i w s_j} at the last node
    cplx sum_{0.0, 0.0};   // plain Filon sum
    std::array<cplx, 3> head_{};  // g at s_0, s_1, s_2
    std::array<cplx, 3> tail_{};  // g at the last three nodes, newest first
    std::size_t count_{0};
};

// Tail estimate int_T^inf g(s) e^{iws} ds from repeated integration by parts, using
// g and two derivatives at T (w != 0), or a 1/s^4 decay model for w = 0.
cplx oscillatory_tail(double w, double T, cplx g, cplx dg, cplx d2g);

// Precomputed tables shared by all sectors of a run.
struct CorrelationTables {
    std::vector<cplx> e_minus; // e^{-phi(u)}
    std::vector<cplx> e_plus;  // e^{+phi(u)}
    double theta{1.0};
    bool uncorrelated{false};  // every entry exactly 1 (no boson coupling)

    static CorrelationTables build(const BathKernels& k, std::size_t n);
};

// F_{+}(t) and F_{-}(t) for a sector pair (m, m') and initial TLS state s0 = +-1:
// F_+ = exp(-(m-m') chi1 + i((m+m') chi2 + s0 phi2)), F_- = exp(+(m-m') chi1 - i(...)).
struct PairFactors {
    std::vector<cplx> f_plus, f_minus;
    double gauss{1.0}; // exp(-(m-m')^2 psi1(0)/2)
    bool unit{false};  // every factor exactly 1

    static PairFactors build(const BathKernels& k, int m, int mp, int s0, std::size_t n);
};

// Operator-form second-order inhomogeneous block at grid index k:
// -sum_ab [A_a Y_ab P - Y_ab P A_a + P Y'_ab A_a - A_a P Y'_ab] with P = l r^dagger,
// Y_ab = int c_ab(t,tau) A_b,left(tau - t) dtau and Y'_ab built from c'_ab and the right sector.
// The result is not multiplied by the population prefactor.
Eigen::Matrix2cd second_order_block(std::size_t k, double h, double J, const CorrelationTables& tab,
                                    const PairFactors& pf, const SectorEigens& left, const SectorEigens& right,
                                    const Eigen::Vector2cd& l, const Eigen::Vector2cd& r);

// First-order inhomogeneous block: -i sum_a (A_a P - P A_a) <D_a(t)>_Q, without prefactor.
Eigen::Matrix2cd first_order_block(std::size_t k, double J, double theta, const PairFactors& pf,
                                   const Eigen::Vector2cd& l, const Eigen::Vector2cd& r);

// Lambda_a(t_k) = sum_b int_0^{t_k} C_ab(u) A_b(-u) du for one sector, a = 0 (sigma+), 1 (sigma-),
// with C_same = Theta^2(e^{-phi}-1) and C_opp = Theta^2(e^{phi}-1), for k = 0..n-1.
std::vector<std::array<Eigen::Matrix2cd, 2>> lambda_table(const SectorEigens& eig, double h, double J,
                                                          const CorrelationTables& tab, std::size_t n);

// Pauli helpers in the (|1>, |1bar>) basis.
const Eigen::Matrix2cd& pauli(Axis i);
const Eigen::Matrix2cd& sigma_plus();
const Eigen::Matrix2cd& sigma_minus();

// sum_i h_i sigma_i from harmonic amplitudes.
Eigen::Matrix2cd from_components(const std::array<cplx, 3>& c);

} // namespace dualbath::detail
