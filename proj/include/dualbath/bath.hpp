// bath.hpp — cubic spectral densities, bath correlation functions and polaron constants

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace dualbath {

using cplx = std::complex<double>;

enum class Channel { TT, SS, TS };

struct BathParams {
    double kappa1{0.05};   // TLS-boson coupling
    double kappa2{0.0};    // hybrid TLS/spin-bath coupling, kappa2^2 <= kappa1*kappa3
    double kappa3{0.0};    // spin bath-boson coupling
    double omega_c{2.0};   // cutoff frequency
    double omega_ph{1.0};  // energy unit
    double beta{2.0};      // inverse temperature

    void validate() const;
};

// One discrete bath oscillator: H_I = (eta*Lz + xi*sigma_z/2)(b + b^dagger)
struct Mode {
    double omega{1.0};
    double xi{0.0};
    double eta{0.0};
};

double spectral_density(Channel channel, double omega, const BathParams& p);

// Correlation function with unit coupling,
// U(t) = int_0^inf w^3/w^2 e^{-w/wc} (cos wt coth(beta w/2) - i sin wt) dw / omega_ph^2,
// so that phi = kappa1*U, psi = kappa3*U and the TS cross function is kappa2*U.
struct PhiQuadrature {
    cplx value;
    double abs_error{0.0};
};
PhiQuadrature unit_correlation_quadrature(double t, const BathParams& p);

// phi(t) = phi1 - i*phi2 by adaptive quadrature over frequency; throws NumericalError
// if the estimated relative error exceeds 1e-9.
cplx phi(double t, const BathParams& p);

// psi(t) for the SS channel, by direct quadrature of J_SS.
cplx psi(double t, const BathParams& p);

// psi_{m-n}(t) = sum_k (m-n) xi_k eta_k/w_k^2 cos(w_k t) coth(beta w_k/2).
// With kappa1 > 0 this is (m-n)(kappa2/kappa1) phi1(t), otherwise direct quadrature.
double psi_offset(int m_minus_n, double t, const BathParams& p);

// Zero temperature closed forms for unit coupling.
double unit_phi1_zero_temperature(double t, double omega_c);
double unit_phi2(double t, double omega_c);

// Closed forms for the cubic densities.
double phi1_zero_temperature(double t, const BathParams& p);
double phi2_closed(double t, const BathParams& p);

// d_m(t) = exp[i(2m kappa2 - kappa1) U2(t)] - 1.
cplx d_m(int m, double t, const BathParams& p);

// f(t) = eta - (1/t) int J_SS sin(wt)/w^2 dw, closed form.
double f_mqs(double t, const BathParams& p);
// Same quantity from frequency quadrature.
double f_mqs_quadrature(double t, const BathParams& p);

struct PolaronConstants {
    double theta{1.0};        // <cosh B2>
    double j_tilde{0.0};      // J*theta
    double gamma_tilde{0.0};  // gamma - sum eta_k xi_k / w_k
    double eta{0.0};          // sum eta_k^2 / w_k
};

// Uniform time grid of correlation functions, t_k = k*dt for k = 0..size()-1.
struct BathKernels {
    double dt{0.0};
    std::vector<double> phi1, phi2;  // TT channel
    std::vector<double> psi1, psi2;  // SS channel
    std::vector<double> chi1, chi2;  // TS cross channel
    double theta_factor{1.0};        // exp(-phi1(0)/2)
    double eta{0.0};                 // SS moment sum eta_k^2/w_k
    double coupling_shift{0.0};      // TS moment sum eta_k xi_k/w_k

    std::size_t size() const { return phi1.size(); }
    double t(std::size_t k) const { return dt * static_cast<double>(k); }
    double t_max() const { return size() ? t(size() - 1) : 0.0; }

    cplx phi(std::size_t k) const { return {phi1[k], -phi2[k]}; }
    cplx psi(std::size_t k) const { return {psi1[k], -psi2[k]}; }
    cplx chi(std::size_t k) const { return {chi1[k], -chi2[k]}; }

    // Four-point Lagrange interpolation between grid nodes.
    cplx phi_at(double t) const;
    cplx psi_at(double t) const;
    cplx chi_at(double t) const;
};

// Tables for the cubic densities. Zero temperature parts use the closed forms,
// the thermal correction is integrated with composite Gauss-Legendre panels.
BathKernels build_kernels(const BathParams& p, double dt, std::size_t n);

// Tables for a finite set of modes (used by the exact oracle).
BathKernels build_kernels(const std::vector<Mode>& modes, double beta, double dt, std::size_t n);

PolaronConstants polaron_constants(double J, double gamma, const BathParams& p);
PolaronConstants polaron_constants(double J, double gamma, const BathKernels& k);

// Normal-ordered bath correlators of D = e^{B2} - Theta with the thermal state:
// first = <D(t)D(s)>, second = <D(t)D^dagger(s)>.
std::pair<cplx, cplx> polaron_correlators(double t, double s, const BathKernels& k);

} // namespace dualbath
