// oracles.hpp — independent reference computations used by the tests

#pragma once

#include <cmath>
#include <complex>
#include <functional>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dualbath/bath.hpp"
#include "dualbath/sectors.hpp"

namespace oracle {

using cplx = std::complex<double>;

// Trigamma psi'(z) for Re z > 0: recurrence up to Re z >= 20, then the asymptotic series.
inline cplx trigamma(cplx z) {
    cplx acc{0.0, 0.0};
    while (z.real() < 20.0) {
        acc += 1.0 / (z * z);
        z += 1.0;
    }
    const cplx w = 1.0 / z, w2 = w * w;
    // 1/z + 1/(2z^2) + sum B_2k / z^{2k+1}
    const cplx series = w + 0.5 * w2 +
                        w * w2 * (1.0 / 6.0 + w2 * (-1.0 / 30.0 + w2 * (1.0 / 42.0 + w2 * (-1.0 / 30.0 + w2 * (5.0 / 66.0)))));
    return acc + series;
}

// phi1(t) at finite temperature in closed form: zero-temperature part plus the thermal
// series 2 sum_n Re 1/(n beta + 1/omega_c - i t)^2 summed through the trigamma function.
inline double phi1_finite_temperature(double t, const dualbath::BathParams& p) {
    const double wc = p.omega_c, b = p.beta;
    const double x = wc * t;
    const double zero = wc * wc * (1.0 - x * x) / ((1.0 + x * x) * (1.0 + x * x));
    const cplx z{1.0 + 1.0 / (b * wc), -t / b};
    const double thermal = 2.0 / (b * b) * trigamma(z).real();
    return p.kappa1 * (zero + thermal) / (p.omega_ph * p.omega_ph);
}

inline double phi2_reference(double t, const dualbath::BathParams& p) {
    const double wc = p.omega_c, x = wc * t;
    return p.kappa1 * 2.0 * wc * wc * x / ((1.0 + x * x) * (1.0 + x * x)) / (p.omega_ph * p.omega_ph);
}

inline cplx phi_closed(double t, const dualbath::BathParams& p) {
    return {phi1_finite_temperature(t, p), -phi2_reference(t, p)};
}

// Adaptive Gauss-Kronrod integral of a complex integrand on [a, b].
inline cplx integrate(const std::function<cplx(double)>& f, double a, double b, double tol = 1e-12) {
    using boost::math::quadrature::gauss_kronrod;
    const double re = gauss_kronrod<double, 61>::integrate([&](double s) { return f(s).real(); }, a, b, 20, tol);
    const double im = gauss_kronrod<double, 61>::integrate([&](double s) { return f(s).imag(); }, a, b, 20, tol);
    return {re, im};
}

// gamma^1_i(t) = Theta^2 int_0^t [K~_i - K~_i*](-s) (e^{-phi(s)} - e^{phi(s)}) ds and
// gamma^2_i(t) = Theta^2 int_0^t [K~_i + K~_i*](-s) (e^{-phi(s)} + e^{phi(s)} - 2) ds,
// with phi from the closed form.
inline void gamma_reference(const dualbath::SectorEigens& eig, double t, const dualbath::BathParams& p, int axis,
                            cplx& g1, cplx& g2) {
    const double theta2 = std::exp(-phi1_finite_temperature(0.0, p));
    const auto ax = static_cast<dualbath::Axis>(axis);
    g1 = theta2 * integrate(
                      [&](double s) {
                          const cplx ph = phi_closed(s, p);
                          return dualbath::kernel_K_tilde_minus(ax, -s, eig) * (std::exp(-ph) - std::exp(ph));
                      },
                      0.0, t);
    g2 = theta2 * integrate(
                      [&](double s) {
                          const cplx ph = phi_closed(s, p);
                          return dualbath::kernel_K_tilde_plus(ax, -s, eig) * (std::exp(-ph) + std::exp(ph) - 2.0);
                      },
                      0.0, t);
}

} // namespace oracle
