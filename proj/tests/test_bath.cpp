// test_bath.cpp — spectral densities, correlation kernels and polaron constants

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dualbath/bath.hpp"
#include "dualbath/errors.hpp"
#include "oracles.hpp"

using namespace dualbath;

namespace {

BathParams base_bath() { return BathParams{0.05, 0.0, 0.0, 2.0, 1.0, 2.0}; }

} // namespace

TEST_CASE("spectral density values") {
    BathParams p = base_bath();
    CHECK(spectral_density(Channel::TT, 0.0, p) == 0.0);
    CHECK(spectral_density(Channel::TT, 2.0, p) == doctest::Approx(0.05 * 8.0 * std::exp(-1.0)).epsilon(1e-14));
    p.kappa2 = 0.02;
    p.kappa3 = 0.008;
    CHECK(spectral_density(Channel::TS, 1.0, p) == doctest::Approx(0.02 * std::exp(-0.5)).epsilon(1e-14));
    CHECK_THROWS_AS(spectral_density(Channel::TT, -1.0, p), ValidationError);
}

TEST_CASE("bath parameter validation names the field") {
    BathParams p = base_bath();
    p.kappa2 = 0.1;
    try {
        p.validate();
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(e.field() == "kappa2");
    }
    p = base_bath();
    p.beta = 0.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("phi single-point quadrature") {
    BathParams p = base_bath();
    p.beta = 1e6;
    const cplx v0 = phi(0.0, p);
    CHECK(v0.real() == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(std::abs(v0.imag()) < 1e-14);
    p = base_bath();
    CHECK(-phi(1.0, p).imag() == doctest::Approx(0.032).epsilon(1e-10));
    for (double t : {0.0, 0.3, 1.7, 12.0}) {
        const cplx ref = oracle::phi_closed(t, p);
        CHECK(std::abs(phi(t, p) - ref) < 1e-9);
    }
    p.kappa1 = 0.0;
    CHECK(std::abs(phi(3.0, p)) == 0.0);
}

TEST_CASE("kernel tables match the finite-temperature closed form") {
    for (double beta : {0.5, 2.0, 100.0, 1e3}) {
        BathParams p = base_bath();
        p.beta = beta;
        const double dt = 0.01;
        const auto k = build_kernels(p, dt, 2001);
        double worst = 0.0;
        for (std::size_t i = 0; i < k.size(); i += 7) {
            const double t = k.t(i);
            worst = std::max(worst, std::abs(k.phi1[i] - oracle::phi1_finite_temperature(t, p)));
            worst = std::max(worst, std::abs(k.phi2[i] - oracle::phi2_reference(t, p)));
        }
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("kernel tables approach the zero-temperature closed form") {
    BathParams p = base_bath();
    p.beta = 1e6;
    const auto k = build_kernels(p, 0.01, 3001);
    double worst = 0.0;
    for (std::size_t i = 0; i < k.size(); i += 3)
        worst = std::max(worst, std::abs(k.phi1[i] - phi1_zero_temperature(k.t(i), p)));
    CHECK(worst < 1e-8);
}

TEST_CASE("SS and TS channels scale with their couplings") {
    BathParams p{0.05, 0.02, 0.008, 2.0, 1.0, 2.0};
    const auto k = build_kernels(p, 0.02, 400);
    for (std::size_t i = 0; i < k.size(); i += 13) {
        CHECK(k.psi1[i] == doctest::Approx(k.phi1[i] * 0.008 / 0.05).epsilon(1e-12));
        CHECK(k.chi2[i] == doctest::Approx(k.phi2[i] * 0.02 / 0.05).epsilon(1e-12));
    }
    BathParams q{0.0, 0.0, 0.5, 1.0, 1.0, 100.0};
    CHECK(psi(0.0, q).real() == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(psi_offset(0, 1.3, p) == 0.0);
    BathParams eq{0.05, 0.05, 0.05, 2.0, 1.0, 2.0};
    CHECK(psi_offset(1, 0.7, eq) == doctest::Approx(phi(0.7, eq).real()).epsilon(1e-9));
}

TEST_CASE("polaron constants") {
    BathParams p = base_bath();
    p.beta = 1e6;
    const auto c = polaron_constants(1.0, 0.0, p);
    CHECK(c.theta == doctest::Approx(std::exp(-0.1)).epsilon(1e-9));
    CHECK(c.j_tilde == doctest::Approx(std::exp(-0.1)).epsilon(1e-9));
    BathParams q{0.05, 0.02, 0.008, 2.0, 1.0, 2.0};
    CHECK(polaron_constants(1.0, 0.6, q).gamma_tilde == doctest::Approx(0.28).epsilon(1e-12));
    BathParams s{0.0, 0.0, 0.5, 1.0, 1.0, 100.0};
    CHECK(polaron_constants(0.1, 0.0, s).eta == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("d_m values and unit modulus of d_m + 1") {
    BathParams p = base_bath();
    CHECK(std::abs(d_m(3, 0.0, p)) < 1e-15);
    const cplx d = d_m(0, 1.0, p);
    const cplx ref = std::exp(cplx{0.0, -0.032}) - 1.0;
    CHECK(std::abs(d - ref) < 1e-12);
    CHECK(d.real() == doctest::Approx(-0.000512).epsilon(1e-3));
    CHECK(d.imag() == doctest::Approx(-0.031995).epsilon(1e-4));
    CHECK(std::abs(d_m(0, 1e3, p)) < 1e-4);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        BathParams q{0.2 * u(rng), 0.0, 0.0, 0.5 + 3.0 * u(rng), 1.0, 0.1 + 10 * u(rng)};
        q.kappa3 = 0.3 * u(rng);
        q.kappa2 = std::sqrt(q.kappa1 * q.kappa3) * (2.0 * u(rng) - 1.0);
        const int m = static_cast<int>(u(rng) * 13) - 6;
        worst = std::max(worst, std::abs(std::abs(d_m(m, 20.0 * u(rng), q) + 1.0) - 1.0));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("f_mqs closed form and quadrature") {
    BathParams p{0.0, 0.0, 0.5, 1.0, 1.0, 100.0};
    CHECK(f_mqs(0.0, p) == 0.0);
    CHECK(f_mqs(1.685, p) == doctest::Approx(0.9322).epsilon(1e-4));
    CHECK(1.685 * f_mqs(1.685, p) == doctest::Approx(std::numbers::pi / 2).epsilon(5e-3));
    CHECK(f_mqs(1e4, p) == doctest::Approx(1.0).epsilon(1e-12));
    for (double t : {0.01, 0.5, 1.685, 4.0, 30.0}) CHECK(std::abs(f_mqs(t, p) - f_mqs_quadrature(t, p)) < 1e-6);
}

TEST_CASE("polaron correlators") {
    BathParams p = base_bath();
    p.beta = 1e6;
    const auto k = build_kernels(p, 0.01, 100);
    const auto [dd, ddag] = polaron_correlators(0.3, 0.3, k);
    CHECK(dd.real() == doctest::Approx(std::exp(-0.2) * (std::exp(-0.2) - 1.0)).epsilon(1e-8));
    CHECK(dd.real() == doctest::Approx(-0.14840).epsilon(1e-4));
    CHECK(ddag.real() == doctest::Approx(0.18127).epsilon(1e-4));
    BathParams z = base_bath();
    z.kappa1 = 0.0;
    const auto kz = build_kernels(z, 0.01, 100);
    const auto [a, b] = polaron_correlators(0.5, 0.1, kz);
    CHECK(std::abs(a) == 0.0);
    CHECK(std::abs(b) == 0.0);
}

TEST_CASE("mode kernels equal direct mode sums") {
    const std::vector<Mode> modes{{0.7, 0.2, 0.1}, {2.3, 0.5, -0.3}};
    const double beta = 3.0;
    const auto k = build_kernels(modes, beta, 0.05, 50);
    for (std::size_t i = 0; i < k.size(); i += 9) {
        const double t = k.t(i);
        cplx phi_ref{}, chi_ref{};
        for (const auto& m : modes) {
            const double coth = std::cosh(0.5 * beta * m.omega) / std::sinh(0.5 * beta * m.omega);
            const cplx e{std::cos(m.omega * t) * coth, -std::sin(m.omega * t)};
            phi_ref += m.xi * m.xi / (m.omega * m.omega) * e;
            chi_ref += m.xi * m.eta / (m.omega * m.omega) * e;
        }
        CHECK(std::abs(k.phi(i) - phi_ref) < 1e-14);
        CHECK(std::abs(k.chi(i) - chi_ref) < 1e-14);
    }
    CHECK(k.coupling_shift == doctest::Approx(0.2 * 0.1 / 0.7 - 0.5 * 0.3 / 2.3).epsilon(1e-14));
}

TEST_CASE("kernel interpolation at grid midpoints") {
    // kernel step of the default integrator grid (dt = 0.01, halved)
    const double h = 0.005;
    const auto k = build_kernels(base_bath(), h, 2001);
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < k.size(); ++i) {
        const double t = (static_cast<double>(i) + 0.5) * h;
        worst = std::max(worst, std::abs(k.phi_at(t) - oracle::phi_closed(t, base_bath())));
        worst = std::max(worst, std::abs(k.phi_at(-t) - std::conj(oracle::phi_closed(t, base_bath()))));
    }
    CHECK(worst < 1e-8);
}
