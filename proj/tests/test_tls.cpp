// test_tls.cpp — rates, Bloch matrix, inhomogeneous terms, integration and references

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dualbath/errors.hpp"
#include "dualbath/tls.hpp"
#include "oracles.hpp"

using namespace dualbath;

namespace {

BathParams fig2_bath() { return BathParams{0.05, 0.0, 0.0, 2.0, 1.0, 2.0}; }

SectorEigens toy_sector(const BathKernels& k, double J = 1.0) {
    return sector_eigens(0, 1.0, polaron_constants(J, 0.0, k), 1.0);
}

// Direct binomial-weighted Rabi sum for the uncoupled boson bath.
double rabi_reference(double t, const SystemParams& s, double beta) {
    double num = 0.0, z = 0.0;
    for (int m = -s.N / 2; m <= s.N / 2; ++m) {
        const double w = binomial(s.N, s.N / 2 + m) * std::exp(-beta * s.alpha * m);
        const double b = 0.5 * s.eps + s.gamma * m;
        const double om = std::sqrt(s.J * s.J + b * b);
        num += w * s.J * s.J * std::pow(std::sin(om * t), 2) / (om * om);
        z += w;
    }
    return num / z;
}

double max_abs(const Eigen::Vector3d& v) { return v.cwiseAbs().maxCoeff(); }

} // namespace

TEST_CASE("rates vanish at t=0 and without coupling") {
    const auto k = build_kernels(fig2_bath(), 0.005, 1001);
    const auto eig = toy_sector(k);
    const auto r0 = homogeneous_rates(eig, 0.0, k, 1.0);
    for (int i = 0; i < 3; ++i) {
        CHECK(r0.G1_minus[i] == 0.0);
        CHECK(r0.G2_plus[i] == 0.0);
    }
    BathParams z = fig2_bath();
    z.kappa1 = 0.0;
    const auto kz = build_kernels(z, 0.005, 1001);
    const auto rz = homogeneous_rates(toy_sector(kz), 5.0, kz, 1.0);
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(rz.G1_minus[i]) + std::abs(rz.G1_plus[i]) + std::abs(rz.G2_minus[i]) + std::abs(rz.G2_plus[i]) ==
              0.0);
    }
    CHECK(max_abs(inhomogeneous_Re(rz, 1.0)) == 0.0);
    CHECK(max_abs(inhomogeneous_Re(r0, 1.0)) == 0.0);
}

TEST_CASE("rates match refined adaptive quadrature") {
    const BathParams p = fig2_bath();
    const auto k = build_kernels(p, 0.005, 1001);
    const auto eig = toy_sector(k);
    const double t = 5.0;
    const auto r = homogeneous_rates(eig, t, k, 1.0);
    std::array<cplx, 3> g1, g2;
    for (int i = 0; i < 3; ++i) oracle::gamma_reference(eig, t, p, i, g1[i], g2[i]);
    const auto ref = rates_from_gamma(g1, g2, 1.0);
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(r.G1_minus[i] - ref.G1_minus[i]) < 1e-6);
        CHECK(std::abs(r.G1_plus[i] - ref.G1_plus[i]) < 1e-6);
        CHECK(std::abs(r.G2_minus[i] - ref.G2_minus[i]) < 1e-6);
        CHECK(std::abs(r.G2_plus[i] - ref.G2_plus[i]) < 1e-6);
    }
    const Eigen::Vector3d re = inhomogeneous_Re(r, 0.7), re_ref = inhomogeneous_Re(ref, 0.7);
    CHECK((re - re_ref).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("Bloch matrix structure") {
    const auto k = build_kernels(fig2_bath(), 0.005, 1001);
    const auto eig = sector_eigens(1, 1.0, polaron_constants(1.0, 0.3, k), 1.0);
    const double jt = k.theta_factor;
    const RateSet zero;
    const Eigen::Matrix3d M0 = bloch_matrix(eig, zero, jt);
    CHECK(M0.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK(M0(0, 1) == doctest::Approx(-eig.eps_tilde));
    CHECK(M0(1, 0) == doctest::Approx(eig.eps_tilde));
    CHECK(M0(1, 2) == doctest::Approx(-2.0 * jt));
    CHECK(M0(2, 1) == doctest::Approx(2.0 * jt));
    const auto r = homogeneous_rates(eig, 3.0, k, 1.0);
    const Eigen::Matrix3d M = bloch_matrix(eig, r, jt);
    CHECK(M.trace() == doctest::Approx(-2.0 * (r.G1_minus[1] + r.G2_plus[0])).epsilon(1e-14));
}

TEST_CASE("first-order inhomogeneous term") {
    BathParams p = fig2_bath();
    const auto k = build_kernels(p, 0.005, 4001);
    const auto eig = toy_sector(k);
    const double ae = 0.4, t = 1.0;
    const Eigen::Vector3d r1 = inhomogeneous_R1(eig, t, k, 1.0, ae);
    const double phi2 = k.phi2[200];
    const double w = eig.S * eig.S * std::cos(eig.eps * t) + eig.C * eig.C;
    CHECK(r1(0) == doctest::Approx(-k.theta_factor * 2.0 * std::sin(phi2) * ae * w).epsilon(1e-12));

    // closed form equals the operator form for the down state, including the factor J
    for (double J : {1.0, 0.6}) {
        const auto e = sector_eigens(-1, 1.0, polaron_constants(J, 0.25, k), 1.0);
        for (std::size_t i : {0u, 37u, 400u, 1999u}) {
            const Eigen::Vector3d a = inhomogeneous_R1(e, k.t(i), k, J, ae);
            const Eigen::Vector3d b = inhomogeneous_R1_operator(e, i, k, J, ae, -1);
            CHECK((a - b).cwiseAbs().maxCoeff() < 1e-13);
        }
    }
    CHECK(max_abs(inhomogeneous_R1(eig, 0.0, k, 1.0, ae)) < 1e-15);
    CHECK(max_abs(inhomogeneous_R1(eig, 20.0, k, 1.0, ae)) < 2e-3 * ae);
    p.kappa1 = 0.0;
    const auto kz = build_kernels(p, 0.005, 401);
    CHECK(max_abs(inhomogeneous_R1(toy_sector(kz), 1.5, kz, 1.0, ae)) == 0.0);
}

TEST_CASE("second-order inhomogeneous term") {
    BathParams p = fig2_bath();
    p.kappa1 = 0.01;
    const auto k = build_kernels(p, 0.005, 801);
    const auto eig = toy_sector(k);
    CHECK(max_abs(inhomogeneous_R2(eig, 0.0, k, 1.0, 1.0)) < 1e-15);
    const Eigen::Vector3d r1 = inhomogeneous_R1(eig, 2.0, k, 1.0, 1.0);
    const Eigen::Vector3d r2 = inhomogeneous_R2(eig, 2.0, k, 1.0, 1.0);
    CHECK(r2.norm() <= 10.0 * r1.norm() * r1.norm() + 10.0 * p.kappa1 * p.kappa1);

    // grid refinement
    const auto kh = build_kernels(p, 0.0025, 1601);
    const auto eh = toy_sector(kh);
    const Eigen::Vector3d r2h = inhomogeneous_R2(eh, 2.0, kh, 1.0, 1.0);
    CHECK((r2 - r2h).cwiseAbs().maxCoeff() < 1e-5);

    p.kappa1 = 0.0;
    const auto kz = build_kernels(p, 0.005, 401);
    CHECK(max_abs(inhomogeneous_R2(toy_sector(kz), 1.5, kz, 1.0, 1.0)) == 0.0);
}

TEST_CASE("grid lookups reject off-grid and out-of-range times") {
    const auto k = build_kernels(fig2_bath(), 0.01, 101);
    const auto eig = toy_sector(k);
    CHECK_THROWS_AS(homogeneous_rates(eig, 0.0137, k, 1.0), ValidationError);
    CHECK_THROWS_AS(homogeneous_rates(eig, 2.0, k, 1.0), std::out_of_range);
}

TEST_CASE("integration: initial state and sector weights") {
    TlsRun r;
    r.system.N = 4;
    r.system.gamma = 0.3;
    r.t_max = 1.0;
    const auto tr = integrate(r, 1);
    CHECK(tr.sigma_z.front() == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(std::abs(tr.P1.front()) < 1e-14);
    const auto table = SectorTable::build(4);
    CHECK(std::abs(sector_sum(table, tr.alpha_e) - 1.0) < 1e-12);
    const auto tr2 = integrate(r, 2);
    CHECK(tr2.sigma_z == tr.sigma_z);
    CHECK(tr2.sigma_x_P == tr.sigma_x_P);

    r.initial_state = 0;
    CHECK_THROWS_AS(integrate(r, 1), ValidationError);
}

TEST_CASE("sector weights sum to one") {
    for (int N : {0, 2, 10, 24})
        for (double beta : {0.01, 2.0, 100.0})
            for (double alpha : {-1.0, 0.0, 0.5, 3.0}) {
                SystemParams s;
                s.N = N;
                s.alpha = alpha;
                CHECK(std::abs(sector_sum(SectorTable::build(N), sector_populations(s, beta)) - 1.0) < 1e-12);
            }
}

TEST_CASE("uncoupled boson bath reproduces the Rabi sum") {
    TlsRun r;
    r.system.N = 4;
    r.system.gamma = 0.4;
    r.bath.kappa1 = 0.0;
    r.t_max = 5.0;
    r.output_every = 10;
    const auto tr = integrate(r, 1);
    double worst = 0.0, worst_closed = 0.0;
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        worst = std::max(worst, std::abs(tr.P1[i] - rabi_reference(tr.t[i], r.system, r.bath.beta)));
        worst_closed = std::max(worst_closed, std::abs(exact_xi0_P1(tr.t[i], r.system, r.bath.beta) -
                                                       rabi_reference(tr.t[i], r.system, r.bath.beta)));
    }
    CHECK(worst < 1e-6);
    CHECK(worst_closed < 1e-14);
}

TEST_CASE("exact uncoupled population examples") {
    SystemParams s;
    s.gamma = 0.0;
    s.N = 10;
    const double w = std::sqrt(1.25);
    for (double t : {0.3, 1.405, 4.0})
        CHECK(exact_xi0_P1(t, s, 2.0) == doctest::Approx(std::pow(std::sin(w * t), 2) / 1.25).epsilon(1e-12));
    CHECK(exact_xi0_P1(std::numbers::pi / (2.0 * w), s, 2.0) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(std::numbers::pi / (2.0 * w) == doctest::Approx(1.4050).epsilon(1e-4));
    CHECK(exact_xi0_P1(0.0, s, 2.0) == 0.0);
    s.J = 0.0;
    CHECK(exact_xi0_P1(2.0, s, 2.0) == 0.0);
}

TEST_CASE("Gibbs reference") {
    CHECK(gibbs_P1(1.0, 1.0, 2.0) == doctest::Approx(0.2814).epsilon(5e-5 / 0.2814));
    CHECK(gibbs_P1(1.0, 1.0, 0.0) == 0.5);
    CHECK(gibbs_P1(1.0, 0.0, 1e3) == doctest::Approx(0.0));
    CHECK(gibbs_P1(0.0, 1.0, 2.0) == 0.5);
}

TEST_CASE("steady state at the base point") {
    SystemParams s;
    const auto ss = steady_state(s, fig2_bath());
    CHECK(ss.P1 == doctest::Approx(0.264040).epsilon(1e-5 / 0.264));
    CHECK(std::abs(ss.P1 - gibbs_P1(1.0, 1.0, 2.0)) < 0.03);
    CHECK(ss.rate_change < 1e-8);
    BathParams z = fig2_bath();
    z.kappa1 = 0.0;
    CHECK_THROWS_AS(steady_state(s, z), NumericalError);
}
