// test_spinbath.cpp — Q-correlators, h equations of motion and Theta matrix elements

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dualbath/errors.hpp"
#include "dualbath/spinbath.hpp"

using namespace dualbath;

namespace {

SpinBathRun coupled_run(int N = 2) {
    SpinBathRun r;
    r.system = SystemParams{1.0, 1.0, 0.0, 0.3, N};
    r.bath = BathParams{0.05, 0.01, 0.01, 2.0, 1.0, 100.0};
    r.t_max = 0.5;
    r.dt = 0.01;
    return r;
}

BathKernels run_kernels(const SpinBathRun& r, std::size_t n = 201) { return build_kernels(r.bath, 0.5 * r.dt, n); }

double bisect_tf(const BathParams& p, double target, double a, double b) {
    for (int i = 0; i < 200; ++i) {
        const double c = 0.5 * (a + b);
        ((c * f_mqs(c, p) - target) * (a * f_mqs(a, p) - target) <= 0.0 ? b : a) = c;
    }
    return 0.5 * (a + b);
}

} // namespace

TEST_CASE("Q-correlator trivial limits") {
    const BathParams k0{0.05, 0.0, 0.5, 1.0, 1.0, 100.0};
    const auto k = build_kernels(k0, 0.01, 100);
    CHECK(std::abs(q_correlator_D(false, 1, 1, 0.0, k)) < 1e-15);
    CHECK(std::abs(q_correlator_D(true, -2, -2, 0.0, k)) < 1e-15);
    CHECK(std::abs(q_correlator_DD(DDKind::DD, 0, 0, 0.0, 0.0, k)) < 1e-15);

    const BathParams free{0.0, 0.0, 0.5, 1.0, 1.0, 100.0};
    const auto kf = build_kernels(free, 0.01, 100);
    for (int m : {-1, 0, 2})
        for (int mp : {-1, 1}) {
            CHECK(std::abs(q_correlator_D(false, m, mp, 0.37, kf)) < 1e-15);
            CHECK(std::abs(q_correlator_DD(DDKind::DdagD, m, mp, 0.5, 0.2, kf)) < 1e-15);
        }
}

TEST_CASE("spin-bath RHS vanishes without TLS-boson coupling") {
    SpinBathRun r = coupled_run();
    r.bath = BathParams{0.0, 0.0, 0.5, 1.0, 1.0, 100.0};
    const SpinBathModel model(r, run_kernels(r));
    const HMatrix h0 = model.initial();
    for (std::size_t k : {0u, 13u, 100u}) CHECK(model.h_rhs(h0, k).h.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("spin-bath RHS at t=0 and hermiticity") {
    const SpinBathRun r = coupled_run();
    const SpinBathModel model(r, run_kernels(r));
    const HMatrix h0 = model.initial();
    const HMatrix d0 = model.h_rhs(h0, 0);
    // only the first-order inhomogeneous term can contribute at t=0, and not to the (1,1) blocks
    for (int m = -1; m <= 1; ++m)
        for (int n = -1; n <= 1; ++n) CHECK(std::abs(d0.h(HMatrix::index(2, 0, m), HMatrix::index(2, 0, n))) < 1e-15);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 3; ++trial) {
        HMatrix h = HMatrix::zero(2);
        Eigen::MatrixXcd a(6, 6);
        for (Eigen::Index i = 0; i < 6; ++i)
            for (Eigen::Index j = 0; j < 6; ++j) a(i, j) = cplx{g(rng), g(rng)};
        h.h = a + a.adjoint();
        const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 100)(rng);
        CHECK(model.h_rhs(h, k).hermiticity_error() < 1e-12);
    }
}

TEST_CASE("relevant and irrelevant parts") {
    SpinBathRun r = coupled_run(4);
    const SpinBathModel model(r, run_kernels(r));
    const Eigen::VectorXd q = x_state_coeffs(1, 4);
    const Eigen::MatrixXcd rel = model.relevant_theta(model.initial(), 0);
    const Eigen::MatrixXcd irr = model.irrelevant_theta(0);
    for (int m = 0; m < 5; ++m) {
        CHECK(std::abs(rel(m, m) - q(m) * q(m)) < 1e-15);
        CHECK(std::abs(irr(m, m)) == 0.0);
        for (int n = 0; n < 5; ++n) CHECK(std::abs(rel(m, n) + irr(m, n) - q(m) * q(n)) < 1e-15);
    }
    for (std::size_t k : {37u, 150u}) {
        const Eigen::MatrixXcd i = model.irrelevant_theta(k);
        for (int m = 0; m < 5; ++m) CHECK(std::abs(i(m, m)) == 0.0);
    }

    r.bath = BathParams{0.05, 0.0, 0.0, 2.0, 1.0, 100.0};
    const SpinBathModel plain(r, run_kernels(r));
    CHECK(plain.irrelevant_theta(120).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::MatrixXcd rel0 = plain.relevant_theta(plain.initial(), 0);
    CHECK((rel0 - q * q.transpose()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("theta elements at t=0") {
    const Eigen::VectorXd q = x_state_coeffs(1, 10);
    const Eigen::MatrixXcd th = (q * q.transpose()).cast<cplx>();
    const auto e = theta_elements(th);
    CHECK(std::abs(e.pp - 1.0) < 1e-14);
    CHECK(std::abs(e.pm) < 1e-14);
    CHECK(std::abs(e.mp) < 1e-14);
    CHECK(std::abs(e.mm) < 1e-14);
}

TEST_CASE("MQS time and reference states") {
    const BathParams p{0.0, 0.0, 0.5, 1.0, 1.0, 100.0};
    const double tau = tau_mqs(p);
    CHECK(tau == doctest::Approx(1.685).epsilon(0.005 / 1.685));
    CHECK(tau * f_mqs(tau, p) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-10));

    const double t_pi = bisect_tf(p, std::numbers::pi, tau, 10.0);
    const auto minus = theta_elements(mqs_reference(t_pi, 10, p));
    CHECK(std::abs(minus.mm) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(minus.pp) < 1e-9);
    const double t_2pi = bisect_tf(p, 2.0 * std::numbers::pi, t_pi, 20.0);
    const Eigen::VectorXd q = x_state_coeffs(1, 10);
    CHECK((mqs_reference(t_2pi, 10, p) - (q * q.transpose()).cast<cplx>()).cwiseAbs().maxCoeff() < 1e-9);

    const auto k = build_kernels(p, 0.01, 401);
    for (double t : {0.0, 1.0, 3.99})
        CHECK((mqs_reference(t, 10, p, k) - mqs_reference(t, 10, p, true)).cwiseAbs().maxCoeff() < 1e-9);

    const BathParams flat{0.0, 0.0, 0.0, 1.0, 1.0, 100.0};
    CHECK_THROWS_AS(tau_mqs(flat), NumericalError);
}

TEST_CASE("decoupled TLS reproduces the no-TLS evolution") {
    SpinBathRun r;
    r.t_max = 2.0;
    r.output_every = 20;
    auto series = evolve_spin_bath(r, 1, true);
    double worst = 0.0;
    for (std::size_t i = 0; i < series.t.size(); ++i)
        worst = std::max(worst, (series.theta_s[i] - mqs_reference(series.t[i], 10, r.bath, true)).cwiseAbs().maxCoeff());
    CHECK(worst < 1e-6);

    r.bath.kappa3 = 0.0;
    series = evolve_spin_bath(r, 1, true);
    worst = 0.0;
    for (std::size_t i = 0; i < series.t.size(); ++i)
        worst = std::max(worst, (series.theta_s[i] - mqs_reference(series.t[i], 10, r.bath)).cwiseAbs().maxCoeff());
    CHECK(worst < 1e-6);
}

TEST_CASE("coupled evolution keeps h hermitian and the trace fixed") {
    SpinBathRun r = coupled_run(4);
    r.t_max = 1.0;
    r.output_every = 10;
    const auto s1 = evolve_spin_bath(r, 1);
    const auto s2 = evolve_spin_bath(r, 2);
    for (std::size_t i = 0; i < s1.t.size(); ++i) {
        CHECK(s1.hermiticity[i] < 1e-6);
        CHECK(std::abs(s1.trace[i] - 1.0) < 1e-12);
        CHECK(s1.theta[i].pm == s2.theta[i].pm);
    }
}
