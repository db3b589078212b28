// test_oracle.cpp — exact propagation checks and closed forms against truncated-Fock expectations

#include <doctest.h>

#include <cmath>

#include "dualbath/errors.hpp"
#include "dualbath/oracle.hpp"

using namespace dualbath;

namespace {

std::vector<double> grid(double t_max, int n) {
    std::vector<double> g;
    for (int i = 0; i <= n; ++i) g.push_back(t_max * i / n);
    return g;
}

const BathParams kWeak{0.01, 0.002, 0.004, 2.0, 1.0, 100.0};

} // namespace

TEST_CASE("Hamiltonian structure") {
    OracleModel om;
    om.system = SystemParams{1.0, 0.0, 0.3, 0.2, 2};
    om.modes = {{1.0, 0.0, 0.0}, {2.0, 0.0, 0.0}};
    om.n_max = 3;
    const Eigen::MatrixXcd H(build_hamiltonian(om));
    CHECK((H - Eigen::MatrixXcd(H.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);

    om.system.J = 1.0;
    om.modes = discretize_modes(kWeak, 2);
    const auto Hs = build_hamiltonian(om);
    const Eigen::MatrixXcd Hd(Hs);
    CHECK((Hd - Hd.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    const auto L2 = total_spin_squared(om);
    CHECK(Eigen::MatrixXcd(Hs * L2 - L2 * Hs).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("mode discretization reproduces the continuum moments") {
    const auto modes = discretize_modes(kWeak, 3);
    double a = 0.0, b = 0.0, c = 0.0;
    for (const auto& m : modes) {
        a += m.xi * m.xi / (m.omega * m.omega);
        b += m.eta * m.eta / (m.omega * m.omega);
        c += m.xi * m.eta / (m.omega * m.omega);
    }
    CHECK(a == doctest::Approx(kWeak.kappa1 * 4.0).epsilon(1e-12));
    CHECK(b == doctest::Approx(kWeak.kappa3 * 4.0).epsilon(1e-12));
    CHECK(c == doctest::Approx(kWeak.kappa2 * 4.0).epsilon(1e-12));
}

TEST_CASE("validation limits") {
    OracleModel om;
    om.system.N = 6;
    CHECK_THROWS_AS(om.validate(), ValidationError);
    om.system.N = 2;
    om.n_max = 9;
    CHECK_THROWS_AS(om.validate(), ValidationError);
}

TEST_CASE("uncoupled modes give Rabi oscillations") {
    OracleModel om;
    om.system = SystemParams{1.0, 1.0, 0.3, 0.0, 2};
    om.modes = {{1.0, 0.0, 0.0}};
    om.n_max = 2;
    const auto g = grid(6.0, 60);
    const auto tr = propagate(om, OracleInitial::thermal_spins, g);
    const double w = std::sqrt(1.25);
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(std::abs(tr.P1[i] - std::pow(std::sin(w * g[i]), 2) / 1.25) < 1e-12);
}

TEST_CASE("spin-bath coupled modes leave the uncoupled population unchanged") {
    OracleModel om;
    om.system = SystemParams{1.0, 0.8, 0.5, 0.4, 4};
    om.modes = {{0.7, 0.0, 0.1}, {1.9, 0.0, -0.2}};
    om.n_max = 4;
    om.beta = 2.0;
    const auto g = grid(5.0, 50);
    const auto tr = propagate(om, OracleInitial::thermal_spins, g);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        worst = std::max(worst, std::abs(tr.P1[i] - exact_xi0_P1(g[i], om.system, om.beta)));
    CHECK(worst <= 1e-8);
    CHECK(tr.energy_drift <= 1e-10);
    CHECK(tr.norm_drift <= 1e-10);
}

TEST_CASE("Q-correlator closed forms against truncated-Fock expectations") {
    const auto modes = discretize_modes(kWeak, 2);
    const auto k = build_kernels(modes, 100.0, 0.005, 401);
    double worst = 0.0;
    for (int s0 : {-1, 1})
        for (auto [m, mp] : {std::pair{1, -1}, std::pair{0, 1}, std::pair{1, 1}}) {
            for (int d = 0; d < 2; ++d) {
                const cplx a = oracle_q_correlator_D(modes, 8, 100.0, d, m, mp, s0, 0.75);
                const cplx b = q_correlator_D(d, m, mp, 0.75, k, s0);
                worst = std::max(worst, std::abs(a - b));
            }
            for (int kind = 0; kind < 4; ++kind) {
                const cplx a = oracle_q_correlator_DD(modes, 8, 100.0, DDKind(kind), m, mp, s0, 0.7, 0.3);
                const cplx b = q_correlator_DD(DDKind(kind), m, mp, 0.7, 0.3, k, s0);
                worst = std::max(worst, std::abs(a - b));
            }
        }
    CHECK(worst <= 1e-3);
    CHECK(worst <= 1e-10);
}

TEST_CASE("spin-bath pipeline against exact propagation, N=2") {
    OracleModel om;
    om.system = SystemParams{1.0, 1.0, 0.0, 0.3, 2};
    om.modes = discretize_modes(kWeak, 2);
    om.n_max = 6;
    om.beta = 100.0;
    const auto g = grid(4.0, 40);
    const auto ox = propagate(om, OracleInitial::x_state, g);
    SpinBathRun sr;
    sr.system = om.system;
    sr.bath = kWeak;
    sr.t_max = 4.0;
    sr.dt = 0.01;
    const auto k = build_kernels(om.modes, om.beta, 0.005, 801);
    const auto s = SpinBathModel(sr, k).evolve(1, true);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        worst = std::max(worst, (s.theta_s[10 * i] - ox.theta_s[i]).cwiseAbs().maxCoeff());
    CHECK(worst <= 5e-2);
}
