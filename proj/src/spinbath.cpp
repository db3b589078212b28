#include "dualbath/spinbath.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "dualbath/errors.hpp"
#include "dualbath/parallel.hpp"
#include "memory.hpp"

namespace dualbath {

namespace {

const cplx I{0.0, 1.0};

const Eigen::Vector2cd kDown(0.0, 1.0);

// F_+ (sign > 0) or F_- for sectors (m, m') at time t.
cplx pair_factor(int sign, int m, int mp, double t, const BathKernels& k, int s0) {
    const cplx chi = k.chi_at(t), ph = k.phi_at(t);
    const double re = (m - mp) * chi.real();
    const double im = (m + mp) * (-chi.imag()) + s0 * (-ph.imag());
    return sign > 0 ? std::exp(cplx{-re, im}) : std::exp(cplx{re, -im});
}

} // namespace

HMatrix HMatrix::zero(int N, double t) {
    HMatrix h;
    h.N = N;
    h.t = t;
    h.h = Eigen::MatrixXcd::Zero(2 * (N + 1), 2 * (N + 1));
    return h;
}

Eigen::Matrix2cd HMatrix::block(int m, int n) const { return h.block<2, 2>(index(N, 0, m), index(N, 0, n)); }

void HMatrix::set_block(int m, int n, const Eigen::Matrix2cd& b) {
    h.block<2, 2>(index(N, 0, m), index(N, 0, n)) = b;
}

double HMatrix::hermiticity_error() const { return (h - h.adjoint()).cwiseAbs().maxCoeff(); }

cplx q_correlator_D(bool dagger, int m, int mp, double t, const BathKernels& k, int s0) {
    const double g = std::exp(-0.5 * (m - mp) * (m - mp) * k.psi1[0]);
    return k.theta_factor * g * (pair_factor(dagger ? -1 : 1, m, mp, t, k, s0) - 1.0);
}

cplx q_correlator_DD(DDKind kind, int m, int mp, double t, double s, const BathKernels& k, int s0) {
    const int s1 = (kind == DDKind::DD || kind == DDKind::DDdag) ? 1 : -1;
    const int s2 = (kind == DDKind::DD || kind == DDKind::DdagD) ? 1 : -1;
    const double g = std::exp(-0.5 * (m - mp) * (m - mp) * k.psi1[0]);
    const cplx e = std::exp(-static_cast<double>(s1 * s2) * k.phi_at(t - s));
    const cplx f1 = pair_factor(s1, m, mp, t, k, s0);
    const cplx f2 = pair_factor(s2, m, mp, s, k, s0);
    return k.theta_factor * k.theta_factor * g * (e * f1 * f2 - f1 - f2 - e + 2.0);
}

SpinBathModel::SpinBathModel(const SpinBathRun& run, BathKernels kernels) : run_(run), kernels_(std::move(kernels)) {
    run_.system.validate();
    pc_ = polaron_constants(run_.system.J, run_.system.gamma, kernels_);
    const int N = run_.system.N;
    for (int m = -N / 2; m <= N / 2; ++m) eigs_.push_back(sector_eigens(m, run_.system.eps, pc_, run_.system.alpha));
    q_ = x_state_coeffs(1, N);
    coupled_ = false;
    for (std::size_t i = 0; i < kernels_.size() && !coupled_; ++i)
        coupled_ = kernels_.phi1[i] != 0.0 || kernels_.phi2[i] != 0.0;
    if (coupled_) {
        const auto tab = detail::CorrelationTables::build(kernels_, kernels_.size());
        for (const auto& e : eigs_)
            lambda_.push_back(detail::lambda_table(e, kernels_.dt, run_.system.J, tab, kernels_.size()));
    }
}

double SpinBathModel::gauss(int m, int n) const { return std::exp(-0.5 * (m - n) * (m - n) * kernels_.psi1[0]); }

HMatrix SpinBathModel::initial() const {
    HMatrix h = HMatrix::zero(N());
    for (int m = -N() / 2; m <= N() / 2; ++m)
        for (int n = -N() / 2; n <= N() / 2; ++n)
            h.h(HMatrix::index(N(), 1, m), HMatrix::index(N(), 1, n)) = q(m) * q(n) * gauss(m, n);
    return h;
}

Eigen::Matrix2cd SpinBathModel::pair_rhs(int m, int n, const Eigen::Matrix2cd& rho, std::size_t k) const {
    const Eigen::Matrix2cd Hm = sector_hamiltonian(eig(m)), Hn = sector_hamiltonian(eig(n));
    Eigen::Matrix2cd out = -I * (Hm * rho - rho * Hn);
    if (!coupled_) return out;
    const double J = run_.system.J;
    const Eigen::Matrix2cd A[2] = {J * detail::sigma_plus(), J * detail::sigma_minus()};
    const auto& Lm = lambda_[static_cast<std::size_t>(m + N() / 2)][k];
    const auto& Ln = lambda_[static_cast<std::size_t>(n + N() / 2)][k];
    const Eigen::Matrix2cd rd = rho.adjoint();
    Eigen::Matrix2cd Xm = Eigen::Matrix2cd::Zero(), Xn = Eigen::Matrix2cd::Zero();
    for (int a = 0; a < 2; ++a) {
        Xm += A[a] * Lm[a] * rho - Lm[a] * rho * A[a];
        Xn += A[a] * Ln[a] * rd - Ln[a] * rd * A[a];
    }
    return out - (Xm + Xn.adjoint());
}

Eigen::Matrix2cd SpinBathModel::inhomogeneous(int m, int n, std::size_t k) const {
    if (!coupled_) return Eigen::Matrix2cd::Zero();
    const double t = kernels_.t(k);
    const auto pf = detail::PairFactors::build(kernels_, m, n, -1, k + 1);
    const Eigen::Vector2cd l = sector_propagator(eig(m), t) * kDown;
    const Eigen::Vector2cd r = sector_propagator(eig(n), t) * kDown;
    Eigen::Matrix2cd X = detail::first_order_block(k, run_.system.J, kernels_.theta_factor, pf, l, r);
    if (run_.second_order) {
        const auto tab = detail::CorrelationTables::build(kernels_, k + 1);
        X += detail::second_order_block(k, kernels_.dt, run_.system.J, tab, pf, eig(m), eig(n), l, r);
    }
    return q(m) * q(n) * X;
}

HMatrix SpinBathModel::h_rhs(const HMatrix& h, std::size_t k) const {
    if (k >= kernels_.size()) throw std::out_of_range("time beyond kernel grid");
    const double t = kernels_.t(k);
    HMatrix out = HMatrix::zero(N(), t);
    for (int m = -N() / 2; m <= N() / 2; ++m) {
        const Eigen::Matrix2cd Um = sector_propagator(eig(m), t);
        for (int n = -N() / 2; n <= N() / 2; ++n) {
            const Eigen::Matrix2cd Un = sector_propagator(eig(n), t);
            const Eigen::Matrix2cd rho = Um * h.block(m, n) * Un.adjoint();
            const Eigen::Matrix2cd Hm = sector_hamiltonian(eig(m)), Hn = sector_hamiltonian(eig(n));
            const Eigen::Matrix2cd mem = pair_rhs(m, n, rho, k) + I * (Hm * rho - rho * Hn) + inhomogeneous(m, n, k);
            const Eigen::Matrix2cd d = Um.adjoint() * mem * Un;
            if (!d.allFinite()) {
                std::ostringstream os;
                os << "non-finite h derivative in block (m=" << m << ", n=" << n << ") at t=" << t;
                throw NumericalError(os.str());
            }
            out.set_block(m, n, d);
        }
    }
    return out;
}

Eigen::MatrixXcd SpinBathModel::relevant_theta(const HMatrix& h, std::size_t k) const {
    const double t = kernels_.t(k);
    const int N = this->N();
    Eigen::MatrixXcd th(N + 1, N + 1);
    for (int m = -N / 2; m <= N / 2; ++m) {
        for (int n = -N / 2; n <= N / 2; ++n) {
            const Eigen::Matrix2cd hb = h.block(m, n);
            cplx v;
            if (run_.relevant == RelevantForm::printed) {
                const PairEigens pe = pair_eigens(eig(n), eig(m), run_.system.alpha, pc_.eta);
                const double c = std::cos(pe.theta), s = std::sin(pe.theta);
                Eigen::Matrix2cd Pp, Pm;
                Pp << 0.5 * (1.0 + c), 0.5 * s, 0.5 * s, 0.5 * (1.0 - c);
                Pm = Eigen::Matrix2cd::Identity() - Pp;
                const Eigen::Matrix2cd W = std::exp(I * (pe.E_plus * t)) * Pp + std::exp(I * (pe.E_minus * t)) * Pm;
                v = (hb * W).trace();
            } else {
                const Eigen::Matrix2cd rho =
                    sector_propagator(eig(m), t) * hb * sector_propagator(eig(n), t).adjoint();
                v = std::exp(I * ((eig(n).scalar - eig(m).scalar) * t)) * rho.trace();
            }
            th(m + N / 2, n + N / 2) = gauss(m, n) * v;
        }
    }
    return th;
}

cplx SpinBathModel::irrelevant_element(int m, int n, std::size_t k) const {
    const double t = kernels_.t(k);
    cplx w;
    if (run_.relevant == RelevantForm::printed) {
        const PairEigens pe = pair_eigens(eig(n), eig(m), run_.system.alpha, pc_.eta);
        const double s2 = std::pow(std::sin(0.5 * pe.theta), 2), c2 = std::pow(std::cos(0.5 * pe.theta), 2);
        w = s2 * std::exp(I * (pe.E_plus * t)) + c2 * std::exp(I * (pe.E_minus * t));
    } else {
        const Eigen::Vector2cd um = sector_propagator(eig(m), t) * kDown, un = sector_propagator(eig(n), t) * kDown;
        w = std::exp(I * ((eig(n).scalar - eig(m).scalar) * t)) * un.dot(um);
    }
    const double d = n - m;
    const cplx ex = d * cplx{d * kernels_.psi1[k], (n + m) * kernels_.psi2[k] - kernels_.chi2[k]};
    return q(m) * q(n) * std::exp(-d * d * kernels_.psi1[0]) * w * (std::exp(ex) - 1.0);
}

Eigen::MatrixXcd SpinBathModel::irrelevant_theta(std::size_t k) const {
    const int N = this->N();
    Eigen::MatrixXcd th(N + 1, N + 1);
    for (int m = -N / 2; m <= N / 2; ++m)
        for (int n = -N / 2; n <= N / 2; ++n) th(m + N / 2, n + N / 2) = irrelevant_element(m, n, k);
    return th;
}

ThetaSeries SpinBathModel::evolve(int threads, bool keep_matrices) const {
    const double dt = step();
    const auto steps = static_cast<std::size_t>(std::ceil(run_.t_max / dt - 1e-9));
    const std::size_t n_grid = 2 * steps + 1;
    if (n_grid > kernels_.size()) throw ValidationError("t_max", "kernel grid shorter than the requested run");
    const std::size_t every = std::max<std::size_t>(1, run_.output_every);
    const int N = this->N();
    const int dim = N + 1;
    const std::size_t pairs = static_cast<std::size_t>(dim * dim);
    const std::size_t outputs = steps / every + 1;

    // rho'[pair][output]: U_m h U_n^dagger without scalar phases
    std::vector<std::vector<Eigen::Matrix2cd>> rho(pairs);
    const bool memory = coupled_ && run_.system.J != 0.0;
    const auto tab = memory ? detail::CorrelationTables::build(kernels_, n_grid) : detail::CorrelationTables{};

    parallel_for(pairs, threads, [&](std::size_t idx) {
        const int m = static_cast<int>(idx) / dim - N / 2;
        const int n = static_cast<int>(idx) % dim - N / 2;
        std::vector<Eigen::Matrix2cd> inh;
        if (memory) {
            inh.resize(n_grid);
            const auto pf = detail::PairFactors::build(kernels_, m, n, -1, n_grid);
            const double J = run_.system.J;
            for (std::size_t k = 0; k < n_grid; ++k) {
                const double t = kernels_.t(k);
                const Eigen::Vector2cd l = sector_propagator(eig(m), t) * kDown;
                const Eigen::Vector2cd r = sector_propagator(eig(n), t) * kDown;
                Eigen::Matrix2cd X = detail::first_order_block(k, J, kernels_.theta_factor, pf, l, r);
                if (run_.second_order)
                    X += detail::second_order_block(k, kernels_.dt, J, tab, pf, eig(m), eig(n), l, r);
                inh[k] = q(m) * q(n) * X;
            }
        }
        auto f = [&](std::size_t k, const Eigen::Matrix2cd& x) -> Eigen::Matrix2cd {
            Eigen::Matrix2cd d = pair_rhs(m, n, x, k);
            if (memory) d += inh[k];
            return d;
        };
        Eigen::Matrix2cd a = Eigen::Matrix2cd::Zero();
        a(1, 1) = q(m) * q(n) * gauss(m, n);
        auto& out = rho[idx];
        out.reserve(outputs);
        out.push_back(a);
        for (std::size_t st = 0; st < steps; ++st) {
            const std::size_t k0 = 2 * st;
            const Eigen::Matrix2cd k1 = f(k0, a);
            const Eigen::Matrix2cd k2 = f(k0 + 1, a + 0.5 * dt * k1);
            const Eigen::Matrix2cd k3 = f(k0 + 1, a + 0.5 * dt * k2);
            const Eigen::Matrix2cd k4 = f(k0 + 2, a + dt * k3);
            a += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!a.allFinite()) {
                std::ostringstream os;
                os << "non-finite h block (m=" << m << ", n=" << n << ") at t=" << dt * static_cast<double>(st + 1);
                throw NumericalError(os.str());
            }
            if ((st + 1) % every == 0) out.push_back(a);
        }
    });

    ThetaSeries ts;
    ts.dt = dt;
    for (std::size_t o = 0; o < outputs; ++o) {
        const std::size_t k = 2 * o * every;
        const double t = kernels_.t(k);
        HMatrix h = HMatrix::zero(N, t);
        for (int m = -N / 2; m <= N / 2; ++m) {
            const Eigen::Matrix2cd Um = sector_propagator(eig(m), t);
            for (int n = -N / 2; n <= N / 2; ++n) {
                const Eigen::Matrix2cd Un = sector_propagator(eig(n), t);
                const auto idx = static_cast<std::size_t>((m + N / 2) * dim + (n + N / 2));
                h.set_block(m, n, Um.adjoint() * rho[idx][o] * Un);
            }
        }
        const Eigen::MatrixXcd th = relevant_theta(h, k) + irrelevant_theta(k);
        ts.t.push_back(t);
        ts.theta.push_back(theta_elements(th));
        ts.trace.push_back(th.trace().real());
        ts.hermiticity.push_back(h.hermiticity_error());
        if (keep_matrices) ts.theta_s.push_back(th);
    }
    return ts;
}

ThetaSeries evolve_spin_bath(const SpinBathRun& run, int threads, bool keep_matrices) {
    run.system.validate();
    run.bath.validate();
    if (!(run.t_max > 0.0)) throw ValidationError("t_max", "must be > 0");
    const auto pc = polaron_constants(run.system.J, run.system.gamma, run.bath);
    const double dt = run.dt > 0.0 ? run.dt : default_time_step(run.system, pc);
    const auto steps = static_cast<std::size_t>(std::ceil(run.t_max / dt - 1e-9));
    const auto kernels = build_kernels(run.bath, 0.5 * dt, std::max<std::size_t>(2 * steps + 1, 4));
    return SpinBathModel(run, kernels).evolve(threads, keep_matrices);
}

cplx theta_pm(const Eigen::MatrixXcd& theta_s, int sign_row, int sign_col) {
    const int N = static_cast<int>(theta_s.rows()) - 1;
    const Eigen::VectorXd a = x_state_coeffs(sign_row, N), b = x_state_coeffs(sign_col, N);
    return (a.cast<cplx>().transpose() * theta_s * b.cast<cplx>())(0, 0);
}

ThetaElements theta_elements(const Eigen::MatrixXcd& theta_s) {
    return {theta_pm(theta_s, 1, 1), theta_pm(theta_s, 1, -1), theta_pm(theta_s, -1, 1), theta_pm(theta_s, -1, -1)};
}

double tau_mqs(const BathParams& p) {
    p.validate();
    const double target = 0.5 * std::numbers::pi;
    auto g = [&](double t) { return t * f_mqs(t, p) - target; };
    double lo = 0.0, hi = 10.0 / p.omega_c;
    if (g(hi) < 0.0) throw NumericalError("no MQS time: t f(t) stays below pi/2 on [0, 10/omega_c]");
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

Eigen::MatrixXcd reference_matrix(double t, int N, const BathParams& p, double decay) {
    const Eigen::VectorXd q = x_state_coeffs(1, N);
    const double tf = t * f_mqs(t, p);
    Eigen::MatrixXcd th(N + 1, N + 1);
    for (int m = -N / 2; m <= N / 2; ++m) {
        for (int n = -N / 2; n <= N / 2; ++n) {
            const double d = m - n;
            th(m + N / 2, n + N / 2) =
                q(m + N / 2) * q(n + N / 2) * std::exp(cplx{-d * d * decay, (m * m - n * n) * tf});
        }
    }
    return th;
}

} // namespace

Eigen::MatrixXcd mqs_reference(double t, int N, const BathParams& p, bool with_decoherence) {
    const double decay = with_decoherence ? psi(0.0, p).real() - psi(t, p).real() : 0.0;
    return reference_matrix(t, N, p, decay);
}

Eigen::MatrixXcd mqs_reference(double t, int N, const BathParams& p, const BathKernels& k) {
    if (t < 0.0 || t > k.t_max() + 1e-12 * std::max(1.0, t))
        throw ValidationError("t", "outside the kernel table");
    return reference_matrix(t, N, p, k.psi1[0] - k.psi_at(t).real());
}

} // namespace dualbath
