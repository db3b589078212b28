#include "dualbath/tls.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "dualbath/errors.hpp"
#include "dualbath/parallel.hpp"
#include "memory.hpp"

namespace dualbath {

namespace {

using detail::CumulativeFilon;

std::size_t grid_index(double t, const BathKernels& k) {
    if (!(t >= 0.0)) throw ValidationError("t", "must be >= 0");
    const double x = t / k.dt;
    const auto i = static_cast<std::size_t>(std::llround(x));
    if (std::abs(x - static_cast<double>(i)) > 1e-6) throw ValidationError("t", "not a node of the kernel grid");
    if (i >= k.size()) throw std::out_of_range("time beyond kernel grid");
    return i;
}

// sum_j c_j with Neumaier compensation, in the order given
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_{0.0}, comp_{0.0};
};

// Accumulators for gamma^1 and gamma^2 of one sector.
class GammaAccumulator {
public:
    GammaAccumulator(const SectorEigens& eig, double h) {
        const double w[3] = {eig.eps, 0.0, -eig.eps};
        for (int q = 0; q < 3; ++q) {
            acc1_.emplace_back(w[q], h);
            acc2_.emplace_back(w[q], h);
        }
        for (int i = 0; i < 3; ++i) {
            const Harmonic3 kt = k_tilde_harmonics(static_cast<Axis>(i), eig);
            minus_[i] = kt - kt.conj();
            plus_[i] = kt + kt.conj();
        }
    }

    void push(cplx g1, cplx g2) {
        for (int q = 0; q < 3; ++q) {
            acc1_[q].push(g1);
            acc2_[q].push(g2);
        }
    }

    // combine frequency integrals I(w) with the harmonic coefficients of K~(-s)
    static cplx combine(const Harmonic3& h, const cplx* I) { return h.minus * I[0] + h.zero * I[1] + h.plus * I[2]; }

    void gammas(double theta2, const cplx* extra1, const cplx* extra2, std::array<cplx, 3>& g1,
                std::array<cplx, 3>& g2) const {
        cplx I1[3], I2[3];
        for (int q = 0; q < 3; ++q) {
            I1[q] = acc1_[q].value() + (extra1 ? extra1[q] : cplx{});
            I2[q] = acc2_[q].value() + (extra2 ? extra2[q] : cplx{});
        }
        for (int i = 0; i < 3; ++i) {
            g1[i] = theta2 * combine(minus_[i], I1);
            g2[i] = theta2 * combine(plus_[i], I2);
        }
    }

private:
    std::vector<CumulativeFilon> acc1_, acc2_;
    Harmonic3 minus_[3], plus_[3];
};

void g_values(const BathKernels& k, std::size_t j, cplx& g1, cplx& g2) {
    const cplx ph = k.phi(j);
    const cplx em = std::exp(-ph), ep = std::exp(ph);
    g1 = em - ep;
    g2 = em + ep - 2.0;
}

struct SectorSeries {
    std::vector<Eigen::Matrix3d> M;
    std::vector<Eigen::Vector3d> R;
};

Eigen::Vector3d bloch_components(const Eigen::Matrix2cd& X) {
    using detail::pauli;
    return {(pauli(Axis::x) * X).trace().real(), (pauli(Axis::y) * X).trace().real(),
            (pauli(Axis::z) * X).trace().real()};
}

Eigen::Vector2cd initial_vector(int s0) {
    return s0 > 0 ? Eigen::Vector2cd(1.0, 0.0) : Eigen::Vector2cd(0.0, 1.0);
}

SectorSeries sector_series(const SectorEigens& eig, const BathKernels& k, const detail::CorrelationTables& tab,
                           double J, double j_tilde, double alpha_e, int s0, bool second_order, std::size_t n) {
    SectorSeries out;
    out.M.resize(n);
    out.R.resize(n);
    const auto rates = homogeneous_rate_table(eig, k, J, n);
    const auto pf = detail::PairFactors::build(k, eig.m, eig.m, s0, n);
    const Eigen::Vector2cd v0 = initial_vector(s0);
    for (std::size_t i = 0; i < n; ++i) {
        out.M[i] = bloch_matrix(eig, rates[i], j_tilde);
        Eigen::Vector3d r = inhomogeneous_Re(rates[i], alpha_e);
        const Eigen::Vector2cd l = sector_propagator(eig, k.t(i)) * v0;
        Eigen::Matrix2cd X = detail::first_order_block(i, J, k.theta_factor, pf, l, l);
        if (second_order) X += detail::second_order_block(i, k.dt, J, tab, pf, eig, eig, l, l);
        r += alpha_e * bloch_components(X);
        out.R[i] = r;
    }
    return out;
}

} // namespace

void SystemParams::validate(int max_spins) const {
    auto finite = [](double x) { return std::isfinite(x); };
    if (!finite(eps)) throw ValidationError("epsilon", "must be finite");
    if (!finite(J)) throw ValidationError("J", "must be finite");
    if (!finite(alpha)) throw ValidationError("alpha", "must be finite");
    if (!finite(gamma)) throw ValidationError("gamma", "must be finite");
    if (N < 0 || N % 2 != 0) throw ValidationError("N", "must be a non-negative even integer");
    if (N > max_spins) throw ValidationError("N", "exceeds the configured maximum of " + std::to_string(max_spins));
}

RateSet rates_from_gamma(const std::array<cplx, 3>& gamma1, const std::array<cplx, 3>& gamma2, double J) {
    RateSet r;
    const double j2 = J * J;
    for (int i = 0; i < 3; ++i) {
        r.G1_plus[i] = 2.0 * j2 * gamma1[i].real();
        r.G1_minus[i] = -2.0 * j2 * gamma1[i].imag();
        r.G2_plus[i] = 2.0 * j2 * gamma2[i].real();
        r.G2_minus[i] = -2.0 * j2 * gamma2[i].imag();
    }
    return r;
}

std::vector<RateSet> homogeneous_rate_table(const SectorEigens& eig, const BathKernels& k, double J, std::size_t n) {
    if (n > k.size()) throw std::out_of_range("rate table longer than kernel grid");
    std::vector<RateSet> out(n);
    GammaAccumulator acc(eig, k.dt);
    const double th2 = k.theta_factor * k.theta_factor;
    std::array<cplx, 3> g1, g2;
    for (std::size_t j = 0; j < n; ++j) {
        cplx a, b;
        g_values(k, j, a, b);
        acc.push(a, b);
        acc.gammas(th2, nullptr, nullptr, g1, g2);
        out[j] = rates_from_gamma(g1, g2, J);
    }
    return out;
}

RateSet homogeneous_rates(const SectorEigens& eig, double t, const BathKernels& k, double J) {
    const std::size_t i = grid_index(t, k);
    return homogeneous_rate_table(eig, k, J, i + 1).back();
}

Eigen::Matrix3d bloch_matrix(const SectorEigens& eig, const RateSet& r, double j_tilde) {
    const double et = eig.eps_tilde;
    const double G1mx = r.G1_minus[0], G1my = r.G1_minus[1], G1mz = r.G1_minus[2];
    const double G2px = r.G2_plus[0], G2py = r.G2_plus[1], G2pz = r.G2_plus[2];
    Eigen::Matrix3d M;
    M << -G1my, G1mx - et, 0.0,
         G2py + et, -G2px, -2.0 * j_tilde,
         G2pz, G1mz + 2.0 * j_tilde, -(G2px + G1my);
    return M;
}

Eigen::Vector3d inhomogeneous_Re(const RateSet& r, double alpha_e) {
    return {r.G1_plus[2] * alpha_e, r.G2_minus[2] * alpha_e, -(r.G1_plus[0] + r.G2_minus[1]) * alpha_e};
}

Eigen::Vector3d inhomogeneous_R1(const SectorEigens& eig, double t, const BathKernels& k, double J, double alpha_e) {
    const std::size_t i = grid_index(t, k);
    const double arg = 2.0 * eig.m * k.chi2[i] - k.phi2[i];
    const double dplus = 2.0 * (std::cos(arg) - 1.0);
    const double dminus = -2.0 * std::sin(arg);
    const double ce = std::cos(eig.eps * t), se = std::sin(eig.eps * t);
    const double C = eig.C, S = eig.S, th = J * k.theta_factor;
    const double w = S * S * ce + C * C;
    return {-th * dminus * alpha_e * w, th * dplus * alpha_e * w,
            th * S * alpha_e * (se * dplus - C * (ce - 1.0) * dminus)};
}

Eigen::Vector3d inhomogeneous_R1_operator(const SectorEigens& eig, std::size_t index, const BathKernels& k, double J,
                                          double alpha_e, int s0) {
    const auto pf = detail::PairFactors::build(k, eig.m, eig.m, s0, index + 1);
    const Eigen::Vector2cd l = sector_propagator(eig, k.t(index)) * initial_vector(s0);
    return alpha_e * bloch_components(detail::first_order_block(index, J, k.theta_factor, pf, l, l));
}

Eigen::Vector3d inhomogeneous_R2(const SectorEigens& eig, double t, const BathKernels& k, double J, double alpha_e,
                                 int s0) {
    const std::size_t i = grid_index(t, k);
    const auto tab = detail::CorrelationTables::build(k, i + 1);
    const auto pf = detail::PairFactors::build(k, eig.m, eig.m, s0, i + 1);
    const Eigen::Vector2cd l = sector_propagator(eig, t) * initial_vector(s0);
    return alpha_e * bloch_components(detail::second_order_block(i, k.dt, J, tab, pf, eig, eig, l, l));
}

double default_time_step(const SystemParams& s, const PolaronConstants& c) {
    double max_eps = 0.0;
    for (int m = -s.N / 2; m <= s.N / 2; ++m) max_eps = std::max(max_eps, sector_eigens(m, s.eps, c, s.alpha).eps);
    double dt = 0.01;
    if (max_eps > 0.0) dt = std::min(dt, 2.0 * std::numbers::pi / (100.0 * max_eps));
    return dt;
}

std::vector<double> sector_populations(const SystemParams& s, double beta) {
    const double x = 0.5 * beta * s.alpha;
    const double log_2cosh = std::abs(x) + std::log1p(std::exp(-2.0 * std::abs(x))) ;
    const double log_z = s.N * log_2cosh;
    std::vector<double> out;
    for (int m = -s.N / 2; m <= s.N / 2; ++m) out.push_back(std::exp(-beta * s.alpha * m - log_z));
    return out;
}

double sector_sum(const SectorTable& table, const std::vector<double>& per_m) {
    CompensatedSum acc;
    const int half = table.N / 2;
    for (const auto& e : table.entries) acc.add(e.nu * per_m[static_cast<std::size_t>(e.m + half)]);
    return acc.value();
}

Trajectory integrate(const TlsRun& run, int threads) {
    run.system.validate();
    run.bath.validate();
    const auto pc = polaron_constants(run.system.J, run.system.gamma, run.bath);
    const double dt = run.dt > 0.0 ? run.dt : default_time_step(run.system, pc);
    const auto steps = static_cast<std::size_t>(std::ceil(run.t_max / dt - 1e-9));
    const auto kernels = build_kernels(run.bath, 0.5 * dt, std::max<std::size_t>(2 * steps + 1, 4));
    TlsRun r = run;
    r.dt = dt;
    return integrate(r, kernels, threads);
}

Trajectory integrate(const TlsRun& run, const BathKernels& kernels, int threads) {
    const SystemParams& s = run.system;
    s.validate();
    if (!(run.t_max > 0.0)) throw ValidationError("t_max", "must be > 0");
    if (run.initial_state != 1 && run.initial_state != -1) throw ValidationError("initial_state", "must be +1 or -1");
    const auto pc = polaron_constants(s.J, s.gamma, kernels);
    const double dt = 2.0 * kernels.dt;
    if (run.dt > 0.0 && std::abs(run.dt - dt) > 1e-12 * dt)
        throw ValidationError("dt", "kernel grid step must be half the integrator step");
    const auto steps = static_cast<std::size_t>(std::ceil(run.t_max / dt - 1e-9));
    const std::size_t n = 2 * steps + 1;
    if (n > kernels.size()) throw ValidationError("t_max", "kernel grid shorter than the requested run");

    const auto table = SectorTable::build(s.N);
    const auto pops = sector_populations(s, run.bath.beta);
    const int half = s.N / 2;
    const std::size_t sectors = static_cast<std::size_t>(s.N + 1);
    const auto tab = detail::CorrelationTables::build(kernels, n);
    const std::size_t every = std::max<std::size_t>(1, run.output_every);

    Trajectory tr;
    tr.dt = dt;
    tr.alpha_e = pops;
    tr.alpha.resize(sectors);
    for (int m = -half; m <= half; ++m) tr.m.push_back(m);

    parallel_for(sectors, threads, [&](std::size_t idx) {
        const int m = static_cast<int>(idx) - half;
        const auto eig = sector_eigens(m, s.eps, pc, s.alpha);
        const double ae = pops[idx];
        const auto series = sector_series(eig, kernels, tab, s.J, pc.j_tilde, ae, run.initial_state,
                                          run.second_order, n);
        Eigen::Vector3d a(0.0, 0.0, run.initial_state * ae);
        auto& out = tr.alpha[idx];
        out.push_back(a);
        for (std::size_t st = 0; st < steps; ++st) {
            const std::size_t k0 = 2 * st;
            const auto f = [&](std::size_t k, const Eigen::Vector3d& x) -> Eigen::Vector3d {
                return series.M[k] * x + series.R[k];
            };
            const Eigen::Vector3d k1 = f(k0, a);
            const Eigen::Vector3d k2 = f(k0 + 1, a + 0.5 * dt * k1);
            const Eigen::Vector3d k3 = f(k0 + 1, a + 0.5 * dt * k2);
            const Eigen::Vector3d k4 = f(k0 + 2, a + dt * k3);
            a += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!a.allFinite()) {
                std::ostringstream os;
                os << "non-finite Bloch vector in sector m=" << m << " at t=" << dt * static_cast<double>(st + 1);
                throw NumericalError(os.str());
            }
            if ((st + 1) % every == 0) out.push_back(a);
        }
    });

    const std::size_t outputs = tr.alpha[0].size();
    std::vector<double> ax(sectors), ay(sectors), az(sectors);
    for (std::size_t o = 0; o < outputs; ++o) {
        for (std::size_t i = 0; i < sectors; ++i) {
            ax[i] = tr.alpha[i][o](0);
            ay[i] = tr.alpha[i][o](1);
            az[i] = tr.alpha[i][o](2);
        }
        const double sz = sector_sum(table, az);
        tr.t.push_back(dt * static_cast<double>(o * every));
        tr.sigma_z.push_back(sz);
        tr.sigma_x_P.push_back(pc.theta * sector_sum(table, ax));
        tr.sigma_y_P.push_back(pc.theta * sector_sum(table, ay));
        tr.P1.push_back(0.5 * (1.0 + sz));
    }
    return tr;
}

double exact_xi0_P1(double t, const SystemParams& s, double beta) {
    s.validate();
    const auto table = SectorTable::build(s.N);
    const auto pops = sector_populations(s, beta);
    const int half = s.N / 2;
    std::vector<double> per_m(pops.size());
    for (int m = -half; m <= half; ++m) {
        const double b = 0.5 * s.eps + s.gamma * m;
        const double w = std::sqrt(s.J * s.J + b * b);
        double v = 0.0;
        if (w > 0.0) {
            const double sn = std::sin(w * t);
            v = s.J * s.J * sn * sn / (w * w);
        }
        per_m[static_cast<std::size_t>(m + half)] = pops[static_cast<std::size_t>(m + half)] * v;
    }
    return sector_sum(table, per_m);
}

SteadyState steady_state(const SystemParams& s, const BathParams& b, double dt) {
    s.validate();
    b.validate();
    if (b.kappa1 == 0.0) throw NumericalError("no steady state: the Bloch matrix is singular without TLS-boson coupling");
    const double h = 0.5 * dt;
    const auto pc = polaron_constants(s.J, s.gamma, b);
    const auto pops = sector_populations(s, b.beta);
    const auto table = SectorTable::build(s.N);
    const int half = s.N / 2;

    const double decay_time = 1.0 / b.omega_c;
    double T = std::max(200.0, 20.0 * decay_time);
    constexpr double kMaxT = 1600.0;
    for (;;) {
        const auto n = static_cast<std::size_t>(std::llround(T / h)) + 3;
        const auto k = build_kernels(b, h, n);
        const std::size_t end = n - 3;                       // T
        const std::size_t mid = static_cast<std::size_t>(std::llround(0.9 * T / h)); // trailing window start

        SteadyState out;
        out.t_ss = T;
        double change = 0.0;
        std::vector<double> az(static_cast<std::size_t>(s.N + 1));
        for (int m = -half; m <= half; ++m) {
            const auto eig = sector_eigens(m, s.eps, pc, s.alpha);
            GammaAccumulator acc(eig, h);
            const double th2 = k.theta_factor * k.theta_factor;
            std::array<cplx, 3> g1_mid, g2_mid, g1_end, g2_end;
            const double w[3] = {eig.eps, 0.0, -eig.eps};
            auto corrected = [&](std::size_t i, std::array<cplx, 3>& g1, std::array<cplx, 3>& g2) {
                cplx a[3], bm[3], c[3];
                for (int d = 0; d < 3; ++d) g_values(k, i - 1 + d, a[d], c[d]);
                (void)bm;
                const cplx g1v = a[1], g1d = (a[2] - a[0]) / (2.0 * h), g1dd = (a[2] - 2.0 * a[1] + a[0]) / (h * h);
                const cplx g2v = c[1], g2d = (c[2] - c[0]) / (2.0 * h), g2dd = (c[2] - 2.0 * c[1] + c[0]) / (h * h);
                cplx t1[3], t2[3];
                const double Ti = h * static_cast<double>(i);
                for (int q = 0; q < 3; ++q) {
                    t1[q] = detail::oscillatory_tail(w[q], Ti, g1v, g1d, g1dd);
                    t2[q] = detail::oscillatory_tail(w[q], Ti, g2v, g2d, g2dd);
                }
                acc.gammas(th2, t1, t2, g1, g2);
            };
            for (std::size_t j = 0; j <= end; ++j) {
                cplx a, c;
                g_values(k, j, a, c);
                acc.push(a, c);
                if (j == mid) corrected(j, g1_mid, g2_mid);
            }
            corrected(end, g1_end, g2_end);
            double num = 0.0, den = 0.0;
            for (int i = 0; i < 3; ++i) {
                num = std::max({num, std::abs(g1_end[i] - g1_mid[i]), std::abs(g2_end[i] - g2_mid[i])});
                den = std::max({den, std::abs(g1_end[i]), std::abs(g2_end[i])});
            }
            change = std::max(change, den > 0.0 ? num / den : 0.0);

            const RateSet r = rates_from_gamma(g1_end, g2_end, s.J);
            const double ae = pops[static_cast<std::size_t>(m + half)];
            const Eigen::Matrix3d M = bloch_matrix(eig, r, pc.j_tilde);
            const Eigen::Vector3d Re = inhomogeneous_Re(r, ae);
            Eigen::FullPivLU<Eigen::Matrix3d> lu(M);
            if (!lu.isInvertible() || std::abs(M.determinant()) < 1e-300) {
                std::ostringstream os;
                os << "no steady state: singular Bloch matrix in sector m=" << m;
                throw NumericalError(os.str());
            }
            const Eigen::Vector3d a = -lu.solve(Re);
            out.m.push_back(m);
            out.alpha.push_back(a);
            out.alpha_e.push_back(ae);
            az[static_cast<std::size_t>(m + half)] = a(2);
        }
        out.rate_change = change;
        if (change < 1e-8 || T >= kMaxT) {
            out.sigma_z = sector_sum(table, az);
            out.P1 = 0.5 * (1.0 + out.sigma_z);
            return out;
        }
        T *= 2.0;
    }
}

double gibbs_P1(double eps, double J, double beta) {
    const double w = std::sqrt(J * J + 0.25 * eps * eps);
    if (w == 0.0) return 0.5;
    return 0.5 * (1.0 - std::tanh(beta * w) * (0.5 * eps) / w);
}

} // namespace dualbath
