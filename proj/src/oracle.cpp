#include "dualbath/oracle.hpp"

#include <bit>
#include <cmath>

#include "dualbath/errors.hpp"
#include "dualbath/sectors.hpp"

namespace dualbath {

namespace {

const cplx I{0.0, 1.0};

using Dense = Eigen::MatrixXcd;

// Annihilation operator of mode k on the product Fock space, mode 0 least significant.
Dense annihilation(int k, int K, int d) {
    std::size_t dim = 1;
    for (int i = 0; i < K; ++i) dim *= static_cast<std::size_t>(d);
    std::size_t stride = 1;
    for (int i = 0; i < k; ++i) stride *= static_cast<std::size_t>(d);
    Dense b = Dense::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t idx = 0; idx < dim; ++idx) {
        const auto n = static_cast<int>((idx / stride) % static_cast<std::size_t>(d));
        if (n > 0) b(static_cast<Eigen::Index>(idx - stride), static_cast<Eigen::Index>(idx)) = std::sqrt(double(n));
    }
    return b;
}

struct BosonOps {
    int K{0}, d{1};
    std::size_t dim{1};
    std::vector<Dense> b;
    Eigen::VectorXd energy;     // sum_k w_k n_k
    std::vector<bool> at_cutoff; // some n_k = n_max

    BosonOps(const std::vector<Mode>& modes, int n_max) : K(static_cast<int>(modes.size())), d(n_max + 1) {
        for (int i = 0; i < K; ++i) dim *= static_cast<std::size_t>(d);
        energy = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
        at_cutoff.assign(dim, false);
        for (int k = 0; k < K; ++k) b.push_back(annihilation(k, K, d));
        for (std::size_t idx = 0; idx < dim; ++idx) {
            std::size_t r = idx;
            for (int k = 0; k < K; ++k) {
                const auto n = static_cast<int>(r % static_cast<std::size_t>(d));
                r /= static_cast<std::size_t>(d);
                energy(static_cast<Eigen::Index>(idx)) += modes[static_cast<std::size_t>(k)].omega * n;
                if (n == n_max) at_cutoff[idx] = true;
            }
        }
    }

    Dense quadrature(int k) const { return b[static_cast<std::size_t>(k)] + b[static_cast<std::size_t>(k)].adjoint(); }
    Dense momentum_like(int k) const { return b[static_cast<std::size_t>(k)].adjoint() - b[static_cast<std::size_t>(k)]; }

    // normalized thermal weights, diagonal in the Fock basis
    Eigen::VectorXd thermal(double beta) const {
        Eigen::VectorXd p(static_cast<Eigen::Index>(dim));
        const double e0 = energy.minCoeff();
        for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = std::exp(-beta * (energy(i) - e0));
        return p / p.sum();
    }
};

// exp(G) for anti-hermitian G.
Dense expm_antihermitian(const Dense& G) {
    Eigen::SelfAdjointEigenSolver<Dense> es(I * G);
    const Eigen::VectorXcd ph = (-I * es.eigenvalues().cast<cplx>()).array().exp();
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

// TLS (x) bosons Hamiltonian of spin sector m, TLS index major (0 = up, 1 = down).
Dense sector_block(const OracleModel& model, const BosonOps& ops, int m) {
    const auto D = static_cast<Eigen::Index>(ops.dim);
    const auto& s = model.system;
    Dense H = Dense::Zero(2 * D, 2 * D);
    const double bias = 0.5 * s.eps + s.gamma * m;
    for (Eigen::Index i = 0; i < D; ++i) {
        H(i, i) += bias + s.alpha * m + ops.energy(i);
        H(D + i, D + i) += -bias + s.alpha * m + ops.energy(i);
        H(i, D + i) += s.J;
        H(D + i, i) += s.J;
    }
    for (int k = 0; k < ops.K; ++k) {
        const Mode& md = model.modes[static_cast<std::size_t>(k)];
        const Dense X = ops.quadrature(k);
        H.topLeftCorner(D, D) += (md.eta * m + 0.5 * md.xi) * X;
        H.bottomRightCorner(D, D) += (md.eta * m - 0.5 * md.xi) * X;
    }
    return H;
}

} // namespace

void OracleModel::validate() const {
    system.validate(kOracleMaxSpins);
    if (modes.size() > static_cast<std::size_t>(kOracleMaxModes))
        throw ValidationError("modes", "at most " + std::to_string(kOracleMaxModes) + " modes");
    if (n_max < 1 || n_max > kOracleMaxFock)
        throw ValidationError("n_max", "Fock cutoff must lie in [1, " + std::to_string(kOracleMaxFock) + "]");
    if (!(beta > 0.0)) throw ValidationError("beta", "must be > 0");
    for (const auto& md : modes) {
        if (!(md.omega > 0.0)) throw ValidationError("omega", "mode frequency must be > 0");
        if (!std::isfinite(md.xi) || !std::isfinite(md.eta)) throw ValidationError("modes", "couplings must be finite");
    }
    if (dimension() > kOracleMaxDimension)
        throw ValidationError("n_max", "Hilbert dimension " + std::to_string(dimension()) + " exceeds " +
                                           std::to_string(kOracleMaxDimension));
}

std::size_t OracleModel::boson_dimension() const {
    std::size_t d = 1;
    for (std::size_t i = 0; i < modes.size(); ++i) d *= static_cast<std::size_t>(n_max + 1);
    return d;
}

std::size_t OracleModel::dimension() const { return 2 * (std::size_t{1} << system.N) * boson_dimension(); }

std::vector<Mode> discretize_modes(const BathParams& p, int K) {
    p.validate();
    if (K < 1 || K > kOracleMaxModes) throw ValidationError("modes", "mode count must lie in [1, 3]");
    const double wc = p.omega_c;
    const double lo = wc / 20.0, hi = 6.0 * wc;
    // antiderivative of w e^{-w/wc}
    auto F = [wc](double w) { return -wc * std::exp(-w / wc) * (w + wc); };
    std::vector<double> omega(static_cast<std::size_t>(K)), x(static_cast<std::size_t>(K));
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
        const double a = lo * std::pow(hi / lo, double(k) / K), b = lo * std::pow(hi / lo, double(k + 1) / K);
        omega[static_cast<std::size_t>(k)] = std::sqrt(a * b);
        x[static_cast<std::size_t>(k)] = F(b) - F(a);
        total += x[static_cast<std::size_t>(k)];
    }
    const double unit = wc * wc / (p.omega_ph * p.omega_ph); // int w e^{-w/wc} dw over [0, inf)
    for (auto& v : x) v = std::sqrt(v * unit / total);     // |x|^2 = unit

    std::vector<double> perp(static_cast<std::size_t>(K), 0.0);
    if (K >= 2) {
        perp[0] = x[1];
        perp[1] = -x[0];
        const double n = std::hypot(perp[0], perp[1]);
        const double norm = std::sqrt(unit);
        for (auto& v : perp) v *= norm / n;
    }
    double cos_t = 1.0;
    if (p.kappa1 > 0.0 && p.kappa3 > 0.0) cos_t = std::clamp(p.kappa2 / std::sqrt(p.kappa1 * p.kappa3), -1.0, 1.0);
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    if (K == 1 && sin_t > 1e-12) throw ValidationError("modes", "one mode cannot represent partially correlated baths");

    std::vector<Mode> out;
    for (int k = 0; k < K; ++k) {
        const auto i = static_cast<std::size_t>(k);
        Mode md;
        md.omega = omega[i];
        md.xi = omega[i] * std::sqrt(p.kappa1) * x[i];
        md.eta = omega[i] * std::sqrt(p.kappa3) * (cos_t * x[i] + sin_t * perp[i]);
        out.push_back(md);
    }
    return out;
}

Eigen::SparseMatrix<cplx> build_hamiltonian(const OracleModel& model) {
    model.validate();
    const BosonOps ops(model.modes, model.n_max);
    const int N = model.system.N;
    const std::size_t configs = std::size_t{1} << N;
    const auto D = static_cast<Eigen::Index>(ops.dim);
    const auto dim = static_cast<Eigen::Index>(model.dimension());
    std::vector<Dense> blocks;
    for (int m = -N / 2; m <= N / 2; ++m) blocks.push_back(sector_block(model, ops, m));
    std::vector<Eigen::Triplet<cplx>> trip;
    for (std::size_t c = 0; c < configs; ++c) {
        const int m = std::popcount(c) - N / 2;
        const Dense& B = blocks[static_cast<std::size_t>(m + N / 2)];
        for (int s = 0; s < 2; ++s)
            for (int sp = 0; sp < 2; ++sp)
                for (Eigen::Index i = 0; i < D; ++i)
                    for (Eigen::Index j = 0; j < D; ++j) {
                        const cplx v = B(s * D + i, sp * D + j);
                        if (v == cplx{}) continue;
                        const Eigen::Index r = (static_cast<Eigen::Index>(s * configs + c)) * D + i;
                        const Eigen::Index col = (static_cast<Eigen::Index>(sp * configs + c)) * D + j;
                        trip.emplace_back(r, col, v);
                    }
    }
    Eigen::SparseMatrix<cplx> H(dim, dim);
    H.setFromTriplets(trip.begin(), trip.end());
    return H;
}

Eigen::SparseMatrix<cplx> total_spin_squared(const OracleModel& model) {
    model.validate();
    const int N = model.system.N;
    const auto configs = static_cast<Eigen::Index>(std::size_t{1} << N);
    Dense L2 = Dense::Zero(configs, configs);
    for (Eigen::Index c = 0; c < configs; ++c) {
        const double lz = std::popcount(static_cast<std::size_t>(c)) - 0.5 * N;
        L2(c, c) += lz * lz;
        // (L+L- + L-L+)/2 = sum_{ij} (s+_i s-_j + s-_i s+_j)/2
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j < N; ++j) {
                const bool ui = (c >> i) & 1, uj = (c >> j) & 1;
                if (i == j) {
                    L2(c, c) += 0.5;
                    continue;
                }
                // s+_i s-_j: needs j up and i down
                if (uj && !ui) L2(c ^ (Eigen::Index{1} << i) ^ (Eigen::Index{1} << j), c) += 1.0;
            }
        }
    }
    const auto D = static_cast<Eigen::Index>(model.boson_dimension());
    std::vector<Eigen::Triplet<cplx>> trip;
    for (int s = 0; s < 2; ++s)
        for (Eigen::Index a = 0; a < configs; ++a)
            for (Eigen::Index b = 0; b < configs; ++b) {
                if (L2(a, b) == cplx{}) continue;
                for (Eigen::Index i = 0; i < D; ++i)
                    trip.emplace_back((s * configs + a) * D + i, (s * configs + b) * D + i, L2(a, b));
            }
    const auto dim = static_cast<Eigen::Index>(model.dimension());
    Eigen::SparseMatrix<cplx> out(dim, dim);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

OracleTrajectory propagate(const OracleModel& model, OracleInitial init, const std::vector<double>& t_grid) {
    model.validate();
    const BosonOps ops(model.modes, model.n_max);
    const int N = model.system.N;
    const auto D = static_cast<Eigen::Index>(ops.dim);
    const Eigen::VectorXd pb = ops.thermal(model.beta);
    const double pmax = pb.maxCoeff();

    // sector weights: populations (thermal) or amplitudes (x state)
    std::vector<double> weight;
    if (init == OracleInitial::thermal_spins) {
        SystemParams s = model.system;
        const auto pop = sector_populations(s, model.beta);
        for (int m = -N / 2; m <= N / 2; ++m)
            weight.push_back(binomial(N, N / 2 + m) * pop[static_cast<std::size_t>(m + N / 2)]);
    } else {
        const Eigen::VectorXd q = x_state_coeffs(1, N);
        for (int i = 0; i <= N; ++i) weight.push_back(q(i));
    }

    OracleTrajectory out;
    out.t = t_grid;
    const std::size_t nt = t_grid.size();
    out.sigma_z.assign(nt, 0.0);
    out.sigma_x.assign(nt, 0.0);
    std::vector<Dense> theta(nt, Dense::Zero(N + 1, N + 1));

    // psi_m^p(t) for every sector, for the x state overlaps: [m][p] -> columns over time
    std::vector<std::vector<Dense>> states(static_cast<std::size_t>(N + 1));
    std::vector<Eigen::Index> fock;
    for (Eigen::Index i = 0; i < D; ++i)
        if (pb(i) > 1e-14 * pmax) fock.push_back(i);

    for (int m = -N / 2; m <= N / 2; ++m) {
        const Dense H = sector_block(model, ops, m);
        Eigen::SelfAdjointEigenSolver<Dense> es(H);
        const Dense& V = es.eigenvectors();
        const Eigen::VectorXd& E = es.eigenvalues();
        const double w = weight[static_cast<std::size_t>(m + N / 2)];
        auto& st = states[static_cast<std::size_t>(m + N / 2)];
        for (Eigen::Index f : fock) {
            const double p = pb(f);
            const Eigen::VectorXcd c0 = V.row(D + f).adjoint(); // V^dagger |down, f>
            const double e0 = (c0.array().abs2() * E.array()).sum();
            Dense cols(2 * D, static_cast<Eigen::Index>(nt));
            for (std::size_t it = 0; it < nt; ++it) {
                const Eigen::VectorXcd ph = (-I * (E * t_grid[it]).cast<cplx>()).array().exp();
                const Eigen::VectorXcd c = ph.cwiseProduct(c0);
                const Eigen::VectorXcd psi = V * c;
                cols.col(static_cast<Eigen::Index>(it)) = psi;
                const double norm = psi.squaredNorm();
                out.norm_drift = std::max(out.norm_drift, std::abs(norm - 1.0));
                const double e = (c.array().abs2() * E.array()).sum();
                out.energy_drift = std::max(out.energy_drift, std::abs(e - e0));
                double tail = 0.0;
                for (Eigen::Index i = 0; i < D; ++i)
                    if (ops.at_cutoff[static_cast<std::size_t>(i)]) tail += std::norm(psi(i)) + std::norm(psi(D + i));
                out.tail_population = std::max(out.tail_population, tail);
                const double up = psi.head(D).squaredNorm(), dn = psi.tail(D).squaredNorm();
                const double sx = 2.0 * (psi.head(D).dot(psi.tail(D))).real();
                const double pw = init == OracleInitial::thermal_spins ? w * p : w * w * p;
                out.sigma_z[it] += pw * (up - dn);
                out.sigma_x[it] += pw * sx;
            }
            if (init == OracleInitial::x_state) st.push_back(std::move(cols));
        }
    }
    if (out.norm_drift > 1e-10) throw NumericalError("oracle norm drift exceeds 1e-10");

    for (double sz : out.sigma_z) out.P1.push_back(0.5 * (1.0 + sz));
    if (init == OracleInitial::x_state) {
        for (std::size_t it = 0; it < nt; ++it) {
            for (int a = 0; a <= N; ++a)
                for (int b = 0; b <= N; ++b) {
                    cplx v{};
                    for (std::size_t f = 0; f < fock.size(); ++f) {
                        const auto col = static_cast<Eigen::Index>(it);
                        v += pb(fock[f]) * states[static_cast<std::size_t>(b)][f].col(col).dot(
                                               states[static_cast<std::size_t>(a)][f].col(col));
                    }
                    theta[it](a, b) = weight[static_cast<std::size_t>(a)] * weight[static_cast<std::size_t>(b)] * v;
                }
            out.theta.push_back(theta_elements(theta[it]));
            out.theta_s.push_back(theta[it]);
        }
    }
    return out;
}

namespace {

struct QCorrelatorSetup {
    Dense delta, D, Dd;
    Eigen::VectorXd energy;
};

QCorrelatorSetup q_setup(const std::vector<Mode>& modes, int n_max, double beta, int m, int mp, int s0) {
    if (modes.empty() || modes.size() > static_cast<std::size_t>(kOracleMaxModes))
        throw ValidationError("modes", "mode count must lie in [1, 3]");
    if (n_max < 1) throw ValidationError("n_max", "must be >= 1");
    const BosonOps ops(modes, n_max);
    const auto D = static_cast<Eigen::Index>(ops.dim);
    Dense rho = Dense::Zero(D, D);
    rho.diagonal() = ops.thermal(beta).cast<cplx>();
    Dense B = Dense::Zero(D, D), Sm = Dense::Zero(D, D), Smp = Dense::Zero(D, D);
    for (int k = 0; k < ops.K; ++k) {
        const Mode& md = modes[static_cast<std::size_t>(k)];
        const Dense P = ops.momentum_like(k);
        B += (md.xi / md.omega) * P;
        Sm += ((md.eta * m + 0.5 * md.xi * s0) / md.omega) * P;
        Smp += ((md.eta * mp + 0.5 * md.xi * s0) / md.omega) * P;
    }
    const Dense eB = expm_antihermitian(B);
    const cplx theta = (rho * eB).trace();
    QCorrelatorSetup out;
    const Dense block = expm_antihermitian(Sm) * rho * expm_antihermitian(Smp).adjoint();
    out.delta = block - block.trace() * rho;
    out.D = eB - theta * Dense::Identity(D, D);
    out.Dd = out.D.adjoint();
    out.energy = ops.energy;
    return out;
}

Dense heisenberg(const Dense& X, const Eigen::VectorXd& energy, double t) {
    const Eigen::VectorXcd ph = (I * (energy * t).cast<cplx>()).array().exp();
    return ph.asDiagonal() * X * ph.conjugate().asDiagonal();
}

} // namespace

cplx oracle_q_correlator_D(const std::vector<Mode>& modes, int n_max, double beta, bool dagger, int m, int mp, int s0,
                           double t) {
    const auto q = q_setup(modes, n_max, beta, m, mp, s0);
    return (q.delta * heisenberg(dagger ? q.Dd : q.D, q.energy, t)).trace();
}

cplx oracle_q_correlator_DD(const std::vector<Mode>& modes, int n_max, double beta, DDKind kind, int m, int mp, int s0,
                            double t, double s) {
    const auto q = q_setup(modes, n_max, beta, m, mp, s0);
    const bool d1 = kind == DDKind::DdagD || kind == DDKind::DdagDdag;
    const bool d2 = kind == DDKind::DDdag || kind == DDKind::DdagDdag;
    const Dense A = heisenberg(d1 ? q.Dd : q.D, q.energy, t);
    const Dense B = heisenberg(d2 ? q.Dd : q.D, q.energy, s);
    return (q.delta * A * B).trace();
}

} // namespace dualbath
