#include "memory.hpp"

#include <algorithm>
#include <cmath>

namespace dualbath::detail {

namespace {
const cplx I{0.0, 1.0};
}

cplx filon_edge(double w, double h) {
    const double x = w * h;
    if (std::abs(x) < 1e-2) {
        const double x2 = x * x;
        return h * cplx{0.5 - x2 / 24.0 + x2 * x2 / 720.0, x / 6.0 - x * x2 / 120.0};
    }
    const cplx e{std::cos(x), std::sin(x)};
    return h * (1.0 + I * x - e) / (x * x);
}

CumulativeFilon::CumulativeFilon(double w, double h)
    : w_(w), h_(h), edge_(filon_edge(w, h)), step_{std::cos(w * h), std::sin(w * h)} {}

cplx CumulativeFilon::push(cplx g) {
    if (count_ > 0) {
        const double s_prev = h_ * static_cast<double>(count_ - 1);
        // resynchronise the phase instead of accumulating rounding from repeated products
        const cplx ph_prev = (count_ % 512 == 1) ? cplx{std::cos(w_ * s_prev), std::sin(w_ * s_prev)} : phase_;
        const cplx ph_new = ph_prev * step_;
        sum_ += ph_prev * tail_[0] * edge_ + ph_new * g * std::conj(edge_);
        phase_ = ph_new;
    } else {
        phase_ = {1.0, 0.0};
    }
    if (count_ < 3) head_[count_] = g;
    tail_ = {g, tail_[0], tail_[1]};
    ++count_;
    return value();
}

cplx CumulativeFilon::value() const {
    if (count_ < 3) return sum_;
    const cplx iw{0.0, w_};
    const cplx d0 = (-3.0 * head_[0] + 4.0 * head_[1] - head_[2]) / (2.0 * h_);
    const cplx dt = (3.0 * tail_[0] - 4.0 * tail_[1] + tail_[2]) / (2.0 * h_);
    const cplx boundary = phase_ * (dt - iw * tail_[0]) - (d0 - iw * head_[0]);
    // int g'' e^{iws} = [(g' - i w g) e^{iws}] - w^2 int g e^{iws}
    return sum_ - h_ * h_ / 12.0 * (boundary - w_ * w_ * sum_);
}

cplx oscillatory_tail(double w, double T, cplx g, cplx dg, cplx d2g) {
    if (w == 0.0) return g * T / 3.0;
    const cplx iw = I * w;
    const cplx ph{std::cos(w * T), std::sin(w * T)};
    return -ph * (g / iw - dg / (iw * iw) + d2g / (iw * iw * iw));
}

CorrelationTables CorrelationTables::build(const BathKernels& k, std::size_t n) {
    CorrelationTables t;
    t.theta = k.theta_factor;
    t.e_minus.resize(n);
    t.e_plus.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const cplx ph = k.phi(j);
        t.e_minus[j] = std::exp(-ph);
        t.e_plus[j] = std::exp(ph);
    }
    t.uncorrelated = std::all_of(t.e_minus.begin(), t.e_minus.end(), [](cplx v) { return v == 1.0; }) &&
                     std::all_of(t.e_plus.begin(), t.e_plus.end(), [](cplx v) { return v == 1.0; });
    return t;
}

PairFactors PairFactors::build(const BathKernels& k, int m, int mp, int s0, std::size_t n) {
    PairFactors f;
    const double dm = m - mp;
    f.gauss = std::exp(-0.5 * dm * dm * k.psi1[0]);
    f.f_plus.resize(n);
    f.f_minus.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double re = dm * k.chi1[j];
        const double im = (m + mp) * k.chi2[j] + s0 * k.phi2[j];
        f.f_plus[j] = std::exp(cplx{-re, im});
        f.f_minus[j] = std::exp(cplx{re, -im});
    }
    f.unit = std::all_of(f.f_plus.begin(), f.f_plus.end(), [](cplx v) { return v == 1.0; }) &&
             std::all_of(f.f_minus.begin(), f.f_minus.end(), [](cplx v) { return v == 1.0; });
    return f;
}

const Eigen::Matrix2cd& pauli(Axis i) {
    static const Eigen::Matrix2cd sx = (Eigen::Matrix2cd() << 0, 1, 1, 0).finished();
    static const Eigen::Matrix2cd sy = (Eigen::Matrix2cd() << 0, -I, I, 0).finished();
    static const Eigen::Matrix2cd sz = (Eigen::Matrix2cd() << 1, 0, 0, -1).finished();
    if (i == Axis::x) return sx;
    if (i == Axis::y) return sy;
    return sz;
}

const Eigen::Matrix2cd& sigma_plus() {
    static const Eigen::Matrix2cd sp = (Eigen::Matrix2cd() << 0, 1, 0, 0).finished();
    return sp;
}

const Eigen::Matrix2cd& sigma_minus() {
    static const Eigen::Matrix2cd sm = (Eigen::Matrix2cd() << 0, 0, 1, 0).finished();
    return sm;
}

Eigen::Matrix2cd from_components(const std::array<cplx, 3>& c) {
    return c[0] * pauli(Axis::x) + c[1] * pauli(Axis::y) + c[2] * pauli(Axis::z);
}

Eigen::Matrix2cd first_order_block(std::size_t k, double J, double theta, const PairFactors& pf,
                                   const Eigen::Vector2cd& l, const Eigen::Vector2cd& r) {
    const Eigen::Matrix2cd P = l * r.adjoint();
    const cplx dp = theta * pf.gauss * (pf.f_plus[k] - 1.0);
    const cplx dm = theta * pf.gauss * (pf.f_minus[k] - 1.0);
    const Eigen::Matrix2cd sp = J * sigma_plus(), sm = J * sigma_minus();
    return -I * ((sp * P - P * sp) * dp + (sm * P - P * sm) * dm);
}

Eigen::Matrix2cd second_order_block(std::size_t k, double h, double J, const CorrelationTables& tab,
                                    const PairFactors& pf, const SectorEigens& left, const SectorEigens& right,
                                    const Eigen::Vector2cd& l, const Eigen::Vector2cd& r) {
    // the integrand theta^2 g [e (F1 F2 - 1) - (F1 - 1) - (F2 - 1)] vanishes identically
    if (k == 0 || (tab.uncorrelated && pf.unit)) return Eigen::Matrix2cd::Zero();

    // frequencies: index 0 -> +eps, 1 -> 0, 2 -> -eps, for the left (c) and right (c') sectors
    const double wl[3] = {left.eps, 0.0, -left.eps};
    const double wr[3] = {right.eps, 0.0, -right.eps};
    cplx el[3], er[3], stl[3], str[3];
    double il[3], ir[3];
    for (int q = 0; q < 3; ++q) {
        el[q] = filon_edge(wl[q], h);
        er[q] = filon_edge(wr[q], h);
        il[q] = 2.0 * el[q].real();
        ir[q] = 2.0 * er[q].real();
        stl[q] = {std::cos(wl[q] * h), std::sin(wl[q] * h)};
        str[q] = {std::cos(wr[q] * h), std::sin(wr[q] * h)};
    }

    // sums S[s1][s2][q] = sum_j w_j c_{s1 s2}(t, t - u_j) e^{i w_q u_j}, primed for c'
    cplx S[2][2][3] = {}, Sp[2][2][3] = {};
    const double th2g = tab.theta * tab.theta * pf.gauss;
    const cplx F1[2] = {pf.f_plus[k], pf.f_minus[k]};
    cplx phl[3] = {1.0, 1.0, 1.0}, phr[3] = {1.0, 1.0, 1.0};
    for (std::size_t j = 0; j <= k; ++j) {
        if (j % 256 == 0 && j > 0) {
            const double u = h * static_cast<double>(j);
            for (int q = 0; q < 3; ++q) {
                phl[q] = {std::cos(wl[q] * u), std::sin(wl[q] * u)};
                phr[q] = {std::cos(wr[q] * u), std::sin(wr[q] * u)};
            }
        }
        const std::size_t tau = k - j;
        const cplx F2[2] = {pf.f_plus[tau], pf.f_minus[tau]};
        const cplx em = tab.e_minus[j], ep = tab.e_plus[j];
        const cplx emc = std::conj(em), epc = std::conj(ep);
        cplx wtl[3], wtr[3];
        for (int q = 0; q < 3; ++q) {
            const cplx wlq = j == 0 ? el[q] : (j == k ? std::conj(el[q]) : cplx{il[q], 0.0});
            const cplx wrq = j == 0 ? er[q] : (j == k ? std::conj(er[q]) : cplx{ir[q], 0.0});
            wtl[q] = wlq * phl[q];
            wtr[q] = wrq * phr[q];
        }
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                const bool same = (a == b); // s1*s2 = +1
                const cplx e = same ? em : ep;
                const cplx ec = same ? emc : epc;
                const cplx base = -F1[a] - F2[b] + 2.0;
                const cplx prod = F1[a] * F2[b];
                const cplx c = th2g * (e * prod - e + base);
                const cplx cp = th2g * (ec * prod - ec + base);
                for (int q = 0; q < 3; ++q) {
                    S[a][b][q] += c * wtl[q];
                    Sp[a][b][q] += cp * wtr[q];
                }
            }
        }
        for (int q = 0; q < 3; ++q) {
            phl[q] *= stl[q];
            phr[q] *= str[q];
        }
    }

    // A_1(-u) = J sum_i h_i(-u) sigma_i with h_i(-u) = minus e^{i eps u} + zero + plus e^{-i eps u};
    // A_2(-u) = J sum_i conj(h_i(-u)) sigma_i.
    const Harmonic3 hl[3] = {k_tilde_harmonics(Axis::x, left), k_tilde_harmonics(Axis::y, left),
                             k_tilde_harmonics(Axis::z, left)};
    const Harmonic3 hr[3] = {k_tilde_harmonics(Axis::x, right), k_tilde_harmonics(Axis::y, right),
                             k_tilde_harmonics(Axis::z, right)};
    auto build_Y = [&](const Harmonic3* hh, const cplx* s, int b) {
        std::array<cplx, 3> comp;
        for (int i = 0; i < 3; ++i) {
            if (b == 0)
                comp[i] = hh[i].minus * s[0] + hh[i].zero * s[1] + hh[i].plus * s[2];
            else
                comp[i] = std::conj(hh[i].minus) * s[2] + std::conj(hh[i].zero) * s[1] + std::conj(hh[i].plus) * s[0];
        }
        return Eigen::Matrix2cd(J * from_components(comp));
    };

    const Eigen::Matrix2cd P = l * r.adjoint();
    const Eigen::Matrix2cd A[2] = {J * sigma_plus(), J * sigma_minus()};
    Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const Eigen::Matrix2cd Y = build_Y(hl, S[a][b], b);
            const Eigen::Matrix2cd Yp = build_Y(hr, Sp[a][b], b);
            out -= A[a] * Y * P - Y * P * A[a] + P * Yp * A[a] - A[a] * P * Yp;
        }
    }
    return out;
}

std::vector<std::array<Eigen::Matrix2cd, 2>> lambda_table(const SectorEigens& eig, double h, double J,
                                                          const CorrelationTables& tab, std::size_t n) {
    const double w[3] = {eig.eps, 0.0, -eig.eps};
    std::vector<CumulativeFilon> same, opp;
    for (int q = 0; q < 3; ++q) {
        same.emplace_back(w[q], h);
        opp.emplace_back(w[q], h);
    }
    const Harmonic3 hh[3] = {k_tilde_harmonics(Axis::x, eig), k_tilde_harmonics(Axis::y, eig),
                             k_tilde_harmonics(Axis::z, eig)};
    auto combine = [&](const cplx* s, int b) {
        std::array<cplx, 3> comp;
        for (int i = 0; i < 3; ++i) {
            if (b == 0)
                comp[i] = hh[i].minus * s[0] + hh[i].zero * s[1] + hh[i].plus * s[2];
            else
                comp[i] = std::conj(hh[i].minus) * s[2] + std::conj(hh[i].zero) * s[1] + std::conj(hh[i].plus) * s[0];
        }
        return Eigen::Matrix2cd(J * from_components(comp));
    };
    const double th2 = tab.theta * tab.theta;
    std::vector<std::array<Eigen::Matrix2cd, 2>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const cplx cs = th2 * (tab.e_minus[k] - 1.0), co = th2 * (tab.e_plus[k] - 1.0);
        cplx Is[3], Io[3];
        for (int q = 0; q < 3; ++q) {
            Is[q] = same[q].push(cs);
            Io[q] = opp[q].push(co);
        }
        out[k][0] = combine(Is, 0) + combine(Io, 1);
        out[k][1] = combine(Io, 0) + combine(Is, 1);
    }
    return out;
}

} // namespace dualbath::detail
