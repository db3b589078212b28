#include "dualbath/bath.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dualbath/errors.hpp"

namespace dualbath {

namespace {

constexpr double kPi = std::numbers::pi;

// w*coth(beta*w/2), regular at w = 0
double w_coth(double w, double beta) {
    const double x = 0.5 * beta * w;
    if (x < 1e-6) return (2.0 / beta) * (1.0 + x * x / 3.0);
    return w / std::tanh(x);
}

// 2w/(e^{beta w} - 1), the thermal part of w*coth(beta w/2) - w
double w_thermal(double w, double beta) {
    const double x = beta * w;
    if (x < 1e-8) return 2.0 / beta - w;
    if (x > 700.0) return 0.0;
    return 2.0 * w / std::expm1(x);
}

// Panel boundaries on [0, upper]: a fine block resolving the coth scale 1/beta,
// then panels no wider than min(omega_c, pi/t).
std::vector<double> panel_edges(double t, double omega_c, double beta, double upper) {
    std::vector<double> edges{0.0};
    const double thermal = std::min(40.0 / beta, upper);
    const int fine = 10;
    for (int i = 1; i <= fine; ++i) edges.push_back(thermal * i / fine);
    double width = omega_c;
    if (std::abs(t) > 0.0) width = std::min(width, kPi / std::abs(t));
    const double rest = upper - thermal;
    if (rest > 0.0) {
        const auto count = static_cast<std::size_t>(std::ceil(rest / width));
        for (std::size_t i = 1; i <= count; ++i)
            edges.push_back(thermal + rest * static_cast<double>(i) / static_cast<double>(count));
    }
    return edges;
}

template <class F>
double integrate_panels(F&& f, const std::vector<double>& edges, double& err, double& l1) {
    using boost::math::quadrature::gauss_kronrod;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        double e = 0.0, l = 0.0;
        total += gauss_kronrod<double, 31>::integrate(f, edges[i], edges[i + 1], 12, 1e-14, &e, &l);
        err += e;
        l1 += l;
    }
    return total;
}

double upper_limit(double omega_c) { return 45.0 * omega_c; }

void lagrange_window(const std::vector<double>& y, double dt, double t, double& out_frac, std::size_t& base) {
    const double x = t / dt;
    const auto n = y.size();
    auto i = static_cast<std::ptrdiff_t>(std::floor(x));
    i = std::clamp<std::ptrdiff_t>(i - 1, 0, static_cast<std::ptrdiff_t>(n) - 4);
    base = static_cast<std::size_t>(i);
    out_frac = x - static_cast<double>(i);
}

double lagrange4(const std::vector<double>& y, std::size_t base, double u) {
    // nodes at base + 0..3, u measured from base
    const double l0 = -(u - 1) * (u - 2) * (u - 3) / 6.0;
    const double l1 = u * (u - 2) * (u - 3) / 2.0;
    const double l2 = -u * (u - 1) * (u - 3) / 2.0;
    const double l3 = u * (u - 1) * (u - 2) / 6.0;
    return l0 * y[base] + l1 * y[base + 1] + l2 * y[base + 2] + l3 * y[base + 3];
}

cplx interpolate(const std::vector<double>& re, const std::vector<double>& im_neg, double dt, double t) {
    const bool mirror = t < 0.0;
    const double a = std::abs(t);
    if (re.size() < 4) throw NumericalError("kernel table too short for interpolation");
    if (a > dt * static_cast<double>(re.size() - 1) * (1.0 + 1e-12))
        throw NumericalError("time " + std::to_string(t) + " beyond kernel grid");
    double u = 0.0;
    std::size_t base = 0;
    lagrange_window(re, dt, a, u, base);
    const cplx v{lagrange4(re, base, u), -lagrange4(im_neg, base, u)};
    return mirror ? std::conj(v) : v;
}

} // namespace

void BathParams::validate() const {
    auto finite = [](double x) { return std::isfinite(x); };
    if (!finite(kappa1) || kappa1 < 0.0) throw ValidationError("kappa1", "must be finite and >= 0");
    if (!finite(kappa3) || kappa3 < 0.0) throw ValidationError("kappa3", "must be finite and >= 0");
    if (!finite(kappa2)) throw ValidationError("kappa2", "must be finite");
    if (!finite(omega_c) || omega_c <= 0.0) throw ValidationError("omega_c", "must be > 0");
    if (!finite(omega_ph) || omega_ph <= 0.0) throw ValidationError("omega_ph", "must be > 0");
    if (!finite(beta) || beta <= 0.0) throw ValidationError("beta", "must be > 0");
    if (kappa2 * kappa2 > kappa1 * kappa3 + 1e-12)
        throw ValidationError("kappa2", "kappa2^2 must not exceed kappa1*kappa3");
}

double spectral_density(Channel channel, double omega, const BathParams& p) {
    if (omega < 0.0 || !std::isfinite(omega)) throw ValidationError("omega", "spectral density needs omega >= 0");
    double kappa = p.kappa1;
    if (channel == Channel::SS) kappa = p.kappa3;
    if (channel == Channel::TS) kappa = p.kappa2;
    return kappa * omega * omega * omega * std::exp(-omega / p.omega_c) / (p.omega_ph * p.omega_ph);
}

PhiQuadrature unit_correlation_quadrature(double t, const BathParams& p) {
    const double wc = p.omega_c;
    const auto edges = panel_edges(t, wc, p.beta, upper_limit(wc));
    double err_re = 0.0, l1_re = 0.0, err_im = 0.0, l1_im = 0.0;
    auto re = [&](double w) { return w_coth(w, p.beta) * std::exp(-w / wc) * std::cos(w * t); };
    auto im = [&](double w) { return w * std::exp(-w / wc) * std::sin(w * t); };
    const double vr = integrate_panels(re, edges, err_re, l1_re);
    const double vi = t == 0.0 ? 0.0 : integrate_panels(im, edges, err_im, l1_im);
    const double s = 1.0 / (p.omega_ph * p.omega_ph);
    const double scale = std::max(l1_re, 1e-300);
    const double rel = (err_re + err_im) / scale;
    if (rel > 1e-9) {
        std::ostringstream os;
        os << "frequency quadrature did not converge at t=" << t << " (relative error " << rel << ")";
        throw NumericalError(os.str());
    }
    return {cplx{vr * s, -vi * s}, (err_re + err_im) * s};
}

cplx phi(double t, const BathParams& p) {
    if (p.kappa1 == 0.0) return {0.0, 0.0};
    return p.kappa1 * unit_correlation_quadrature(t, p).value;
}

cplx psi(double t, const BathParams& p) {
    if (p.kappa3 == 0.0) return {0.0, 0.0};
    return p.kappa3 * unit_correlation_quadrature(t, p).value;
}

double psi_offset(int m_minus_n, double t, const BathParams& p) {
    if (m_minus_n == 0 || p.kappa2 == 0.0) return 0.0;
    if (p.kappa1 > 0.0) return m_minus_n * (p.kappa2 / p.kappa1) * phi(t, p).real();
    return m_minus_n * p.kappa2 * unit_correlation_quadrature(t, p).value.real();
}

double unit_phi1_zero_temperature(double t, double omega_c) {
    const double x = t * omega_c;
    const double d = 1.0 + x * x;
    return omega_c * omega_c * (1.0 - x * x) / (d * d);
}

double unit_phi2(double t, double omega_c) {
    const double x = t * omega_c;
    const double d = 1.0 + x * x;
    return 2.0 * t * omega_c * omega_c * omega_c / (d * d);
}

double phi1_zero_temperature(double t, const BathParams& p) {
    return p.kappa1 * unit_phi1_zero_temperature(t, p.omega_c) / (p.omega_ph * p.omega_ph);
}

double phi2_closed(double t, const BathParams& p) {
    return p.kappa1 * unit_phi2(t, p.omega_c) / (p.omega_ph * p.omega_ph);
}

cplx d_m(int m, double t, const BathParams& p) {
    if (p.kappa1 == 0.0) return {0.0, 0.0};
    const double u2 = unit_phi2(t, p.omega_c) / (p.omega_ph * p.omega_ph);
    const double arg = (2.0 * m * p.kappa2 - p.kappa1) * u2;
    const double h = std::sin(0.5 * arg);
    return {-2.0 * h * h, std::sin(arg)};
}

double f_mqs(double t, const BathParams& p) {
    const double x = t * p.omega_c;
    const double d = 1.0 + x * x;
    const double wc3 = p.omega_c * p.omega_c * p.omega_c;
    return 2.0 * p.kappa3 * wc3 * (1.0 - 1.0 / (d * d)) / (p.omega_ph * p.omega_ph);
}

double f_mqs_quadrature(double t, const BathParams& p) {
    if (t == 0.0 || p.kappa3 == 0.0) return 0.0;
    const double wc = p.omega_c;
    auto g = [&](double w) {
        const double x = w * t;
        const double one_minus_sinc = x < 1e-4 ? x * x / 6.0 - x * x * x * x / 120.0 : 1.0 - std::sin(x) / x;
        return w * w * std::exp(-w / wc) * one_minus_sinc;
    };
    double err = 0.0, l1 = 0.0;
    const auto edges = panel_edges(t, wc, 1.0 / wc, upper_limit(wc));
    const double v = integrate_panels(g, edges, err, l1);
    if (err > 1e-9 * std::max(l1, 1e-300)) throw NumericalError("f quadrature did not converge");
    return p.kappa3 * v / (p.omega_ph * p.omega_ph);
}

cplx BathKernels::phi_at(double t) const { return interpolate(phi1, phi2, dt, t); }
cplx BathKernels::psi_at(double t) const { return interpolate(psi1, psi2, dt, t); }
cplx BathKernels::chi_at(double t) const { return interpolate(chi1, chi2, dt, t); }

BathKernels build_kernels(const BathParams& p, double dt, std::size_t n) {
    p.validate();
    if (!(dt > 0.0) || n < 4) throw ValidationError("dt", "kernel grid needs dt > 0 and at least 4 points");
    const double wc = p.omega_c;
    const double beta = p.beta;
    const double unit = 1.0 / (p.omega_ph * p.omega_ph);
    const double t_max = dt * static_cast<double>(n - 1);

    // thermal correction th(t) = int 2w e^{-w/wc}/(e^{beta w}-1) cos(wt) dw on fixed panels
    const double decay = beta + 1.0 / wc;
    const double upper = 40.0 / decay;
    double width = std::min(1.0 / decay, upper / 8.0);
    if (t_max > 0.0) width = std::min(width, kPi / t_max);
    const auto panels = static_cast<std::size_t>(std::ceil(upper / width));
    width = upper / static_cast<double>(panels);

    using gl = boost::math::quadrature::gauss<double, 20>;
    const auto& xs = gl::abscissa();
    const auto& ws = gl::weights();
    std::vector<double> node, weight;
    for (std::size_t i = 0; i < panels; ++i) {
        const double c = width * (static_cast<double>(i) + 0.5);
        const double r = 0.5 * width;
        for (std::size_t j = 0; j < xs.size(); ++j) {
            for (int sgn : {-1, 1}) {
                if (xs[j] == 0.0 && sgn < 0) continue;
                const double w = c + sgn * r * xs[j];
                node.push_back(w);
                weight.push_back(r * ws[j] * w_thermal(w, beta) * std::exp(-w / wc));
            }
        }
    }

    std::vector<double> thermal(n, 0.0);
    const std::size_t nodes = node.size();
    std::vector<double> zr(nodes), zi(nodes), rr(nodes), ri(nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
        rr[j] = std::cos(node[j] * dt);
        ri[j] = std::sin(node[j] * dt);
    }
    constexpr std::size_t resync = 256;
    for (std::size_t k = 0; k < n; ++k) {
        if (k % resync == 0) {
            const double tk = dt * static_cast<double>(k);
            for (std::size_t j = 0; j < nodes; ++j) {
                zr[j] = std::cos(node[j] * tk);
                zi[j] = std::sin(node[j] * tk);
            }
        }
        double acc = 0.0;
        for (std::size_t j = 0; j < nodes; ++j) acc += weight[j] * zr[j];
        thermal[k] = acc;
        for (std::size_t j = 0; j < nodes; ++j) {
            const double a = zr[j] * rr[j] - zi[j] * ri[j];
            zi[j] = zr[j] * ri[j] + zi[j] * rr[j];
            zr[j] = a;
        }
    }

    BathKernels out;
    out.dt = dt;
    out.phi1.resize(n);
    out.phi2.resize(n);
    out.psi1.resize(n);
    out.psi2.resize(n);
    out.chi1.resize(n);
    out.chi2.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double tk = dt * static_cast<double>(k);
        const double u1 = (unit_phi1_zero_temperature(tk, wc) + thermal[k]) * unit;
        const double u2 = unit_phi2(tk, wc) * unit;
        out.phi1[k] = p.kappa1 * u1;
        out.phi2[k] = p.kappa1 * u2;
        out.psi1[k] = p.kappa3 * u1;
        out.psi2[k] = p.kappa3 * u2;
        out.chi1[k] = p.kappa2 * u1;
        out.chi2[k] = p.kappa2 * u2;
    }
    out.phi2[0] = out.psi2[0] = out.chi2[0] = 0.0;
    out.theta_factor = std::exp(-0.5 * out.phi1[0]);
    const double wc3 = wc * wc * wc;
    out.eta = 2.0 * p.kappa3 * wc3 * unit;
    out.coupling_shift = 2.0 * p.kappa2 * wc3 * unit;
    return out;
}

BathKernels build_kernels(const std::vector<Mode>& modes, double beta, double dt, std::size_t n) {
    if (!(beta > 0.0)) throw ValidationError("beta", "must be > 0");
    if (!(dt > 0.0) || n < 4) throw ValidationError("dt", "kernel grid needs dt > 0 and at least 4 points");
    BathKernels out;
    out.dt = dt;
    for (auto* v : {&out.phi1, &out.phi2, &out.psi1, &out.psi2, &out.chi1, &out.chi2}) v->assign(n, 0.0);
    for (const auto& md : modes) {
        if (!(md.omega > 0.0)) throw ValidationError("omega", "mode frequency must be > 0");
        const double coth = 1.0 / std::tanh(0.5 * beta * md.omega);
        const double w2 = md.omega * md.omega;
        const double a = md.xi * md.xi / w2, b = md.eta * md.eta / w2, c = md.xi * md.eta / w2;
        for (std::size_t k = 0; k < n; ++k) {
            const double x = md.omega * dt * static_cast<double>(k);
            const double cs = std::cos(x) * coth, sn = std::sin(x);
            out.phi1[k] += a * cs;
            out.phi2[k] += a * sn;
            out.psi1[k] += b * cs;
            out.psi2[k] += b * sn;
            out.chi1[k] += c * cs;
            out.chi2[k] += c * sn;
        }
        out.eta += md.eta * md.eta / md.omega;
        out.coupling_shift += md.eta * md.xi / md.omega;
    }
    out.theta_factor = std::exp(-0.5 * out.phi1[0]);
    return out;
}

PolaronConstants polaron_constants(double J, double gamma, const BathParams& p) {
    p.validate();
    PolaronConstants c;
    c.theta = std::exp(-0.5 * unit_correlation_quadrature(0.0, p).value.real() * p.kappa1);
    const double wc3 = p.omega_c * p.omega_c * p.omega_c;
    const double unit = 1.0 / (p.omega_ph * p.omega_ph);
    c.j_tilde = J * c.theta;
    c.gamma_tilde = gamma - 2.0 * p.kappa2 * wc3 * unit;
    c.eta = 2.0 * p.kappa3 * wc3 * unit;
    return c;
}

PolaronConstants polaron_constants(double J, double gamma, const BathKernels& k) {
    PolaronConstants c;
    c.theta = k.theta_factor;
    c.j_tilde = J * k.theta_factor;
    c.gamma_tilde = gamma - k.coupling_shift;
    c.eta = k.eta;
    return c;
}

std::pair<cplx, cplx> polaron_correlators(double t, double s, const BathKernels& k) {
    const cplx ph = k.phi_at(t - s);
    const double th2 = k.theta_factor * k.theta_factor;
    return {th2 * (std::exp(-ph) - 1.0), th2 * (std::exp(ph) - 1.0)};
}

} // namespace dualbath
