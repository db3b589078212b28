// scenario.cpp — configuration parsing, scenario orchestration and CSV output

#include "dualbath/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dualbath/errors.hpp"
#include "dualbath/parallel.hpp"

namespace dualbath {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kSystemKeys{"epsilon", "J", "alpha", "gamma", "N"};
const std::set<std::string> kBathKeys{"kappa1", "kappa2", "kappa3", "omega_c", "omega_ph", "beta"};
const std::set<std::string> kBathSweepKeys = kBathKeys;
const std::set<std::string> kSystemSweepKeys{"epsilon", "J", "alpha", "gamma"};

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ValidationError(where, "must be an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key)) throw ValidationError(where.empty() ? key : where + "." + key, "unknown key");
    }
}

double read_number(const json& obj, const std::string& key, const std::string& where, double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    const std::string field = where + "." + key;
    if (!v.is_number()) throw ValidationError(field, "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ValidationError(field, "must be finite");
    return x;
}

long long read_integer(const json& obj, const std::string& key, const std::string& where, long long fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    const std::string field = where + "." + key;
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
        const double x = v.get<double>();
        if (std::isfinite(x) && x == std::round(x) && std::abs(x) < 1e15) return static_cast<long long>(x);
    }
    throw ValidationError(field, "must be an integer");
}

std::string read_string(const json& obj, const std::string& key, const std::string& where, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) throw ValidationError(where + "." + key, "must be a string");
    return v.get<std::string>();
}

bool read_bool(const json& obj, const std::string& key, const std::string& where, bool fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_boolean()) throw ValidationError(where + "." + key, "must be true or false");
    return v.get<bool>();
}

int parse_initial_state(const json& run) {
    if (!run.contains("initial_state")) return -1;
    const auto& v = run.at("initial_state");
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "down") return -1;
        if (s == "up") return 1;
        throw ValidationError("run.initial_state", "must be \"up\", \"down\", +1 or -1");
    }
    const auto x = read_integer(run, "initial_state", "run", -1);
    if (x != 1 && x != -1) throw ValidationError("run.initial_state", "must be \"up\", \"down\", +1 or -1");
    return static_cast<int>(x);
}

Sweep parse_sweep(const json& j) {
    check_keys(j, "run.sweep", {"parameter", "values", "start", "stop", "step"});
    Sweep sw;
    if (!j.contains("parameter")) throw ValidationError("run.sweep.parameter", "is required");
    sw.parameter = read_string(j, "parameter", "run.sweep", "");
    if (!kSystemSweepKeys.count(sw.parameter) && !kBathSweepKeys.count(sw.parameter))
        throw ValidationError("run.sweep.parameter", "unknown parameter \"" + sw.parameter + "\"");
    const bool has_values = j.contains("values");
    const bool has_range = j.contains("start") || j.contains("stop") || j.contains("step");
    if (has_values == has_range) throw ValidationError("run.sweep", "give either values or start/stop/step");
    if (has_values) {
        const auto& arr = j.at("values");
        if (!arr.is_array() || arr.empty()) throw ValidationError("run.sweep.values", "must be a non-empty array");
        for (const auto& v : arr) {
            if (!v.is_number() || !std::isfinite(v.get<double>()))
                throw ValidationError("run.sweep.values", "entries must be finite numbers");
            sw.values.push_back(v.get<double>());
        }
    } else {
        for (const char* key : {"start", "stop", "step"})
            if (!j.contains(key)) throw ValidationError(std::string("run.sweep.") + key, "is required");
        const double start = read_number(j, "start", "run.sweep", 0.0);
        const double stop = read_number(j, "stop", "run.sweep", 0.0);
        const double step = read_number(j, "step", "run.sweep", 0.0);
        if (step == 0.0 || (stop - start) / step < -1e-12) throw ValidationError("run.sweep.step", "does not reach stop");
        const double count = (stop - start) / step;
        const auto n = static_cast<long long>(std::floor(count + 1e-9));
        if (n > 1000000) throw ValidationError("run.sweep.step", "too many sweep points");
        for (long long i = 0; i <= n; ++i) sw.values.push_back(start + static_cast<double>(i) * step);
    }
    return sw;
}

json sweep_json(const Sweep& sw) { return {{"parameter", sw.parameter}, {"values", sw.values}}; }

const char* relevant_name(RelevantForm f) { return f == RelevantForm::ordered ? "ordered" : "printed"; }
const char* oracle_initial_name(OracleInitial i) {
    return i == OracleInitial::x_state ? "x_state" : "thermal_spins";
}

std::string default_stem(const Scenario& s) {
    switch (s.mode) {
    case RunMode::dynamics: return s.sweep ? "surface" : "trajectory";
    case RunMode::steady: return "steady";
    case RunMode::mqs: return "theta";
    case RunMode::oracle: return "oracle";
    case RunMode::kernels: return "kernels";
    }
    return "output";
}

// CSV writer with fixed formatting and LF line endings.
class CsvFile {
public:
    CsvFile(const fs::path& path, const std::vector<std::string>& header) : path_(path) {
        out_.open(path, std::ios::binary | std::ios::trunc);
        if (!out_) throw ValidationError("output.directory", "cannot write " + path.string());
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }
    void row(std::initializer_list<double> values) {
        bool first = true;
        for (double v : values) {
            out_ << (first ? "" : ",") << format_number(v);
            first = false;
        }
        out_ << '\n';
    }
    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
        out_ << '\n';
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
    std::ofstream out_;
};

std::vector<std::string> theta_header() {
    return {"t",      "abs_tpp", "abs_tpm", "abs_tmp", "abs_tmm", "re_tpp", "im_tpp",
            "re_tpm", "im_tpm",  "re_tmp",  "im_tmp",  "re_tmm",  "im_tmm"};
}

std::vector<double> theta_row(double t, const ThetaElements& e) {
    return {t,           std::abs(e.pp), std::abs(e.pm), std::abs(e.mp), std::abs(e.mm),
            e.pp.real(), e.pp.imag(),    e.pm.real(),    e.pm.imag(),    e.mp.real(),
            e.mp.imag(), e.mm.real(),    e.mm.imag()};
}

void write_theta_matrix(const fs::path& path, const std::vector<double>& t, const std::vector<Eigen::MatrixXcd>& mats) {
    CsvFile f(path, {"t", "m", "n", "re", "im"});
    for (std::size_t k = 0; k < mats.size(); ++k) {
        const auto& M = mats[k];
        const int half = static_cast<int>(M.rows() - 1) / 2;
        for (Eigen::Index i = 0; i < M.rows(); ++i)
            for (Eigen::Index j = 0; j < M.cols(); ++j)
                f.row({t[k], static_cast<double>(i - half), static_cast<double>(j - half), M(i, j).real(),
                       M(i, j).imag()});
    }
}

TlsRun tls_run(const Scenario& s) {
    TlsRun r;
    r.system = s.system;
    r.bath = s.bath;
    r.t_max = s.t_max;
    r.dt = s.dt;
    r.initial_state = s.initial_state;
    r.second_order = s.second_order;
    r.output_every = s.output_every;
    return r;
}

double resolved_dt(const Scenario& s, const SystemParams& system, const BathParams& bath) {
    if (s.dt > 0.0) return s.dt;
    return default_time_step(system, polaron_constants(system.J, system.gamma, bath));
}

std::size_t step_count(double t_max, double dt) {
    return static_cast<std::size_t>(std::ceil(t_max / dt - 1e-9));
}

json run_dynamics(const Scenario& s, int threads, const fs::path& dir, const std::string& stem,
                  std::vector<fs::path>& files) {
    json meta;
    if (!s.sweep) {
        const auto tr = integrate(tls_run(s), threads);
        CsvFile f(dir / (stem + ".csv"), {"t", "sigma_z", "sigma_x_P", "sigma_y_P", "P1"});
        for (std::size_t k = 0; k < tr.t.size(); ++k)
            f.row({tr.t[k], tr.sigma_z[k], tr.sigma_x_P[k], tr.sigma_y_P[k], tr.P1[k]});
        files.push_back(f.path());
        CsvFile a(dir / (stem + "_alpha.csv"), {"t", "m", "alpha_e", "alpha_x", "alpha_y", "alpha_z"});
        for (std::size_t i = 0; i < tr.m.size(); ++i)
            for (std::size_t k = 0; k < tr.t.size(); ++k) {
                const auto& v = tr.alpha[i][k];
                a.row({tr.t[k], static_cast<double>(tr.m[i]), tr.alpha_e[i], v[0], v[1], v[2]});
            }
        files.push_back(a.path());
        meta["dt"] = tr.dt;
        meta["steps"] = step_count(s.t_max, tr.dt);
        return meta;
    }

    const auto& sw = *s.sweep;
    const std::size_t n = sw.values.size();
    std::vector<SystemParams> systems(n, s.system);
    std::vector<BathParams> baths(n, s.bath);
    std::vector<double> dts(n);
    for (std::size_t i = 0; i < n; ++i) {
        apply_parameter(sw.parameter, sw.values[i], systems[i], baths[i]);
        systems[i].validate();
        baths[i].validate();
        dts[i] = resolved_dt(s, systems[i], baths[i]);
    }
    // kernel tables are shared between points when only system parameters vary
    const bool shared = !kBathKeys.count(sw.parameter);
    std::map<double, BathKernels> cache;
    if (shared)
        for (double dt : dts)
            if (!cache.count(dt))
                cache.emplace(dt, build_kernels(s.bath, 0.5 * dt,
                                                std::max<std::size_t>(2 * step_count(s.t_max, dt) + 1, 4)));

    std::vector<Trajectory> results(n);
    parallel_for(n, threads, [&](std::size_t i) {
        TlsRun r = tls_run(s);
        r.system = systems[i];
        r.bath = baths[i];
        r.dt = dts[i];
        results[i] = shared ? integrate(r, cache.at(dts[i]), 1) : integrate(r, 1);
    });

    CsvFile f(dir / (stem + ".csv"), {"t", sw.parameter, "sigma_z"});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < results[i].t.size(); ++k)
            f.row({results[i].t[k], sw.values[i], results[i].sigma_z[k]});
    files.push_back(f.path());
    meta["dt"] = dts;
    return meta;
}

json run_steady(const Scenario& s, int threads, const fs::path& dir, const std::string& stem,
                std::vector<fs::path>& files) {
    const std::string column = s.sweep ? s.sweep->parameter : "gamma";
    std::vector<double> values = s.sweep ? s.sweep->values : std::vector<double>{s.system.gamma};
    const std::size_t n = values.size();
    std::vector<SteadyState> results(n);
    const double dt = s.dt > 0.0 ? s.dt : 0.01;
    parallel_for(n, threads, [&](std::size_t i) {
        SystemParams sys = s.system;
        BathParams bath = s.bath;
        if (s.sweep) apply_parameter(column, values[i], sys, bath);
        results[i] = steady_state(sys, bath, dt);
    });
    CsvFile f(dir / (stem + ".csv"), {column, "P1_inf"});
    json t_ss = json::array(), change = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        f.row({values[i], results[i].P1});
        t_ss.push_back(results[i].t_ss);
        change.push_back(results[i].rate_change);
    }
    files.push_back(f.path());
    return {{"dt", dt}, {"t_ss", t_ss}, {"rate_change", change}};
}

json run_mqs(const Scenario& s, int threads, const fs::path& dir, const std::string& stem,
             std::vector<fs::path>& files) {
    SpinBathRun r;
    r.system = s.system;
    r.bath = s.bath;
    r.t_max = s.t_max;
    r.dt = s.dt;
    r.second_order = s.second_order;
    r.relevant = s.relevant;
    r.output_every = s.output_every;
    const auto series = evolve_spin_bath(r, threads, s.theta_matrix);

    CsvFile f(dir / (stem + ".csv"), theta_header());
    double trace_drift = 0.0, herm = 0.0;
    for (std::size_t k = 0; k < series.t.size(); ++k) {
        f.row(theta_row(series.t[k], series.theta[k]));
        trace_drift = std::max(trace_drift, std::abs(series.trace[k] - series.trace[0]));
        herm = std::max(herm, series.hermiticity[k]);
    }
    files.push_back(f.path());

    CsvFile ref(dir / (stem + "_reference.csv"), theta_header());
    const auto kernels = build_kernels(s.bath, series.dt, series.t.empty() ? 4 : step_count(series.t.back(), series.dt) + 4);
    for (double t : series.t) ref.row(theta_row(t, theta_elements(mqs_reference(t, s.system.N, s.bath, kernels))));
    files.push_back(ref.path());

    if (s.theta_matrix) {
        write_theta_matrix(dir / (stem + "_matrix.csv"), series.t, series.theta_s);
        files.push_back(dir / (stem + "_matrix.csv"));
    }
    json meta{{"dt", series.dt}, {"trace_drift", trace_drift}, {"hermiticity_max", herm}};
    try {
        meta["tau_mqs"] = tau_mqs(s.bath);
    } catch (const NumericalError&) {
        meta["tau_mqs"] = nullptr;
    }
    return meta;
}

json run_oracle(const Scenario& s, const fs::path& dir, const std::string& stem, std::vector<fs::path>& files) {
    OracleModel model;
    model.system = s.system;
    model.modes = discretize_modes(s.bath, s.oracle.modes);
    model.n_max = s.oracle.n_max;
    model.beta = s.bath.beta;
    const double dt = s.dt > 0.0 ? s.dt : 0.01;
    const std::size_t steps = step_count(s.t_max, dt);
    const std::size_t every = std::max<std::size_t>(1, s.output_every);
    std::vector<double> grid;
    for (std::size_t k = 0; k <= steps; k += every) grid.push_back(static_cast<double>(k) * dt);
    const auto tr = propagate(model, s.oracle.initial, grid);

    if (s.oracle.initial == OracleInitial::thermal_spins) {
        CsvFile f(dir / (stem + ".csv"), {"t", "sigma_z", "sigma_x", "P1"});
        for (std::size_t k = 0; k < tr.t.size(); ++k) f.row({tr.t[k], tr.sigma_z[k], tr.sigma_x[k], tr.P1[k]});
        files.push_back(f.path());
    } else {
        CsvFile f(dir / (stem + ".csv"), theta_header());
        for (std::size_t k = 0; k < tr.t.size(); ++k) f.row(theta_row(tr.t[k], tr.theta[k]));
        files.push_back(f.path());
        if (s.theta_matrix) {
            write_theta_matrix(dir / (stem + "_matrix.csv"), tr.t, tr.theta_s);
            files.push_back(dir / (stem + "_matrix.csv"));
        }
    }
    json modes = json::array();
    for (const auto& m : model.modes) modes.push_back({{"omega", m.omega}, {"xi", m.xi}, {"eta", m.eta}});
    json meta{{"dt", dt},
              {"dimension", model.dimension()},
              {"modes", modes},
              {"norm_drift", tr.norm_drift},
              {"energy_drift", tr.energy_drift},
              {"tail_population", tr.tail_population}};
    if (tr.tail_population > 1e-6) meta["warning"] = "boson population at the Fock cutoff exceeds 1e-6";
    return meta;
}

json run_kernels(const Scenario& s, const fs::path& dir, const std::string& stem, std::vector<fs::path>& files) {
    const double dt = s.dt > 0.0 ? s.dt : 0.01;
    const std::size_t n = step_count(s.t_max, dt) + 1;
    const auto k = build_kernels(s.bath, dt, std::max<std::size_t>(n, 4));
    CsvFile f(dir / (stem + ".csv"), {"t", "phi1", "phi2", "psi1"});
    const std::size_t every = std::max<std::size_t>(1, s.output_every);
    for (std::size_t i = 0; i < n; i += every) f.row({k.t(i), k.phi1[i], k.phi2[i], k.psi1[i]});
    files.push_back(f.path());
    return {{"dt", dt}, {"theta", k.theta_factor}, {"eta", k.eta}, {"coupling_shift", k.coupling_shift}};
}

} // namespace

RunMode parse_mode(const std::string& name) {
    if (name == "dynamics") return RunMode::dynamics;
    if (name == "steady") return RunMode::steady;
    if (name == "mqs") return RunMode::mqs;
    if (name == "oracle") return RunMode::oracle;
    if (name == "kernels") return RunMode::kernels;
    throw ValidationError("run.mode", "unknown mode \"" + name + "\"");
}

std::string mode_name(RunMode m) {
    switch (m) {
    case RunMode::dynamics: return "dynamics";
    case RunMode::steady: return "steady";
    case RunMode::mqs: return "mqs";
    case RunMode::oracle: return "oracle";
    case RunMode::kernels: return "kernels";
    }
    return "";
}

void apply_parameter(const std::string& name, double value, SystemParams& system, BathParams& bath) {
    if (name == "epsilon") system.eps = value;
    else if (name == "J") system.J = value;
    else if (name == "alpha") system.alpha = value;
    else if (name == "gamma") system.gamma = value;
    else if (name == "kappa1") bath.kappa1 = value;
    else if (name == "kappa2") bath.kappa2 = value;
    else if (name == "kappa3") bath.kappa3 = value;
    else if (name == "omega_c") bath.omega_c = value;
    else if (name == "omega_ph") bath.omega_ph = value;
    else if (name == "beta") bath.beta = value;
    else throw ValidationError("run.sweep.parameter", "unknown parameter \"" + name + "\"");
}

void Scenario::validate() const {
    const int max_spins = mode == RunMode::oracle ? kOracleMaxSpins : kMaxSpins;
    system.validate(max_spins);
    bath.validate();
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ValidationError("run.t_max", "must be finite and > 0");
    if (dt < 0.0 || !std::isfinite(dt)) throw ValidationError("run.dt", "must be > 0");
    if (dt > t_max) throw ValidationError("run.dt", "must not exceed t_max");
    if (output_every < 1) throw ValidationError("run.output_every", "must be >= 1");
    if (initial_state != 1 && initial_state != -1) throw ValidationError("run.initial_state", "must be +1 or -1");
    if (sweep) {
        if (mode != RunMode::dynamics && mode != RunMode::steady)
            throw ValidationError("run.sweep", "sweeps are available for dynamics and steady runs");
        const auto& v = sweep->values;
        if (v.empty()) throw ValidationError("run.sweep.values", "must not be empty");
        for (std::size_t i = 1; i < v.size(); ++i) {
            const bool up = v[1] > v[0];
            if (up ? !(v[i] > v[i - 1]) : !(v[i] < v[i - 1]))
                throw ValidationError("run.sweep.values", "must be strictly monotone");
        }
        for (double x : v) {
            SystemParams sys = system;
            BathParams b = bath;
            apply_parameter(sweep->parameter, x, sys, b);
            sys.validate(max_spins);
            b.validate();
        }
    }
    if (mode == RunMode::oracle) {
        if (oracle.modes < 1 || oracle.modes > kOracleMaxModes)
            throw ValidationError("oracle.modes", "must lie in [1, " + std::to_string(kOracleMaxModes) + "]");
        if (oracle.n_max < 1 || oracle.n_max > kOracleMaxFock)
            throw ValidationError("oracle.n_max", "must lie in [1, " + std::to_string(kOracleMaxFock) + "]");
    }
    if (stem.empty() || stem.find('/') != std::string::npos)
        throw ValidationError("output.stem", "must be a plain file name");
}

Scenario parse_scenario(const json& j, std::optional<RunMode> mode) {
    check_keys(j, "", {"system", "bath", "run", "oracle", "output", "description"});
    Scenario s;

    const json empty = json::object();
    const json& sys = j.contains("system") ? j.at("system") : empty;
    check_keys(sys, "system", kSystemKeys);
    s.system.eps = read_number(sys, "epsilon", "system", s.system.eps);
    s.system.J = read_number(sys, "J", "system", s.system.J);
    s.system.alpha = read_number(sys, "alpha", "system", s.system.alpha);
    s.system.gamma = read_number(sys, "gamma", "system", s.system.gamma);
    s.system.N = static_cast<int>(read_integer(sys, "N", "system", s.system.N));

    const json& bath = j.contains("bath") ? j.at("bath") : empty;
    check_keys(bath, "bath", kBathKeys);
    s.bath.kappa1 = read_number(bath, "kappa1", "bath", s.bath.kappa1);
    s.bath.kappa2 = read_number(bath, "kappa2", "bath", s.bath.kappa2);
    s.bath.kappa3 = read_number(bath, "kappa3", "bath", s.bath.kappa3);
    s.bath.omega_c = read_number(bath, "omega_c", "bath", s.bath.omega_c);
    s.bath.omega_ph = read_number(bath, "omega_ph", "bath", s.bath.omega_ph);
    s.bath.beta = read_number(bath, "beta", "bath", s.bath.beta);

    const json& run = j.contains("run") ? j.at("run") : empty;
    check_keys(run, "run", {"mode", "t_max", "dt", "initial_state", "second_order", "output_every", "relevant",
                            "theta_matrix", "sweep"});
    if (run.contains("mode")) {
        const RunMode file_mode = parse_mode(read_string(run, "mode", "run", ""));
        if (mode && *mode != file_mode)
            throw ValidationError("run.mode", "\"" + mode_name(file_mode) + "\" conflicts with subcommand \"" +
                                                  mode_name(*mode) + "\"");
        s.mode = file_mode;
    } else if (mode) {
        s.mode = *mode;
    } else {
        throw ValidationError("run.mode", "is required when no subcommand is given");
    }
    if (mode) s.mode = *mode;
    if (s.mode == RunMode::mqs) {
        // spin-bath defaults: TLS decoupled, cold spin bath
        const SpinBathRun d;
        if (!sys.contains("epsilon")) s.system.eps = d.system.eps;
        if (!sys.contains("J")) s.system.J = d.system.J;
        if (!sys.contains("alpha")) s.system.alpha = d.system.alpha;
        if (!sys.contains("gamma")) s.system.gamma = d.system.gamma;
        if (!bath.contains("kappa1")) s.bath.kappa1 = d.bath.kappa1;
        if (!bath.contains("kappa2")) s.bath.kappa2 = d.bath.kappa2;
        if (!bath.contains("kappa3")) s.bath.kappa3 = d.bath.kappa3;
        if (!bath.contains("omega_c")) s.bath.omega_c = d.bath.omega_c;
        if (!bath.contains("beta")) s.bath.beta = d.bath.beta;
        s.t_max = d.t_max;
    }
    if (s.mode == RunMode::oracle) {
        const OracleModel d;
        if (!sys.contains("N")) s.system.N = d.system.N;
    }
    s.t_max = read_number(run, "t_max", "run", s.t_max);
    if (run.contains("dt")) {
        s.dt = read_number(run, "dt", "run", 0.0);
        if (!(s.dt > 0.0)) throw ValidationError("run.dt", "must be > 0");
    }
    s.initial_state = parse_initial_state(run);
    s.second_order = read_bool(run, "second_order", "run", s.second_order);
    const auto every = read_integer(run, "output_every", "run", 1);
    if (every < 1) throw ValidationError("run.output_every", "must be >= 1");
    s.output_every = static_cast<std::size_t>(every);
    const auto rel = read_string(run, "relevant", "run", "ordered");
    if (rel == "ordered") s.relevant = RelevantForm::ordered;
    else if (rel == "printed") s.relevant = RelevantForm::printed;
    else throw ValidationError("run.relevant", "must be \"ordered\" or \"printed\"");
    s.theta_matrix = read_bool(run, "theta_matrix", "run", false);
    if (run.contains("sweep")) s.sweep = parse_sweep(run.at("sweep"));

    const json& orc = j.contains("oracle") ? j.at("oracle") : empty;
    check_keys(orc, "oracle", {"modes", "n_max", "initial"});
    s.oracle.modes = static_cast<int>(read_integer(orc, "modes", "oracle", s.oracle.modes));
    s.oracle.n_max = static_cast<int>(read_integer(orc, "n_max", "oracle", s.oracle.n_max));
    const auto init = read_string(orc, "initial", "oracle", "thermal_spins");
    if (init == "thermal_spins") s.oracle.initial = OracleInitial::thermal_spins;
    else if (init == "x_state") s.oracle.initial = OracleInitial::x_state;
    else throw ValidationError("oracle.initial", "must be \"thermal_spins\" or \"x_state\"");

    const json& out = j.contains("output") ? j.at("output") : empty;
    check_keys(out, "output", {"directory", "stem"});
    s.directory = read_string(out, "directory", "output", ".");
    s.stem = read_string(out, "stem", "output", default_stem(s));

    s.validate();
    return s;
}

Scenario load_scenario(const fs::path& path, std::optional<RunMode> mode) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config", "cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config", std::string("invalid JSON: ") + e.what());
    }
    return parse_scenario(j, mode);
}

json to_json(const Scenario& s) {
    json j;
    j["system"] = {{"epsilon", s.system.eps},
                   {"J", s.system.J},
                   {"alpha", s.system.alpha},
                   {"gamma", s.system.gamma},
                   {"N", s.system.N}};
    j["bath"] = {{"kappa1", s.bath.kappa1},   {"kappa2", s.bath.kappa2},     {"kappa3", s.bath.kappa3},
                 {"omega_c", s.bath.omega_c}, {"omega_ph", s.bath.omega_ph}, {"beta", s.bath.beta}};
    j["run"] = {{"mode", mode_name(s.mode)},
                {"t_max", s.t_max},
                {"initial_state", s.initial_state},
                {"second_order", s.second_order},
                {"output_every", s.output_every},
                {"relevant", relevant_name(s.relevant)},
                {"theta_matrix", s.theta_matrix}};
    if (s.dt > 0.0) j["run"]["dt"] = s.dt; // absent means automatic
    if (s.sweep) j["run"]["sweep"] = sweep_json(*s.sweep);
    j["oracle"] = {{"modes", s.oracle.modes},
                   {"n_max", s.oracle.n_max},
                   {"initial", oracle_initial_name(s.oracle.initial)}};
    j["output"] = {{"directory", s.directory}, {"stem", s.stem}};
    return j;
}

std::string format_number(double x) {
    if (x == 0.0) x = 0.0; // drop the sign of negative zero
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

RunOutput run_scenario(const Scenario& s, int threads, const fs::path& out_dir) {
    s.validate();
    const fs::path dir = out_dir.empty() ? fs::path(s.directory) : out_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ValidationError("output.directory", "cannot create " + dir.string() + ": " + ec.message());

    RunOutput out;
    json grid;
    switch (s.mode) {
    case RunMode::dynamics: grid = run_dynamics(s, threads, dir, s.stem, out.files); break;
    case RunMode::steady: grid = run_steady(s, threads, dir, s.stem, out.files); break;
    case RunMode::mqs: grid = run_mqs(s, threads, dir, s.stem, out.files); break;
    case RunMode::oracle: grid = run_oracle(s, dir, s.stem, out.files); break;
    case RunMode::kernels: grid = run_kernels(s, dir, s.stem, out.files); break;
    }

    json files = json::array();
    for (const auto& f : out.files) files.push_back(f.filename().string());
    out.metadata = {{"version", kVersion},
                    {"mode", mode_name(s.mode)},
                    {"threads", std::max(1, threads)},
                    {"parameters", to_json(s)},
                    {"grid", grid},
                    {"files", files}};
    const fs::path meta_path = dir / (s.stem + ".meta.json");
    std::ofstream meta(meta_path, std::ios::binary | std::ios::trunc);
    if (!meta) throw ValidationError("output.directory", "cannot write " + meta_path.string());
    meta << out.metadata.dump(2) << '\n';
    out.files.push_back(meta_path);
    return out;
}

} // namespace dualbath
