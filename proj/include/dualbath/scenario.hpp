// scenario.hpp — JSON run configuration, sweeps and CSV/metadata output

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualbath/bath.hpp"
#include "dualbath/oracle.hpp"
#include "dualbath/spinbath.hpp"
#include "dualbath/tls.hpp"

namespace dualbath {

inline constexpr const char* kVersion = "1.0.0";

enum class RunMode { dynamics, steady, mqs, oracle, kernels };

RunMode parse_mode(const std::string& name);
std::string mode_name(RunMode m);

struct Sweep {
    std::string parameter;      // system or bath key, e.g. "gamma", "kappa2"
    std::vector<double> values; // strictly monotone
};

struct OracleSpec {
    int modes{2};
    int n_max{6};
    OracleInitial initial{OracleInitial::thermal_spins};
};

struct Scenario {
    RunMode mode{RunMode::dynamics};
    SystemParams system;
    BathParams bath;
    double t_max{20.0};
    double dt{0.0};                 // 0: automatic policy
    int initial_state{-1};
    bool second_order{true};
    std::size_t output_every{1};
    RelevantForm relevant{RelevantForm::ordered};
    bool theta_matrix{false};       // mqs: also write the full [Theta_S]_mn
    std::optional<Sweep> sweep;
    OracleSpec oracle;
    std::string directory{"."};
    std::string stem;

    void validate() const;
};

// Parse and validate; unknown keys are rejected. The mode comes from `mode` when given,
// otherwise from run.mode; when both are present they must agree.
Scenario parse_scenario(const nlohmann::json& j, std::optional<RunMode> mode = std::nullopt);
Scenario load_scenario(const std::filesystem::path& path, std::optional<RunMode> mode = std::nullopt);

// Fully resolved parameters as JSON (written to the metadata sidecar).
nlohmann::json to_json(const Scenario& s);

// Set a named system or bath parameter.
void apply_parameter(const std::string& name, double value, SystemParams& system, BathParams& bath);

// Fixed CSV number format: 17 significant digits.
std::string format_number(double x);

struct RunOutput {
    std::vector<std::filesystem::path> files;
    nlohmann::json metadata;
};

// Execute a scenario and write CSV files plus "<stem>.meta.json" into out_dir (or the
// scenario's directory when empty). CSV content does not depend on `threads`.
RunOutput run_scenario(const Scenario& s, int threads, const std::filesystem::path& out_dir = {});

} // namespace dualbath
