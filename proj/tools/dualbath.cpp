// dualbath.cpp — command-line runner for dynamics, steady states, MQS, oracle and kernel tables

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dualbath/errors.hpp"
#include "dualbath/scenario.hpp"

namespace {

int threads_from_env() {
    const char* env = std::getenv("DUALBATH_THREADS");
    if (!env || !*env) return 1;
    try {
        std::size_t pos = 0;
        const int n = std::stoi(env, &pos);
        if (pos != std::string(env).size() || n < 1) throw std::invalid_argument(env);
        return n;
    } catch (const std::exception&) {
        throw dualbath::ValidationError("DUALBATH_THREADS", "must be a positive integer");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dual-bath TLS dynamics in the polaron frame"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir;
    int threads = 0;

    auto add = [&](const std::string& name, const std::string& help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config,config", config, "JSON scenario file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (overrides output.directory)");
        sub->add_option("--threads", threads, "worker threads (default: DUALBATH_THREADS or 1)")
            ->check(CLI::PositiveNumber);
        return sub;
    };
    add("dynamics", "time evolution of the TLS, optionally swept over one parameter");
    add("steady", "steady-state P1 for one point or a sweep");
    add("mqs", "spin-bath matrix elements Theta in the l = N/2 sector");
    add("oracle", "exact propagation with a small spin bath and truncated modes");
    add("kernels", "bath correlation tables t, phi1, phi2, psi1");
    add("run", "run the mode named in the configuration file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        std::optional<dualbath::RunMode> mode;
        if (name != "run") mode = dualbath::parse_mode(name);
        const int n_threads = threads > 0 ? threads : threads_from_env();
        const auto scenario = dualbath::load_scenario(config, mode);
        const auto result = dualbath::run_scenario(scenario, n_threads, out_dir);
        for (const auto& f : result.files) std::cout << f.string() << '\n';
        return 0;
    } catch (const dualbath::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 1;
    } catch (const dualbath::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
