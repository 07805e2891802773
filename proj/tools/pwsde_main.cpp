#include "pwsde/config.hpp"
#include "pwsde/errors.hpp"
#include "pwsde/run.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

int main(int argc, char** argv) {
    CLI::App app{"Simulation of SDEs with drift discontinuous on a hypersurface"};
    app.require_subcommand(1);

    std::string config_file;
    std::vector<std::pair<std::string, std::string>> flags = {
        {"problem", ""}, {"scheme", ""}, {"deltas", ""}, {"delta", ""},   {"paths", ""},  {"seed", ""},
        {"ref-levels", ""}, {"eps", ""}, {"out", ""},    {"grid", ""},    {"initial", ""}, {"horizon", ""},
        {"surface", ""},
    };
    const char* commands[] = {"simulate", "convergence", "occupation", "excursion", "dump-transform"};
    std::vector<CLI::App*> subs;
    for (const char* name : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_file, "key=value experiment file; flags override it");
        for (auto& [key, value] : flags) sub->add_option("--" + key, value);
        subs.push_back(sub);
    }
    CLI11_PARSE(app, argc, argv);

    std::string command;
    for (CLI::App* sub : subs)
        if (sub->parsed()) command = sub->get_name();

    pwsde::ExperimentConfig config;
    try {
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            if (!in) throw pwsde::ConfigError("cannot read '" + config_file + "'");
            std::stringstream buf;
            buf << in.rdbuf();
            config = pwsde::parse_config(buf.str());
        }
        pwsde::apply_setting(config, "command", command);
        for (const auto& [key, value] : flags)
            if (!value.empty()) pwsde::apply_setting(config, key, value, "--" + key);
    } catch (const pwsde::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return pwsde::kExitConfig;
    }
    return pwsde::run(config, std::cout, std::cerr).exit_code;
}
