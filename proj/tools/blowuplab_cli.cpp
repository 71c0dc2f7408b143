#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "blowuplab/config.hpp"
#include "blowuplab/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"blowuplab: numerical experiments for type II blow-up of u_t = Δu + u⁵ in R³"};
    std::string config_path, subcommand, out_dir;
    std::vector<std::string> settings;
    bool override_flag = false, list_keys = false;
    app.add_option("config", config_path, "key=value config file (omit for defaults)");
    app.add_option("-c,--subcommand", subcommand, "profiles|ansatz|residual|nonlocal|abel|simulate|report");
    app.add_option("-s,--set", settings, "extra key=value, applied after the file")->take_all();
    app.add_option("-o,--output-dir", out_dir, "output directory");
    app.add_flag("--override", override_flag, "run even if exponent constraints fail");
    app.add_flag("--list-keys", list_keys, "print every config key with its default");
    CLI11_PARSE(app, argc, argv);

    if (list_keys) {
        for (const auto& [k, v] : blowup::config_keys()) std::cout << k << "=" << v << "\n";
        return 0;
    }
    try {
        std::string text;
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw blowup::ConfigError("cannot read config " + config_path);
            std::stringstream buf;
            buf << f.rdbuf();
            text = buf.str();
        }
        for (const auto& s : settings) text += "\n" + s;
        if (!subcommand.empty()) text += "\nsubcommand=" + subcommand;
        if (!out_dir.empty()) text += "\noutput_dir=" + out_dir;
        if (override_flag) text += "\noverride_constraints=true";
        const blowup::RunConfig cfg = blowup::parse_config(text);
        for (const auto& w : cfg.warnings) std::cerr << "warning: constraint " << w << " fails (override set)\n";
        for (const auto& f : blowup::run_subcommand(cfg)) std::cout << cfg.output_dir << "/" << f << "\n";
        return 0;
    } catch (const std::exception& e) {
        const int code = blowup::exit_code_of_current_exception();
        std::cerr << "error: " << e.what() << "\n";
        return code;
    }
}
