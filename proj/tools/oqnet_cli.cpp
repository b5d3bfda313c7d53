// Command-line front end: validate configs, run single simulations, sweep
// parameter grids, and list the bundled presets. Exit codes: 0 on success,
// 1 for configuration problems, 2 for runtime failures.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "oqnet/simulation.hpp"

namespace {

using oqnet::json;

json parse_override_value(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const std::exception&) {
        return json(text);  // bare strings need no quoting on the command line
    }
}

/// Applies `key=value` overrides; keys are dotted paths (time.t_max) or JSON
/// pointers (/time/t_max).
json apply_overrides(json config, const std::vector<std::string>& overrides) {
    for (const std::string& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw oqnet::ConfigError("override must look like key=value: " + item);
        std::string key = item.substr(0, eq);
        if (key.empty()) throw oqnet::ConfigError("override has an empty key: " + item);
        if (key[0] != '/') {
            for (char& ch : key)
                if (ch == '.') ch = '/';
            key = "/" + key;
        }
        config[json::json_pointer(key)] = parse_override_value(item.substr(eq + 1));
    }
    return config;
}

json load_config_json(const std::string& source) {
    std::string text;
    if (std::filesystem::exists(source)) {
        std::ifstream in(source);
        std::stringstream buf;
        buf << in.rdbuf();
        text = buf.str();
    } else if (auto it = oqnet::bundled_configs().find(source);
               it != oqnet::bundled_configs().end()) {
        text = it->second;
    } else {
        throw oqnet::ConfigError("config not found (no such file or bundled preset): " +
                                 source);
    }
    try {
        return json::parse(text);
    } catch (const std::exception& e) {
        throw oqnet::ConfigError(std::string("config parse failure: ") + e.what());
    }
}

std::vector<oqnet::SweepAxis> parse_sweep_axes(const json& config_json) {
    if (!config_json.contains("sweep") || !config_json["sweep"].contains("axes"))
        throw oqnet::ConfigError("sweep needs a 'sweep.axes' array in the config");
    std::vector<oqnet::SweepAxis> axes;
    for (const json& axis : config_json["sweep"]["axes"]) {
        oqnet::SweepAxis out;
        out.path = axis.value("path", "");
        if (out.path.empty() || out.path[0] != '/')
            throw oqnet::ConfigError("sweep axis path must be a JSON pointer");
        if (!axis.contains("values") || !axis["values"].is_array())
            throw oqnet::ConfigError("sweep axis needs a 'values' array");
        for (const json& v : axis["values"]) out.values.push_back(v);
        axes.push_back(std::move(out));
    }
    return axes;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"oscillator-network open-system simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    int workers = 1;
    std::vector<std::string> overrides;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", config_path,
                                    "config file path or bundled preset name");
        if (needs_config) opt->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--workers", workers, "worker thread cap for sweeps");
        cmd->add_option("--override", overrides,
                        "key=value config override (dotted path or JSON pointer)");
    };

    CLI::App* validate_cmd = app.add_subcommand("validate", "parse and check a config");
    add_common(validate_cmd, true);
    CLI::App* run_cmd = app.add_subcommand("run", "run one simulation");
    add_common(run_cmd, true);
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a parameter sweep");
    add_common(sweep_cmd, true);
    CLI::App* presets_cmd = app.add_subcommand("presets", "preset utilities");
    CLI::App* presets_list = presets_cmd->add_subcommand("list", "list bundled presets");
    presets_cmd->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (presets_list->parsed()) {
            for (const auto& [name, text] : oqnet::bundled_configs())
                std::cout << name << "\n";
            return 0;
        }

        const json config_json = apply_overrides(load_config_json(config_path), overrides);
        const oqnet::SimulationConfig config = oqnet::config_from_json(config_json);

        if (validate_cmd->parsed()) {
            if (config.network.explicit_spec) {
                const auto report = oqnet::validate(*config.network.explicit_spec);
                if (!report.ok()) {
                    for (const auto& [issue, msg] : report.issues)
                        std::cerr << "invalid network: " << msg << "\n";
                    return 1;
                }
            }
            std::cout << "ok " << oqnet::detail::config_hash(oqnet::config_to_json(config))
                      << "\n";
            return 0;
        }

        if (run_cmd->parsed()) {
            const oqnet::RunResult result = oqnet::run_simulation(config);
            for (const std::string& name : oqnet::write_artifacts(result, out_dir))
                std::cout << name << "\n";
            return 0;
        }

        if (sweep_cmd->parsed()) {
            const auto axes = parse_sweep_axes(config_json);
            const int cap = config_json.contains("sweep")
                                ? config_json["sweep"].value("max_points", 4096)
                                : 4096;
            const auto rows = oqnet::run_sweep(config, axes, workers, cap);
            std::filesystem::create_directories(out_dir);
            std::ofstream out(std::filesystem::path(out_dir) / "sweep.csv");
            oqnet::write_sweep_csv(axes, rows, out);
            std::cout << "sweep.csv\n";
            return 0;
        }
    } catch (const oqnet::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
