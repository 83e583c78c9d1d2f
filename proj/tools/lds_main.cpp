// lds_main.cpp - command-line entry point

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "lds/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Thermal state preparation by filtered system-bath dynamics"};
    app.set_version_flag("--version", std::string("lds ") + LDS_VERSION);
    app.require_subcommand(1);

    struct Sub {
        lds::Experiment experiment;
        CLI::App* app;
        std::string config_path;
        std::map<std::string, std::string> overrides;
    };
    std::vector<Sub> subs;
    subs.reserve(lds::all_experiments().size());

    for (lds::Experiment e : lds::all_experiments()) {
        subs.push_back({e, nullptr, {}, {}});
        Sub& s = subs.back();
        s.app = app.add_subcommand(lds::to_string(e));
        s.app->set_help_flag("--help", "Print this help message and exit");
        s.app->add_option("--config", s.config_path, "key = value config file")->check(CLI::ExistingFile);
        for (const std::string& key : lds::config_keys()) {
            s.app->add_option_function<std::string>(
                "--" + key, [&s, key](const std::string& v) { s.overrides[key] = v; }, "override " + key);
        }
    }
    subs[0].app->description("Integrate a Lindbladian from the maximally mixed state");
    subs[1].app->description("Iterate the system-bath channel to its fixed point");
    subs[2].app->description("Detailed-balance, stationarity and trace checks");
    subs[3].app->description("Channel versus Lindbladian gap across couplings J");
    subs[4].app->description("Fixed-point error versus time window T");
    subs[5].app->description("Mixing-time proxy across filter widths");
    subs[6].app->description("Channel fixed points with and without rewinding");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    for (const Sub& s : subs) {
        if (!s.app->parsed()) continue;
        try {
            std::map<std::string, std::string> values;
            if (!s.config_path.empty()) values = lds::read_config_file(s.config_path);
            for (const auto& [k, v] : s.overrides) values[k] = v;
            const lds::RunConfig cfg = lds::config_from_map(values);
            const lds::RunOutcome out = lds::run_experiment(s.experiment, cfg);
            for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
            for (const auto& [k, v] : out.summary) std::cout << k << "=" << v << "\n";
            for (const auto& f : out.files) std::cerr << "wrote " << f << "\n";
            if (out.exit_code == 4) std::cerr << "error: did not converge\n";
            return out.exit_code;
        } catch (const std::exception& ex) {
            std::cerr << "error: " << ex.what() << "\n";
            return lds::exit_code_for(ex);
        }
    }
    return 1;
}
