// runner.hpp - experiment configuration, execution and result files for the
// lds command-line tool.
//
// Config files hold `key = value` lines; `#` starts a comment. Every output
// table starts with `# key = value` metadata (the resolved configuration),
// followed by one tab-separated header line and the data rows.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lds/channel.hpp"
#include "lds/lindblad.hpp"
#include "lds/models.hpp"

namespace lds {

enum class Experiment { Evolve, Channel, Verify, MagnusSweep, FiniteTSweep, MixingSweep, RewindCompare };

const char* to_string(Experiment e);
Experiment parse_experiment(const std::string& s);
std::vector<Experiment> all_experiments();

enum class ModelKind { MFI, TFI };

struct RunConfig {
    ModelKind model = ModelKind::MFI;
    int n = 4;
    double g = 0.9045;
    double h = 0.809;
    Boundary boundary = Boundary::Open;
    double beta = 1.0;
    double sigma = 0.5;
    double T_window = 0.0;  // 0: six filter widths
    double J = 0.5;
    Pauli jumps = Pauli::Y;
    GeneratorKind generator = GeneratorKind::ExactSampler;
    bool rewind = true;
    std::uint64_t seed = 20240917;
    std::string output_dir = "lds_out";

    double rtol = 1e-8;
    double atol = 1e-10;
    int quad_order = 128;
    double eps_residual = 1e-10;
    std::size_t max_steps = 20000;
    int n_steps_time = 0;
    UnitaryScheme scheme = UnitaryScheme::CommutatorFree4;

    double t_end = 30.0;
    int n_samples = 121;
    std::vector<double> J_values{0.5, 0.35, 0.25, 0.18};
    std::vector<double> T_sigmas{2, 4, 6, 8, 12};
    std::vector<double> sigma_values{0.5, 1, 2, 4};
    double threshold = 0.1;
    double max_horizon = 1e8;

    FilterParams filter() const;
    SpinModel build_model() const;
    JumpFamily build_jumps() const;
};

// Keys accepted in config files and as --key flags, in output order.
const std::vector<std::string>& config_keys();

// Parse a config file into raw key/value pairs (no key validation).
std::map<std::string, std::string> read_config_file(const std::string& path);

// Apply raw values on top of the defaults. Unknown keys or unparsable values
// raise ValidationError naming every offending key.
RunConfig config_from_map(const std::map<std::string, std::string>& values);

// Resolved configuration, one (key, value) pair per config key.
std::vector<std::pair<std::string, std::string>> resolved_config(const RunConfig& cfg);

// Range and dimension-cap checks for one experiment (ValidationError).
// Returns non-fatal warnings.
std::vector<std::string> validate_for(const RunConfig& cfg, Experiment e);

struct RunOutcome {
    int exit_code = 0;  // 0 ok, 4 non-convergence (numerical failures throw)
    std::vector<std::pair<std::string, std::string>> summary;
    std::vector<std::string> files;
    std::vector<std::string> warnings;
};

// Validate, compute, write tables and summary.txt into cfg.output_dir.
RunOutcome run_experiment(Experiment e, const RunConfig& cfg);

// 2 validation, 3 numerical, 4 non-convergence, 1 anything else.
int exit_code_for(const std::exception& ex);

// Number formatting shared by all writers: %.12g, locale independent.
std::string format_number(double x);

}  // namespace lds
