// test_runner.cpp - configuration handling, experiment outputs and exit codes

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lds/error.hpp"
#include "lds/runner.hpp"

using namespace lds;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("lds_runner_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct Table {
    std::map<std::string, std::string> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) out.push_back(cell);
    return out;
}

Table read_table(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    Table t;
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) {
            const auto eq = line.find(" = ");
            if (eq != std::string::npos) t.meta[line.substr(2, eq - 2)] = line.substr(eq + 3);
            continue;
        }
        if (t.columns.empty())
            t.columns = split_tabs(line);
        else
            t.rows.push_back(split_tabs(line));
    }
    return t;
}

RunConfig small(const fs::path& dir) {
    RunConfig c;
    c.n = 2;
    c.output_dir = dir.string();
    return c;
}

std::string summary_value(const RunOutcome& o, const std::string& key) {
    for (const auto& [k, v] : o.summary)
        if (k == key) return v;
    FAIL("summary has no key " << key);
    return {};
}

}  // namespace

TEST_CASE("experiment names round-trip") {
    for (Experiment e : all_experiments()) CHECK(parse_experiment(to_string(e)) == e);
    CHECK(all_experiments().size() == 7);
    CHECK(std::string(to_string(Experiment::FiniteTSweep)) == "finite-t-sweep");
    CHECK_THROWS_AS(parse_experiment("anneal"), ValidationError);
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(format_number(1e-20) == "1e-20");
    CHECK(format_number(NAN) == "nan");
    CHECK(format_number(INFINITY) == "inf");
    CHECK(format_number(-INFINITY) == "-inf");
}

TEST_CASE("config files and overrides") {
    const fs::path dir = scratch("config");
    fs::create_directories(dir);
    const fs::path file = dir / "run.cfg";
    {
        std::ofstream out(file);
        out << "# comment line\n"
            << "n = 3\n"
            << "model = tfi   # trailing comment\n"
            << "\n"
            << "J_values = 0.4, 0.2,0.1 ,0.05\n"
            << "rewind = false\n";
    }
    const auto raw = read_config_file(file.string());
    CHECK(raw.at("n") == "3");
    CHECK(raw.at("model") == "tfi");
    const RunConfig c = config_from_map(raw);
    CHECK(c.n == 3);
    CHECK(c.model == ModelKind::TFI);
    CHECK_FALSE(c.rewind);
    CHECK(c.J_values == std::vector<double>{0.4, 0.2, 0.1, 0.05});
    CHECK(c.beta == 1.0);

    {
        std::ofstream out(dir / "bad.cfg");
        out << "n = 2\nthis line has no separator\n";
    }
    try {
        read_config_file((dir / "bad.cfg").string());
        FAIL("malformed line accepted");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("bad.cfg:2") != std::string::npos);
    }
    CHECK_THROWS_AS(read_config_file((dir / "missing.cfg").string()), ValidationError);
}

TEST_CASE("unknown keys and bad values are all reported") {
    try {
        config_from_map({{"nn", "3"}, {"beta", "hot"}, {"sigma", "0.5"}});
        FAIL("accepted bad config");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("nn") != std::string::npos);
        CHECK(msg.find("beta") != std::string::npos);
        CHECK(msg.find("sigma") == std::string::npos);
    }
}

TEST_CASE("resolved configuration lists every key and round-trips") {
    RunConfig c;
    c.n = 3;
    c.sigma = 1.25;
    c.T_sigmas = {2, 3};
    const auto resolved = resolved_config(c);
    REQUIRE(resolved.size() == config_keys().size());
    std::map<std::string, std::string> m;
    for (std::size_t i = 0; i < resolved.size(); ++i) {
        CHECK(resolved[i].first == config_keys()[i]);
        m.insert(resolved[i]);
    }
    const RunConfig back = config_from_map(m);
    CHECK(resolved_config(back) == resolved);
    CHECK(c.filter().T_window == doctest::Approx(6 * 1.25));
}

TEST_CASE("validation caps per experiment") {
    RunConfig c;
    c.n = 9;
    CHECK_THROWS_AS(validate_for(c, Experiment::Evolve), ValidationError);
    c.n = 7;
    CHECK_THROWS_AS(validate_for(c, Experiment::Verify), ValidationError);
    CHECK_FALSE(validate_for(c, Experiment::Channel).empty());
    c.n = 4;
    CHECK_NOTHROW(validate_for(c, Experiment::Channel));
    c.T_window = 0.5;
    CHECK_THROWS_AS(validate_for(c, Experiment::Evolve), ValidationError);
    c.T_window = 0.0;
    c.J = 0.0;
    CHECK_THROWS_AS(validate_for(c, Experiment::Channel), ValidationError);
    c.J = 0.9;
    bool warned = false;
    for (const auto& w : validate_for(c, Experiment::Channel)) warned = warned || w.find("J") != std::string::npos;
    CHECK(warned);
    c.J = 0.5;
    c.J_values = {0.3, 0.25, 0.2, 0.18};
    CHECK_THROWS_AS(validate_for(c, Experiment::MagnusSweep), ValidationError);
    c.threshold = 2.0;
    CHECK_THROWS_AS(validate_for(c, Experiment::MixingSweep), ValidationError);
    c.threshold = 0.1;
    c.quad_order = 16;
    CHECK_THROWS_AS(validate_for(c, Experiment::Evolve), ValidationError);
}

TEST_CASE("verify writes a passing table with full metadata") {
    const fs::path dir = scratch("verify");
    const RunConfig c = small(dir);
    const RunOutcome o = run_experiment(Experiment::Verify, c);
    CHECK(o.exit_code == 0);
    CHECK(summary_value(o, "all_pass") == "true");
    const Table t = read_table(dir / "verify.tsv");
    CHECK(t.columns == std::vector<std::string>{"check", "value", "threshold", "status"});
    CHECK(t.meta.at("experiment") == "verify");
    CHECK(t.meta.at("n") == "2");
    CHECK(t.meta.count("bohr_tolerance") == 1);
    for (const auto& key : config_keys()) CHECK(t.meta.count(key) == 1);
    for (const auto& row : t.rows) {
        REQUIRE(row.size() == 4);
        CHECK(row[3] != "fail");
    }
    CHECK(fs::exists(dir / "summary.txt"));
    CHECK(slurp(dir / "summary.txt").find("all_pass=true") != std::string::npos);
}

TEST_CASE("evolve at infinite temperature stays at the thermal state") {
    const fs::path dir = scratch("evolve_hot");
    RunConfig c = small(dir);
    c.beta = 0.0;
    c.t_end = 2.0;
    c.n_samples = 5;
    const RunOutcome o = run_experiment(Experiment::Evolve, c);
    CHECK(o.exit_code == 0);
    const Table t = read_table(dir / "trajectory.tsv");
    CHECK(t.meta.at("delta_e_kind") == "absolute");
    CHECK(t.columns == std::vector<std::string>{"time", "delta_e", "trace_distance", "stationarity"});
    REQUIRE(t.rows.size() == 5);
    for (const auto& r : t.rows) CHECK(std::abs(std::stod(r[2])) <= 1e-10);
}

TEST_CASE("identical configurations give byte-identical files") {
    const fs::path dir = scratch("repeat");
    RunConfig c = small(dir);
    c.t_end = 3.0;
    c.n_samples = 7;
    const RunOutcome a = run_experiment(Experiment::Evolve, c);
    std::map<std::string, std::string> first;
    for (const auto& f : a.files) first[f] = slurp(f);
    const RunOutcome b = run_experiment(Experiment::Evolve, c);
    REQUIRE(a.files == b.files);
    for (const auto& f : b.files) CHECK(slurp(f) == first[f]);
}

TEST_CASE("evolve output matches the stored reference table") {
    const fs::path dir = scratch("golden");
    RunConfig c = small(dir);
    c.t_end = 6.0;
    c.n_samples = 13;
    run_experiment(Experiment::Evolve, c);
    const Table got = read_table(dir / "trajectory.tsv");
    const Table ref = read_table(fs::path(LDS_GOLDEN_DIR) / "evolve_n2.tsv");
    REQUIRE(got.columns == ref.columns);
    REQUIRE(got.rows.size() == ref.rows.size());
    for (std::size_t i = 0; i < ref.rows.size(); ++i)
        for (std::size_t j = 0; j < 3; ++j) REQUIRE(std::stod(got.rows[i][j]) == doctest::Approx(std::stod(ref.rows[i][j])).epsilon(1e-7));
}

TEST_CASE("channel run records every step and flags non-convergence") {
    const fs::path dir = scratch("channel");
    RunConfig c = small(dir);
    c.n = 1;
    c.max_steps = 3;
    const RunOutcome o = run_experiment(Experiment::Channel, c);
    CHECK(o.exit_code == 4);
    CHECK(summary_value(o, "converged") == "false");
    const Table t = read_table(dir / "channel_trajectory.tsv");
    CHECK(t.columns == std::vector<std::string>{"step", "lindblad_time", "delta_e", "trace_distance", "residual"});
    CHECK(t.rows.size() == 4);
    CHECK(t.meta.at("variant") == "K");

    c.max_steps = 20000;
    const RunOutcome ok = run_experiment(Experiment::Channel, c);
    CHECK(ok.exit_code == 0);
    CHECK(summary_value(ok, "converged") == "true");
}

TEST_CASE("finite-window and mixing sweeps write their tables") {
    const fs::path dir = scratch("sweeps");
    RunConfig c = small(dir);
    c.n = 1;
    c.T_sigmas = {2, 4, 6};
    c.sigma_values = {0.5, 1};
    run_experiment(Experiment::FiniteTSweep, c);
    const Table f = read_table(dir / "finite_t_sweep.tsv");
    CHECK(f.columns == std::vector<std::string>{"T", "T_over_sigma", "distance", "bound_shape"});
    CHECK(f.rows.size() == 3);
    run_experiment(Experiment::MixingSweep, c);
    const Table m = read_table(dir / "mixing_sweep.tsv");
    CHECK(m.columns == std::vector<std::string>{"n", "sigma", "t_star", "reached"});
    CHECK(m.rows.size() == 2);
    const Table curves = read_table(dir / "mixing_curves.tsv");
    CHECK(curves.columns == std::vector<std::string>{"n", "sigma", "time", "trace_distance"});
    CHECK(curves.rows.size() > 2);
}

TEST_CASE("exit codes by error type") {
    CHECK(exit_code_for(ValidationError("x")) == 2);
    CHECK(exit_code_for(NumericalError("x")) == 3);
    CHECK(exit_code_for(SingularMatrixError("x", 2)) == 3);
    CHECK(exit_code_for(ConvergenceError("x")) == 4);
    CHECK(exit_code_for(std::runtime_error("x")) == 1);
}
