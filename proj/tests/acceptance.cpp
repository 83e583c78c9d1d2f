// acceptance.cpp - end-to-end acceptance checks, one PASS/FAIL line each
//
// Usage: lds_acceptance [output_dir]   (default: acceptance_out)
// Exit status is the number of failed checks (0 when everything passes).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lds/diagnostics.hpp"
#include "lds/runner.hpp"

using namespace lds;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

int g_failures = 0;

void report(const std::string& name, const std::function<Verdict()>& check) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = check();
    } catch (const std::exception& e) {
        v.pass = false;
        v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.pass) ++g_failures;
    std::printf("%s %-22s %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string num(double x) { return format_number(x); }

FilterParams filter(double beta, double sigma, double T) {
    FilterParams p;
    p.beta = beta;
    p.sigma = sigma;
    p.T_window = T;
    return p;
}

struct System {
    SpinModel model;
    JumpFamily family;
    EigenSystem eig;
    ThermalState thermal;
    std::vector<BohrDecomposition> bohrs;

    System(SpinModel m, JumpFamily f, double beta)
        : model(std::move(m)), family(std::move(f)), eig(herm_eig(model.hamiltonian)), thermal(thermal_state(eig, beta)) {
        for (std::size_t a = 0; a < family.size(); ++a)
            bohrs.push_back(bohr_decompose(eig, family.operators[a], 0.0, family.labels[a]));
    }
};

System mfi(int n) { return System(build_mfi(n, 0.9045, 0.809), site_jump_family(n, Pauli::Y), 1.0); }

System qubit() {
    ComplexMatrix x(2, 2), z(2, 2);
    x << 0, 1, 1, 0;
    z << 1, 0, 0, -1;
    JumpFamily f;
    f.operators = {x};
    f.labels = {"X"};
    return System(SpinModel{1, z, "Z", Boundary::Open}, f, 1.0);
}

void write_tsv(const fs::path& path, const std::vector<std::string>& meta, const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    out << "# lds " << LDS_VERSION << "\n";
    for (const auto& m : meta) out << "# " << m << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "\t" : "") << columns[i];
    out << "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "\t" : "") << r[i];
        out << "\n";
    }
}

std::map<std::string, double> read_golden(const fs::path& path) {
    std::map<std::string, double> out;
    std::ifstream in(path);
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        std::istringstream ss(line);
        std::string key, value;
        std::getline(ss, key, '\t');
        std::getline(ss, value, '\t');
        out[key] = std::stod(value);
    }
    return out;
}

double max_choi_defect(const ChannelMap& map, Eigen::Index d) {
    const ComplexMatrix choi = choi_matrix(map, d);
    return -std::min(0.0, herm_eigenvalues(hermitian_part(choi)).minCoeff());
}

double max_trace_change(const ProtocolIsometry& iso, int trials) {
    double worst = 0.0;
    for (int k = 0; k < trials; ++k) {
        const ComplexMatrix rho = random_density_matrix(iso.dim_sys, kDefaultSeed + k);
        worst = std::max(worst, std::abs(apply_channel(iso, rho).trace() - 1.0));
        worst = std::max(worst, std::abs(apply_channel_no_rewind(iso, rho).trace() - 1.0));
    }
    return worst;
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path out_dir = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
    fs::create_directories(out_dir);
    std::printf("lds acceptance, output in %s\n", out_dir.string().c_str());

    report("stationarity", [] {
        double worst = 0.0;
        for (int n : {2, 3}) {
            const System s = mfi(n);
            const GeneratorSpec g = assemble(GeneratorKind::ExactSampler, s.model, s.eig, filter(1.0, 0.5, 3.0), s.family);
            worst = std::max(worst, trace_norm(generator_action(g, s.thermal.rho)));
        }
        return Verdict{worst <= 1e-8, "max ||L[rho_beta]||_1 over n=2,3 = " + num(worst) + " (<= 1e-8)"};
    });

    report("kms", [] {
        double jump = 0.0, sup = 0.0, ratio = INFINITY;
        for (int n : {1, 2, 3}) {
            const System s = n == 1 ? qubit() : mfi(n);
            const FilterParams p = filter(1.0, 0.5, 3.0);
            const GeneratorSpec ex = assemble(GeneratorKind::ExactSampler, s.model, s.eig, p, s.family);
            const GeneratorSpec lo = assemble(GeneratorKind::LocalDriving, s.model, s.eig, p, s.family);
            for (const auto& l : ex.jumps) jump = std::max(jump, kms_residual(l, s.thermal));
            const double e = kms_superoperator_residual(ex, s.thermal);
            sup = std::max(sup, e);
            ratio = std::min(ratio, kms_superoperator_residual(lo, s.thermal) / std::max(e, 1e-300));
        }
        const bool ok = jump <= 1e-8 && sup <= 1e-7 && ratio >= 10.0;
        return Verdict{ok, "jump " + num(jump) + " (<= 1e-8), superop " + num(sup) + " (<= 1e-7), local/exact min " +
                               num(ratio) + " (>= 10)"};
    });

    report("j4_scaling", [&] {
        const System s = mfi(2);
        const FilterParams p = filter(1.0, 0.5, 3.0);
        const SweepResult r = magnus_error_sweep(s.model, s.family, p, {0.5, 0.35, 0.25, 0.18});
        const SweepResult fine = magnus_error_sweep(s.model, s.family, p, {0.1, 0.07, 0.05, 0.035});
        std::vector<std::vector<std::string>> rows;
        for (const SweepResult* sr : {&r, &fine})
            for (std::size_t i = 0; i < sr->axis_values.size(); ++i)
                rows.push_back({num(sr->axis_values[i]), num(sr->measured[i]), sr->included[i] ? "true" : "false"});
        write_tsv(out_dir / "magnus_sweep.tsv", {"experiment = magnus-sweep", "n = 2"}, {"J", "gap", "included"}, rows);
        const double slope = r.fit ? r.fit->slope : NAN;
        const double small = fine.fit ? fine.fit->slope : NAN;
        // the coarse ladder is pre-asymptotic, so the fitted slope depends on the random state
        double lo = slope, hi = slope;
        for (std::uint64_t seed : {1, 2, 3, 42}) {
            SweepOptions o;
            o.seed = seed;
            const SweepResult alt = magnus_error_sweep(s.model, s.family, p, {0.5, 0.35, 0.25, 0.18}, o);
            if (!alt.fit) continue;
            lo = std::min(lo, alt.fit->slope);
            hi = std::max(hi, alt.fit->slope);
        }
        return Verdict{slope >= 3.5 && slope <= 4.5, "slope over J in {0.5,0.35,0.25,0.18} = " + num(slope) +
                                                         " (in [3.5, 4.5], default seed; range " + num(lo) + ".." +
                                                         num(hi) + " over 5 seeds); slope over J in {0.1..0.035} = " +
                                                         num(small)};
    });

    report("finite_window", [] {
        const System s = mfi(3);
        const FilterParams p = filter(1.0, 0.5, 3.0);
        const SweepResult r = finite_T_sweep(s.model, s.family, p, {1.0, 2.0, 6.0});
        const double drop = r.measured[0] / r.measured[1];
        const bool ok = drop > 10.0 && r.measured[2] <= 1e-8;
        return Verdict{ok, "d(2 sigma) = " + num(r.measured[0]) + ", d(4 sigma) = " + num(r.measured[1]) + ", ratio " +
                               num(drop) + " (> 10), d(12 sigma) = " + num(r.measured[2]) + " (<= 1e-8)"};
    });

    // One n = 4 isometry serves the trajectory, CPTP and rewinding checks.
    const System s4 = mfi(4);
    ChannelConfig c4;
    c4.params = filter(1.0, 0.5, 3.0);
    c4.J = 0.5;
    std::printf("building n=4 protocol isometry...\n");
    std::fflush(stdout);
    const auto tb = std::chrono::steady_clock::now();
    const ProtocolIsometry iso4 = build_isometry(s4.eig, s4.bohrs, c4);
    std::printf("  %d steps, residual %s, %.1f s\n", iso4.n_steps_used, num(iso4.isometry_residual).c_str(),
                std::chrono::duration<double>(std::chrono::steady_clock::now() - tb).count());
    std::fflush(stdout);
    RewindReport rep;
    bool have_rep = false;

    report("thermalization_n4", [&] {
        rep = rewinding_report(iso4, s4.thermal);
        have_rep = true;
        const double dtau = c4.J * c4.J;
        const TrajectoryMetrics ch = trajectory_metrics(rep.run.times, rep.run.states, s4.eig, s4.thermal);
        std::vector<std::vector<std::string>> rows;
        for (std::size_t k = 0; k < ch.rows.size(); ++k)
            rows.push_back({std::to_string(k), num(k * dtau), num(ch.rows[k].delta_e), num(ch.rows[k].trace_distance)});
        write_tsv(out_dir / "thermalization_channel.tsv", {"experiment = channel", "n = 4", "J = 0.5", "variant = K"},
                  {"step", "lindblad_time", "delta_e", "trace_distance"}, rows);

        // plateau: the last quarter of the trajectory moves by < 1% of its final distance
        const std::size_t last = ch.rows.size() - 1;
        const double d_end = ch.rows[last].trace_distance;
        const double d_q = ch.rows[last - last / 4].trace_distance;
        const bool plateau = rep.converged && std::abs(d_q - d_end) <= 0.01 * d_end;
        const double de_channel = std::abs(ch.rows[last].delta_e);

        const GeneratorSpec ex = assemble(GeneratorKind::ExactSampler, s4.model, s4.eig, c4.params, s4.family);
        const Eigen::Index d = s4.eig.dim();
        std::vector<double> ts;
        for (int k = 1; k <= 60; ++k) ts.push_back(0.5 * k);
        Trajectory tr = evolve(ex, ComplexMatrix::Identity(d, d) / double(d), 30.0, ts, 1e-8, 1e-10);
        const TrajectoryMetrics em = trajectory_metrics(tr.times, tr.states, s4.eig, s4.thermal, &ex);
        std::vector<std::vector<std::string>> erows;
        for (const auto& r : em.rows) erows.push_back({num(r.time), num(r.delta_e), num(r.trace_distance)});
        write_tsv(out_dir / "thermalization_exact.tsv", {"experiment = evolve", "n = 4", "variant = exact"},
                  {"time", "delta_e", "trace_distance"}, erows);
        const double de_exact = std::abs(em.rows.back().delta_e);

        const std::map<std::string, double> now{{"channel_final_delta_e", ch.rows[last].delta_e},
                                                {"channel_final_trace_distance", d_end},
                                                {"exact_final_delta_e", em.rows.back().delta_e},
                                                {"exact_final_trace_distance", em.rows.back().trace_distance}};
        std::vector<std::vector<std::string>> grows;
        for (const auto& [k, v] : now) grows.push_back({k, num(v)});
        write_tsv(out_dir / "thermalization_n4.tsv", {"experiment = thermalization", "n = 4"}, {"quantity", "value"}, grows);

        const fs::path golden = fs::path(LDS_GOLDEN_DIR) / "thermalization_n4.tsv";
        std::string gnote;
        bool golden_ok = true;
        if (fs::exists(golden)) {
            const auto ref = read_golden(golden);
            double worst = 0.0;
            for (const auto& [k, v] : now) {
                const auto it = ref.find(k);
                if (it == ref.end()) {
                    golden_ok = false;
                    continue;
                }
                worst = std::max(worst, std::abs(v - it->second) / std::max(std::abs(it->second), 1e-3));
            }
            golden_ok = golden_ok && worst <= 1e-6;
            gnote = ", golden rel dev " + num(worst) + " (<= 1e-6)";
        } else {
            gnote = ", no golden file yet (values written to thermalization_n4.tsv)";
        }
        const bool ok = de_channel < 0.05 && plateau && de_exact < 0.02 && golden_ok;
        return Verdict{ok, "channel |de| = " + num(de_channel) + " (< 0.05), plateau " + (plateau ? "yes" : "no") +
                               " (d = " + num(d_end) + " after " + std::to_string(rep.steps) +
                               " cycles), exact |de|(t=30) = " + num(de_exact) + " (< 0.02)" + gnote};
    });

    report("mixing_sweep", [&] {
        const System s(build_tfi(4, 0.9045), site_jump_family(4, Pauli::Y), 1.0);
        const std::vector<double> sigmas{0.5, 1, 2, 4};
        std::vector<MixingResult> res;
        std::vector<std::vector<std::string>> rows;
        for (double sg : sigmas) {
            const GeneratorSpec g = assemble(GeneratorKind::ExactSampler, s.model, s.eig, filter(1.0, sg, 6 * sg), s.family);
            res.push_back(mixing_proxy(g, s.thermal));
            rows.push_back({"4", num(sg), num(res.back().t_star), res.back().reached ? "true" : "false"});
        }
        write_tsv(out_dir / "mixing_sweep.tsv", {"experiment = mixing-sweep", "model = tfi", "threshold = 0.1"},
                  {"n", "sigma", "t_star", "reached"}, rows);
        bool increasing = true, reached = true;
        std::string list;
        for (std::size_t i = 0; i < res.size(); ++i) {
            reached = reached && res[i].reached;
            if (i) increasing = increasing && res[i].t_star > res[i - 1].t_star;
            list += (i ? ", " : "") + num(res[i].t_star);
        }
        const double ratio = res.back().t_star / res.front().t_star;
        return Verdict{increasing && reached && ratio >= 10.0,
                       "t* = " + list + (increasing ? " strictly increasing" : " NOT increasing") + ", t*(4)/t*(0.5) = " +
                           num(ratio) + " (>= 10)"};
    });

    report("channel_cptp", [&] {
        double trace = 0.0, choi = 0.0;
        for (int n : {1, 2}) {
            const System s = mfi(n);
            ChannelConfig c;
            c.params = filter(1.0, 0.5, 3.0);
            c.J = 0.5;
            const ProtocolIsometry iso = build_isometry(s.eig, s.bohrs, c);
            trace = std::max(trace, max_trace_change(iso, 20));
            choi = std::max(choi, max_choi_defect([&](const ComplexMatrix& x) { return apply_channel(iso, x); }, iso.dim_sys));
            choi = std::max(choi, max_choi_defect([&](const ComplexMatrix& x) { return apply_channel_no_rewind(iso, x); },
                                                  iso.dim_sys));
        }
        trace = std::max(trace, max_trace_change(iso4, 20));
        choi = std::max(choi, max_choi_defect([&](const ComplexMatrix& x) { return apply_channel(iso4, x); }, 16));
        choi = std::max(choi, max_choi_defect([&](const ComplexMatrix& x) { return apply_channel_no_rewind(iso4, x); }, 16));
        return Verdict{trace <= 1e-9 && choi <= 1e-8, "max trace change " + num(trace) +
                                                          " (<= 1e-9), most negative Choi eigenvalue -" + num(choi) +
                                                          " (>= -1e-8), dims 2, 4, 16"};
    });

    report("single_qubit", [] {
        const System q = qubit();
        const FilterParams p = filter(1.0, 1.0, 6.0);
        const double fp2 = filter_frequency(p, 2.0), fm2 = filter_frequency(p, -2.0);
        const double coeff = std::max(std::abs(fp2 - 1.0), std::abs(fm2 - std::exp(-1.0)));
        // eigenbasis index 0 is |1>, index 1 is |0>
        ComplexMatrix expect = ComplexMatrix::Zero(2, 2);
        expect(1, 0) = std::exp(-1.0);
        expect(0, 1) = 1.0;
        const double jump = (filtered_jump_exact(q.bohrs[0], p) - expect).cwiseAbs().maxCoeff();
        std::vector<ComplexMatrix> jumps{filtered_jump_exact(q.bohrs[0], p)};
        const double g = coherent_exact(q.eig, jumps, p).cwiseAbs().maxCoeff();
        const ComplexMatrix fp = fixed_point(assemble(GeneratorKind::LocalDriving, q.model, q.eig, p, q.family));
        const double dist = trace_norm(hermitian_part(fp - q.thermal.rho));
        const bool ok = coeff <= 1e-12 && jump <= 1e-12 && g <= 1e-15 && dist <= 1e-7;
        return Verdict{ok, "f(+-2) dev " + num(coeff) + ", jump dev " + num(jump) + ", |G| " + num(g) +
                               ", local fixed point distance " + num(dist) + " (<= 1e-7)"};
    });

    report("rewinding", [&] {
        if (!have_rep) rep = rewinding_report(iso4, s4.thermal);
        const TrajectoryMetrics mk = trajectory_metrics({0.0}, {rep.run.state}, s4.eig, s4.thermal);
        const TrajectoryMetrics mn = trajectory_metrics({0.0}, {rep.run_no_rewind.state}, s4.eig, s4.thermal);
        write_tsv(out_dir / "rewind_compare.tsv", {"experiment = rewind-compare", "n = 4", "J = 0.5"},
                  {"variant", "converged", "steps", "trace_distance", "delta_e"},
                  {{"K", rep.converged ? "true" : "false", std::to_string(rep.steps), num(rep.delta), num(mk.rows[0].delta_e)},
                   {"K_no_rewind", rep.converged_no_rewind ? "true" : "false", std::to_string(rep.steps_no_rewind),
                    num(rep.delta_no_rewind), num(mn.rows[0].delta_e)}});
        const bool ok = rep.converged && rep.converged_no_rewind && std::isfinite(rep.delta_no_rewind);
        const std::string bound = rep.t_star_available ? num(rep.bound) + (rep.bound_satisfied ? " (within)" : " (exceeded)")
                                                       : std::string("unavailable");
        return Verdict{ok, "delta(K) = " + num(rep.delta) + ", delta(K') = " + num(rep.delta_no_rewind) +
                               ", 4 delta t*/ln2 surrogate = " + bound + " [report only]"};
    });

    std::printf("%d failed\n", g_failures);
    return g_failures;
}
