// bindings.cpp - pybind11 module _pylds over the lds core library

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lds/diagnostics.hpp"
#include "lds/error.hpp"
#include "lds/runner.hpp"

namespace py = pybind11;
using namespace lds;

namespace {

FilterParams make_filter(double beta, double sigma, double T_window) {
    FilterParams p;
    p.beta = beta;
    p.sigma = sigma;
    p.T_window = T_window > 0.0 ? T_window : 6.0 * sigma;
    p.validate();
    return p;
}

SpinModel make_model(const std::string& kind, int n, double g, double h, const std::string& boundary) {
    const Boundary b = parse_boundary(boundary);
    if (kind == "mfi") return build_mfi(n, g, h, b);
    if (kind == "tfi") return build_tfi(n, g, b);
    throw ValidationError("model must be 'mfi' or 'tfi', got '" + kind + "'");
}

struct Prepared {
    SpinModel model;
    JumpFamily family;
    EigenSystem eig;
};

Prepared prepare(const std::string& kind, int n, double g, double h, const std::string& boundary,
                 const std::string& jumps) {
    Prepared p{make_model(kind, n, g, h, boundary), site_jump_family(n, parse_pauli(jumps)), {}};
    p.eig = herm_eig(p.model.hamiltonian);
    return p;
}

}  // namespace

PYBIND11_MODULE(_pylds, m) {
    m.doc() = "Dense small-system simulations of quantum Gibbs samplers and their driven-ancilla protocol";
    m.attr("__version__") = LDS_VERSION;

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

    m.def("hamiltonian", [](const std::string& kind, int n, double g, double h, const std::string& boundary) {
        return make_model(kind, n, g, h, boundary).hamiltonian;
    }, py::arg("model") = "mfi", py::arg("n") = 2, py::arg("g") = 0.9045, py::arg("h") = 0.809,
       py::arg("boundary") = "open", "Ising Hamiltonian as a dense complex matrix (site 0 is the slowest qubit).");

    m.def("eigh", [](const ComplexMatrix& h) {
        const EigenSystem e = herm_eig(h);
        return py::make_tuple(e.values, e.basis);
    }, py::arg("matrix"), "Ascending eigenvalues and orthonormal eigenvectors of a Hermitian matrix.");

    m.def("thermal_populations", [](const RealVector& energies, double beta) {
        EigenSystem e;
        e.values = energies;
        e.basis = ComplexMatrix::Identity(energies.size(), energies.size());
        return thermal_state(e, beta).populations;
    }, py::arg("energies"), py::arg("beta"));

    m.def("filter_frequency", [](double nu, double beta, double sigma) {
        return filter_frequency(make_filter(beta, sigma, 0.0), nu);
    }, py::arg("nu"), py::arg("beta") = 1.0, py::arg("sigma") = 0.5);

    m.def("fixed_point", [](const std::string& generator, const std::string& model, int n, double beta, double sigma,
                            double T_window, const std::string& jumps) {
        const Prepared p = prepare(model, n, 0.9045, 0.809, "open", jumps);
        const GeneratorSpec spec =
            assemble(parse_generator_kind(generator), p.model, p.eig, make_filter(beta, sigma, T_window), p.family);
        const ComplexMatrix rho = fixed_point(spec);
        const ComplexMatrix thermal = thermal_state(p.eig, beta).rho;
        return py::make_tuple(rho, trace_norm(hermitian_part(rho - thermal)));
    }, py::arg("generator") = "exact", py::arg("model") = "mfi", py::arg("n") = 2, py::arg("beta") = 1.0,
       py::arg("sigma") = 0.5, py::arg("T_window") = 0.0, py::arg("jumps") = "Y",
       "Steady state in the eigenbasis and its trace distance to the Gibbs state.");

    m.def("kms_residuals", [](const std::string& generator, const std::string& model, int n, double beta,
                              double sigma, const std::string& jumps) {
        const Prepared p = prepare(model, n, 0.9045, 0.809, "open", jumps);
        const ThermalState th = thermal_state(p.eig, beta);
        const GeneratorSpec spec =
            assemble(parse_generator_kind(generator), p.model, p.eig, make_filter(beta, sigma, 0.0), p.family);
        double jump = 0.0;
        for (const auto& l : spec.jumps) jump = std::max(jump, kms_residual(l, th));
        py::dict d;
        d["jump"] = jump;
        d["superoperator"] = kms_superoperator_residual(spec, th);
        return d;
    }, py::arg("generator") = "exact", py::arg("model") = "mfi", py::arg("n") = 2, py::arg("beta") = 1.0,
       py::arg("sigma") = 0.5, py::arg("jumps") = "Y");

    m.def("config_keys", &config_keys);

    m.def("resolved_config", [](const std::map<std::string, std::string>& overrides) {
        return resolved_config(config_from_map(overrides));
    }, py::arg("overrides") = std::map<std::string, std::string>{});

    m.def("run", [](const std::string& experiment, const std::map<std::string, std::string>& overrides) {
        const Experiment e = parse_experiment(experiment);
        const RunConfig cfg = config_from_map(overrides);
        RunOutcome out;
        {
            py::gil_scoped_release release;
            out = run_experiment(e, cfg);
        }
        py::dict d;
        d["exit_code"] = out.exit_code;
        d["summary"] = out.summary;
        d["files"] = out.files;
        d["warnings"] = out.warnings;
        return d;
    }, py::arg("experiment"), py::arg("overrides") = std::map<std::string, std::string>{},
       "Run one experiment; values are strings exactly as in a config file.");

    m.def("format_number", &format_number);
}
