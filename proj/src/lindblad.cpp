// lindblad.cpp - generator assembly, action, dense form, steady state, evolution

#include "lds/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "lds/error.hpp"
#include "lds/quadrature.hpp"

namespace lds {

const char* to_string(GeneratorKind k) {
    switch (k) {
        case GeneratorKind::ExactSampler: return "exact";
        case GeneratorKind::LocalDriving: return "local";
        case GeneratorKind::DissipativeOnly: return "dissipative";
    }
    return "?";
}

GeneratorKind parse_generator_kind(const std::string& s) {
    if (s == "exact") return GeneratorKind::ExactSampler;
    if (s == "local") return GeneratorKind::LocalDriving;
    if (s == "dissipative") return GeneratorKind::DissipativeOnly;
    throw ValidationError("unknown generator kind '" + s + "' (expected exact, local or dissipative)");
}

GeneratorSpec make_generator(GeneratorKind kind, std::vector<ComplexMatrix> jumps, ComplexMatrix coherent,
                             FilterParams params, std::string model_ref) {
    const Eigen::Index d = coherent.rows();
    if (d == 0 || coherent.cols() != d) throw ValidationError("make_generator: coherent part must be square");
    for (const auto& l : jumps)
        if (l.rows() != d || l.cols() != d) throw ValidationError("make_generator: jump dimension mismatch");
    const double scale = std::max(max_row_sum(coherent), 1.0);
    if (hermiticity_defect(coherent) > 1e-10 * scale)
        throw ValidationError("make_generator: coherent part is not Hermitian");

    GeneratorSpec spec;
    spec.kind = kind;
    spec.coherent = hermitian_part(coherent);
    spec.decay = ComplexMatrix::Zero(d, d);
    for (const auto& l : jumps) spec.decay.noalias() += l.adjoint() * l;
    spec.jumps = std::move(jumps);
    spec.params = params;
    spec.model_ref = std::move(model_ref);
    return spec;
}

ComplexMatrix coherent_exact(const EigenSystem& eig, const std::vector<ComplexMatrix>& jumps,
                             const FilterParams& params, double tol_freq) {
    const Eigen::Index d = eig.dim();
    ComplexMatrix ltl = ComplexMatrix::Zero(d, d);
    for (const auto& l : jumps) ltl.noalias() += l.adjoint() * l;
    const BohrDecomposition bohr = bohr_decompose_eigenbasis(eig, ltl, tol_freq, "sum L^dag L");
    const double beta = params.beta;
    ComplexMatrix g = bohr.weighted([beta](double nu) { return 0.5 * kI * std::tanh(beta * nu / 4.0); });
    const double defect = hermiticity_defect(g);
    if (defect > 1e-9 * std::max(max_row_sum(g), 1.0)) {
        std::ostringstream os;
        os << "coherent_exact: result is not Hermitian (defect " << defect << ")";
        throw NumericalError(os.str());
    }
    return hermitian_part(g);
}

namespace {

// s(nu, t1) = int_{-T/2}^{T/2} sgn(t1 - t2) f*(t2) e^{i nu t2} dt2, evaluated
// for every cluster frequency at one outer node.
void signed_partial_transforms(const FilterParams& p, const RealVector& freqs, double t1,
                               const QuadratureRule& lower_ref, std::vector<Complex>& out) {
    const double a = -0.5 * p.T_window, b = 0.5 * p.T_window;
    const double lo_half = 0.5 * (t1 - a), lo_mid = 0.5 * (t1 + a);
    const double hi_half = 0.5 * (b - t1), hi_mid = 0.5 * (b + t1);
    const std::size_t n = lower_ref.size();
    std::vector<double> tl(n), th(n);
    std::vector<Complex> fl(n), fh(n);
    for (std::size_t k = 0; k < n; ++k) {
        tl[k] = lo_mid + lo_half * lower_ref.nodes[k];
        th[k] = hi_mid + hi_half * lower_ref.nodes[k];
        fl[k] = lo_half * lower_ref.weights[k] * std::conj(filter_time(p, tl[k]));
        fh[k] = hi_half * lower_ref.weights[k] * std::conj(filter_time(p, th[k]));
    }
    out.assign(static_cast<std::size_t>(freqs.size()), Complex(0.0));
    for (Eigen::Index c = 0; c < freqs.size(); ++c) {
        const double nu = freqs(c);
        Complex acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            acc += fl[k] * std::exp(kI * (nu * tl[k]));
            acc -= fh[k] * std::exp(kI * (nu * th[k]));
        }
        out[static_cast<std::size_t>(c)] = acc;
    }
}

ComplexMatrix lamb_shift_with_order(const std::vector<BohrDecomposition>& jumps, const FilterParams& p,
                                    int order) {
    const Eigen::Index d = jumps.front().dim();
    const auto outer = gauss_legendre(order, -0.5 * p.T_window, 0.5 * p.T_window);
    const auto inner_ref = gauss_legendre(order);
    ComplexMatrix h = ComplexMatrix::Zero(d, d);
    ComplexMatrix s_mat(d, d);
    std::vector<Complex> s_vals;
    for (std::size_t q = 0; q < outer.size(); ++q) {
        const double t1 = outer.nodes[q];
        const Complex w = outer.weights[q] * filter_time(p, t1);
        const RealVector* cached_freqs = nullptr;
        for (const auto& bohr : jumps) {
            if (cached_freqs == nullptr || cached_freqs->size() != bohr.frequencies().size() ||
                *cached_freqs != bohr.frequencies()) {
                signed_partial_transforms(p, bohr.frequencies(), t1, inner_ref, s_vals);
                cached_freqs = &bohr.frequencies();
            }
            // (A^dagger)_{ik} carries frequency E_i - E_k = freq(i, k) of A^dagger,
            // which is the frequency of A at (k, i) negated.
            const ComplexMatrix& a = bohr.op();
            const Eigen::MatrixXi& cl = bohr.cluster_of();
            const Eigen::Index m = bohr.frequencies().size();
            for (Eigen::Index k = 0; k < d; ++k)
                for (Eigen::Index i = 0; i < d; ++i)
                    s_mat(i, k) = std::conj(a(k, i)) * s_vals[static_cast<std::size_t>(m - 1 - cl(k, i))];
            h.noalias() += (w * s_mat) * bohr.heisenberg(t1);
        }
    }
    return (0.5 * kI) * h;
}

}  // namespace

ComplexMatrix lamb_shift(const EigenSystem& eig, const std::vector<BohrDecomposition>& jumps,
                         const FilterParams& params, int quad_order) {
    params.validate();
    if (quad_order < 64) throw ValidationError("lamb_shift: quad_order must be >= 64");
    if (jumps.empty()) return ComplexMatrix::Zero(eig.dim(), eig.dim());
    for (const auto& j : jumps)
        if (j.dim() != eig.dim()) throw ValidationError("lamb_shift: jump dimension mismatch");
    const ComplexMatrix coarse = lamb_shift_with_order(jumps, params, quad_order);
    const ComplexMatrix fine = lamb_shift_with_order(jumps, params, 2 * quad_order);
    const double scale = std::max(max_row_sum(fine), 1e-300);
    const double diff = max_row_sum(coarse - fine);
    if (diff > 1e-7 * scale) {
        std::ostringstream os;
        os << "lamb_shift: order " << quad_order << " and " << 2 * quad_order << " differ by " << diff / scale
           << " (relative); increase quad_order";
        throw NumericalError(os.str());
    }
    const double defect = hermiticity_defect(fine);
    if (defect > 1e-9 * std::max(scale, 1.0)) {
        std::ostringstream os;
        os << "lamb_shift: result is not Hermitian (defect " << defect << ")";
        throw NumericalError(os.str());
    }
    return hermitian_part(fine);
}

Complex lamb_shift_kernel_entry(const FilterParams& p, double nu1, double nu2, int quad_order) {
    const auto outer = gauss_legendre(quad_order, -0.5 * p.T_window, 0.5 * p.T_window);
    const auto inner_ref = gauss_legendre(quad_order);
    // Reuse the signed partial transform with frequency -nu2.
    RealVector freq(1);
    freq(0) = -nu2;
    std::vector<Complex> s;
    Complex acc = 0.0;
    for (std::size_t q = 0; q < outer.size(); ++q) {
        const double t1 = outer.nodes[q];
        signed_partial_transforms(p, freq, t1, inner_ref, s);
        acc += outer.weights[q] * filter_time(p, t1) * std::exp(kI * (nu1 * t1)) * s[0];
    }
    return 0.5 * kI * acc;
}

ComplexMatrix lamb_shift_kernel(const std::vector<BohrDecomposition>& jumps, const FilterParams& params,
                                int quad_order) {
    params.validate();
    if (jumps.empty()) throw ValidationError("lamb_shift_kernel: no jump operators");
    const Eigen::Index d = jumps.front().dim();
    ComplexMatrix h = ComplexMatrix::Zero(d, d);
    for (const auto& bohr : jumps) {
        const ComplexMatrix& a = bohr.op();
        const Eigen::MatrixXi& cl = bohr.cluster_of();
        const RealVector& fr = bohr.frequencies();
        std::map<std::pair<int, int>, Complex> kernel;
        for (Eigen::Index j = 0; j < d; ++j) {
            for (Eigen::Index i = 0; i < d; ++i) {
                Complex acc = 0.0;
                for (Eigen::Index k = 0; k < d; ++k) {
                    const Complex amp = std::conj(a(k, i)) * a(k, j);
                    if (amp == Complex(0.0)) continue;
                    const auto key = std::make_pair(cl(k, j), cl(k, i));
                    auto it = kernel.find(key);
                    if (it == kernel.end()) {
                        it = kernel.emplace(key, lamb_shift_kernel_entry(params, fr(key.first), fr(key.second),
                                                                         quad_order)).first;
                    }
                    acc += it->second * amp;
                }
                h(i, j) += acc;
            }
        }
    }
    return h;
}

GeneratorSpec assemble(GeneratorKind kind, const SpinModel& model, const EigenSystem& eig,
                       const FilterParams& params, const JumpFamily& family, const AssembleOptions& opts) {
    params.validate();
    if (eig.dim() != model.dim()) throw ValidationError("assemble: eigensystem does not match model");
    std::vector<BohrDecomposition> bohrs;
    bohrs.reserve(family.size());
    for (std::size_t a = 0; a < family.size(); ++a) {
        if (family.operators[a].rows() != model.dim())
            throw ValidationError("assemble: jump operator dimension does not match model");
        bohrs.push_back(bohr_decompose(eig, family.operators[a], opts.tol_freq, family.labels[a]));
    }
    const bool truncated = kind == GeneratorKind::LocalDriving ||
                           (kind == GeneratorKind::DissipativeOnly && opts.dissipative_truncated);
    std::vector<ComplexMatrix> jumps;
    jumps.reserve(bohrs.size());
    for (const auto& b : bohrs)
        jumps.push_back(truncated ? filtered_jump_truncated(b, params, opts.quad_order) : filtered_jump_exact(b, params));

    ComplexMatrix coherent;
    switch (kind) {
        case GeneratorKind::ExactSampler: coherent = coherent_exact(eig, jumps, params, opts.tol_freq); break;
        case GeneratorKind::LocalDriving: coherent = lamb_shift(eig, bohrs, params, opts.quad_order); break;
        case GeneratorKind::DissipativeOnly: coherent = ComplexMatrix::Zero(eig.dim(), eig.dim()); break;
    }
    GeneratorSpec spec = make_generator(kind, std::move(jumps), std::move(coherent), params, model.label);
    spec.window_tail_bound = truncated ? filter_tail_mass(params) : 0.0;
    return spec;
}

ComplexMatrix generator_action(const GeneratorSpec& spec, const ComplexMatrix& rho) {
    const ComplexMatrix kr = spec.coherent * rho;
    const ComplexMatrix pr = spec.decay * rho;
    // Commutator and anticommutator use rho = rho^dagger. Each term is formed
    // as X + X^dagger so the output is Hermitian to the last bit, which keeps
    // long integrations from drifting off the Hermitian subspace.
    ComplexMatrix jump_sum = ComplexMatrix::Zero(rho.rows(), rho.cols());
    for (const auto& l : spec.jumps) jump_sum.noalias() += l * rho * l.adjoint();
    return -kI * (kr - kr.adjoint()) - 0.5 * (pr + pr.adjoint()) + 0.5 * (jump_sum + jump_sum.adjoint());
}

ComplexMatrix generator_matrix(const GeneratorSpec& spec) {
    const Eigen::Index d = spec.dim();
    if (d > kMaxDenseSuperopDim) {
        std::ostringstream os;
        os << "generator_matrix: system dimension " << d << " exceeds dense cap " << kMaxDenseSuperopDim
           << "; use action-based evolution instead";
        throw ValidationError(os.str());
    }
    const ComplexMatrix id = ComplexMatrix::Identity(d, d);
    ComplexMatrix m = -kI * (kron(id, spec.coherent) - kron(spec.coherent.transpose(), id));
    m -= 0.5 * (kron(id, spec.decay) + kron(spec.decay.transpose(), id));
    for (const auto& l : spec.jumps) m += kron(l.conjugate(), l);
    return m;
}

ComplexMatrix fixed_point(const GeneratorSpec& spec) {
    const Eigen::Index d = spec.dim();
    ComplexMatrix m = generator_matrix(spec);
    m.row(0).setZero();
    for (Eigen::Index i = 0; i < d; ++i) m(0, i + i * d) = 1.0;
    ComplexVector rhs = ComplexVector::Zero(d * d);
    rhs(0) = 1.0;
    ComplexVector x;
    try {
        x = solve_linear(m, rhs);
    } catch (const SingularMatrixError& e) {
        std::ostringstream os;
        os << "fixed_point: steady space appears degenerate (nullity estimate " << e.nullity_estimate() + 1
           << "): " << e.what();
        throw SingularMatrixError(os.str(), e.nullity_estimate() + 1);
    }
    ComplexMatrix rho = hermitian_part(unvec(x, d));
    rho /= rho.trace();
    const double residual = trace_norm(hermitian_part(generator_action(spec, rho)));
    if (residual > 1e-8) {
        std::ostringstream os;
        os << "fixed_point: residual ||L[rho]||_1 = " << residual << " exceeds 1e-8";
        throw NumericalError(os.str());
    }
    const double min_eig = herm_eigenvalues(rho).minCoeff();
    if (min_eig < -1e-9) {
        std::ostringstream os;
        os << "fixed_point: steady state has eigenvalue " << min_eig << " below -1e-9";
        throw NumericalError(os.str());
    }
    return rho;
}

void check_density_matrix(const ComplexMatrix& rho, const char* who) {
    const double tr_err = std::abs(rho.trace() - Complex(1.0));
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (tr_err > 1e-8 || herm > 1e-9) {
        std::ostringstream os;
        os << who << ": state drifted (|tr - 1| = " << tr_err << ", hermiticity defect " << herm << ")";
        throw NumericalError(os.str());
    }
    const double min_eig = herm_eigenvalues(hermitian_part(rho), 1e-6).minCoeff();
    if (min_eig < -1e-7) {
        std::ostringstream os;
        os << who << ": state lost positivity (min eigenvalue " << min_eig << ")";
        throw NumericalError(os.str());
    }
}

Trajectory evolve(const GeneratorSpec& spec, const ComplexMatrix& rho0, double t_end,
                  std::vector<double> sample_times, double rtol, double atol) {
    if (rho0.rows() != spec.dim() || rho0.cols() != spec.dim())
        throw ValidationError("evolve: initial state dimension mismatch");
    check_density_matrix(rho0, "evolve (initial state)");
    if (sample_times.empty()) sample_times.push_back(t_end);
    Trajectory traj;
    StepperConfig cfg;
    cfg.rtol = rtol;
    cfg.atol = atol;
    auto rhs = [&spec](const ComplexMatrix& r) { return generator_action(spec, r); };
    traj.states = integrate_linear(rhs, rho0, 0.0, t_end, cfg, sample_times, &traj.step_stats);
    traj.times.assign(sample_times.begin(), sample_times.begin() + static_cast<std::ptrdiff_t>(traj.states.size()));
    for (const auto& s : traj.states) check_density_matrix(s, "evolve");
    return traj;
}

ComplexMatrix propagate_dense(const GeneratorSpec& spec, const ComplexMatrix& rho, double t) {
    const ComplexMatrix m = generator_matrix(spec);
    const ComplexMatrix prop = (t * m).exp();
    return unvec(prop * vec(rho), spec.dim());
}

}  // namespace lds
