// channel.cpp - protocol isometry, channels, Magnus channel, iteration

#include "lds/channel.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lds/error.hpp"
#include "lds/lindblad.hpp"
#include "lds/quadrature.hpp"

namespace lds {

void ChannelConfig::validate() const {
    params.validate();
    if (!std::isfinite(J) || J < 0.0) throw ValidationError("channel: J must be finite and >= 0");
    if (n_steps_time < 0) throw ValidationError("channel: n_steps_time must be >= 0 (0 = automatic)");
    if (!(step_tol > 0.0)) throw ValidationError("channel: step_tol must be > 0");
}

std::vector<std::string> ChannelConfig::warnings() const {
    std::vector<std::string> out = params.warnings();
    if (J * J > 0.5) {
        std::ostringstream os;
        os << "J^2 = " << J * J << " exceeds 0.5; the cycle is no longer a short Lindbladian time step";
        out.push_back(os.str());
    }
    return out;
}

ComplexMatrix ancilla_lowering(int a, int m) {
    if (m < 1 || a < 0 || a >= m) throw ValidationError("ancilla_lowering: ancilla index out of range");
    const Eigen::Index d = Eigen::Index(1) << m;
    const Eigen::Index bit = Eigen::Index(1) << (m - 1 - a);
    ComplexMatrix out = ComplexMatrix::Zero(d, d);
    for (Eigen::Index b = 0; b < d; ++b)
        if (b & bit) out(b & ~bit, b) = 1.0;
    return out;
}

namespace {

// J sum_a (B_a^dag (x) X_a + B_a (x) X_a^dag), assembled block by block.
ComplexMatrix ancilla_coupling(const std::vector<ComplexMatrix>& xs, double J) {
    const int m = static_cast<int>(xs.size());
    const Eigen::Index ds = xs.front().rows();
    const Eigen::Index db = Eigen::Index(1) << m;
    if (db * ds > kMaxCombinedDim) {
        std::ostringstream os;
        os << "channel: combined dimension " << db * ds << " exceeds cap " << kMaxCombinedDim;
        throw ValidationError(os.str());
    }
    ComplexMatrix h = ComplexMatrix::Zero(db * ds, db * ds);
    for (int a = 0; a < m; ++a) {
        const Eigen::Index bit = Eigen::Index(1) << (m - 1 - a);
        const ComplexMatrix x = J * xs[static_cast<std::size_t>(a)];
        const ComplexMatrix xd = x.adjoint();
        for (Eigen::Index b = 0; b < db; ++b) {
            if (b & bit) continue;
            const Eigen::Index up = b | bit;
            h.block(up * ds, b * ds, ds, ds) += x;   // B^dag raises ancilla a
            h.block(b * ds, up * ds, ds, ds) += xd;  // B lowers it
        }
    }
    return h;
}

void require_jumps(const std::vector<BohrDecomposition>& jumps, const char* who) {
    if (jumps.empty()) throw ValidationError(std::string(who) + ": no jump operators");
    for (const auto& j : jumps)
        if (j.dim() != jumps.front().dim()) throw ValidationError(std::string(who) + ": jump dimension mismatch");
}

// Columns |0..0>_B (x) |k>_S.
ComplexMatrix bath_vacuum_columns(Eigen::Index dim_bath, Eigen::Index ds) {
    ComplexMatrix psi = ComplexMatrix::Zero(dim_bath * ds, ds);
    psi.topRows(ds).setIdentity();
    return psi;
}

ComplexMatrix trace_out_bath(const ComplexMatrix& v, Eigen::Index ds, const ComplexMatrix& rho) {
    if (rho.rows() != ds || rho.cols() != ds) throw ValidationError("channel: state dimension mismatch");
    const Eigen::Index nb = v.rows() / ds;
    ComplexMatrix out = ComplexMatrix::Zero(ds, ds);
    for (Eigen::Index b = 0; b < nb; ++b) {
        const auto vb = v.middleRows(b * ds, ds);
        out.noalias() += vb * rho * vb.adjoint();
    }
    return out;
}

double isometry_defect(const ComplexMatrix& v) {
    const ComplexMatrix gram = v.adjoint() * v;
    return max_row_sum(gram - ComplexMatrix::Identity(gram.rows(), gram.cols()));
}

}  // namespace

ComplexMatrix interaction_hamiltonian(const std::vector<BohrDecomposition>& jumps, const FilterParams& p,
                                      double J, double t) {
    require_jumps(jumps, "interaction_hamiltonian");
    const Complex ft = filter_time(p, t);
    std::vector<ComplexMatrix> xs;
    xs.reserve(jumps.size());
    for (const auto& b : jumps) xs.push_back(ft * b.heisenberg(t));
    return ancilla_coupling(xs, J);
}

ProtocolIsometry build_isometry(const EigenSystem& eig, const std::vector<BohrDecomposition>& jumps,
                                const ChannelConfig& cfg) {
    cfg.validate();
    require_jumps(jumps, "build_isometry");
    if (jumps.front().dim() != eig.dim()) throw ValidationError("build_isometry: jumps do not match the model");
    ProtocolIsometry iso;
    iso.config = cfg;
    iso.n_ancillas = static_cast<int>(jumps.size());
    iso.dim_sys = eig.dim();
    iso.energies = eig.values;
    if (iso.n_ancillas > 16 || iso.dim_bath() * iso.dim_sys > kMaxCombinedDim) {
        std::ostringstream os;
        os << "build_isometry: bath x system dimension exceeds cap " << kMaxCombinedDim;
        throw ValidationError(os.str());
    }
    const ComplexMatrix psi0 = bath_vacuum_columns(iso.dim_bath(), iso.dim_sys);
    if (cfg.J == 0.0) {
        iso.matrix = psi0;
        iso.n_steps_used = 0;
        return iso;
    }

    const FilterParams& p = cfg.params;
    const double half = 0.5 * p.T_window;
    HamiltonianFn h_of_t = [&](double t) { return interaction_hamiltonian(jumps, p, cfg.J, t); };

    if (cfg.n_steps_time > 0) {
        iso.matrix = unitary_propagate(h_of_t, psi0, -half, half, cfg.n_steps_time, cfg.scheme);
        iso.n_steps_used = cfg.n_steps_time;
        iso.step_doubling_error = std::numeric_limits<double>::quiet_NaN();
    } else {
        int n = static_cast<int>(std::ceil(p.T_window / (p.sigma / 64.0)));
        ComplexMatrix coarse = unitary_propagate(h_of_t, psi0, -half, half, n, cfg.scheme);
        constexpr int kMaxRefinements = 4;
        // Richardson estimate of the error left in the finer solution.
        const double order = cfg.scheme == UnitaryScheme::CommutatorFree4 ? 4.0 : 2.0;
        const double shrink = std::pow(2.0, order) - 1.0;
        for (int r = 0;; ++r) {
            ComplexMatrix fine = unitary_propagate(h_of_t, psi0, -half, half, 2 * n, cfg.scheme);
            const double err = (fine - coarse).norm() / shrink;
            n *= 2;
            iso.matrix = std::move(fine);
            iso.step_doubling_error = err;
            if (err <= cfg.step_tol) break;
            if (r + 1 == kMaxRefinements) {
                std::ostringstream os;
                os << "build_isometry: step doubling did not reach " << cfg.step_tol << " (last change " << err
                   << " at " << n << " steps)";
                throw NumericalError(os.str());
            }
            coarse = iso.matrix;
        }
        iso.n_steps_used = n;
    }
    iso.isometry_residual = isometry_defect(iso.matrix);
    if (iso.isometry_residual > 1e-8) {
        std::ostringstream os;
        os << "build_isometry: ||V^dag V - I|| = " << iso.isometry_residual << " exceeds 1e-8";
        throw NumericalError(os.str());
    }
    return iso;
}

ProtocolIsometry build_isometry(const SpinModel& model, const JumpFamily& family, const ChannelConfig& cfg) {
    const EigenSystem eig = herm_eig(model.hamiltonian);
    std::vector<BohrDecomposition> bohrs;
    for (std::size_t a = 0; a < family.size(); ++a)
        bohrs.push_back(bohr_decompose(eig, family.operators[a], 0.0, family.labels[a]));
    return build_isometry(eig, bohrs, cfg);
}

ComplexMatrix apply_channel(const ProtocolIsometry& iso, const ComplexMatrix& rho) {
    return trace_out_bath(iso.matrix, iso.dim_sys, rho);
}

ComplexMatrix apply_channel_no_rewind(const ProtocolIsometry& iso, const ComplexMatrix& rho) {
    const double T = iso.config.params.T_window;
    const ComplexVector phase = (iso.energies * (-T)).unaryExpr([](double x) { return std::exp(kI * x); });
    const ComplexMatrix k = apply_channel(iso, rho);
    return phase.asDiagonal() * k * phase.conjugate().asDiagonal();
}

ComplexMatrix apply_configured(const ProtocolIsometry& iso, const ComplexMatrix& rho) {
    return iso.config.rewind ? apply_channel(iso, rho) : apply_channel_no_rewind(iso, rho);
}

namespace {

ComplexMatrix magnus_second_with_order(const std::vector<BohrDecomposition>& jumps, const FilterParams& p,
                                       double J, int order) {
    const double a = -0.5 * p.T_window;
    const auto outer = gauss_legendre(order, a, -a);
    const auto ref = gauss_legendre(order);
    const Eigen::Index dt = (Eigen::Index(1) << jumps.size()) * jumps.front().dim();
    ComplexMatrix acc = ComplexMatrix::Zero(dt, dt);
    std::vector<ComplexMatrix> partial(jumps.size());
    for (std::size_t q = 0; q < outer.size(); ++q) {
        const double t1 = outer.nodes[q];
        const double half = 0.5 * (t1 - a), mid = 0.5 * (t1 + a);
        for (std::size_t j = 0; j < jumps.size(); ++j) {
            // P(t1) = int_{-T/2}^{t1} f(t2) A(t2) dt2, per Bohr cluster
            partial[j] = jumps[j].weighted([&](double nu) {
                Complex s = 0.0;
                for (std::size_t k = 0; k < ref.size(); ++k) {
                    const double t2 = mid + half * ref.nodes[k];
                    s += ref.weights[k] * filter_time(p, t2) * std::exp(kI * (nu * t2));
                }
                return half * s;
            });
        }
        const ComplexMatrix h1 = interaction_hamiltonian(jumps, p, J, t1);
        const ComplexMatrix c1 = ancilla_coupling(partial, J);
        const ComplexMatrix prod = h1 * c1;
        acc += outer.weights[q] * (prod - prod.adjoint());
    }
    return (-0.5 * kI) * acc;
}

}  // namespace

MagnusTerms magnus_terms(const std::vector<BohrDecomposition>& jumps, const FilterParams& p, double J,
                         int quad_order) {
    p.validate();
    require_jumps(jumps, "magnus_terms");
    if (!std::isfinite(J) || J < 0.0) throw ValidationError("magnus_terms: J must be finite and >= 0");
    if (quad_order < 32) throw ValidationError("magnus_terms: quad_order must be >= 32");
    MagnusTerms out;
    out.n_ancillas = static_cast<int>(jumps.size());
    out.dim_sys = jumps.front().dim();
    std::vector<ComplexMatrix> ls;
    for (const auto& b : jumps) ls.push_back(filtered_jump_truncated(b, p, quad_order));
    out.first = ancilla_coupling(ls, J);
    const ComplexMatrix coarse = magnus_second_with_order(jumps, p, J, quad_order);
    const ComplexMatrix fine = magnus_second_with_order(jumps, p, J, 2 * quad_order);
    const double scale = max_row_sum(fine);
    const double diff = max_row_sum(coarse - fine);
    if (diff > 1e-8 * std::max(scale, 1e-300) && diff > 1e-14) {
        std::ostringstream os;
        os << "magnus_terms: second-order term changes by " << diff << " (relative " << diff / scale
           << ") under order doubling; increase quad_order";
        throw NumericalError(os.str());
    }
    out.second = hermitian_part(fine);
    return out;
}

ComplexMatrix magnus_channel(const MagnusTerms& terms, const ComplexMatrix& rho, bool include_second) {
    const Eigen::Index db = Eigen::Index(1) << terms.n_ancillas;
    const ComplexMatrix psi0 = bath_vacuum_columns(db, terms.dim_sys);
    const ComplexMatrix h = include_second ? ComplexMatrix(terms.first + terms.second) : terms.first;
    const ComplexMatrix v = apply_hermitian_exponential(h, 1.0, psi0);
    return trace_out_bath(v, terms.dim_sys, rho);
}

ComplexMatrix choi_matrix(const ChannelMap& channel, Eigen::Index dim) {
    if (dim < 1) throw ValidationError("choi_matrix: dimension must be >= 1");
    if (dim * dim > kMaxCombinedDim) throw ValidationError("choi_matrix: dimension exceeds cap");
    ComplexMatrix choi = ComplexMatrix::Zero(dim * dim, dim * dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            ComplexMatrix e = ComplexMatrix::Zero(dim, dim);
            e(i, j) = 1.0;
            choi.block(i * dim, j * dim, dim, dim) = channel(e);
        }
    }
    return choi;
}

ChannelRun iterate_to_convergence(const ChannelMap& step, const ComplexMatrix& rho0, double eps_residual,
                                  std::size_t max_steps, double dtau, bool keep_states) {
    if (!(eps_residual > 0.0)) throw ValidationError("iterate_to_convergence: eps_residual must be > 0");
    if (max_steps < 1) throw ValidationError("iterate_to_convergence: max_steps must be >= 1");
    check_density_matrix(rho0, "iterate_to_convergence (initial state)");
    ChannelRun run;
    ComplexMatrix rho = rho0;
    run.times.push_back(0.0);
    if (keep_states) run.states.push_back(rho);
    for (std::size_t k = 0; k < max_steps; ++k) {
        ComplexMatrix next = step(rho);
        const double tr_err = std::abs(next.trace() - rho.trace());
        if (tr_err > 1e-9) {
            std::ostringstream os;
            os << "iterate_to_convergence: one application changed the trace by " << tr_err << " at step " << k + 1;
            throw NumericalError(os.str());
        }
        check_density_matrix(next, "iterate_to_convergence");
        // per-step trace error is certified above; renormalizing keeps it from accumulating
        next = hermitian_part(next);
        next /= next.trace().real();
        const double residual = trace_norm(next - rho);
        run.residuals.push_back(residual);
        if (residual <= eps_residual) {
            run.converged = true;
            run.steps = k;
            run.final_residual = residual;
            run.state = std::move(next);
            return run;
        }
        rho = std::move(next);
        run.times.push_back(static_cast<double>(k + 1) * dtau);
        if (keep_states) run.states.push_back(rho);
        run.steps = k + 1;
        run.final_residual = residual;
    }
    run.state = rho;
    return run;
}

}  // namespace lds
