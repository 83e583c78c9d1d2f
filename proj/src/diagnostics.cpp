// diagnostics.cpp - residuals, metrics, sweeps and the mixing-time proxy

#include "lds/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "lds/error.hpp"
#include "lds/parallel.hpp"

namespace lds {

LinearFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ValidationError("fit_loglog: need two or more (x, y) pairs");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ValidationError("fit_loglog: values must be positive");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    const double vx = sxx - sx * sx / n;
    const double vy = syy - sy * sy / n;
    const double cxy = sxy - sx * sy / n;
    if (!(vx > 0.0)) throw ValidationError("fit_loglog: x values must not all coincide");
    LinearFit f;
    f.slope = cxy / vx;
    f.intercept = (sy - f.slope * sx) / n;
    f.r2 = vy > 0.0 ? (cxy * cxy) / (vx * vy) : 1.0;
    return f;
}

ComplexMatrix random_density_matrix(Eigen::Index dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    ComplexMatrix g(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i) g(i, j) = Complex(normal(rng), normal(rng));
    ComplexMatrix rho = hermitian_part(g * g.adjoint());
    return rho / rho.trace().real();
}

namespace {

void require_full_rank(const ThermalState& th, const char* who) {
    const double p_min = th.populations.minCoeff();
    if (p_min < 1e-300) {
        std::ostringstream os;
        os << who << ": thermal weight " << p_min << " underflows; beta is too large for this spectrum";
        throw NumericalError(os.str());
    }
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
    return trace_norm(hermitian_part(a - b));
}

}  // namespace

double kms_residual(const ComplexMatrix& jump, const ThermalState& thermal) {
    require_full_rank(thermal, "kms_residual");
    const RealVector& p = thermal.populations;
    if (jump.rows() != p.size()) throw ValidationError("kms_residual: dimension mismatch");
    ComplexMatrix conj = jump;
    for (Eigen::Index j = 0; j < jump.cols(); ++j)
        for (Eigen::Index i = 0; i < jump.rows(); ++i) conj(i, j) *= std::sqrt(p(j) / p(i));
    return spectral_norm(conj - jump.adjoint());
}

double kms_superoperator_residual(const GeneratorSpec& spec, const ThermalState& thermal) {
    require_full_rank(thermal, "kms_superoperator_residual");
    const ComplexMatrix m = generator_matrix(spec);
    const Eigen::Index d = spec.dim();
    const RealVector& p = thermal.populations;
    RealVector gamma(d * d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i) gamma(i + j * d) = std::sqrt(p(i) * p(j));
    ComplexMatrix diff = m.adjoint();
    for (Eigen::Index c = 0; c < d * d; ++c)
        for (Eigen::Index r = 0; r < d * d; ++r) diff(r, c) -= m(r, c) * (gamma(c) / gamma(r));
    return spectral_norm(diff);
}

TrajectoryMetrics trajectory_metrics(const std::vector<double>& times, const std::vector<ComplexMatrix>& states,
                                     const EigenSystem& eig, const ThermalState& thermal,
                                     const GeneratorSpec* spec) {
    if (times.size() != states.size()) throw ValidationError("trajectory_metrics: times and states differ in length");
    TrajectoryMetrics out;
    const RealVector& e = eig.values;
    out.thermal_energy = thermal.populations.dot(e);
    out.relative_energy = std::abs(out.thermal_energy) > 1e-12;
    out.rows.reserve(states.size());
    for (std::size_t k = 0; k < states.size(); ++k) {
        const ComplexMatrix& rho = states[k];
        TrajectoryRow row;
        row.time = times[k];
        const double energy = rho.diagonal().real().dot(e);
        row.delta_e = out.relative_energy ? (energy - out.thermal_energy) / out.thermal_energy
                                          : energy - out.thermal_energy;
        row.trace_distance = trace_distance(rho, thermal.rho);
        row.stationarity = spec ? trace_norm(generator_action(*spec, hermitian_part(rho)))
                                : std::numeric_limits<double>::quiet_NaN();
        out.rows.push_back(row);
    }
    return out;
}

namespace {

void require_sweep_axis(const std::vector<double>& v, const char* who, std::size_t min_points) {
    if (v.size() < min_points) {
        std::ostringstream os;
        os << who << ": need at least " << min_points << " axis values";
        throw ValidationError(os.str());
    }
    bool inc = true, dec = true;
    for (std::size_t i = 1; i < v.size(); ++i) {
        inc = inc && v[i] > v[i - 1];
        dec = dec && v[i] < v[i - 1];
    }
    if (!inc && !dec) throw ValidationError(std::string(who) + ": axis values must be strictly monotone");
}

std::vector<BohrDecomposition> decompose_family(const EigenSystem& eig, const JumpFamily& family) {
    std::vector<BohrDecomposition> out;
    out.reserve(family.size());
    for (std::size_t a = 0; a < family.size(); ++a)
        out.push_back(bohr_decompose(eig, family.operators[a], 0.0, family.labels[a]));
    return out;
}

}  // namespace

SweepResult magnus_error_sweep(const SpinModel& model, const JumpFamily& family, const FilterParams& params,
                               const std::vector<double>& J_values, const SweepOptions& opts) {
    params.validate();
    require_sweep_axis(J_values, "magnus_error_sweep", 4);
    const auto [jmin, jmax] = std::minmax_element(J_values.begin(), J_values.end());
    if (!(*jmin > 0.0)) throw ValidationError("magnus_error_sweep: J values must be > 0");
    if (*jmax < 2.0 * *jmin) throw ValidationError("magnus_error_sweep: J values must span at least one octave");

    const EigenSystem eig = herm_eig(model.hamiltonian);
    const auto bohrs = decompose_family(eig, family);
    AssembleOptions aopt;
    aopt.quad_order = opts.quad_order;
    const GeneratorSpec spec = assemble(GeneratorKind::LocalDriving, model, eig, params, family, aopt);
    const ComplexMatrix rho = random_density_matrix(eig.dim(), opts.seed);

    SweepResult out;
    out.axis_name = "J";
    out.axis_values = J_values;
    out.measured.assign(J_values.size(), 0.0);
    parallel_for(J_values.size(), [&](std::size_t i) {
        ChannelConfig cfg;
        cfg.params = params;
        cfg.J = J_values[i];
        cfg.n_steps_time = opts.n_steps_time;
        cfg.scheme = opts.scheme;
        const ProtocolIsometry iso = build_isometry(eig, bohrs, cfg);
        const double tau = cfg.J * cfg.J;
        const ComplexMatrix ref = spec.dim() <= kMaxDenseSuperopDim
                                      ? propagate_dense(spec, rho, tau)
                                      : evolve(spec, rho, tau, {}, 1e-12, 1e-14).states.back();
        out.measured[i] = trace_distance(apply_channel(iso, rho), ref);
    });

    // Points at the noise floor, or ones that fail to shrink with J while
    // already tiny, carry no scaling information.
    std::vector<std::size_t> order(J_values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return J_values[a] > J_values[b]; });
    out.included.assign(J_values.size(), true);
    for (std::size_t r = 0; r < order.size(); ++r) {
        const std::size_t i = order[r];
        if (out.measured[i] <= opts.noise_floor) out.included[i] = false;
        if (r > 0 && out.measured[i] >= out.measured[order[r - 1]] && out.measured[i] < 1e3 * opts.noise_floor)
            out.included[i] = false;
    }
    std::vector<double> fx, fy;
    for (std::size_t i = 0; i < J_values.size(); ++i) {
        if (!out.included[i]) continue;
        fx.push_back(J_values[i]);
        fy.push_back(out.measured[i]);
    }
    if (fx.size() >= 2) out.fit = fit_loglog(fx, fy);
    return out;
}

SweepResult finite_T_sweep(const SpinModel& model, const JumpFamily& family, const FilterParams& params,
                           const std::vector<double>& T_values, const SweepOptions& opts) {
    params.validate();
    require_sweep_axis(T_values, "finite_T_sweep", 2);
    for (double T : T_values)
        if (T < 2.0 * params.sigma) throw ValidationError("finite_T_sweep: every T must be >= 2 sigma");

    const EigenSystem eig = herm_eig(model.hamiltonian);
    AssembleOptions aopt;
    aopt.quad_order = opts.quad_order;
    const ComplexMatrix rho_inf =
        fixed_point(assemble(GeneratorKind::LocalDriving, model, eig, params.capped(), family, aopt));

    SweepResult out;
    out.axis_name = "T";
    out.axis_values = T_values;
    out.measured.assign(T_values.size(), 0.0);
    out.reference_bound.assign(T_values.size(), 0.0);
    out.included.assign(T_values.size(), true);
    const double b = params.beta, s = params.sigma;
    parallel_for(T_values.size(), [&](std::size_t i) {
        FilterParams p = params;
        p.T_window = T_values[i];
        const ComplexMatrix rho_t = fixed_point(assemble(GeneratorKind::LocalDriving, model, eig, p, family, aopt));
        out.measured[i] = trace_distance(rho_t, rho_inf);
        const double T = T_values[i];
        out.reference_bound[i] = (s / T) * std::exp(b * b / (4.0 * s * s) - T * T / (2.0 * s * s));
    });
    return out;
}

MixingResult mixing_proxy(const GeneratorSpec& spec, const ThermalState& thermal, double threshold,
                          const MixingOptions& opts) {
    if (!(threshold > 0.0 && threshold < 2.0)) throw ValidationError("mixing_proxy: threshold must lie in (0, 2)");
    if (!(opts.first_segment > 0.0) || !(opts.max_horizon >= opts.first_segment) || opts.samples_per_segment < 2)
        throw ValidationError("mixing_proxy: invalid sampling options");
    const Eigen::Index d = spec.dim();
    MixingResult out;
    out.threshold = threshold;
    ComplexMatrix rho = ComplexMatrix::Identity(d, d) / static_cast<double>(d);
    double dist = trace_distance(rho, thermal.rho);
    out.times.push_back(0.0);
    out.distances.push_back(dist);
    if (dist < threshold) {
        out.reached = true;
        out.t_star = 0.0;
        return out;
    }
    StepperConfig cfg;
    cfg.rtol = opts.rtol;
    cfg.atol = opts.atol;
    auto rhs = [&spec](const ComplexMatrix& r) { return generator_action(spec, r); };

    double t_a = 0.0, seg = opts.first_segment;
    while (t_a < opts.max_horizon) {
        const double t_b = std::min(t_a + seg, opts.max_horizon);
        std::vector<double> samples;
        for (int k = 1; k <= opts.samples_per_segment; ++k)
            samples.push_back(t_a + (t_b - t_a) * k / opts.samples_per_segment);
        samples.back() = t_b;
        double t_prev = t_a;
        ComplexMatrix rho_prev = rho;
        bool crossed = false;
        double t_cross = t_b;
        auto observer = [&](double t, const ComplexMatrix& y) {
            const double dy = trace_distance(y, thermal.rho);
            out.times.push_back(t);
            out.distances.push_back(dy);
            if (dy < threshold) {
                crossed = true;
                t_cross = t;
                return false;
            }
            t_prev = t;
            rho_prev = y;
            return true;
        };
        const auto states = integrate_linear(rhs, rho, t_a, t_b, cfg, samples, nullptr, observer);
        if (crossed) {
            // Bisection between the last sample above threshold and the first below it.
            double lo = t_prev, hi = t_cross;
            for (int it = 0; it < 60 && hi - lo > 1e-10 * std::max(hi, 1.0); ++it) {
                const double mid = 0.5 * (lo + hi);
                const ComplexMatrix y = integrate_linear(rhs, rho_prev, lo, mid, cfg, {}).back();
                if (trace_distance(y, thermal.rho) < threshold) {
                    hi = mid;
                } else {
                    lo = mid;
                    rho_prev = y;
                }
            }
            out.t_star = hi;
            out.reached = true;
            return out;
        }
        rho = states.back();
        check_density_matrix(rho, "mixing_proxy");
        t_a = t_b;
        seg *= 2.0;
    }
    out.t_star = opts.max_horizon;
    out.reached = false;
    return out;
}

CoherentMismatch coherent_mismatch(const EigenSystem& eig, const std::vector<BohrDecomposition>& jumps,
                                   const FilterParams& params, int quad_order) {
    params.validate();
    std::vector<ComplexMatrix> exact;
    exact.reserve(jumps.size());
    for (const auto& b : jumps) exact.push_back(filtered_jump_exact(b, params));
    const ComplexMatrix g = coherent_exact(eig, exact, params);
    const ComplexMatrix hls = lamb_shift(eig, jumps, params.capped(), quad_order);
    const ComplexMatrix bmat = hls - g;
    CoherentMismatch out;
    out.mismatch = schatten_norm(bmat, Schatten::Inf, true);
    out.lamb_shift_norm = schatten_norm(hls, Schatten::Inf, true);
    out.g_norm = schatten_norm(g, Schatten::Inf, true);

    const ThermalState th = thermal_state(eig, params.beta);
    require_full_rank(th, "coherent_mismatch");
    const RealVector q = th.populations.array().pow(0.25);
    ComplexMatrix ac(bmat.rows(), bmat.cols());
    for (Eigen::Index j = 0; j < bmat.cols(); ++j)
        for (Eigen::Index i = 0; i < bmat.rows(); ++i) ac(i, j) = bmat(i, j) * (q(j) / q(i) - q(i) / q(j));
    // ac is anti-Hermitian; i * ac is Hermitian with the same norm.
    out.almost_commuting = schatten_norm(hermitian_part(kI * ac), Schatten::Inf, true);
    return out;
}

namespace {

// Halving time (in cycles) of the late-time distance to the fixed point,
// from a log-linear fit over the tail of the curve above the residual floor.
double tail_halving_time(const std::vector<double>& dist) {
    std::vector<double> k, y;
    const double floor = 1e-9;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist[i] <= floor) break;
        k.push_back(static_cast<double>(i));
        y.push_back(std::log(dist[i]));
    }
    if (k.size() < 4) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t start = k.size() / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(k.size() - start);
    for (std::size_t i = start; i < k.size(); ++i) {
        sx += k[i];
        sy += y[i];
        sxx += k[i] * k[i];
        sxy += k[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    if (!(slope < 0.0)) return std::numeric_limits<double>::infinity();
    return std::log(2.0) / -slope;
}

}  // namespace

RewindReport rewinding_report(const ProtocolIsometry& iso, const ThermalState& thermal, const RewindOptions& opts) {
    if (iso.config.J == 0.0)
        throw ValidationError("rewinding_report: J = 0 makes both channels the identity (no unique fixed point)");
    if (!(opts.threshold > 0.0 && opts.threshold < 2.0))
        throw ValidationError("rewinding_report: threshold must lie in (0, 2)");
    const Eigen::Index d = iso.dim_sys;
    const ComplexMatrix rho0 = ComplexMatrix::Identity(d, d) / static_cast<double>(d);
    const double dtau = iso.config.J * iso.config.J;
    RewindReport rep;
    rep.run = iterate_to_convergence([&iso](const ComplexMatrix& r) { return apply_channel(iso, r); }, rho0,
                                     opts.eps_residual, opts.max_steps, dtau);
    rep.run_no_rewind = iterate_to_convergence(
        [&iso](const ComplexMatrix& r) { return apply_channel_no_rewind(iso, r); }, rho0, opts.eps_residual,
        opts.max_steps, dtau);
    rep.converged = rep.run.converged;
    rep.converged_no_rewind = rep.run_no_rewind.converged;
    rep.steps = rep.run.steps;
    rep.steps_no_rewind = rep.run_no_rewind.steps;
    rep.delta = trace_distance(rep.run.state, thermal.rho);
    rep.delta_no_rewind = trace_distance(rep.run_no_rewind.state, thermal.rho);
    rep.ratio = rep.delta > 0.0 ? rep.delta_no_rewind / rep.delta : std::numeric_limits<double>::infinity();

    std::vector<double> to_fixed;
    to_fixed.reserve(rep.run.states.size());
    for (const auto& s : rep.run.states) to_fixed.push_back(trace_distance(s, rep.run.state));
    for (std::size_t k = 0; k < to_fixed.size(); ++k) {
        if (to_fixed[k] < opts.threshold) {
            rep.t_star_cycles = static_cast<double>(k);
            rep.t_star_available = rep.converged;
            break;
        }
    }
    rep.tail_halving_cycles = tail_halving_time(to_fixed);
    if (rep.t_star_available) {
        rep.bound = 4.0 * rep.delta * rep.t_star_cycles / std::numbers::ln2;
        rep.bound_satisfied = rep.delta_no_rewind <= rep.bound;
    }
    return rep;
}

}  // namespace lds
