// ode.hpp - adaptive Dormand-Prince 5(4) for autonomous linear ODEs and a
// norm-preserving propagator for time-dependent Schrodinger equations.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include "lds/error.hpp"
#include "lds/linalg.hpp"

namespace lds {

struct StepperConfig {
    double rtol = 1e-8;
    double atol = 1e-10;
    double initial_step = 0.0;  // 0 selects a heuristic first step
    double max_step = std::numeric_limits<double>::infinity();
    double safety = 0.9;

    void validate() const {
        if (!(rtol > 0.0) || !(atol > 0.0)) throw ValidationError("stepper: rtol and atol must be > 0");
        if (!(safety > 0.0 && safety < 1.0)) throw ValidationError("stepper: safety must lie in (0, 1)");
        if (!(max_step > 0.0)) throw ValidationError("stepper: max_step must be > 0");
        if (initial_step < 0.0) throw ValidationError("stepper: initial_step must be >= 0");
    }
};

struct StepStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
    double min_step = std::numeric_limits<double>::infinity();
    double max_step = 0.0;
    double max_error_estimate = 0.0;  // largest scaled error of an accepted step
};

namespace detail {

// Dormand & Prince (1980) tableau with Hairer's dense-output coefficients.
struct DoPri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

template <class State>
double scaled_error(const State& err, const State& y0, const State& y1, double rtol, double atol) {
    const auto scale = (atol + rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array());
    const double sq = (err.cwiseAbs().array() / scale).square().sum();
    return std::sqrt(sq / static_cast<double>(err.size()));
}

}  // namespace detail

// Integrate y' = rhs(y) from t0 to t1 and return y at each requested sample
// time (ascending, inside [t0, t1]) by dense output.  `observer(t, y)` is
// called at every sample; returning false stops the integration early and the
// returned vector then holds only the samples seen so far.  With no samples
// the single returned state is y(t1).
template <class State, class Rhs, class Observer>
std::vector<State> integrate_linear(Rhs&& rhs, const State& y0, double t0, double t1,
                                    const StepperConfig& cfg, const std::vector<double>& samples,
                                    StepStats* stats, Observer&& observer) {
    using P = detail::DoPri5;
    cfg.validate();
    if (!(t1 > t0)) throw ValidationError("integrate_linear: t1 must exceed t0");
    for (std::size_t k = 0; k < samples.size(); ++k) {
        if (samples[k] < t0 || samples[k] > t1 || (k > 0 && samples[k] < samples[k - 1]))
            throw ValidationError("integrate_linear: samples must be ascending inside [t0, t1]");
    }
    StepStats local;
    StepStats& st = stats ? *stats : local;

    std::vector<State> out;
    out.reserve(samples.size());
    std::size_t next = 0;
    while (next < samples.size() && samples[next] <= t0) {
        out.push_back(y0);
        if (!observer(samples[next], out.back())) return out;
        ++next;
    }

    const double span = t1 - t0;
    const double h_floor = 1e-12 * span;
    State y = y0;
    State k1 = rhs(y);
    ++st.rhs_evals;

    double h = cfg.initial_step;
    if (h <= 0.0) {
        const double yn = y.norm();
        const double fn = k1.norm();
        h = (fn > 0.0 && yn > 0.0) ? 0.01 * yn / fn : 1e-3 * span;
    }
    h = std::min({h, cfg.max_step, span});

    constexpr double beta = 0.04;
    const double expo1 = 0.2 - 0.75 * beta;
    double facold = 1e-4;
    double t = t0;
    bool last_rejected = false;

    while (t < t1) {
        if (t + h > t1) h = t1 - t;
        if (h < h_floor && t + h < t1) {
            std::ostringstream os;
            os << "integrate_linear: step size " << h << " underflowed below " << h_floor << " at t = " << t
               << " (accepted " << st.accepted << ", rejected " << st.rejected << ")";
            throw StiffnessError(os.str());
        }
        const State k2 = rhs(y + h * (P::a21 * k1));
        const State k3 = rhs(y + h * (P::a31 * k1 + P::a32 * k2));
        const State k4 = rhs(y + h * (P::a41 * k1 + P::a42 * k2 + P::a43 * k3));
        const State k5 = rhs(y + h * (P::a51 * k1 + P::a52 * k2 + P::a53 * k3 + P::a54 * k4));
        const State k6 = rhs(y + h * (P::a61 * k1 + P::a62 * k2 + P::a63 * k3 + P::a64 * k4 + P::a65 * k5));
        const State y_new = y + h * (P::a71 * k1 + P::a73 * k3 + P::a74 * k4 + P::a75 * k5 + P::a76 * k6);
        const State k7 = rhs(y_new);
        st.rhs_evals += 6;
        const State err_vec = h * (P::e1 * k1 + P::e3 * k3 + P::e4 * k4 + P::e5 * k5 + P::e6 * k6 + P::e7 * k7);
        const double err = detail::scaled_error(err_vec, y, y_new, cfg.rtol, cfg.atol);

        const double fac11 = std::pow(std::max(err, 1e-300), expo1);
        if (err <= 1.0) {
            double fac = fac11 / std::pow(facold, beta);
            fac = std::clamp(fac / cfg.safety, 0.1, 5.0);  // step growth limited to 10x
            facold = std::max(err, 1e-4);
            ++st.accepted;
            st.min_step = std::min(st.min_step, h);
            st.max_step = std::max(st.max_step, h);
            st.max_error_estimate = std::max(st.max_error_estimate, err);

            const double t_new = t + h;
            if (next < samples.size() && samples[next] <= t_new) {
                const State ydiff = y_new - y;
                const State bspl = h * k1 - ydiff;
                const State r4 = ydiff - h * k7 - bspl;
                const State r5 = h * (P::d1 * k1 + P::d3 * k3 + P::d4 * k4 + P::d5 * k5 + P::d6 * k6 + P::d7 * k7);
                while (next < samples.size() && samples[next] <= t_new) {
                    const double theta = (samples[next] - t) / h;
                    const double theta1 = 1.0 - theta;
                    out.push_back(y + theta * (ydiff + theta1 * (bspl + theta * (r4 + theta1 * r5))));
                    if (!observer(samples[next], out.back())) return out;
                    ++next;
                }
            }
            y = y_new;
            k1 = k7;
            t = t_new;
            double h_new = h / fac;
            if (last_rejected) h_new = std::min(h_new, h);
            h = std::min(h_new, cfg.max_step);
            last_rejected = false;
            if (next >= samples.size() && !samples.empty()) break;
        } else {
            ++st.rejected;
            h = h / std::min(10.0, fac11 / cfg.safety);
            last_rejected = true;
        }
    }
    if (samples.empty()) out.push_back(y);
    return out;
}

template <class State, class Rhs>
std::vector<State> integrate_linear(Rhs&& rhs, const State& y0, double t0, double t1,
                                    const StepperConfig& cfg, const std::vector<double>& samples,
                                    StepStats* stats = nullptr) {
    return integrate_linear(std::forward<Rhs>(rhs), y0, t0, t1, cfg, samples, stats,
                            [](double, const State&) { return true; });
}

enum class UnitaryScheme {
    Midpoint,        // exp(-i dt H(t_mid)), second order
    CommutatorFree4  // two exponentials at the Gauss nodes, fourth order
};

using HamiltonianFn = std::function<ComplexMatrix(double)>;

// Propagate the columns of psi0 under i d/dt psi = H(t) psi over [t0, t1]
// with n_steps uniform steps. Every exponential is formed from a Hermitian
// eigendecomposition, so column norms are preserved to rounding; a drift
// beyond 1e-8 raises NumericalError.
ComplexMatrix unitary_propagate(const HamiltonianFn& h_of_t, const ComplexMatrix& psi0, double t0,
                                double t1, int n_steps,
                                UnitaryScheme scheme = UnitaryScheme::Midpoint);

// exp(-i dt H) applied to psi, H Hermitian.
ComplexMatrix apply_hermitian_exponential(const ComplexMatrix& h, double dt, const ComplexMatrix& psi);

}  // namespace lds
