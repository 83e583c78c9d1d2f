// diagnostics.hpp - detailed-balance residuals, trajectory metrics, scaling
// sweeps, mixing-time proxy, coherent mismatch and the rewinding comparison.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lds/channel.hpp"
#include "lds/lindblad.hpp"
#include "lds/models.hpp"
#include "lds/spectral.hpp"

namespace lds {

inline constexpr std::uint64_t kDefaultSeed = 20240917;

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Least-squares fit of log(y) against log(x). Needs two or more points.
LinearFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct SweepResult {
    std::string axis_name;
    std::vector<double> axis_values;
    std::vector<double> measured;
    std::vector<double> reference_bound;  // empty when not applicable
    std::vector<bool> included;           // points used by the fit
    std::optional<LinearFit> fit;
};

// Ginibre-type random state G G^dagger / tr, deterministic for a seed.
ComplexMatrix random_density_matrix(Eigen::Index dim, std::uint64_t seed);

// ||rho^{-1/2} L rho^{1/2} - L^dagger||_inf with L and rho in the eigenbasis.
// NumericalError when a thermal weight is below 1e-300.
double kms_residual(const ComplexMatrix& jump, const ThermalState& thermal);

// ||L^dagger - Gamma^{-1} L Gamma||_{2->2} on the vectorized generator,
// Gamma[X] = rho^{1/2} X rho^{1/2}.
double kms_superoperator_residual(const GeneratorSpec& spec, const ThermalState& thermal);

struct TrajectoryRow {
    double time = 0.0;
    double delta_e = 0.0;         // <H - H_beta> / H_beta, or absolute when H_beta ~ 0
    double trace_distance = 0.0;  // ||rho - rho_beta||_1
    double stationarity = 0.0;    // ||L[rho]||_1, NaN without a generator
};

struct TrajectoryMetrics {
    std::vector<TrajectoryRow> rows;
    bool relative_energy = true;  // false: |H_beta| <= 1e-12, delta_e is absolute
    double thermal_energy = 0.0;
};

TrajectoryMetrics trajectory_metrics(const std::vector<double>& times, const std::vector<ComplexMatrix>& states,
                                     const EigenSystem& eig, const ThermalState& thermal,
                                     const GeneratorSpec* spec = nullptr);

struct SweepOptions {
    std::uint64_t seed = kDefaultSeed;
    int quad_order = 128;
    int n_steps_time = 0;  // isometry stepping, 0 = automatic
    UnitaryScheme scheme = UnitaryScheme::CommutatorFree4;
    double noise_floor = 1e-12;
};

// ||K[rho] - e^{J^2 L_T}[rho]||_1 for each J, on one random state; log-log
// fit over points above the noise floor (expected slope near 4).
SweepResult magnus_error_sweep(const SpinModel& model, const JumpFamily& family, const FilterParams& params,
                               const std::vector<double>& J_values, const SweepOptions& opts = {});

// ||rho_T - rho_inf||_1 between local-driving fixed points, rho_inf at the
// window cap. reference_bound holds (sigma/T) e^{beta^2/4sigma^2} e^{-T^2/2sigma^2}.
SweepResult finite_T_sweep(const SpinModel& model, const JumpFamily& family, const FilterParams& params,
                           const std::vector<double>& T_values, const SweepOptions& opts = {});

struct MixingOptions {
    double first_segment = 1.0;   // length of the first sampling segment
    double max_horizon = 1e8;
    int samples_per_segment = 64;
    double rtol = 1e-8;
    double atol = 1e-10;
};

struct MixingResult {
    double t_star = 0.0;    // first time with distance below threshold (or the horizon)
    bool reached = false;   // false: horizon exhausted, t_star is only a lower bound
    double threshold = 0.1;
    std::vector<double> times;      // sampled curve
    std::vector<double> distances;
};

// t* = min t with ||rho_beta - e^{tL}[I/D]||_1 < threshold, sampled on
// doubling segments and refined by bisection inside the crossing interval.
// t* lower-bounds the mixing time.
MixingResult mixing_proxy(const GeneratorSpec& spec, const ThermalState& thermal, double threshold = 0.1,
                          const MixingOptions& opts = {});

struct CoherentMismatch {
    double mismatch = 0.0;          // ||H_LS - G||_inf
    double almost_commuting = 0.0;  // ||rho^{-1/4} B rho^{1/4} - rho^{1/4} B rho^{-1/4}||_inf
    double lamb_shift_norm = 0.0;
    double g_norm = 0.0;
};

// B = H_LS (window cap) - G, both built from the same Bohr decompositions.
CoherentMismatch coherent_mismatch(const EigenSystem& eig, const std::vector<BohrDecomposition>& jumps,
                                   const FilterParams& params, int quad_order = 128);

struct RewindOptions {
    double eps_residual = 1e-10;
    std::size_t max_steps = 20000;
    double threshold = 0.1;
};

struct RewindReport {
    double delta = 0.0;           // ||rho_K - rho_beta||_1
    double delta_no_rewind = 0.0; // ||rho_K' - rho_beta||_1
    double ratio = 0.0;           // delta_no_rewind / delta
    bool converged = false;
    bool converged_no_rewind = false;
    std::size_t steps = 0;
    std::size_t steps_no_rewind = 0;
    // Channel mixing surrogates in cycles: first cycle with distance to the
    // channel fixed point below threshold, and the halving time of the tail.
    double t_star_cycles = 0.0;
    bool t_star_available = false;
    double tail_halving_cycles = 0.0;
    double bound = 0.0;  // 4 delta t*/ln 2
    bool bound_satisfied = false;
    ChannelRun run;
    ChannelRun run_no_rewind;
};

// Runs K and K' from the maximally mixed state with one shared isometry.
// ValidationError for J = 0 (both channels fix every state).
RewindReport rewinding_report(const ProtocolIsometry& iso, const ThermalState& thermal,
                              const RewindOptions& opts = {});

}  // namespace lds
