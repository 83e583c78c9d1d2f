// channel.hpp - system + ancilla protocol: interaction-picture isometry,
// the channel K (with rewinding) and K' (without), the second-order Magnus
// channel and fixed-point iteration.
//
// Tensor order is bath (slow) x system (fast); ancilla 0 is the slowest bath
// qubit. System operators are in the Hamiltonian eigenbasis.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lds/linalg.hpp"
#include "lds/models.hpp"
#include "lds/ode.hpp"
#include "lds/spectral.hpp"

namespace lds {

struct ChannelConfig {
    FilterParams params;
    double J = 0.5;        // coupling; one cycle corresponds to Lindbladian time J^2
    int n_steps_time = 0;  // 0: automatic (dt <= sigma/64, refined by step doubling)
    bool rewind = true;
    UnitaryScheme scheme = UnitaryScheme::CommutatorFree4;
    double step_tol = 1e-8;  // step-doubling target for the automatic step count

    // J < 0, non-finite values, n_steps_time < 0 or invalid filter -> ValidationError.
    // J = 0 is allowed here (identity channel).
    void validate() const;
    std::vector<std::string> warnings() const;  // J^2 > 0.5, short window
};

struct ProtocolIsometry {
    ComplexMatrix matrix;  // (D_bath * D_sys) x D_sys
    ChannelConfig config;
    int n_ancillas = 0;
    Eigen::Index dim_sys = 0;
    int n_steps_used = 0;
    double step_doubling_error = 0.0;  // ||V_N - V_2N||_F / (2^p - 1), last refinement
    double isometry_residual = 0.0;    // ||V^dag V - I||_inf
    RealVector energies;               // system spectrum, for the no-rewind phase

    Eigen::Index dim_bath() const { return Eigen::Index(1) << n_ancillas; }
};

// Ancilla lowering operator |0><1| embedded at position a of an m-qubit register.
ComplexMatrix ancilla_lowering(int a, int m);

// H_SB(t) = J sum_a (f(t) B_a^dag (x) A_a(t) + f*(t) B_a (x) A_a(t)^dag)
ComplexMatrix interaction_hamiltonian(const std::vector<BohrDecomposition>& jumps, const FilterParams& p,
                                      double J, double t);

// Columns V(|0..0>_B (x) |k>) of the time-ordered interaction unitary over
// [-T/2, T/2].  NumericalError when ||V^dag V - I|| > 1e-8 or when step
// doubling cannot reach cfg.step_tol within the refinement budget.
ProtocolIsometry build_isometry(const EigenSystem& eig, const std::vector<BohrDecomposition>& jumps,
                                const ChannelConfig& cfg);
ProtocolIsometry build_isometry(const SpinModel& model, const JumpFamily& family, const ChannelConfig& cfg);

// K[rho] = tr_B[V rho V^dag]; rho in the eigenbasis.  Linear, so it also
// accepts non-Hermitian inputs (used for the Choi matrix).
ComplexMatrix apply_channel(const ProtocolIsometry& iso, const ComplexMatrix& rho);

// K'[rho] = e^{-iHT} K[rho] e^{iHT}
ComplexMatrix apply_channel_no_rewind(const ProtocolIsometry& iso, const ComplexMatrix& rho);

// Either of the two above, according to iso.config.rewind.
ComplexMatrix apply_configured(const ProtocolIsometry& iso, const ComplexMatrix& rho);

struct MagnusTerms {
    ComplexMatrix first;   // J sum_a (B_a^dag (x) L_a;T + h.c.)
    ComplexMatrix second;  // (1/2i) int dt1 int_{t2<t1} dt2 [H(t1), H(t2)]
    int n_ancillas = 0;
    Eigen::Index dim_sys = 0;
};

// Orders one and two of the Magnus expansion of the interaction unitary,
// both certified by order doubling (1e-8 relative) of the quadrature.
MagnusTerms magnus_terms(const std::vector<BohrDecomposition>& jumps, const FilterParams& p, double J,
                         int quad_order = 96);

// K_M[rho] = tr_B[e^{-iH_M} (|0><0| (x) rho) e^{iH_M}]; include_second = false
// keeps only the first-order term.
ComplexMatrix magnus_channel(const MagnusTerms& terms, const ComplexMatrix& rho, bool include_second = true);

// Choi matrix sum_ij |i><j| (x) K[|i><j|] of a linear map on D x D matrices.
using ChannelMap = std::function<ComplexMatrix(const ComplexMatrix&)>;
ComplexMatrix choi_matrix(const ChannelMap& channel, Eigen::Index dim);

struct ChannelRun {
    ComplexMatrix state;
    bool converged = false;
    // Index k of the last recorded state rho_k. On convergence rho_k passed
    // the residual test (an identity channel converges at k = 0) and `state`
    // holds K[rho_k].
    std::size_t steps = 0;
    double final_residual = 0.0;      // ||K[rho] - rho||_1 at the last step
    std::vector<double> times;        // k * J^2
    std::vector<ComplexMatrix> states;
    std::vector<double> residuals;    // ||K[rho_k] - rho_k||_1 for every k tried
};

// Repeat rho <- K[rho] until ||K[rho] - rho||_1 <= eps_residual or max_steps.
// Each application may change the trace by at most 1e-9 (NumericalError
// otherwise); the state is then renormalized and checked as a density matrix.
ChannelRun iterate_to_convergence(const ChannelMap& step, const ComplexMatrix& rho0, double eps_residual,
                                  std::size_t max_steps, double dtau, bool keep_states = true);

}  // namespace lds
