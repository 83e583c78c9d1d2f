// lindblad.hpp - exact Gibbs sampler, local-driving Lindbladian, generator
// action, dense superoperator, steady state and adaptive time evolution.
//
// All operators and states handled here are in the Hamiltonian eigenbasis.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lds/linalg.hpp"
#include "lds/models.hpp"
#include "lds/ode.hpp"
#include "lds/spectral.hpp"

namespace lds {

enum class GeneratorKind { ExactSampler, LocalDriving, DissipativeOnly };

const char* to_string(GeneratorKind k);
GeneratorKind parse_generator_kind(const std::string& s);

// Largest system dimension for which dense D^2 x D^2 superoperators are built.
inline constexpr Eigen::Index kMaxDenseSuperopDim = 64;

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::ExactSampler;
    std::vector<ComplexMatrix> jumps;  // eigenbasis
    ComplexMatrix coherent;            // eigenbasis, Hermitian
    FilterParams params;
    std::string model_ref;
    ComplexMatrix decay;  // sum_a L_a^dagger L_a, cached
    // Gaussian tail mass outside the window that was used for the jumps
    // (zero for exact filtered jumps).
    double window_tail_bound = 0.0;

    Eigen::Index dim() const { return coherent.rows(); }
};

// Validate shapes and Hermiticity of the coherent part and fill the cache.
GeneratorSpec make_generator(GeneratorKind kind, std::vector<ComplexMatrix> jumps,
                             ComplexMatrix coherent, FilterParams params, std::string model_ref);

// G = (i/2) sum_a sum_nu tanh(beta nu / 4) (L_a^dagger L_a)_nu
ComplexMatrix coherent_exact(const EigenSystem& eig, const std::vector<ComplexMatrix>& jumps,
                             const FilterParams& params, double tol_freq = 0.0);

// H_LS;T = -(1/2i) int int f*(t2) f(t1) sgn(t1 - t2) sum_a A_a^dagger(t2) A_a(t1)
// over [-T/2, T/2]^2. The square is split along the diagonal and each
// triangle integrated by nested Gauss-Legendre rules (outer t1, inner t2),
// which keeps the integrand smooth; the result is certified against the
// rule of doubled order (NumericalError if they differ by > 1e-7 ||H_LS||).
ComplexMatrix lamb_shift(const EigenSystem& eig, const std::vector<BohrDecomposition>& jumps,
                         const FilterParams& params, int quad_order = 128);

// Same operator through the Bohr kernel:
//   H_LS;T = sum_a sum_{nu1,nu2} h_T(nu1, nu2) (A_{nu2})^dagger A_{nu1}
// with each h_T evaluated by its own two-dimensional quadrature.  Cost grows
// as D^3 kernel evaluations; intended for cross-checks on small systems.
ComplexMatrix lamb_shift_kernel(const std::vector<BohrDecomposition>& jumps,
                                const FilterParams& params, int quad_order = 96);

// h_T(nu1, nu2) = -(1/2i) int int f(t1) f*(t2) sgn(t1 - t2) e^{i nu1 t1 - i nu2 t2}
Complex lamb_shift_kernel_entry(const FilterParams& params, double nu1, double nu2, int quad_order);

struct AssembleOptions {
    int quad_order = 128;
    // DissipativeOnly: truncated (T_window) jumps instead of exact ones.
    bool dissipative_truncated = false;
    double tol_freq = 0.0;
};

// ExactSampler: exact filtered jumps + G.  LocalDriving: truncated jumps +
// H_LS;T (use params.capped() for the T -> infinity limit).  DissipativeOnly:
// jumps with zero coherent part.
GeneratorSpec assemble(GeneratorKind kind, const SpinModel& model, const EigenSystem& eig,
                       const FilterParams& params, const JumpFamily& family,
                       const AssembleOptions& opts = {});

// L[rho] = -i[K, rho] + sum_a L_a rho L_a^dagger - 1/2 {L_a^dagger L_a, rho}
// for Hermitian rho (the Hermitian structure is used to save products; use
// generator_matrix for general arguments).
ComplexMatrix generator_action(const GeneratorSpec& spec, const ComplexMatrix& rho);

// Dense column-stacking form M with M vec(rho) = vec(L[rho]); D <= 64.
ComplexMatrix generator_matrix(const GeneratorSpec& spec);

// Steady state from the vectorized generator with one row replaced by the
// trace constraint. SingularMatrixError for a degenerate steady space.
ComplexMatrix fixed_point(const GeneratorSpec& spec);

struct Trajectory {
    std::vector<double> times;
    std::vector<ComplexMatrix> states;
    StepStats step_stats;
};

// Checks every sampled state: |tr - 1| <= 1e-8, Hermitian within 1e-9 and
// smallest eigenvalue >= -1e-7; violations raise NumericalError.
void check_density_matrix(const ComplexMatrix& rho, const char* who);

// Evolve rho0 under the generator; states are recorded at sample_times
// (default: t_end only).
Trajectory evolve(const GeneratorSpec& spec, const ComplexMatrix& rho0, double t_end,
                  std::vector<double> sample_times = {}, double rtol = 1e-8, double atol = 1e-10);

// rho(t) = exp(t L)[rho] through the matrix exponential of the dense
// superoperator (Pade scaling and squaring); reference propagation only.
ComplexMatrix propagate_dense(const GeneratorSpec& spec, const ComplexMatrix& rho, double t);

}  // namespace lds
