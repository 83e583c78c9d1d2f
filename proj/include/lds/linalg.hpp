// linalg.hpp - dense complex linear algebra used by every other module
//
// Tensor convention: in kron(A, B) the left factor is the slow index. The bath
// is always the left (slow) factor and the system the right (fast) one.

#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace lds {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

// Largest combined (system x bath) Hilbert-space dimension we accept.
inline constexpr Eigen::Index kMaxCombinedDim = 65536;

struct EigenSystem {
    RealVector values;    // ascending
    ComplexMatrix basis;  // columns are orthonormal eigenvectors

    Eigen::Index dim() const { return values.size(); }

    ComplexMatrix to_eigenbasis(const ComplexMatrix& op) const {
        return basis.adjoint() * op * basis;
    }
    ComplexMatrix to_computational(const ComplexMatrix& op) const {
        return basis * op * basis.adjoint();
    }
};

// Max absolute row sum (induced infinity norm of the matrix as a map on l_inf).
double max_row_sum(const ComplexMatrix& m);

// ||M - M^dagger|| on the row-sum scale.
double hermiticity_defect(const ComplexMatrix& m);

// Eigendecomposition of a Hermitian matrix.  Throws ValidationError when
// ||M - M^dagger|| > tol * ||M|| and NumericalError on non-convergence.
EigenSystem herm_eig(const ComplexMatrix& m, double tol = 1e-10);

// Eigenvalues only (ascending); same preconditions as herm_eig.
RealVector herm_eigenvalues(const ComplexMatrix& m, double tol = 1e-10);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// tr_B of an operator on (bath (x) system), bath slow.
ComplexMatrix partial_trace_bath(const ComplexMatrix& m, Eigen::Index dim_bath,
                                 Eigen::Index dim_sys);

enum class Schatten { One, Two, Inf };

// p = 1 is only supported for Hermitian arguments (sum of |eigenvalues|).
double schatten_norm(const ComplexMatrix& m, Schatten p, bool hermitian_hint = false);

inline double trace_norm(const ComplexMatrix& m) {
    return schatten_norm(m, Schatten::One, true);
}
inline double spectral_norm(const ComplexMatrix& m) {
    return schatten_norm(m, Schatten::Inf);
}

// LU solve with partial pivoting.  A pivot below 1e-13 * ||A|| raises
// SingularMatrixError carrying the number of such pivots.
ComplexVector solve_linear(const ComplexMatrix& a, const ComplexVector& b);

// Column-stacking vectorization: vec(X)[i + j*D] = X(i, j).
ComplexVector vec(const ComplexMatrix& x);
ComplexMatrix unvec(const ComplexVector& v, Eigen::Index dim);

// M + M^dagger over two.
inline ComplexMatrix hermitian_part(const ComplexMatrix& m) {
    return 0.5 * (m + m.adjoint());
}

}  // namespace lds
