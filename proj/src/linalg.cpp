// linalg.cpp - dense complex linear algebra

#include "lds/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "lds/error.hpp"

namespace lds {

double max_row_sum(const ComplexMatrix& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

double hermiticity_defect(const ComplexMatrix& m) {
    return max_row_sum(m - m.adjoint());
}

namespace {

void require_square(const ComplexMatrix& m, const char* who) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        std::ostringstream os;
        os << who << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
        throw ValidationError(os.str());
    }
}

void require_hermitian(const ComplexMatrix& m, double tol, const char* who) {
    const double defect = hermiticity_defect(m);
    const double scale = std::max(max_row_sum(m), 1e-300);
    if (defect > tol * scale) {
        std::ostringstream os;
        os << who << ": matrix is not Hermitian (||M - M^dag|| = " << defect
           << ", relative " << defect / scale << " > " << tol << ")";
        throw ValidationError(os.str());
    }
}

}  // namespace

namespace {

// Divide-and-conquer Hermitian eigensolver (LAPACK zheevd); eigenvalues come
// back ascending.
int run_zheevd(ComplexMatrix& a, RealVector& w, bool vectors) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    w.resize(a.rows());
    return LAPACKE_zheevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'L', n,
                          reinterpret_cast<lapack_complex_double*>(a.data()), n, w.data());
}

}  // namespace

EigenSystem herm_eig(const ComplexMatrix& m, double tol) {
    require_square(m, "herm_eig");
    require_hermitian(m, tol, "herm_eig");
    ComplexMatrix work = hermitian_part(m);
    RealVector values;
    const int info = run_zheevd(work, values, true);
    if (info != 0) {
        const ComplexMatrix sym = hermitian_part(m);
        std::ostringstream os;
        os << "herm_eig: eigensolver did not converge (info " << info << ", off-diagonal residual "
           << (sym - sym.diagonal().asDiagonal().toDenseMatrix()).norm() << ")";
        throw NumericalError(os.str());
    }
    return EigenSystem{std::move(values), std::move(work)};
}

RealVector herm_eigenvalues(const ComplexMatrix& m, double tol) {
    require_square(m, "herm_eigenvalues");
    require_hermitian(m, tol, "herm_eigenvalues");
    ComplexMatrix work = hermitian_part(m);
    RealVector values;
    const int info = run_zheevd(work, values, false);
    if (info != 0) {
        throw NumericalError("herm_eigenvalues: eigensolver did not converge (info " + std::to_string(info) + ")");
    }
    return values;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_square(a, "kron");
    require_square(b, "kron");
    const Eigen::Index da = a.rows();
    const Eigen::Index db = b.rows();
    if (da > kMaxCombinedDim / db) {
        std::ostringstream os;
        os << "kron: combined dimension " << da << "*" << db << " exceeds cap " << kMaxCombinedDim;
        throw ValidationError(os.str());
    }
    ComplexMatrix out(da * db, da * db);
    for (Eigen::Index i = 0; i < da; ++i) {
        for (Eigen::Index j = 0; j < da; ++j) {
            out.block(i * db, j * db, db, db) = a(i, j) * b;
        }
    }
    return out;
}

ComplexMatrix partial_trace_bath(const ComplexMatrix& m, Eigen::Index dim_bath,
                                 Eigen::Index dim_sys) {
    if (dim_bath <= 0 || dim_sys <= 0 || m.rows() != dim_bath * dim_sys ||
        m.cols() != dim_bath * dim_sys) {
        std::ostringstream os;
        os << "partial_trace_bath: matrix " << m.rows() << "x" << m.cols()
           << " does not match dim_bath*dim_sys = " << dim_bath << "*" << dim_sys;
        throw ValidationError(os.str());
    }
    ComplexMatrix out = ComplexMatrix::Zero(dim_sys, dim_sys);
    for (Eigen::Index b = 0; b < dim_bath; ++b) {
        out += m.block(b * dim_sys, b * dim_sys, dim_sys, dim_sys);
    }
    return out;
}

double schatten_norm(const ComplexMatrix& m, Schatten p, bool hermitian_hint) {
    require_square(m, "schatten_norm");
    switch (p) {
        case Schatten::Two:
            return m.norm();
        case Schatten::One: {
            if (!hermitian_hint) {
                throw ValidationError(
                    "schatten_norm: the 1-norm is only available for Hermitian arguments");
            }
            return herm_eigenvalues(m).cwiseAbs().sum();
        }
        case Schatten::Inf: {
            if (hermitian_hint) return herm_eigenvalues(m).cwiseAbs().maxCoeff();
            const ComplexMatrix gram = m.adjoint() * m;
            const double top = herm_eigenvalues(gram, 1e-8).maxCoeff();
            return std::sqrt(std::max(top, 0.0));
        }
    }
    return 0.0;
}

ComplexVector solve_linear(const ComplexMatrix& a, const ComplexVector& b) {
    require_square(a, "solve_linear");
    if (b.size() != a.rows()) {
        throw ValidationError("solve_linear: right-hand side length does not match matrix");
    }
    Eigen::PartialPivLU<ComplexMatrix> lu(a);
    const double threshold = 1e-13 * max_row_sum(a);
    const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
    std::size_t small = 0;
    for (Eigen::Index i = 0; i < pivots.size(); ++i) {
        if (pivots(i) < threshold) ++small;
    }
    if (small > 0) {
        std::ostringstream os;
        os << "solve_linear: matrix is numerically singular (" << small
           << " pivot(s) below " << threshold << ")";
        throw SingularMatrixError(os.str(), small);
    }
    return lu.solve(b);
}

ComplexVector vec(const ComplexMatrix& x) {
    return Eigen::Map<const ComplexVector>(x.data(), x.size());
}

ComplexMatrix unvec(const ComplexVector& v, Eigen::Index dim) {
    if (v.size() != dim * dim) throw ValidationError("unvec: length is not dim^2");
    return Eigen::Map<const ComplexMatrix>(v.data(), dim, dim);
}

}  // namespace lds
