// ode.cpp - unitary propagation by exponential steps

#include "lds/ode.hpp"

#include <cmath>

namespace lds {

ComplexMatrix apply_hermitian_exponential(const ComplexMatrix& h, double dt, const ComplexMatrix& psi) {
    const EigenSystem es = herm_eig(h, 1e-9);
    const ComplexVector phases = (es.values * (-dt)).unaryExpr([](double x) { return std::exp(kI * x); });
    return es.basis * (phases.asDiagonal() * (es.basis.adjoint() * psi));
}

ComplexMatrix unitary_propagate(const HamiltonianFn& h_of_t, const ComplexMatrix& psi0, double t0,
                                double t1, int n_steps, UnitaryScheme scheme) {
    if (n_steps < 1) throw ValidationError("unitary_propagate: n_steps must be >= 1");
    if (!(t1 > t0)) throw ValidationError("unitary_propagate: t1 must exceed t0");
    const double dt = (t1 - t0) / n_steps;
    ComplexMatrix psi = psi0;

    // Gauss-node commutator-free weights
    const double s3 = std::sqrt(3.0);
    const double c1 = 0.5 - s3 / 6.0, c2 = 0.5 + s3 / 6.0;
    const double a1 = (3.0 - 2.0 * s3) / 12.0, a2 = (3.0 + 2.0 * s3) / 12.0;

    for (int k = 0; k < n_steps; ++k) {
        const double ts = t0 + k * dt;
        if (scheme == UnitaryScheme::Midpoint) {
            psi = apply_hermitian_exponential(h_of_t(ts + 0.5 * dt), dt, psi);
        } else {
            const ComplexMatrix h1 = h_of_t(ts + c1 * dt);
            const ComplexMatrix h2 = h_of_t(ts + c2 * dt);
            psi = apply_hermitian_exponential(a2 * h1 + a1 * h2, dt, psi);
            psi = apply_hermitian_exponential(a1 * h1 + a2 * h2, dt, psi);
        }
    }

    const double drift = (psi.colwise().norm() - psi0.colwise().norm()).cwiseAbs().maxCoeff();
    if (drift > 1e-8) {
        throw NumericalError("unitary_propagate: norm drift " + std::to_string(drift) + " exceeds 1e-8");
    }
    return psi;
}

}  // namespace lds
