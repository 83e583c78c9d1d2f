// quadrature.hpp - Gauss-Legendre rules on finite intervals

#pragma once

#include <vector>

namespace lds {

struct QuadratureRule {
    std::vector<double> nodes;  // ascending
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

// n-point Gauss-Legendre rule on [a, b]. Nodes from Newton iteration on P_n
// started at the Chebyshev-like guesses cos(pi (i - 1/4) / (n + 1/2)).
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

}  // namespace lds
