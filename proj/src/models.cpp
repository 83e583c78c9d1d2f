// models.cpp - spin-chain Hamiltonians and jump families

#include "lds/models.hpp"

#include <sstream>

#include "lds/error.hpp"

namespace lds {

namespace {

void check_sites(int n, const char* who) {
    if (n < 1 || n > kMaxSites) {
        std::ostringstream os;
        os << who << ": n = " << n << " outside supported range [1, " << kMaxSites << "]";
        throw ValidationError(os.str());
    }
}

// Bit of site i in basis index s (site 0 is the most significant bit).
inline int site_bit(Eigen::Index s, int i, int n) { return static_cast<int>((s >> (n - 1 - i)) & 1); }
inline double z_value(Eigen::Index s, int i, int n) { return site_bit(s, i, n) ? -1.0 : 1.0; }

ComplexMatrix ising_chain(int n, double g, double h, Boundary boundary) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    ComplexMatrix H = ComplexMatrix::Zero(dim, dim);
    std::vector<std::pair<int, int>> bonds;
    for (int i = 0; i + 1 < n; ++i) bonds.emplace_back(i, i + 1);
    if (boundary == Boundary::Periodic && n > 2) bonds.emplace_back(n - 1, 0);

    for (Eigen::Index s = 0; s < dim; ++s) {
        double diag = 0.0;
        for (auto [i, j] : bonds) diag += z_value(s, i, n) * z_value(s, j, n);
        for (int i = 0; i < n; ++i) diag += h * z_value(s, i, n);
        H(s, s) = diag;
        if (g != 0.0) {
            for (int i = 0; i < n; ++i) {
                const Eigen::Index flipped = s ^ (Eigen::Index{1} << (n - 1 - i));
                H(flipped, s) += g;
            }
        }
    }
    return H;
}

}  // namespace

ComplexMatrix pauli_matrix(Pauli p) {
    ComplexMatrix m(2, 2);
    switch (p) {
        case Pauli::X: m << 0, 1, 1, 0; break;
        case Pauli::Y: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
        case Pauli::Z: m << 1, 0, 0, -1; break;
    }
    return m;
}

SpinModel build_mfi(int n, double g, double h, Boundary boundary) {
    check_sites(n, "build_mfi");
    std::ostringstream label;
    label << "mfi(n=" << n << ",g=" << g << ",h=" << h << "," << to_string(boundary) << ")";
    return SpinModel{n, ising_chain(n, g, h, boundary), label.str(), boundary};
}

SpinModel build_tfi(int n, double g, Boundary boundary) {
    check_sites(n, "build_tfi");
    std::ostringstream label;
    label << "tfi(n=" << n << ",g=" << g << "," << to_string(boundary) << ")";
    return SpinModel{n, ising_chain(n, g, 0.0, boundary), label.str(), boundary};
}

JumpFamily site_jump_family(int n, Pauli pauli) {
    check_sites(n, "site_jump_family");
    const ComplexMatrix p = pauli_matrix(pauli);
    JumpFamily family;
    for (int site = 0; site < n; ++site) {
        const ComplexMatrix left = ComplexMatrix::Identity(Eigen::Index{1} << site, Eigen::Index{1} << site);
        const ComplexMatrix right =
            ComplexMatrix::Identity(Eigen::Index{1} << (n - 1 - site), Eigen::Index{1} << (n - 1 - site));
        family.operators.push_back(kron(kron(left, p), right));
        family.labels.push_back(std::string(to_string(pauli)) + "_" + std::to_string(site));
    }
    return family;
}

bool is_adjoint_closed(const JumpFamily& family, double tol) {
    for (const auto& a : family.operators) {
        const ComplexMatrix ad = a.adjoint();
        bool found = false;
        for (const auto& b : family.operators) {
            if (b.rows() == ad.rows() && (b - ad).cwiseAbs().maxCoeff() <= tol) {
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

const char* to_string(Pauli p) {
    switch (p) {
        case Pauli::X: return "X";
        case Pauli::Y: return "Y";
        case Pauli::Z: return "Z";
    }
    return "?";
}

const char* to_string(Boundary b) { return b == Boundary::Open ? "open" : "periodic"; }

Pauli parse_pauli(const std::string& s) {
    if (s == "X" || s == "x") return Pauli::X;
    if (s == "Y" || s == "y") return Pauli::Y;
    if (s == "Z" || s == "z") return Pauli::Z;
    throw ValidationError("unknown Pauli label '" + s + "' (expected X, Y or Z)");
}

Boundary parse_boundary(const std::string& s) {
    if (s == "open") return Boundary::Open;
    if (s == "periodic") return Boundary::Periodic;
    throw ValidationError("unknown boundary '" + s + "' (expected open or periodic)");
}

}  // namespace lds
