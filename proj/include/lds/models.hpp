// models.hpp - spin-chain Hamiltonians and local jump-operator families
//
// Site 0 is the slowest tensor factor (most significant bit of the
// computational-basis index). Z|0> = |0>, Z|1> = -|1>.

#pragma once

#include <string>
#include <vector>

#include "lds/linalg.hpp"

namespace lds {

enum class Boundary { Open, Periodic };
enum class Pauli { X, Y, Z };

inline constexpr int kMaxSites = 8;

struct SpinModel {
    int n_sites = 0;
    ComplexMatrix hamiltonian;
    std::string label;
    Boundary boundary = Boundary::Open;

    Eigen::Index dim() const { return hamiltonian.rows(); }
};

struct JumpFamily {
    std::vector<ComplexMatrix> operators;
    std::vector<std::string> labels;

    std::size_t size() const { return operators.size(); }
};

// H = sum_i Z_i Z_{i+1} + g X_i + h Z_i. The periodic wrap bond is only
// added for n > 2 (for n = 2 it would duplicate the single bond).
SpinModel build_mfi(int n, double g, double h, Boundary boundary = Boundary::Open);

// H = sum_i Z_i Z_{i+1} + g X_i
SpinModel build_tfi(int n, double g, Boundary boundary = Boundary::Open);

// One Pauli per site, placed by the tensor convention above.
JumpFamily site_jump_family(int n, Pauli pauli);

// Every A in the family has A^dagger in the family (within tol, entrywise).
bool is_adjoint_closed(const JumpFamily& family, double tol = 1e-12);

ComplexMatrix pauli_matrix(Pauli p);

const char* to_string(Pauli p);
const char* to_string(Boundary b);
Pauli parse_pauli(const std::string& s);
Boundary parse_boundary(const std::string& s);

}  // namespace lds
