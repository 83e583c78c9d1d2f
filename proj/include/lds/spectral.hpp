// spectral.hpp - thermal states, Bohr-frequency decomposition and the
// shifted-Gaussian filter.
//
// Every operator produced here lives in the eigenbasis of the Hamiltonian
// (ascending eigenvalue order); use EigenSystem::to_computational to convert.

#pragma once

#include <string>
#include <vector>

#include "lds/linalg.hpp"

namespace lds {

struct FilterParams {
    double beta = 1.0;      // inverse temperature
    double sigma = 0.5;     // filter width (time units)
    double T_window = 3.0;  // total length of the drive window [-T/2, T/2]

    // Throws ValidationError on beta < 0, sigma <= 0, T_window <= 0.
    void validate() const;
    // Non-fatal remarks, e.g. T_window below 2 sigma.
    std::vector<std::string> warnings() const;

    // Same filter with the window replaced by the large-T cap.
    FilterParams capped() const;
};

// The T -> infinity stand-in: window length in units of sigma.
inline constexpr double kWindowCapSigmas = 12.0;

struct ThermalState {
    ComplexMatrix rho;        // eigenbasis, diagonal
    RealVector populations;   // Boltzmann weights, ascending-energy order
    double beta = 0.0;
    double log_partition = 0.0;
};

ThermalState thermal_state(const EigenSystem& eig, double beta);

// A = sum_nu A_nu, stored compactly: the operator in the eigenbasis plus, for
// every matrix entry (i, j), the index of the frequency cluster containing
// E_i - E_j.  Components are materialized on demand.
class BohrDecomposition {
public:
    BohrDecomposition() = default;
    BohrDecomposition(ComplexMatrix op_eigenbasis, RealVector frequencies,
                      Eigen::MatrixXi cluster_of, std::string label,
                      std::vector<std::string> warnings);

    const RealVector& frequencies() const { return frequencies_; }
    const ComplexMatrix& op() const { return op_; }
    const Eigen::MatrixXi& cluster_of() const { return cluster_of_; }
    const std::string& source_label() const { return label_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    Eigen::Index dim() const { return op_.rows(); }
    std::size_t size() const { return static_cast<std::size_t>(frequencies_.size()); }

    // Clustered frequency of every matrix entry.
    const Eigen::MatrixXd& frequency_matrix() const { return freq_matrix_; }

    ComplexMatrix component(std::size_t k) const;
    // Index of the cluster whose frequency is within tol of nu, or -1.
    int find(double nu, double tol) const;

    // sum_nu w(nu) A_nu for a frequency weight w.
    template <class Weight>
    ComplexMatrix weighted(Weight&& w) const {
        std::vector<Complex> per_cluster(size());
        for (std::size_t k = 0; k < size(); ++k) per_cluster[k] = w(frequencies_(k));
        ComplexMatrix out(dim(), dim());
        for (Eigen::Index j = 0; j < dim(); ++j)
            for (Eigen::Index i = 0; i < dim(); ++i)
                out(i, j) = per_cluster[cluster_of_(i, j)] * op_(i, j);
        return out;
    }

    // A(t) = sum_nu e^{i nu t} A_nu
    ComplexMatrix heisenberg(double t) const;

private:
    ComplexMatrix op_;
    RealVector frequencies_;
    Eigen::MatrixXi cluster_of_;
    Eigen::MatrixXd freq_matrix_;
    std::string label_;
    std::vector<std::string> warnings_;
};

// Default clustering tolerance 1e-9 * max|E|.
double default_bohr_tolerance(const EigenSystem& eig);

// A is given in the computational basis.  tol_freq <= 0 selects the default.
BohrDecomposition bohr_decompose(const EigenSystem& eig, const ComplexMatrix& a,
                                 double tol_freq = 0.0, std::string label = {});

// Same, for an operator already expressed in the eigenbasis.
BohrDecomposition bohr_decompose_eigenbasis(const EigenSystem& eig, const ComplexMatrix& a_eig,
                                            double tol_freq = 0.0, std::string label = {});

enum class FilterDomain { Time, Frequency };

// f(t) = sqrt(2/(pi sigma^2)) exp(-(2/sigma^2)(t - i beta/4)^2)
Complex filter_time(const FilterParams& p, double t);
// fhat(nu) = exp(beta nu / 4) exp(-(sigma nu)^2 / 8), the transform int f(t) e^{-i nu t} dt
double filter_frequency(const FilterParams& p, double nu);
Complex filter_eval(const FilterParams& p, FilterDomain domain, double x);

// int |f(t)| dt over the real line: exp(beta^2 / (8 sigma^2)).
double filter_l1_norm(const FilterParams& p);
// int |f(t)| dt outside [-T/2, T/2]: exp(beta^2/(8 sigma^2)) erfc(T / (sigma sqrt 2)).
double filter_tail_mass(const FilterParams& p);

// L = sum_nu fhat(-nu) A_nu
ComplexMatrix filtered_jump_exact(const BohrDecomposition& bohr, const FilterParams& p);

// c_T(nu) = int_{-T/2}^{T/2} f(t) e^{i nu t} dt by an n-point Gauss-Legendre rule.
Complex truncated_coefficient(const FilterParams& p, double nu, int quad_order);

// L_T = sum_nu c_T(nu) A_nu. Requires quad_order >= 32 and T_window >= 2 sigma;
// the rule is checked against one of twice the order and NumericalError is
// raised when they disagree by more than 1e-8 ||L_T||.
ComplexMatrix filtered_jump_truncated(const BohrDecomposition& bohr, const FilterParams& p,
                                      int quad_order = 128);

}  // namespace lds
