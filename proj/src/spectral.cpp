// spectral.cpp - thermal states, Bohr decomposition, filter functions

#include "lds/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "lds/error.hpp"
#include "lds/quadrature.hpp"

namespace lds {

void FilterParams::validate() const {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("filter: beta must be finite and >= 0");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("filter: sigma must be finite and > 0");
    if (!(T_window > 0.0) || !std::isfinite(T_window))
        throw ValidationError("filter: T_window must be finite and > 0");
}

std::vector<std::string> FilterParams::warnings() const {
    std::vector<std::string> out;
    if (T_window < 2.0 * sigma) {
        std::ostringstream os;
        os << "T_window = " << T_window << " is below 2 sigma = " << 2.0 * sigma;
        out.push_back(os.str());
    }
    return out;
}

FilterParams FilterParams::capped() const {
    FilterParams p = *this;
    p.T_window = kWindowCapSigmas * sigma;
    return p;
}

ThermalState thermal_state(const EigenSystem& eig, double beta) {
    if (beta < 0.0) throw ValidationError("thermal_state: beta must be >= 0");
    const RealVector& e = eig.values;
    const double e_min = e.minCoeff();
    RealVector w = (-beta * (e.array() - e_min)).exp();
    const double sum = w.sum();
    ThermalState out;
    out.populations = w / sum;
    out.rho = out.populations.cast<Complex>().asDiagonal();
    out.beta = beta;
    out.log_partition = -beta * e_min + std::log(sum);
    return out;
}

BohrDecomposition::BohrDecomposition(ComplexMatrix op_eigenbasis, RealVector frequencies,
                                     Eigen::MatrixXi cluster_of, std::string label,
                                     std::vector<std::string> warnings)
    : op_(std::move(op_eigenbasis)),
      frequencies_(std::move(frequencies)),
      cluster_of_(std::move(cluster_of)),
      label_(std::move(label)),
      warnings_(std::move(warnings)) {
    freq_matrix_.resize(op_.rows(), op_.cols());
    for (Eigen::Index j = 0; j < op_.cols(); ++j)
        for (Eigen::Index i = 0; i < op_.rows(); ++i) freq_matrix_(i, j) = frequencies_(cluster_of_(i, j));
}

ComplexMatrix BohrDecomposition::component(std::size_t k) const {
    ComplexMatrix out = ComplexMatrix::Zero(dim(), dim());
    for (Eigen::Index j = 0; j < dim(); ++j)
        for (Eigen::Index i = 0; i < dim(); ++i)
            if (cluster_of_(i, j) == static_cast<int>(k)) out(i, j) = op_(i, j);
    return out;
}

int BohrDecomposition::find(double nu, double tol) const {
    for (Eigen::Index k = 0; k < frequencies_.size(); ++k)
        if (std::abs(frequencies_(k) - nu) <= tol) return static_cast<int>(k);
    return -1;
}

ComplexMatrix BohrDecomposition::heisenberg(double t) const {
    return weighted([t](double nu) { return std::exp(kI * (nu * t)); });
}

double default_bohr_tolerance(const EigenSystem& eig) {
    const double scale = eig.values.cwiseAbs().maxCoeff();
    return 1e-9 * std::max(scale, 1.0);
}

BohrDecomposition bohr_decompose_eigenbasis(const EigenSystem& eig, const ComplexMatrix& a_eig,
                                            double tol_freq, std::string label) {
    const Eigen::Index d = eig.dim();
    if (a_eig.rows() != d || a_eig.cols() != d)
        throw ValidationError("bohr_decompose: operator dimension does not match the Hamiltonian");
    if (tol_freq <= 0.0) tol_freq = default_bohr_tolerance(eig);

    struct Entry {
        double nu;
        Eigen::Index i, j;
    };
    std::vector<Entry> entries;
    entries.reserve(static_cast<std::size_t>(d * d));
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i) entries.push_back({eig.values(i) - eig.values(j), i, j});
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.nu < b.nu; });

    // Single-linkage clustering of the sorted raw differences.
    Eigen::MatrixXi cluster_of(d, d);
    std::vector<double> sums;
    std::vector<int> counts;
    std::vector<std::string> warnings;
    int current = -1;
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const bool new_cluster = (k == 0) || (entries[k].nu - entries[k - 1].nu > tol_freq);
        if (new_cluster) {
            if (k > 0 && entries[k].nu - entries[k - 1].nu < 10.0 * tol_freq) {
                std::ostringstream os;
                os << "Bohr clusters at " << entries[k - 1].nu << " and " << entries[k].nu
                   << " are separated by only " << entries[k].nu - entries[k - 1].nu
                   << " (tolerance " << tol_freq << ")";
                warnings.push_back(os.str());
            }
            ++current;
            sums.push_back(0.0);
            counts.push_back(0);
        }
        sums[current] += entries[k].nu;
        counts[current] += 1;
        cluster_of(entries[k].i, entries[k].j) = current;
    }
    RealVector freqs(static_cast<Eigen::Index>(sums.size()));
    for (std::size_t k = 0; k < sums.size(); ++k) freqs(static_cast<Eigen::Index>(k)) = sums[k] / counts[k];
    // Clusters are mirror images of each other; make the representatives exactly antisymmetric.
    const Eigen::Index m = freqs.size();
    for (Eigen::Index k = 0; k < m / 2; ++k) {
        const double sym = 0.5 * (freqs(m - 1 - k) - freqs(k));
        freqs(k) = -sym;
        freqs(m - 1 - k) = sym;
    }
    if (m % 2 == 1) freqs(m / 2) = 0.0;
    return BohrDecomposition(a_eig, std::move(freqs), std::move(cluster_of), std::move(label),
                             std::move(warnings));
}

BohrDecomposition bohr_decompose(const EigenSystem& eig, const ComplexMatrix& a, double tol_freq,
                                 std::string label) {
    if (a.rows() != eig.dim() || a.cols() != eig.dim())
        throw ValidationError("bohr_decompose: operator dimension does not match the Hamiltonian");
    return bohr_decompose_eigenbasis(eig, eig.to_eigenbasis(a), tol_freq, std::move(label));
}

Complex filter_time(const FilterParams& p, double t) {
    const double norm = std::sqrt(2.0 / (std::numbers::pi * p.sigma * p.sigma));
    const Complex shifted = Complex(t, -p.beta / 4.0);
    return norm * std::exp(-(2.0 / (p.sigma * p.sigma)) * shifted * shifted);
}

double filter_frequency(const FilterParams& p, double nu) {
    return std::exp(p.beta * nu / 4.0 - (p.sigma * nu) * (p.sigma * nu) / 8.0);
}

Complex filter_eval(const FilterParams& p, FilterDomain domain, double x) {
    return domain == FilterDomain::Time ? filter_time(p, x) : Complex(filter_frequency(p, x), 0.0);
}

double filter_l1_norm(const FilterParams& p) {
    return std::exp(p.beta * p.beta / (8.0 * p.sigma * p.sigma));
}

double filter_tail_mass(const FilterParams& p) {
    return filter_l1_norm(p) * std::erfc(p.T_window / (p.sigma * std::numbers::sqrt2));
}

ComplexMatrix filtered_jump_exact(const BohrDecomposition& bohr, const FilterParams& p) {
    p.validate();
    return bohr.weighted([&p](double nu) { return Complex(filter_frequency(p, -nu), 0.0); });
}

namespace {

Complex coefficient_with_rule(const FilterParams& p, double nu, const QuadratureRule& rule) {
    Complex acc = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
        const double t = rule.nodes[k];
        acc += rule.weights[k] * filter_time(p, t) * std::exp(kI * (nu * t));
    }
    return acc;
}

}  // namespace

Complex truncated_coefficient(const FilterParams& p, double nu, int quad_order) {
    const auto rule = gauss_legendre(quad_order, -0.5 * p.T_window, 0.5 * p.T_window);
    return coefficient_with_rule(p, nu, rule);
}

ComplexMatrix filtered_jump_truncated(const BohrDecomposition& bohr, const FilterParams& p,
                                      int quad_order) {
    p.validate();
    if (quad_order < 32) throw ValidationError("filtered_jump_truncated: quad_order must be >= 32");
    if (p.T_window < 2.0 * p.sigma)
        throw ValidationError("filtered_jump_truncated: T_window must be >= 2 sigma");
    const auto rule = gauss_legendre(quad_order, -0.5 * p.T_window, 0.5 * p.T_window);
    const auto fine = gauss_legendre(2 * quad_order, -0.5 * p.T_window, 0.5 * p.T_window);
    const auto& freqs = bohr.frequencies();
    std::vector<Complex> coarse_c(bohr.size()), fine_c(bohr.size());
    for (std::size_t k = 0; k < bohr.size(); ++k) {
        coarse_c[k] = coefficient_with_rule(p, freqs(k), rule);
        fine_c[k] = coefficient_with_rule(p, freqs(k), fine);
    }
    ComplexMatrix coarse(bohr.dim(), bohr.dim()), refined(bohr.dim(), bohr.dim());
    for (Eigen::Index j = 0; j < bohr.dim(); ++j) {
        for (Eigen::Index i = 0; i < bohr.dim(); ++i) {
            const int k = bohr.cluster_of()(i, j);
            coarse(i, j) = coarse_c[k] * bohr.op()(i, j);
            refined(i, j) = fine_c[k] * bohr.op()(i, j);
        }
    }
    const double scale = std::max(max_row_sum(refined), 1e-300);
    const double diff = max_row_sum(coarse - refined);
    if (diff > 1e-8 * scale) {
        std::ostringstream os;
        os << "filtered_jump_truncated: quadrature order " << quad_order
           << " disagrees with order " << 2 * quad_order << " by " << diff / scale
           << " (relative); increase quad_order";
        throw NumericalError(os.str());
    }
    return coarse;
}

}  // namespace lds
