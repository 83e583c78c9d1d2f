// test_spectral.cpp - thermal states, Bohr decomposition, filter, filtered jumps

#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

#include "lds/error.hpp"
#include "lds/models.hpp"
#include "lds/spectral.hpp"
#include "test_util.hpp"

using namespace lds;
using namespace lds::testing;

namespace {

FilterParams filter(double beta, double sigma, double T) {
    FilterParams p;
    p.beta = beta;
    p.sigma = sigma;
    p.T_window = T;
    return p;
}

// int_a^b f(t) e^{-i nu t} dt by adaptive Gauss-Kronrod
Complex fourier_gk(const FilterParams& p, double nu, double a, double b) {
    using boost::math::quadrature::gauss_kronrod;
    auto re = [&](double t) { return (filter_time(p, t) * std::exp(Complex(0, -nu * t))).real(); };
    auto im = [&](double t) { return (filter_time(p, t) * std::exp(Complex(0, -nu * t))).imag(); };
    return {gauss_kronrod<double, 61>::integrate(re, a, b, 15, 1e-14),
            gauss_kronrod<double, 61>::integrate(im, a, b, 15, 1e-14)};
}

}  // namespace

TEST_CASE("thermal_state examples") {
    const EigenSystem eig = herm_eig(build_mfi(3, 0.9045, 0.809).hamiltonian);
    const ThermalState hot = thermal_state(eig, 0.0);
    CHECK((hot.rho - ComplexMatrix::Identity(8, 8) / 8.0).norm() <= 1e-15);
    CHECK(hot.log_partition == doctest::Approx(std::log(8.0)));

    const EigenSystem ez = herm_eig(pauli_z());
    const ThermalState t = thermal_state(ez, 1.0);
    const double e = std::exp(1.0);
    // ascending energy: index 0 is E = -1
    CHECK(t.populations(0) == doctest::Approx(e / (e + 1 / e)));
    CHECK(t.populations(1) == doctest::Approx((1 / e) / (e + 1 / e)));
    CHECK(t.populations(0) == doctest::Approx(0.8808).epsilon(1e-4));
    const ComplexMatrix comp = ez.to_computational(t.rho);
    CHECK(comp(0, 0).real() == doctest::Approx(0.1192).epsilon(1e-3));
    CHECK(t.log_partition == doctest::Approx(std::log(e + 1 / e)));

    const ComplexMatrix h = eig.basis.adjoint() * build_mfi(3, 0.9045, 0.809).hamiltonian * eig.basis;
    const ThermalState tb = thermal_state(eig, 1.0);
    CHECK(max_abs(tb.rho * h - h * tb.rho) <= 1e-12);
    CHECK(std::abs(tb.rho.trace() - 1.0) <= 1e-12);
    CHECK(tb.populations.minCoeff() > 0.0);

    CHECK_THROWS_AS(thermal_state(eig, -1.0), ValidationError);
}

TEST_CASE("thermal_state is stable at large beta") {
    const EigenSystem eig = herm_eig(build_mfi(4, 0.9045, 0.809).hamiltonian);
    const ThermalState t = thermal_state(eig, 500.0);
    CHECK(std::isfinite(t.log_partition));
    CHECK(t.populations(0) == doctest::Approx(1.0));
    CHECK(t.log_partition == doctest::Approx(-500.0 * eig.values(0)).epsilon(1e-12));
}

TEST_CASE("Bohr decomposition of X under H = Z") {
    const EigenSystem ez = herm_eig(pauli_z());
    const BohrDecomposition b = bohr_decompose(ez, pauli_x());
    // clusters at -2, 0 (diagonal entries, zero weight here) and +2
    REQUIRE(b.size() == 3);
    CHECK(max_abs(b.component(b.find(0.0, 1e-9))) == 0.0);
    const int up = b.find(2.0, 1e-9), down = b.find(-2.0, 1e-9);
    REQUIRE(up >= 0);
    REQUIRE(down >= 0);
    ComplexMatrix k01 = ComplexMatrix::Zero(2, 2), k10 = ComplexMatrix::Zero(2, 2);
    k01(0, 1) = 1.0;
    k10(1, 0) = 1.0;
    CHECK((ez.to_computational(b.component(up)) - k01).norm() <= 1e-15);
    CHECK((ez.to_computational(b.component(down)) - k10).norm() <= 1e-15);
    CHECK(b.find(1.0, 1e-9) == -1);
}

TEST_CASE("Bohr decomposition of H is a single zero-frequency component") {
    const ComplexMatrix h = build_mfi(3, 0.9045, 0.809).hamiltonian;
    const EigenSystem eig = herm_eig(h);
    const BohrDecomposition b = bohr_decompose(eig, h);
    // off-diagonal entries vanish; only the zero cluster carries weight
    const int zero = b.find(0.0, 1e-9);
    REQUIRE(zero >= 0);
    ComplexMatrix diag = eig.values.cast<Complex>().asDiagonal();
    CHECK(max_abs(b.component(zero) - diag) <= 1e-12);
    for (std::size_t k = 0; k < b.size(); ++k)
        if (static_cast<int>(k) != zero) CHECK(max_abs(b.component(k)) <= 1e-12);
}

TEST_CASE("Bohr conjugation for Y under H = Z") {
    const EigenSystem ez = herm_eig(pauli_z());
    const BohrDecomposition b = bohr_decompose(ez, pauli_y());
    CHECK((b.component(b.find(2.0, 1e-9)).adjoint() - b.component(b.find(-2.0, 1e-9))).norm() <= 1e-15);
}

TEST_CASE("Bohr completeness, conjugation and Heisenberg reconstruction on random pairs") {
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<int> dim_dist(2, 16);
    std::uniform_real_distribution<double> time_dist(-5.0, 5.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = dim_dist(rng);
        const ComplexMatrix h = random_hermitian(d, rng);
        const ComplexMatrix a = random_matrix(d, rng);
        const EigenSystem eig = herm_eig(h);
        const BohrDecomposition b = bohr_decompose(eig, a);
        const BohrDecomposition bd = bohr_decompose(eig, a.adjoint());

        ComplexMatrix sum = ComplexMatrix::Zero(d, d);
        for (std::size_t k = 0; k < b.size(); ++k) sum += b.component(k);
        REQUIRE((sum - eig.to_eigenbasis(a)).norm() <= 1e-10);

        const double tol = default_bohr_tolerance(eig);
        for (std::size_t k = 0; k < b.size(); ++k) {
            const int mirror = bd.find(-b.frequencies()(k), 2 * tol);
            REQUIRE(mirror >= 0);
            REQUIRE((b.component(k).adjoint() - bd.component(mirror)).norm() <= 1e-10);
        }

        if (trial % 10 == 0) {
            for (int s = 0; s < 10; ++s) {
                const double t = time_dist(rng);
                const ComplexMatrix u = (Complex(0, 1) * t * h).exp();
                const ComplexMatrix direct = eig.to_eigenbasis(u * a * u.adjoint());
                REQUIRE(max_abs(b.heisenberg(t) - direct) <= 1e-9 * std::max(1.0, max_abs(a)));
            }
        }
    }
}

TEST_CASE("Bohr clustering warns about near-touching clusters") {
    ComplexMatrix h = ComplexMatrix::Zero(3, 3);
    h.diagonal() << 0.0, 1.0, 1.0 + 5e-6;
    const EigenSystem eig = herm_eig(h);
    const BohrDecomposition b = bohr_decompose(eig, ComplexMatrix::Ones(3, 3), 1e-6);
    CHECK_FALSE(b.warnings().empty());
    const BohrDecomposition quiet = bohr_decompose(eig, ComplexMatrix::Ones(3, 3), 1e-8);
    CHECK(quiet.warnings().empty());
    // a wide tolerance merges the two frequencies into one cluster
    const BohrDecomposition merged = bohr_decompose(eig, ComplexMatrix::Ones(3, 3), 1e-4);
    CHECK(b.size() == 7);
    CHECK(merged.size() == 3);
}

TEST_CASE("filter frequency examples") {
    for (double beta : {0.0, 0.5, 1.0, 3.0})
        for (double sigma : {0.25, 1.0, 2.0}) CHECK(filter_frequency(filter(beta, sigma, 6 * sigma), 0.0) == 1.0);
    const FilterParams p = filter(1.0, 1.0, 6.0);
    CHECK(filter_frequency(p, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(filter_frequency(p, -2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(filter_eval(p, FilterDomain::Frequency, -2.0).real() == doctest::Approx(0.36788).epsilon(1e-5));
    CHECK(filter_eval(p, FilterDomain::Time, 0.3) == filter_time(p, 0.3));
}

TEST_CASE("filter Fourier pair by adaptive quadrature") {
    // integer nu in [-4, 4], window |t| <= 8 sigma
    for (double sigma : {0.5, 1.0}) {
        const FilterParams p = filter(1.0, sigma, 6 * sigma);
        for (int nu = -4; nu <= 4; ++nu) {
            const Complex q = fourier_gk(p, nu, -8 * sigma, 8 * sigma);
            REQUIRE(std::abs(q - filter_frequency(p, nu)) <= 1e-8);
        }
    }
    // a grid spanning the Bohr frequencies of a 3-site chain
    const EigenSystem eig = herm_eig(build_mfi(3, 0.9045, 0.809).hamiltonian);
    const double span = eig.values.maxCoeff() - eig.values.minCoeff();
    const FilterParams p = filter(1.0, 0.5, 3.0);
    for (int k = -10; k <= 10; ++k) {
        const double nu = span * k / 10.0;
        REQUIRE(std::abs(fourier_gk(p, nu, -8 * 0.5, 8 * 0.5) - filter_frequency(p, nu)) <= 1e-8);
    }
}

TEST_CASE("filter l1 norm and tail mass") {
    using boost::math::quadrature::gauss_kronrod;
    const FilterParams p = filter(1.0, 0.5, 2.0);
    auto mod = [&](double t) { return std::abs(filter_time(p, t)); };
    const double total = gauss_kronrod<double, 61>::integrate(mod, -10.0, 10.0, 15, 1e-14);
    CHECK(filter_l1_norm(p) == doctest::Approx(total).epsilon(1e-10));
    CHECK(filter_l1_norm(p) == doctest::Approx(std::exp(0.5)).epsilon(1e-14));
    const double inside = gauss_kronrod<double, 61>::integrate(mod, -1.0, 1.0, 15, 1e-14);
    CHECK(filter_tail_mass(p) == doctest::Approx(total - inside).epsilon(1e-8));
}

TEST_CASE("exact filtered jump on a single qubit") {
    const EigenSystem ez = herm_eig(pauli_z());
    const FilterParams p = filter(1.0, 1.0, 6.0);
    const ComplexMatrix l = ez.to_computational(filtered_jump_exact(bohr_decompose(ez, pauli_x()), p));
    ComplexMatrix expect = ComplexMatrix::Zero(2, 2);
    expect(0, 1) = std::exp(-1.0);
    expect(1, 0) = 1.0;
    CHECK(max_abs(l - expect) <= 1e-15);
}

TEST_CASE("exact filtered jump of a commuting operator is the operator") {
    const ComplexMatrix h = build_mfi(2, 0.9045, 0.809).hamiltonian;
    const EigenSystem eig = herm_eig(h);
    const BohrDecomposition b = bohr_decompose(eig, h);
    CHECK(max_abs(filtered_jump_exact(b, filter(1.0, 0.5, 3.0)) - eig.to_eigenbasis(h)) <= 1e-12);
}

TEST_CASE("at beta = 0 the filtered jump of a Hermitian operator is Hermitian") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        const EigenSystem eig = herm_eig(random_hermitian(6, rng));
        const ComplexMatrix a = random_hermitian(6, rng);
        const ComplexMatrix l = filtered_jump_exact(bohr_decompose(eig, a), filter(0.0, 0.7, 4.2));
        REQUIRE(hermiticity_defect(l) <= 1e-12);
    }
}

TEST_CASE("truncated jump obeys the tail bound and converges to the exact jump") {
    const EigenSystem eig = herm_eig(build_mfi(2, 0.9045, 0.809).hamiltonian);
    const JumpFamily fam = site_jump_family(2, Pauli::Y);
    const BohrDecomposition b = bohr_decompose(eig, fam.operators[0]);
    const double sigma = 0.5;
    double previous = INFINITY;
    for (double k : {2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0}) {
        const FilterParams p = filter(1.0, sigma, k * sigma);
        const ComplexMatrix exact = filtered_jump_exact(b, p);
        const ComplexMatrix trunc = filtered_jump_truncated(b, p, 128);
        const double err = spectral_norm(trunc - exact);
        const double bound = std::exp(1.0 / (8 * sigma * sigma)) * std::erfc(k / std::sqrt(2.0));
        REQUIRE(err <= bound + 1e-13);
        REQUIRE(err <= previous + 1e-14);
        previous = err;
        if (k == 2.0) REQUIRE(spectral_norm(trunc) <= filter_l1_norm(p) + 1e-12);
        if (k >= 12.0) REQUIRE(err <= 1e-8);
    }
}

TEST_CASE("single-qubit truncated jump at the window cap reproduces the exact jump") {
    const EigenSystem ez = herm_eig(pauli_z());
    const FilterParams p = filter(1.0, 1.0, 12.0);
    const BohrDecomposition b = bohr_decompose(ez, pauli_x());
    CHECK(max_abs(filtered_jump_truncated(b, p) - filtered_jump_exact(b, p)) <= 1e-8);
    CHECK(truncated_coefficient(p, 2.0, 128).real() == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
}

TEST_CASE("truncated jump preconditions") {
    const EigenSystem ez = herm_eig(pauli_z());
    const BohrDecomposition b = bohr_decompose(ez, pauli_x());
    CHECK_THROWS_AS(filtered_jump_truncated(b, filter(1.0, 1.0, 6.0), 16), ValidationError);
    CHECK_THROWS_AS(filtered_jump_truncated(b, filter(1.0, 1.0, 1.5), 128), ValidationError);
}

TEST_CASE("filter parameter validation") {
    CHECK_THROWS_AS(filter(-1.0, 0.5, 3.0).validate(), ValidationError);
    CHECK_THROWS_AS(filter(1.0, 0.0, 3.0).validate(), ValidationError);
    CHECK_THROWS_AS(filter(1.0, 0.5, 0.0).validate(), ValidationError);
    CHECK(filter(1.0, 0.5, 0.5).warnings().size() == 1);
    CHECK(filter(1.0, 0.5, 3.0).warnings().empty());
    CHECK(filter(1.0, 0.5, 3.0).capped().T_window == doctest::Approx(6.0));
}
