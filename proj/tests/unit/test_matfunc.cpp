#include "dtrace/matfunc.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace dtrace;

namespace {

Matrix sym_gaussian(Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Matrix a(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) a(i, j) = normal(rng);
    return 0.5 * (a + a.transpose());
}

// random orthogonal basis with a prescribed spectrum
Matrix with_spectrum(const Vector& lambda, std::uint64_t seed) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym_gaussian(lambda.size(), seed));
    return eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
}

Vector gaussian_vector(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Vector x(n);
    for (Index i = 0; i < n; ++i) x(i) = normal(rng);
    return x;
}

Matrix dense_expm(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
    return eig.eigenvectors() * eig.eigenvalues().array().exp().matrix().asDiagonal() *
           eig.eigenvectors().transpose();
}

}  // namespace

TEST_CASE("lanczos decomposition invariants") {
    const Matrix a = sym_gaussian(40, 1);
    std::mt19937_64 rng(2);
    const Vector x = gaussian_vector(40, rng);
    const LanczosDecomposition d = lanczos(dense_oracle(a), x, 15);
    CHECK(d.basis.cols() == 15);
    CHECK((d.basis.transpose() * d.basis - Matrix::Identity(15, 15)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((d.betas.array() >= 0.0).all());
    CHECK(d.start_norm == doctest::Approx(x.norm()));
    // Vᵀ A V reproduces T
    CHECK((d.basis.transpose() * a * d.basis - d.tridiagonal()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("lanczos exp action") {
    SUBCASE("zero operator") {
        const Vector x = Vector::LinSpaced(6, 1.0, 6.0);
        const Vector y = lanczos_expm_apply(dense_oracle(Matrix::Zero(6, 6)), x, 15);
        CHECK((y - x).norm() == 0.0);
    }
    SUBCASE("diagonal exponential") {
        Matrix b = Matrix::Zero(2, 2);
        b(1, 1) = std::log(2.0);
        const Vector y = lanczos_expm_apply(dense_oracle(b), Vector(Vector::Unit(2, 1)), 15);
        CHECK(std::abs(y(0)) < 1e-10);
        CHECK(std::abs(y(1) - 2.0) < 1e-10);
    }
    SUBCASE("k capped at n") {
        const Matrix a = sym_gaussian(5, 3);
        MatVecLedger ledger;
        std::mt19937_64 rng(4);
        const Vector x = gaussian_vector(5, rng);
        const Vector y = lanczos_expm_apply(counted(dense_oracle(a), ledger, 0), x, 40);
        CHECK(ledger.total_oracle_calls() <= 5);
        CHECK((y - dense_expm(a) * x).norm() <= 1e-8 * y.norm());
    }
    SUBCASE("k >= n is exact on larger operators") {
        const Matrix a = sym_gaussian(30, 8) / 5.0;
        std::mt19937_64 rng(5);
        const Vector x = gaussian_vector(30, rng);
        const Vector y = lanczos_expm_apply(dense_oracle(a), x, 30);
        CHECK((y - dense_expm(a) * x).norm() <= 1e-8 * y.norm());
    }
    SUBCASE("15 steps on a 100x100 operator with spectrum in [-1, 1]") {
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Vector lambda(100);
        for (Index i = 0; i < 100; ++i) lambda(i) = u(rng);
        const Matrix a = with_spectrum(lambda, 7);
        const Matrix e = dense_expm(a);
        for (int probe = 0; probe < 20; ++probe) {
            const Vector x = gaussian_vector(100, rng);
            const Vector want = e * x;
            CHECK((lanczos_expm_apply(dense_oracle(a), x, 15) - want).norm() <= 1e-8 * want.norm());
        }
    }
    SUBCASE("non-finite operator output") {
        const MatVecOracle bad(3, [](const Matrix& x) -> Matrix {
            return Matrix::Constant(x.rows(), x.cols(), std::numeric_limits<double>::infinity());
        });
        CHECK_THROWS_AS(lanczos_expm_apply(bad, Vector(Vector::Ones(3)), 3), std::runtime_error);
    }
}

TEST_CASE("expm oracle charges k products per probe") {
    const Matrix a = sym_gaussian(20, 9) / 6.0;
    const MatVecOracle e = expm_oracle(dense_oracle(a), 15);
    CHECK(e.matvec_cost() == 15);
    std::mt19937_64 rng(10);
    Matrix x(20, 3);
    for (Index c = 0; c < 3; ++c) x.col(c) = gaussian_vector(20, rng);
    const Matrix got = e.apply(x);
    const Matrix want = dense_expm(a) * x;
    CHECK((got - want).norm() <= 1e-8 * want.norm());
}

TEST_CASE("power iteration") {
    Matrix d = Matrix::Zero(3, 3);
    d.diagonal() << 3, 1, 0.5;
    CHECK(std::abs(power_iteration(dense_oracle(d), 50, 1) - 3.0) < 1e-6);
    CHECK(power_iteration(identity_oracle(7), 1, 4) == 1.0);
    CHECK(power_iteration(dense_oracle(Matrix::Zero(4, 4)), 10, 0) == 0.0);

    MatVecLedger ledger;
    power_iteration(counted(dense_oracle(d), ledger, 0), 12, 0);
    CHECK(ledger.total_oracle_calls() == 12);

    // Wishart: a Gaussian ensemble has |λ_min| ≈ λ_max and no dominant direction
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        const Matrix g = sym_gaussian(50, seed);
        const Matrix a = g * g.transpose() / 50.0;
        Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
        const double truth = eig.eigenvalues().cwiseAbs().maxCoeff();
        const double est = power_iteration(dense_oracle(a), 200, seed);
        CHECK(est <= truth * (1.0 + 1e-12));
        CHECK(est >= 0.99 * truth);
    }
}

TEST_CASE("chebyshev actions") {
    SUBCASE("degree zero is the identity") {
        const Vector x = Vector::LinSpaced(5, -2.0, 2.0);
        const auto t = chebyshev_actions(dense_oracle(sym_gaussian(5, 1)), {}, x, 0);
        REQUIRE(t.size() == 1);
        CHECK(t[0] == x);
    }
    SUBCASE("cosine spectrum") {
        Vector theta = Vector::LinSpaced(6, 0.1, 3.0);
        Matrix h = theta.array().cos().matrix().asDiagonal();
        const ChebyshevScaling unit{1.0, 1.0};
        for (Index i = 0; i < 6; ++i) {
            const auto t = chebyshev_actions(dense_oracle(h), unit, Vector(Vector::Unit(6, i)), 8);
            for (int q = 0; q <= 8; ++q) {
                CHECK(std::abs(t[static_cast<std::size_t>(q)](i) - std::cos(q * theta(i))) < 1e-12);
            }
        }
    }
    SUBCASE("T3 against the dense polynomial") {
        const Matrix h = sym_gaussian(30, 2);
        const ChebyshevScaling s{4.0, 1.05};
        const Matrix ht = h / s.scale();
        std::mt19937_64 rng(3);
        const Vector x = gaussian_vector(30, rng);
        const Vector want = (4.0 * ht * ht * ht - 3.0 * ht) * x;
        const auto t = chebyshev_actions(dense_oracle(h), s, x, 3);
        CHECK((t[3] - want).norm() < 1e-10 * std::max(1.0, want.norm()));
        const Vector via_oracle = chebyshev_oracle(dense_oracle(h), s, 3).apply(x);
        CHECK((via_oracle - want).norm() < 1e-10 * std::max(1.0, want.norm()));
    }
    SUBCASE("bounded when correctly scaled") {
        const Matrix h = sym_gaussian(40, 4);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
        const ChebyshevScaling s{eig.eigenvalues().cwiseAbs().maxCoeff(), 1.0};
        std::mt19937_64 rng(5);
        const Vector x = gaussian_vector(40, rng);
        const auto t = chebyshev_actions(dense_oracle(h), s, x, 10);
        for (const auto& v : t) CHECK(v.norm() <= std::sqrt(40.0) * x.norm() * (1.0 + 1e-6));
    }
    SUBCASE("exactly q_max products") {
        MatVecLedger ledger;
        chebyshev_actions(counted(identity_oracle(4), ledger, 0), {}, Vector(Vector::Ones(4)), 7);
        CHECK(ledger.total_oracle_calls() == 7);
        CHECK(chebyshev_oracle(identity_oracle(4), {}, 5).matvec_cost() == 5);
        CHECK_THROWS_AS(chebyshev_oracle(identity_oracle(4), {}, 0), std::invalid_argument);
    }
}
