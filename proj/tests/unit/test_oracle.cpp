#include "dtrace/oracle.hpp"

#include <doctest.h>

#include <limits>
#include <random>
#include <thread>

using namespace dtrace;

namespace {

Matrix random_matrix(Index n, std::uint64_t seed, bool symmetric) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Matrix a(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) a(i, j) = normal(rng);
    if (symmetric) a = 0.5 * (a + a.transpose()).eval();
    return a;
}

Vector random_vector(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = normal(rng);
    return v;
}

void check_linearity(const MatVecOracle& op, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 100; ++trial) {
        const double a = normal(rng);
        const double b = normal(rng);
        const Vector x = random_vector(op.dim(), rng);
        const Vector y = random_vector(op.dim(), rng);
        const Vector lhs = op.apply(Vector(a * x + b * y));
        const Vector rhs = a * op.apply(x) + b * op.apply(y);
        const double tol = 1e-10 * (std::abs(a) * x.norm() + std::abs(b) * y.norm()) * std::max(1.0, rhs.norm());
        CHECK((lhs - rhs).norm() <= tol);
    }
}

}  // namespace

TEST_CASE("dense oracle reproduces the matrix product") {
    SUBCASE("identity") {
        const Vector y = dense_oracle(Matrix::Identity(3, 3)).apply(Vector((Vector(3) << 1, 2, 3).finished()));
        CHECK(y == (Vector(3) << 1, 2, 3).finished());
    }
    SUBCASE("zero") {
        const Vector y = dense_oracle(Matrix::Zero(4, 4)).apply(Vector(Vector::Ones(4)));
        CHECK(y.isZero(0.0));
    }
    SUBCASE("unit vector picks a column") {
        const Matrix a = random_matrix(5, 11, false);
        const Vector y = dense_oracle(a).apply(Vector(Vector::Unit(5, 2)));
        for (Index i = 0; i < 5; ++i) CHECK(y(i) == a(i, 2));
    }
    SUBCASE("cost is one") { CHECK(dense_oracle(Matrix::Identity(2, 2)).matvec_cost() == 1); }
}

TEST_CASE("dense oracle rejects bad input") {
    CHECK_THROWS_AS(dense_oracle(Matrix::Zero(2, 3)), std::invalid_argument);
    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(dense_oracle(bad), std::invalid_argument);
    CHECK_THROWS_AS(dense_oracle(Matrix::Identity(3, 3)).apply(Vector(Vector::Ones(4))), std::invalid_argument);
}

TEST_CASE("power oracle") {
    SUBCASE("diagonal cube") {
        Matrix d = Matrix::Zero(2, 2);
        d.diagonal() << 2, 3;
        const MatVecOracle p = power_oracle(dense_oracle(d), 3);
        const Vector y = p.apply(Vector(Vector::Ones(2)));
        CHECK(y(0) == 8.0);
        CHECK(y(1) == 27.0);
        CHECK(p.matvec_cost() == 3);
    }
    SUBCASE("triangle has tr(B^3) = 6") {
        Matrix k3 = Matrix::Ones(3, 3) - Matrix::Identity(3, 3);
        const MatVecOracle p = power_oracle(dense_oracle(k3), 3);
        const Matrix cube = p.apply(Matrix(Matrix::Identity(3, 3)));
        CHECK(cube.trace() == 6.0);
    }
    SUBCASE("agrees with dense repeated multiplication") {
        for (Index n : {6, 17, 50}) {
            const Matrix b = random_matrix(n, static_cast<std::uint64_t>(n), true);
            for (int p : {1, 2, 3}) {
                Matrix dense = Matrix::Identity(n, n);
                for (int i = 0; i < p; ++i) dense = dense * b;
                const Matrix got = power_oracle(dense_oracle(b), p).apply(Matrix(Matrix::Identity(n, n)));
                CHECK((got - dense).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, dense.cwiseAbs().maxCoeff()));
            }
        }
        const Matrix b6 = random_matrix(6, 3, true);
        const Matrix got = power_oracle(dense_oracle(b6), 2).apply(Matrix(Matrix::Identity(6, 6)));
        CHECK((got - b6 * b6).cwiseAbs().maxCoeff() <= 1e-12);
    }
    SUBCASE("zero exponent is rejected") {
        CHECK_THROWS_AS(power_oracle(identity_oracle(3), 0), std::invalid_argument);
    }
}

TEST_CASE("oracles are linear and deterministic") {
    const Matrix a = random_matrix(20, 5, false);
    check_linearity(dense_oracle(a), 1);
    check_linearity(sparse_oracle(SparseMatrix(a.sparseView())), 2);
    check_linearity(identity_oracle(20), 3);
    check_linearity(power_oracle(dense_oracle(a / 5.0), 3), 4);

    std::mt19937_64 rng(9);
    const Vector x = random_vector(20, rng);
    const MatVecOracle op = dense_oracle(a);
    const Vector y1 = op.apply(x);
    const Vector y2 = op.apply(x);
    CHECK(y1 == y2);
}

TEST_CASE("block apply matches column-wise apply") {
    const Matrix a = random_matrix(12, 8, false);
    const MatVecOracle op = dense_oracle(a);
    const Matrix x = random_matrix(12, 9, false).leftCols(4);
    const Matrix y = op.apply(x);
    for (Index c = 0; c < 4; ++c) CHECK((y.col(c) - op.apply(Vector(x.col(c)))).norm() <= 1e-12);
}

TEST_CASE("counted oracle charges the ledger") {
    MatVecLedger ledger;
    SUBCASE("five unit-cost applies") {
        const MatVecOracle op = counted(identity_oracle(4), ledger, 1);
        for (int i = 0; i < 5; ++i) op.apply(Vector(Vector::Ones(4)));
        CHECK(ledger.total_base_matvecs() == 5);
        CHECK(ledger.total_oracle_calls() == 5);
    }
    SUBCASE("cubed oracle costs three per call") {
        const MatVecOracle op = counted(power_oracle(identity_oracle(4), 3), ledger, 1);
        op.apply(Vector(Vector::Ones(4)));
        op.apply(Vector(Vector::Ones(4)));
        CHECK(ledger.total_base_matvecs() == 6);
        CHECK(ledger.total_oracle_calls() == 2);
    }
    SUBCASE("per-step additivity") {
        const MatVecOracle base = power_oracle(identity_oracle(3), 2);
        const MatVecOracle at1 = counted(base, ledger, 1);
        const MatVecOracle at2 = counted(base, ledger, 2);
        at1.apply(Matrix(Matrix::Ones(3, 3)));
        at2.apply(Vector(Vector::Ones(3)));
        at1.apply(Vector(Vector::Ones(3)));
        CHECK(ledger.base_matvecs_at(1) == 4 * 2);
        CHECK(ledger.base_matvecs_at(2) == 1 * 2);
        const auto per = ledger.per_step();
        std::int64_t sum = 0;
        for (auto v : per) sum += v;
        CHECK(sum == ledger.total_base_matvecs());
    }
    SUBCASE("concurrent increments are not lost") {
        const MatVecOracle op = counted(identity_oracle(2), ledger, 0);
        std::vector<std::thread> workers;
        for (int t = 0; t < 4; ++t)
            workers.emplace_back([&op] {
                for (int i = 0; i < 250; ++i) op.apply(Vector(Vector::Ones(2)));
            });
        for (auto& w : workers) w.join();
        CHECK(ledger.total_oracle_calls() == 1000);
    }
}
