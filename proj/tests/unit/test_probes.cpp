#include "dtrace/estimators.hpp"
#include "dtrace/probes.hpp"

#include <doctest.h>

#include <random>

using namespace dtrace;

TEST_CASE("rademacher batches are reproducible and separated by step") {
    const ProbeBatch a = rademacher_batch(7, 1, 2, 4);
    const ProbeBatch b = rademacher_batch(7, 1, 2, 4);
    CHECK(a.vectors == b.vectors);
    const ProbeBatch c = rademacher_batch(7, 2, 2, 4);
    const ProbeBatch big1 = rademacher_batch(7, 1, 8, 64);
    const ProbeBatch big2 = rademacher_batch(7, 2, 8, 64);
    CHECK(big1.vectors != big2.vectors);
    CHECK(rademacher_batch(7, 1, 8, 64, 1).vectors != big1.vectors);
    CHECK(rademacher_batch(8, 1, 8, 64).vectors != big1.vectors);
    (void)c;
}

TEST_CASE("a batch prefix does not depend on the batch size") {
    const ProbeBatch small = rademacher_batch(3, 5, 2, 100);
    const ProbeBatch large = rademacher_batch(3, 5, 6, 300);
    CHECK(large.vectors.topLeftCorner(100, 2) == small.vectors);
}

TEST_CASE("entries are exactly +-1 and balanced") {
    const ProbeBatch b = rademacher_batch(123, 4, 1000, 1000);
    CHECK((b.vectors.array().abs() == 1.0).all());
    CHECK(std::abs(b.vectors.mean()) < 0.005);
}

TEST_CASE("rademacher batch validates sizes") {
    CHECK_THROWS_AS(rademacher_batch(0, 0, 0, 3), std::invalid_argument);
    CHECK_THROWS_AS(rademacher_batch(0, 0, 3, 0), std::invalid_argument);
}

TEST_CASE("quadratic samples") {
    SUBCASE("identity gives n") {
        const auto s = quadratic_samples(identity_oracle(9), rademacher_batch(1, 1, 5, 9));
        CHECK((s.forms.array() == 9.0).all());
    }
    SUBCASE("diagonal gives the exact trace") {
        Vector d(6);
        d << 1.5, -2, 0.25, 4, 0, -1;
        const Matrix a = d.asDiagonal();
        const auto s = quadratic_samples(dense_oracle(a), rademacher_batch(2, 1, 7, 6));
        CHECK((s.forms.array() == d.sum()).all());
    }
    SUBCASE("matches dense quadratic forms") {
        std::mt19937_64 rng(4);
        std::normal_distribution<double> normal;
        Matrix a(8, 8);
        for (Index i = 0; i < 8; ++i)
            for (Index j = 0; j < 8; ++j) a(i, j) = normal(rng);
        const ProbeBatch b = rademacher_batch(5, 3, 10, 8);
        const auto s = quadratic_samples(dense_oracle(a), b);
        for (Index c = 0; c < 10; ++c) {
            const Vector g = b.vectors.col(c);
            CHECK(std::abs(s.forms(c) - g.dot(a * g)) <= 1e-12);
            CHECK((s.responses.col(c) - a * g).norm() <= 1e-12);
        }
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(quadratic_samples(identity_oracle(4), rademacher_batch(1, 1, 2, 5)), std::invalid_argument);
    }
}

TEST_CASE("single-probe variance matches the closed form") {
    // 16x16 matrices: symmetric, nonsymmetric, and one with large diagonal
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal;
        Matrix a(16, 16);
        for (Index i = 0; i < 16; ++i)
            for (Index j = 0; j < 16; ++j) a(i, j) = normal(rng);
        if (seed == 1) a = (0.5 * (a + a.transpose())).eval();
        if (seed == 3) a.diagonal().array() += 5.0;
        const MatVecOracle op = dense_oracle(a);
        const int trials = 100000;
        const ProbeBatch b = rademacher_batch(seed, 0, trials, 16);
        const Vector forms = quadratic_samples(op, b).forms;
        const double mean = forms.mean();
        const double var = (forms.array() - mean).square().sum() / (trials - 1);
        const double exact = hutchinson_exact_variance(a, 1);
        CHECK(std::abs(var - exact) / exact < 0.05);
    }
}
