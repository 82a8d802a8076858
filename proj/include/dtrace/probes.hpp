#pragma once

#include "dtrace/oracle.hpp"

#include <cstdint>

namespace dtrace {

/// ±1 probe vectors stored as the columns of `vectors` (dim × count).
struct ProbeBatch {
    std::uint64_t seed = 0;
    std::uint64_t step = 0;
    std::uint64_t stream = 0;
    Matrix vectors;

    Index count() const { return vectors.cols(); }
    Index dim() const { return vectors.rows(); }
};

/**
 Rademacher probes from a counter-based generator.

 Entry (i, c) is a pure function of (seed, step, stream, c, i), so batches are
 reproducible regardless of evaluation order. `stream` separates independent
 batches drawn within one time step (e.g. the sketch and residual probes of
 Hutch++).
 */
ProbeBatch rademacher_batch(std::uint64_t seed, std::uint64_t step, Index count, Index dim,
                            std::uint64_t stream = 0);

struct QuadraticSamples {
    Matrix responses;  ///< A g_i in column i
    Vector forms;      ///< g_iᵀ A g_i
};

/// One oracle application per probe; throws on dimension mismatch.
QuadraticSamples quadratic_samples(const MatVecOracle& oracle, const ProbeBatch& batch);

/// g_iᵀ r_i for matching columns of probes and responses.
Vector column_forms(const Matrix& probes, const Matrix& responses);

}  // namespace dtrace
