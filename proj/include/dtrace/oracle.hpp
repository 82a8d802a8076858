#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <vector>

namespace dtrace {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/**
 Implicit square linear operator accessed only through products.

 `apply` works on a block of column vectors so dense-backed oracles can use
 matrix-matrix kernels; the result is the same as applying column by column.
 `matvec_cost` is the number of base-matrix products one application consumes
 (3 for B(B(Bx)), 15 for a 15-step Lanczos exp(B)x, ...).

 Oracles are immutable values and cheap to copy.
 */
class MatVecOracle {
public:
    using BlockFn = std::function<Matrix(const Matrix&)>;

    MatVecOracle(Index dim, BlockFn fn, std::int64_t matvec_cost = 1);

    Index dim() const { return dim_; }
    std::int64_t matvec_cost() const { return cost_; }

    /// Applies the operator to every column of `block` (dim × k).
    Matrix apply(const Matrix& block) const;
    Vector apply(const Vector& x) const;

private:
    Index dim_;
    std::int64_t cost_;
    std::shared_ptr<const BlockFn> fn_;
};

/**
 Thread-safe matvec accounting.

 Tracks base-matrix multiplications per time step and, separately, the number
 of oracle applications (one per probe vector pushed through an oracle).
 */
class MatVecLedger {
public:
    void record(std::size_t step, std::int64_t oracle_calls, std::int64_t cost_per_call);

    std::int64_t total_base_matvecs() const;
    std::int64_t total_oracle_calls() const;
    /// Base matvecs charged at `step`; zero for steps never charged.
    std::int64_t base_matvecs_at(std::size_t step) const;
    std::int64_t oracle_calls_at(std::size_t step) const;
    /// Copy of the per-step base matvec counts, indexed by step.
    std::vector<std::int64_t> per_step() const;

private:
    mutable std::mutex mu_;
    std::vector<std::int64_t> base_;
    std::vector<std::int64_t> calls_;
};

/// Wraps a dense square matrix. Throws std::invalid_argument on non-square or non-finite input.
MatVecOracle dense_oracle(Matrix matrix);

/// Wraps a sparse square matrix; same validation as dense_oracle.
MatVecOracle sparse_oracle(SparseMatrix matrix);

MatVecOracle identity_oracle(Index dim);

/// base applied p times; cost is p · base cost. p = 0 is rejected.
MatVecOracle power_oracle(const MatVecOracle& base, int p);

/// Forwards to `oracle` and charges every application to `ledger` at `step`.
/// The ledger must outlive the returned oracle.
MatVecOracle counted(const MatVecOracle& oracle, MatVecLedger& ledger, std::size_t step);

}  // namespace dtrace
