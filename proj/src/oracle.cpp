#include "dtrace/oracle.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dtrace {

MatVecOracle::MatVecOracle(Index dim, BlockFn fn, std::int64_t matvec_cost)
    : dim_(dim), cost_(matvec_cost), fn_(std::make_shared<const BlockFn>(std::move(fn))) {
    if (dim < 1) throw std::invalid_argument("MatVecOracle: dimension must be positive");
    if (matvec_cost < 1) throw std::invalid_argument("MatVecOracle: matvec cost must be positive");
    if (!*fn_) throw std::invalid_argument("MatVecOracle: empty apply function");
}

Matrix MatVecOracle::apply(const Matrix& block) const {
    if (block.rows() != dim_) {
        throw std::invalid_argument("MatVecOracle::apply: expected " + std::to_string(dim_) +
                                    " rows, got " + std::to_string(block.rows()));
    }
    if (block.cols() == 0) return Matrix(dim_, 0);
    return (*fn_)(block);
}

Vector MatVecOracle::apply(const Vector& x) const {
    Matrix block = x;
    return apply(block).col(0);
}

void MatVecLedger::record(std::size_t step, std::int64_t oracle_calls, std::int64_t cost_per_call) {
    std::lock_guard lock(mu_);
    if (base_.size() <= step) {
        base_.resize(step + 1, 0);
        calls_.resize(step + 1, 0);
    }
    base_[step] += oracle_calls * cost_per_call;
    calls_[step] += oracle_calls;
}

std::int64_t MatVecLedger::total_base_matvecs() const {
    std::lock_guard lock(mu_);
    return std::accumulate(base_.begin(), base_.end(), std::int64_t{0});
}

std::int64_t MatVecLedger::total_oracle_calls() const {
    std::lock_guard lock(mu_);
    return std::accumulate(calls_.begin(), calls_.end(), std::int64_t{0});
}

std::int64_t MatVecLedger::base_matvecs_at(std::size_t step) const {
    std::lock_guard lock(mu_);
    return step < base_.size() ? base_[step] : 0;
}

std::int64_t MatVecLedger::oracle_calls_at(std::size_t step) const {
    std::lock_guard lock(mu_);
    return step < calls_.size() ? calls_[step] : 0;
}

std::vector<std::int64_t> MatVecLedger::per_step() const {
    std::lock_guard lock(mu_);
    return base_;
}

MatVecOracle dense_oracle(Matrix matrix) {
    if (matrix.rows() != matrix.cols() || matrix.rows() == 0)
        throw std::invalid_argument("dense_oracle: matrix must be square and non-empty");
    if (!matrix.allFinite()) throw std::invalid_argument("dense_oracle: matrix has non-finite entries");
    const Index n = matrix.rows();
    auto held = std::make_shared<const Matrix>(std::move(matrix));
    return MatVecOracle(n, [held](const Matrix& x) -> Matrix { return (*held) * x; });
}

MatVecOracle sparse_oracle(SparseMatrix matrix) {
    if (matrix.rows() != matrix.cols() || matrix.rows() == 0)
        throw std::invalid_argument("sparse_oracle: matrix must be square and non-empty");
    for (Index k = 0; k < matrix.nonZeros(); ++k) {
        if (!std::isfinite(matrix.valuePtr()[k]))
            throw std::invalid_argument("sparse_oracle: matrix has non-finite entries");
    }
    matrix.makeCompressed();
    const Index n = matrix.rows();
    auto held = std::make_shared<const SparseMatrix>(std::move(matrix));
    return MatVecOracle(n, [held](const Matrix& x) -> Matrix { return (*held) * x; });
}

MatVecOracle identity_oracle(Index dim) {
    return MatVecOracle(dim, [](const Matrix& x) -> Matrix { return x; });
}

MatVecOracle power_oracle(const MatVecOracle& base, int p) {
    if (p < 1) throw std::invalid_argument("power_oracle: exponent must be >= 1");
    return MatVecOracle(
        base.dim(),
        [base, p](const Matrix& x) -> Matrix {
            Matrix y = base.apply(x);
            for (int i = 1; i < p; ++i) y = base.apply(y);
            return y;
        },
        base.matvec_cost() * p);
}

MatVecOracle counted(const MatVecOracle& oracle, MatVecLedger& ledger, std::size_t step) {
    MatVecLedger* sink = &ledger;
    const std::int64_t cost = oracle.matvec_cost();
    return MatVecOracle(
        oracle.dim(),
        [oracle, sink, step, cost](const Matrix& x) -> Matrix {
            sink->record(step, x.cols(), cost);
            return oracle.apply(x);
        },
        cost);
}

}  // namespace dtrace
