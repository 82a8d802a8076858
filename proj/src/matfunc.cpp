#include "dtrace/matfunc.hpp"

#include "dtrace/probes.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dtrace {

Matrix LanczosDecomposition::tridiagonal() const {
    const Index k = alphas.size();
    Matrix t = Matrix::Zero(k, k);
    t.diagonal() = alphas;
    if (k > 1) {
        t.diagonal(1) = betas;
        t.diagonal(-1) = betas;
    }
    return t;
}

LanczosDecomposition lanczos(const MatVecOracle& symmetric, const Vector& x, Index k) {
    if (k < 1) throw std::invalid_argument("lanczos: iteration count must be >= 1");
    const Index n = symmetric.dim();
    if (x.size() != n) throw std::invalid_argument("lanczos: start vector has wrong length");
    k = std::min(k, n);

    LanczosDecomposition out;
    out.start_norm = x.norm();
    if (!std::isfinite(out.start_norm)) throw std::runtime_error("lanczos: non-finite start vector");
    if (out.start_norm == 0.0) {
        out.basis = Matrix::Zero(n, 0);
        return out;
    }

    Matrix v(n, k);
    std::vector<double> alphas;
    std::vector<double> betas;
    v.col(0) = x / out.start_norm;
    double scale = 0.0;
    Index built = 1;
    for (Index j = 0; j < k; ++j) {
        Vector w = symmetric.apply(Vector(v.col(j)));
        const double alpha = v.col(j).dot(w);
        alphas.push_back(alpha);
        if (j + 1 == k) break;
        // full reorthogonalization, applied twice
        for (int pass = 0; pass < 2; ++pass)
            w -= v.leftCols(j + 1) * (v.leftCols(j + 1).transpose() * w);
        const double beta = w.norm();
        if (!std::isfinite(alpha) || !std::isfinite(beta))
            throw std::runtime_error("lanczos: non-finite recurrence coefficient");
        scale = std::max({scale, std::abs(alpha), beta});
        if (beta <= 1e-12 * std::max(1.0, scale)) break;
        betas.push_back(beta);
        v.col(j + 1) = w / beta;
        built = j + 2;
    }
    out.basis = v.leftCols(built);
    out.alphas = Eigen::Map<Vector>(alphas.data(), static_cast<Index>(alphas.size()));
    out.betas = Eigen::Map<Vector>(betas.data(), static_cast<Index>(betas.size()));
    return out;
}

Vector lanczos_function_apply(const MatVecOracle& symmetric, const Vector& x, Index k,
                              const std::function<double(double)>& f) {
    const LanczosDecomposition dec = lanczos(symmetric, x, k);
    if (dec.alphas.size() == 0) return Vector::Zero(x.size());
    Eigen::SelfAdjointEigenSolver<Matrix> eig;
    if (dec.alphas.size() == 1) {
        return dec.start_norm * f(dec.alphas(0)) * dec.basis.col(0);
    }
    eig.computeFromTridiagonal(dec.alphas, dec.betas, Eigen::ComputeEigenvectors);
    if (eig.info() != Eigen::Success) throw std::runtime_error("lanczos: tridiagonal eigensolver failed");
    const Matrix& u = eig.eigenvectors();
    const Vector fl = eig.eigenvalues().unaryExpr(f);
    // f(T) e₁ = U f(Λ) Uᵀ e₁
    const Vector coeffs = u * fl.cwiseProduct(u.row(0).transpose());
    return dec.start_norm * (dec.basis * coeffs);
}

Vector lanczos_expm_apply(const MatVecOracle& symmetric, const Vector& x, Index k) {
    return lanczos_function_apply(symmetric, x, k, [](double lam) { return std::exp(lam); });
}

MatVecOracle expm_oracle(const MatVecOracle& symmetric, Index k) {
    if (k < 1) throw std::invalid_argument("expm_oracle: iteration count must be >= 1");
    const Index steps = std::min(k, symmetric.dim());
    return MatVecOracle(
        symmetric.dim(),
        [symmetric, steps](const Matrix& x) -> Matrix {
            Matrix y(x.rows(), x.cols());
            for (Index c = 0; c < x.cols(); ++c) y.col(c) = lanczos_expm_apply(symmetric, x.col(c), steps);
            return y;
        },
        steps * symmetric.matvec_cost());
}

double power_iteration(const MatVecOracle& symmetric, int iters, std::uint64_t seed) {
    if (iters < 1) throw std::invalid_argument("power_iteration: iters must be >= 1");
    Vector x = rademacher_batch(seed, 0, 1, symmetric.dim()).vectors.col(0);
    double rq = 0.0;
    for (int i = 0; i < iters; ++i) {
        const Vector y = symmetric.apply(x);
        rq = x.dot(y) / x.squaredNorm();
        const double norm = y.norm();
        if (norm == 0.0) return 0.0;
        x = y / norm;
    }
    return std::abs(rq);
}

std::vector<Vector> chebyshev_actions(const MatVecOracle& symmetric, const ChebyshevScaling& scaling,
                                      const Vector& x, int q_max) {
    if (q_max < 0) throw std::invalid_argument("chebyshev_actions: degree must be >= 0");
    if (!(scaling.scale() > 0.0)) throw std::invalid_argument("chebyshev_actions: scale must be positive");
    const double inv = 1.0 / scaling.scale();
    std::vector<Vector> t;
    t.reserve(static_cast<std::size_t>(q_max) + 1);
    t.push_back(x);
    if (q_max == 0) return t;
    t.push_back(inv * symmetric.apply(x));
    for (int q = 2; q <= q_max; ++q) {
        const auto& last = t[static_cast<std::size_t>(q - 1)];
        t.push_back(2.0 * inv * symmetric.apply(last) - t[static_cast<std::size_t>(q - 2)]);
    }
    return t;
}

MatVecOracle chebyshev_oracle(const MatVecOracle& symmetric, const ChebyshevScaling& scaling, int q) {
    if (q < 1) throw std::invalid_argument("chebyshev_oracle: degree must be >= 1");
    if (!(scaling.scale() > 0.0)) throw std::invalid_argument("chebyshev_oracle: scale must be positive");
    const double inv = 1.0 / scaling.scale();
    return MatVecOracle(
        symmetric.dim(),
        [symmetric, inv, q](const Matrix& x) -> Matrix {
            Matrix before = x;
            Matrix cur = inv * symmetric.apply(x);
            for (int d = 2; d <= q; ++d) {
                Matrix next = 2.0 * inv * symmetric.apply(cur) - before;
                before = std::move(cur);
                cur = std::move(next);
            }
            return cur;
        },
        static_cast<std::int64_t>(q) * symmetric.matvec_cost());
}

}  // namespace dtrace
