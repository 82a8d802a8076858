#pragma once

#include "dtrace/oracle.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace dtrace {

/// k-step Lanczos factorization A V ≈ V T started from x/‖x‖.
struct LanczosDecomposition {
    Matrix basis;  ///< n × k, orthonormal columns
    Vector alphas;
    Vector betas;  ///< size k−1 off-diagonal
    double start_norm = 0.0;

    Matrix tridiagonal() const;
};

/// Runs up to k Lanczos steps with full reorthogonalization; k is capped at n and
/// the iteration stops early when a beta falls below 1e-12·‖x‖-relative scale.
LanczosDecomposition lanczos(const MatVecOracle& symmetric, const Vector& x, Index k);

/// ‖x‖·V·f(T)·e₁ for the symmetric-tridiagonal function f.
Vector lanczos_function_apply(const MatVecOracle& symmetric, const Vector& x, Index k,
                              const std::function<double(double)>& f);

Vector lanczos_expm_apply(const MatVecOracle& symmetric, const Vector& x, Index k);

/// exp(B)·x through k-step Lanczos per column; matvec cost k·(base cost).
MatVecOracle expm_oracle(const MatVecOracle& symmetric, Index k = 15);

/// |Rayleigh quotient| after `iters` normalized power iterations from a seeded ±1 start.
double power_iteration(const MatVecOracle& symmetric, int iters, std::uint64_t seed);

struct ChebyshevScaling {
    double lambda_max = 1.0;
    double margin = 1.05;

    double scale() const { return lambda_max * margin; }
};

/// T₀(H̃)x … T_q(H̃)x with H̃ = H/scale; q_max base applications in total.
std::vector<Vector> chebyshev_actions(const MatVecOracle& symmetric, const ChebyshevScaling& scaling,
                                      const Vector& x, int q_max);

/// x ↦ T_q(H/scale)x as an oracle of cost q·(base cost); q ≥ 1.
MatVecOracle chebyshev_oracle(const MatVecOracle& symmetric, const ChebyshevScaling& scaling, int q);

}  // namespace dtrace
