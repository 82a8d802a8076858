#pragma once

#include "dtrace/oracle.hpp"
#include "dtrace/probes.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace dtrace {

/**
 Running state of a dynamic trace estimator.

 `t` is the estimate for the matrix at `step` (1-based); `v` is the tracked
 variance proxy. Step functions take a state by const reference and return the
 successor, so a run is a fold over the oracle sequence.
 */
struct EstimatorState {
    double t = 0.0;
    double v = 0.0;
    std::size_t step = 0;
    std::uint64_t seed = 0;
    Index ell = 0;
    Index ell0 = 0;
    /// nullopt selects the closed-form damping of deltashift_auto_step.
    std::optional<double> fixed_gamma;
    /// Damping used by the most recent step; NaN when the step had none.
    double gamma = std::numeric_limits<double>::quiet_NaN();
};

/// Probe stream ids within a time step.
namespace streams {
inline constexpr std::uint64_t hutchinson = 0;
inline constexpr std::uint64_t sketch = 1;
inline constexpr std::uint64_t residual = 2;
inline constexpr std::uint64_t delta_sketch = 3;
inline constexpr std::uint64_t delta_residual = 4;
}  // namespace streams

/// (1/ℓ) Σ gᵢᵀ (A gᵢ). `ell` must equal the batch size and be positive.
double hutchinson(const MatVecOracle& oracle, Index ell, const ProbeBatch& batch);

/// Exact variance of the ℓ-probe Rademacher estimator: (2/ℓ)(‖A‖_F² − Σ A_ii²).
double hutchinson_exact_variance(const Matrix& matrix, Index ell);

/**
 Hutch++ budget split.

 The sketch gets ⌊ℓ·sketch_fraction⌋ products, the projection as many as the
 rank of the sketched basis (at most the sketch width), and the residual
 Hutchinson probes get the rest.
 */
struct HutchPPConfig {
    Index ell = 0;
    double sketch_fraction = 1.0 / 3.0;

    Index sketch_width() const;
    /// Residual probes for a full-rank sketch; a rank-deficient basis adds the unused products here.
    Index residual_count() const;
    /// Throws std::invalid_argument when ell < 3 or a part would be empty.
    void validate() const;
};

struct HutchPPResult {
    double estimate = 0.0;
    /// Mean of ‖(I−QQᵀ)A(I−QQᵀ)g‖² over residual probes; estimates ‖A − QQᵀAQQᵀ‖_F².
    double residual_frobenius_sq = 0.0;
    Index rank = 0;
    Index applies = 0;
};

HutchPPResult hutchpp(const MatVecOracle& oracle, const HutchPPConfig& config, std::uint64_t seed,
                      std::uint64_t step, std::uint64_t sketch_stream = streams::sketch,
                      std::uint64_t residual_stream = streams::residual);

/// Orthonormal basis of range(block), dropping singular values below 1e-12·σ_max.
Matrix orthonormal_basis(const Matrix& block);

/// Step 1 of every Hutchinson-based estimator: ℓ₀ probes, v = (2/ℓ₀)·N with N ≈ ‖A₁‖_F².
EstimatorState deltashift_init(const MatVecOracle& first, Index ell0, std::uint64_t seed);

/// Fresh Hutchinson estimate at the next step; `prev` is not touched.
EstimatorState hutchinson_step(const EstimatorState& state, const MatVecOracle& cur, Index ell);

/// t_j = t_{j−1} + h_ℓ(A_j − A_{j−1}) on fresh paired probes.
EstimatorState norestart_step(const EstimatorState& state, const MatVecOracle& prev,
                              const MatVecOracle& cur, Index ell);

/// Damped update with a caller-supplied γ ∈ [0, 1].
EstimatorState deltashift_fixed_step(const EstimatorState& state, const MatVecOracle& prev,
                                     const MatVecOracle& cur, Index ell, double gamma);

/// clamp(1 − 2C/(ℓ·v_prev + 2N), 0, 1); returns 1 when ℓ·v_prev + 2N is zero.
double optimal_gamma(double C, double N, double v_prev, Index ell);

/// Damped update with γ chosen from the step's own products.
EstimatorState deltashift_auto_step(const EstimatorState& state, const MatVecOracle& prev,
                                    const MatVecOracle& cur, Index ell);

/// Fresh ℓ₀-probe Hutchinson when the new step j satisfies j ≡ 1 (mod q), else a NoRestart step.
EstimatorState restart_step(const EstimatorState& state, const MatVecOracle& prev,
                            const MatVecOracle& cur, std::size_t q, Index ell0, Index ell);

std::vector<double> restart_run(std::span<const MatVecOracle> oracles, Index ell0, Index ell,
                                std::size_t q, std::uint64_t seed);

enum class DeltaShiftPPMode {
    /// Two separate Hutch++ calls on A_j and Δ_j, each with half the step budget.
    independent,
    /// One sketch and one residual probe set shared by both calls.
    reuse,
};

/// Step-1 Hutch++ with ℓ₀ products; v = 8K/ℓ₀.
EstimatorState deltashiftpp_init(const MatVecOracle& first, Index ell0, std::uint64_t seed);

/**
 DeltaShift++ step.

 `budget` counts base oracle applications for the whole step (one Δ_j product
 costs two). Adaptive damping from the residual Frobenius estimates K_A, K_Δ:
 γ = (8K_Δ/ℓ_Δ + v) / (8K_A/ℓ_A + v + 8K_Δ/ℓ_Δ).
 */
EstimatorState deltashiftpp_step(const EstimatorState& state, const MatVecOracle& prev,
                                 const MatVecOracle& cur, Index budget,
                                 DeltaShiftPPMode mode = DeltaShiftPPMode::independent);

/// Smallest budget deltashiftpp_step accepts in the given mode.
Index deltashiftpp_min_budget(DeltaShiftPPMode mode);

}  // namespace dtrace
