#pragma once

#include "dtrace/oracle.hpp"

#include <cstdint>
#include <string>

namespace dtrace {

enum class SequenceKind {
    /// rank-1 ±scale·ggᵀ updates
    low_perturb,
    /// rank-k PSD updates with ‖Δ‖_F = psd_fraction·‖A₁‖_F
    high_perturb,
    /// A_j = A₁ for all j
    stationary,
    /// PSD A₁ with geometrically decaying spectrum plus rank-k PSD updates
    lowrank_psd,
};

SequenceKind parse_sequence_kind(const std::string& name);
std::string to_string(SequenceKind kind);

struct MatrixSequenceSpec {
    Index n = 500;
    std::size_t m = 100;
    SequenceKind kind = SequenceKind::low_perturb;
    std::uint64_t seed = 0;
    /// Magnitude of low_perturb updates.
    double rank1_scale = 5e-5;
    /// Rank of high_perturb / lowrank_psd updates.
    Index rank = 25;
    /// ‖Δ‖_F / ‖A₁‖_F for PSD updates.
    double psd_fraction = 0.05;
    /// Eigenvalue ratio λ_{i+1}/λ_i of the lowrank_psd starting matrix.
    double decay = 0.9;

    void validate() const;
};

/// QΛQᵀ with Λ uniform on [−1, 1] and Q the orthogonal QR factor of a Gaussian matrix.
Matrix random_symmetric(Index n, std::uint64_t seed);

/// scale·r·ggᵀ with r = ±1, g standard Gaussian.
Matrix rank1_perturb(std::uint64_t seed, std::uint64_t step, Index n, double scale = 5e-5);

/// GGᵀ from an n×k Gaussian factor, rescaled to Frobenius norm `frobenius`.
Matrix psd_rank_k_perturb(std::uint64_t seed, std::uint64_t step, Index n, Index k, double frobenius);

/// Q diag(1, decay, decay², …) Qᵀ with a random orthogonal Q.
Matrix decaying_psd(Index n, double decay, std::uint64_t seed);

double exact_trace(const Matrix& matrix);
/// tr(exp(A)) from the eigenvalues of symmetric A.
double exact_trace_expm(const Matrix& symmetric);
/// tr(T_q(A/scale)) from the eigenvalues of symmetric A.
double exact_trace_chebyshev(const Matrix& symmetric, double scale, int q);

/**
 Sequential generator of A₁, A₂ = A₁ + Δ₂, …

 Holds only the current matrix; every Δ_j is a pure function of (spec, j).
 */
class MatrixSequence {
public:
    explicit MatrixSequence(MatrixSequenceSpec spec);

    const MatrixSequenceSpec& spec() const { return spec_; }
    std::size_t step() const { return step_; }
    const Matrix& current() const { return current_; }
    /// Advances to the next step and returns the new matrix.
    const Matrix& advance();
    /// Δ for the transition into `step` (≥ 2).
    Matrix perturbation(std::size_t step) const;

private:
    MatrixSequenceSpec spec_;
    Matrix current_;
    double base_frobenius_ = 0.0;
    std::size_t step_ = 1;
};

}  // namespace dtrace
