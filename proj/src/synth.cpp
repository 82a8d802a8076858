#include "dtrace/synth.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <random>
#include <stdexcept>

namespace dtrace {

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t step, std::uint32_t salt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), salt};
    return std::mt19937_64(seq);
}

Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Matrix g(rows, cols);
    for (Index c = 0; c < cols; ++c)
        for (Index r = 0; r < rows; ++r) g(r, c) = normal(rng);
    return g;
}

Matrix random_orthogonal(Index n, std::mt19937_64& rng) {
    const Matrix g = gaussian(n, n, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    // sign fix so Q is Haar distributed
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index i = 0; i < n; ++i)
        if (r(i, i) < 0) q.col(i) *= -1.0;
    return q;
}

Vector symmetric_eigenvalues(const Matrix& symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw std::runtime_error("symmetric eigensolver failed");
    return eig.eigenvalues();
}

}  // namespace

SequenceKind parse_sequence_kind(const std::string& name) {
    if (name == "low_perturb" || name == "low") return SequenceKind::low_perturb;
    if (name == "high_perturb" || name == "high") return SequenceKind::high_perturb;
    if (name == "stationary") return SequenceKind::stationary;
    if (name == "lowrank_psd") return SequenceKind::lowrank_psd;
    throw std::invalid_argument("unknown sequence kind '" + name + "'");
}

std::string to_string(SequenceKind kind) {
    switch (kind) {
        case SequenceKind::low_perturb: return "low_perturb";
        case SequenceKind::high_perturb: return "high_perturb";
        case SequenceKind::stationary: return "stationary";
        case SequenceKind::lowrank_psd: return "lowrank_psd";
    }
    return "?";
}

void MatrixSequenceSpec::validate() const {
    if (n < 2) throw std::invalid_argument("sequence: n must be >= 2");
    if (m < 1) throw std::invalid_argument("sequence: m must be >= 1");
    if ((kind == SequenceKind::high_perturb || kind == SequenceKind::lowrank_psd) && (rank < 1 || rank > n))
        throw std::invalid_argument("sequence: perturbation rank must lie in [1, n]");
    if (!(decay > 0.0 && decay <= 1.0)) throw std::invalid_argument("sequence: decay must lie in (0, 1]");
}

Matrix random_symmetric(Index n, std::uint64_t seed) {
    auto rng = make_rng(seed, 0, 0x5e11u);
    const Matrix q = random_orthogonal(n, rng);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Vector lam(n);
    for (Index i = 0; i < n; ++i) lam(i) = uni(rng);
    Matrix a = q * lam.asDiagonal() * q.transpose();
    return 0.5 * (a + a.transpose());
}

Matrix decaying_psd(Index n, double decay, std::uint64_t seed) {
    auto rng = make_rng(seed, 0, 0xdeca1u);
    const Matrix q = random_orthogonal(n, rng);
    Vector lam(n);
    double v = 1.0;
    for (Index i = 0; i < n; ++i, v *= decay) lam(i) = v;
    Matrix a = q * lam.asDiagonal() * q.transpose();
    return 0.5 * (a + a.transpose());
}

Matrix rank1_perturb(std::uint64_t seed, std::uint64_t step, Index n, double scale) {
    auto rng = make_rng(seed, step, 0x4a41u);
    const double sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
    const Vector g = gaussian(n, 1, rng);
    return (scale * sign) * (g * g.transpose());
}

Matrix psd_rank_k_perturb(std::uint64_t seed, std::uint64_t step, Index n, Index k, double frobenius) {
    if (k < 1 || k > n) throw std::invalid_argument("psd_rank_k_perturb: rank must lie in [1, n]");
    auto rng = make_rng(seed, step, 0x95d0u);
    const Matrix g = gaussian(n, k, rng);
    Matrix p = g * g.transpose();
    p = 0.5 * (p + p.transpose());
    const double norm = p.norm();
    return norm > 0.0 ? Matrix((frobenius / norm) * p) : p;
}

double exact_trace(const Matrix& matrix) { return matrix.trace(); }

double exact_trace_expm(const Matrix& symmetric) {
    return symmetric_eigenvalues(symmetric).array().exp().sum();
}

double exact_trace_chebyshev(const Matrix& symmetric, double scale, int q) {
    if (q < 0) throw std::invalid_argument("exact_trace_chebyshev: degree must be >= 0");
    const Vector lam = symmetric_eigenvalues(symmetric) / scale;
    double sum = 0.0;
    for (Index i = 0; i < lam.size(); ++i) {
        double prev = 1.0;
        double cur = lam(i);
        if (q == 0) cur = 1.0;
        for (int d = 2; d <= q; ++d) {
            const double next = 2.0 * lam(i) * cur - prev;
            prev = cur;
            cur = next;
        }
        sum += cur;
    }
    return sum;
}

MatrixSequence::MatrixSequence(MatrixSequenceSpec spec) : spec_(spec) {
    spec_.validate();
    current_ = spec_.kind == SequenceKind::lowrank_psd ? decaying_psd(spec_.n, spec_.decay, spec_.seed)
                                                      : random_symmetric(spec_.n, spec_.seed);
    base_frobenius_ = current_.norm();
}

Matrix MatrixSequence::perturbation(std::size_t step) const {
    if (step < 2) throw std::invalid_argument("MatrixSequence: perturbations start at step 2");
    switch (spec_.kind) {
        case SequenceKind::low_perturb: return rank1_perturb(spec_.seed, step, spec_.n, spec_.rank1_scale);
        case SequenceKind::high_perturb:
        case SequenceKind::lowrank_psd:
            return psd_rank_k_perturb(spec_.seed, step, spec_.n, spec_.rank, spec_.psd_fraction * base_frobenius_);
        case SequenceKind::stationary: return Matrix::Zero(spec_.n, spec_.n);
    }
    return Matrix::Zero(spec_.n, spec_.n);
}

const Matrix& MatrixSequence::advance() {
    ++step_;
    current_ += perturbation(step_);
    return current_;
}

}  // namespace dtrace
