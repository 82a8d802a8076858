#include "dtrace/estimators.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dtrace {

namespace {

double mean_form(const Matrix& probes, const Matrix& responses) {
    return column_forms(probes, responses).mean();
}

double mean_sq_norm(const Matrix& responses) {
    return responses.colwise().squaredNorm().mean();
}

void require_same_dim(const MatVecOracle& a, const MatVecOracle& b, const char* who) {
    if (a.dim() != b.dim()) throw std::invalid_argument(std::string(who) + ": oracle dimensions differ");
}

void require_positive(Index ell, const char* who) {
    if (ell < 1) throw std::invalid_argument(std::string(who) + ": probe count must be >= 1");
}

EstimatorState advance(const EstimatorState& state) {
    if (state.step < 1)
        throw std::invalid_argument("estimator step requires an initialized state (step >= 1)");
    EstimatorState next = state;
    next.step = state.step + 1;
    return next;
}

struct PairedProducts {
    ProbeBatch batch;
    Matrix prev;  // z_i = A_{j−1} g_i
    Matrix cur;   // w_i = A_j g_i
};

PairedProducts paired(const EstimatorState& next, const MatVecOracle& prev, const MatVecOracle& cur,
                      Index ell) {
    PairedProducts p{rademacher_batch(next.seed, next.step, ell, cur.dim(), streams::hutchinson), {}, {}};
    p.prev = prev.apply(p.batch.vectors);
    p.cur = cur.apply(p.batch.vectors);
    return p;
}

// t_j = (1−γ)t_{j−1} + (1/ℓ)Σ gᵀ(w − (1−γ)z);  v_j = (1−γ)²v_{j−1} + (2/ℓ)(1/ℓ)Σ‖w − (1−γ)z‖²
void damped_update(EstimatorState& next, const EstimatorState& state, const PairedProducts& p,
                   double gamma) {
    const double keep = 1.0 - gamma;
    const Matrix damped = p.cur - keep * p.prev;
    const auto ell = static_cast<double>(p.batch.count());
    next.t = keep * state.t + mean_form(p.batch.vectors, damped);
    next.v = keep * keep * state.v + (2.0 / ell) * mean_sq_norm(damped);
    next.gamma = gamma;
}

Matrix difference_products(const Matrix& cur, const Matrix& prev) { return cur - prev; }

// Hutch++ from already-computed products.  `g` are raw residual probes and `ag` = A·g;
// A(I−QQᵀ)g is recovered as A·g − (AQ)(Qᵀg).
HutchPPResult hutchpp_from_products(const Matrix& q, const Matrix& aq, const Matrix& g,
                                    const Matrix& ag) {
    HutchPPResult out;
    out.rank = q.cols();
    const double projected = q.cols() > 0 ? q.cwiseProduct(aq).sum() : 0.0;
    Matrix g_perp = g;
    Matrix r = ag;
    if (q.cols() > 0) {
        const Matrix qtg = q.transpose() * g;
        g_perp.noalias() -= q * qtg;
        r.noalias() -= aq * qtg;
    }
    out.estimate = projected + mean_form(g_perp, r);
    if (q.cols() > 0) r -= q * (q.transpose() * r);
    out.residual_frobenius_sq = mean_sq_norm(r);
    return out;
}

double pp_gamma(double k_a, Index ell_a, double k_d, Index ell_d, double v_prev) {
    const double var_a = 8.0 * k_a / static_cast<double>(ell_a);
    const double var_d = 8.0 * k_d / static_cast<double>(ell_d);
    const double denom = var_a + v_prev + var_d;
    if (!(denom > 0.0)) return 1.0;
    return std::clamp((var_d + v_prev) / denom, 0.0, 1.0);
}

}  // namespace

double hutchinson(const MatVecOracle& oracle, Index ell, const ProbeBatch& batch) {
    require_positive(ell, "hutchinson");
    if (batch.count() != ell) throw std::invalid_argument("hutchinson: ell does not match batch size");
    if (oracle.dim() != batch.dim()) throw std::invalid_argument("hutchinson: dimension mismatch");
    return mean_form(batch.vectors, oracle.apply(batch.vectors));
}

double hutchinson_exact_variance(const Matrix& matrix, Index ell) {
    require_positive(ell, "hutchinson_exact_variance");
    if (matrix.rows() != matrix.cols()) throw std::invalid_argument("hutchinson_exact_variance: non-square");
    // Var gᵀAg = 2 Σ_{i≠j} ((A_ij + A_ji)/2)²; equals 2(‖A‖_F² − ΣA_ii²) for symmetric A.
    const Matrix sym = 0.5 * (matrix + matrix.transpose());
    const double off = sym.squaredNorm() - sym.diagonal().squaredNorm();
    return 2.0 * off / static_cast<double>(ell);
}

Index HutchPPConfig::sketch_width() const {
    return static_cast<Index>(std::floor(static_cast<double>(ell) * sketch_fraction));
}

Index HutchPPConfig::residual_count() const { return ell - 2 * sketch_width(); }

void HutchPPConfig::validate() const {
    if (ell < 3) throw std::invalid_argument("hutchpp: budget must be >= 3, got " + std::to_string(ell));
    if (!(sketch_fraction > 0.0 && sketch_fraction < 0.5))
        throw std::invalid_argument("hutchpp: sketch fraction must lie in (0, 1/2)");
    if (sketch_width() < 1 || residual_count() < 1)
        throw std::invalid_argument("hutchpp: budget split leaves an empty part");
}

Matrix orthonormal_basis(const Matrix& block) {
    if (block.cols() == 0) return Matrix(block.rows(), 0);
    Eigen::JacobiSVD<Matrix> svd(block, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || !(s(0) > 0.0)) return Matrix(block.rows(), 0);
    Index keep = 0;
    while (keep < s.size() && s(keep) > 1e-12 * s(0)) ++keep;
    return svd.matrixU().leftCols(keep);
}

HutchPPResult hutchpp(const MatVecOracle& oracle, const HutchPPConfig& config, std::uint64_t seed,
                      std::uint64_t step, std::uint64_t sketch_stream, std::uint64_t residual_stream) {
    config.validate();
    const Index n = oracle.dim();
    const ProbeBatch sketch = rademacher_batch(seed, step, config.sketch_width(), n, sketch_stream);
    const Matrix q = orthonormal_basis(oracle.apply(sketch.vectors));
    const Matrix aq = oracle.apply(q);
    // a rank-deficient sketch frees products; they go to extra residual probes
    const Index residual = config.ell - config.sketch_width() - q.cols();
    const ProbeBatch probes = rademacher_batch(seed, step, residual, n, residual_stream);
    const Matrix ag = oracle.apply(probes.vectors);
    HutchPPResult out = hutchpp_from_products(q, aq, probes.vectors, ag);
    out.applies = sketch.count() + q.cols() + probes.count();
    return out;
}

EstimatorState deltashift_init(const MatVecOracle& first, Index ell0, std::uint64_t seed) {
    require_positive(ell0, "deltashift_init");
    EstimatorState s;
    s.seed = seed;
    s.step = 1;
    s.ell0 = ell0;
    s.ell = ell0;
    const ProbeBatch batch = rademacher_batch(seed, 1, ell0, first.dim(), streams::hutchinson);
    const Matrix z = first.apply(batch.vectors);
    s.t = mean_form(batch.vectors, z);
    s.v = (2.0 / static_cast<double>(ell0)) * mean_sq_norm(z);
    return s;
}

EstimatorState hutchinson_step(const EstimatorState& state, const MatVecOracle& cur, Index ell) {
    require_positive(ell, "hutchinson_step");
    EstimatorState next = advance(state);
    next.ell = ell;
    const ProbeBatch batch = rademacher_batch(next.seed, next.step, ell, cur.dim(), streams::hutchinson);
    const Matrix z = cur.apply(batch.vectors);
    next.t = mean_form(batch.vectors, z);
    next.v = (2.0 / static_cast<double>(ell)) * mean_sq_norm(z);
    next.gamma = std::numeric_limits<double>::quiet_NaN();
    return next;
}

EstimatorState norestart_step(const EstimatorState& state, const MatVecOracle& prev,
                              const MatVecOracle& cur, Index ell) {
    require_positive(ell, "norestart_step");
    require_same_dim(prev, cur, "norestart_step");
    EstimatorState next = advance(state);
    next.ell = ell;
    const PairedProducts p = paired(next, prev, cur, ell);
    const Matrix delta = difference_products(p.cur, p.prev);
    next.t = state.t + mean_form(p.batch.vectors, delta);
    next.v = state.v + (2.0 / static_cast<double>(ell)) * mean_sq_norm(delta);
    next.gamma = std::numeric_limits<double>::quiet_NaN();
    return next;
}

EstimatorState deltashift_fixed_step(const EstimatorState& state, const MatVecOracle& prev,
                                     const MatVecOracle& cur, Index ell, double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("deltashift_fixed_step: gamma must lie in [0, 1]");
    require_positive(ell, "deltashift_fixed_step");
    require_same_dim(prev, cur, "deltashift_fixed_step");
    EstimatorState next = advance(state);
    next.ell = ell;
    next.fixed_gamma = gamma;
    damped_update(next, state, paired(next, prev, cur, ell), gamma);
    return next;
}

double optimal_gamma(double C, double N, double v_prev, Index ell) {
    require_positive(ell, "optimal_gamma");
    const double denom = static_cast<double>(ell) * v_prev + 2.0 * N;
    if (denom == 0.0) return 1.0;
    const double gamma = 1.0 - 2.0 * C / denom;
    if (std::isnan(gamma)) return 1.0;
    return std::clamp(gamma, 0.0, 1.0);
}

EstimatorState deltashift_auto_step(const EstimatorState& state, const MatVecOracle& prev,
                                    const MatVecOracle& cur, Index ell) {
    require_positive(ell, "deltashift_auto_step");
    require_same_dim(prev, cur, "deltashift_auto_step");
    EstimatorState next = advance(state);
    next.ell = ell;
    next.fixed_gamma.reset();
    const PairedProducts p = paired(next, prev, cur, ell);
    const double N = mean_sq_norm(p.prev);
    const double C = p.cur.cwiseProduct(p.prev).colwise().sum().mean();
    damped_update(next, state, p, optimal_gamma(C, N, state.v, ell));
    return next;
}

EstimatorState restart_step(const EstimatorState& state, const MatVecOracle& prev,
                            const MatVecOracle& cur, std::size_t q, Index ell0, Index ell) {
    if (q < 1) throw std::invalid_argument("restart_step: restart period must be >= 1");
    const std::size_t j = state.step + 1;
    if ((j - 1) % q == 0) {
        EstimatorState next = hutchinson_step(state, cur, ell0);
        next.ell0 = ell0;
        return next;
    }
    return norestart_step(state, prev, cur, ell);
}

std::vector<double> restart_run(std::span<const MatVecOracle> oracles, Index ell0, Index ell,
                                std::size_t q, std::uint64_t seed) {
    if (q < 1) throw std::invalid_argument("restart_run: restart period must be >= 1");
    std::vector<double> out;
    if (oracles.empty()) return out;
    out.reserve(oracles.size());
    EstimatorState s = deltashift_init(oracles[0], ell0, seed);
    out.push_back(s.t);
    for (std::size_t j = 1; j < oracles.size(); ++j) {
        s = restart_step(s, oracles[j - 1], oracles[j], q, ell0, ell);
        out.push_back(s.t);
    }
    return out;
}

EstimatorState deltashiftpp_init(const MatVecOracle& first, Index ell0, std::uint64_t seed) {
    const HutchPPResult r = hutchpp(first, HutchPPConfig{ell0}, seed, 1);
    EstimatorState s;
    s.seed = seed;
    s.step = 1;
    s.ell0 = ell0;
    s.ell = ell0;
    s.t = r.estimate;
    s.v = 8.0 * r.residual_frobenius_sq / static_cast<double>(ell0);
    return s;
}

Index deltashiftpp_min_budget(DeltaShiftPPMode mode) {
    return mode == DeltaShiftPPMode::independent ? 12 : 7;
}

EstimatorState deltashiftpp_step(const EstimatorState& state, const MatVecOracle& prev,
                                 const MatVecOracle& cur, Index budget, DeltaShiftPPMode mode) {
    require_same_dim(prev, cur, "deltashiftpp_step");
    if (budget < deltashiftpp_min_budget(mode)) {
        throw std::invalid_argument("deltashiftpp_step: budget " + std::to_string(budget) +
                                    " below minimum " + std::to_string(deltashiftpp_min_budget(mode)));
    }
    EstimatorState next = advance(state);
    next.ell = budget;
    const Index n = cur.dim();

    HutchPPResult on_a;
    HutchPPResult on_delta;
    Index ell_a = 0;
    Index ell_d = 0;
    if (mode == DeltaShiftPPMode::independent) {
        ell_a = budget / 2;
        ell_d = (budget - ell_a) / 2;
        on_a = hutchpp(cur, HutchPPConfig{ell_a}, next.seed, next.step, streams::sketch, streams::residual);
        const MatVecOracle delta(
            n, [prev, cur](const Matrix& x) -> Matrix { return cur.apply(x) - prev.apply(x); },
            prev.matvec_cost() + cur.matvec_cost());
        on_delta = hutchpp(delta, HutchPPConfig{ell_d}, next.seed, next.step, streams::delta_sketch,
                           streams::delta_residual);
    } else {
        // Shared sketch S and residual probes G: A_j S and A_j G serve both estimates.
        const Index k = budget / 7;
        const ProbeBatch s = rademacher_batch(next.seed, next.step, k, n, streams::sketch);
        const Matrix cur_s = cur.apply(s.vectors);
        const Matrix prev_s = prev.apply(s.vectors);

        const Matrix q_a = orthonormal_basis(cur_s);
        const Matrix q_d = orthonormal_basis(difference_products(cur_s, prev_s));
        const Matrix aq_a = cur.apply(q_a);
        const Matrix dq_d = difference_products(cur.apply(q_d), prev.apply(q_d));

        // whatever the bases did not use becomes shared residual probes
        const Index r = (budget - 2 * k - q_a.cols() - 2 * q_d.cols()) / 2;
        const ProbeBatch g = rademacher_batch(next.seed, next.step, r, n, streams::residual);
        const Matrix cur_g = cur.apply(g.vectors);
        const Matrix prev_g = prev.apply(g.vectors);

        on_a = hutchpp_from_products(q_a, aq_a, g.vectors, cur_g);
        on_delta = hutchpp_from_products(q_d, dq_d, g.vectors, difference_products(cur_g, prev_g));
        ell_a = k + q_a.cols() + r;
        ell_d = k + q_d.cols() + r;
    }

    const double gamma =
        pp_gamma(on_a.residual_frobenius_sq, ell_a, on_delta.residual_frobenius_sq, ell_d, state.v);
    const double keep = 1.0 - gamma;
    next.t = gamma * on_a.estimate + keep * (state.t + on_delta.estimate);
    next.v = gamma * gamma * 8.0 * on_a.residual_frobenius_sq / static_cast<double>(ell_a) +
             keep * keep * (state.v + 8.0 * on_delta.residual_frobenius_sq / static_cast<double>(ell_d));
    next.gamma = gamma;
    return next;
}

}  // namespace dtrace
