#include "dtrace/harness.hpp"

#include "dtrace/matfunc.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace dtrace {

// ---------------------------------------------------------------------------
// names

ExperimentKind parse_experiment(const std::string& name) {
    if (name == "synth") return ExperimentKind::synth;
    if (name == "triangles") return ExperimentKind::triangles;
    if (name == "connectivity") return ExperimentKind::connectivity;
    if (name == "moments") return ExperimentKind::moments;
    throw std::invalid_argument("unknown experiment '" + name + "'");
}

EstimatorKind parse_estimator(const std::string& name) {
    if (name == "hutchinson") return EstimatorKind::hutchinson;
    if (name == "norestart") return EstimatorKind::norestart;
    if (name == "restart") return EstimatorKind::restart;
    if (name == "deltashift_fixed") return EstimatorKind::deltashift_fixed;
    if (name == "deltashift_auto" || name == "deltashift") return EstimatorKind::deltashift_auto;
    if (name == "deltashiftpp") return EstimatorKind::deltashiftpp;
    throw std::invalid_argument("unknown estimator '" + name + "'");
}

CountMode parse_count_mode(const std::string& name) {
    if (name == "base_matvecs" || name == "matvecs") return CountMode::base_matvecs;
    if (name == "oracle_calls" || name == "vectors") return CountMode::oracle_calls;
    throw std::invalid_argument("unknown count mode '" + name + "'");
}

DeltaShiftPPMode parse_pp_mode(const std::string& name) {
    if (name == "independent") return DeltaShiftPPMode::independent;
    if (name == "reuse") return DeltaShiftPPMode::reuse;
    throw std::invalid_argument("unknown DeltaShift++ mode '" + name + "'");
}

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::synth: return "synth";
        case ExperimentKind::triangles: return "triangles";
        case ExperimentKind::connectivity: return "connectivity";
        case ExperimentKind::moments: return "moments";
    }
    return "?";
}

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::hutchinson: return "hutchinson";
        case EstimatorKind::norestart: return "norestart";
        case EstimatorKind::restart: return "restart";
        case EstimatorKind::deltashift_fixed: return "deltashift_fixed";
        case EstimatorKind::deltashift_auto: return "deltashift_auto";
        case EstimatorKind::deltashiftpp: return "deltashiftpp";
    }
    return "?";
}

std::string to_string(CountMode mode) {
    return mode == CountMode::base_matvecs ? "base_matvecs" : "oracle_calls";
}

std::string to_string(DeltaShiftPPMode mode) {
    return mode == DeltaShiftPPMode::independent ? "independent" : "reuse";
}

// ---------------------------------------------------------------------------
// config

Index ExperimentConfig::resolved_n() const {
    if (n > 0) return n;
    switch (experiment) {
        case ExperimentKind::synth: return 500;
        case ExperimentKind::triangles: return 500;
        case ExperimentKind::connectivity: return 200;
        case ExperimentKind::moments: return 200;
    }
    return 500;
}

double ExperimentConfig::resolved_edge_prob() const {
    if (edge_prob >= 0.0) return edge_prob;
    return experiment == ExperimentKind::connectivity ? 0.015 : 0.05;
}

void ExperimentConfig::validate() const {
    if (steps < 1) throw std::invalid_argument("steps must be >= 1");
    if (budget < static_cast<std::int64_t>(steps))
        throw std::invalid_argument("budget Q must be at least the number of steps");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
    if (restart_every < 1) throw std::invalid_argument("restart period must be >= 1");
    if (estimator == EstimatorKind::restart && restart_every > steps)
        throw std::invalid_argument("restart period exceeds the number of steps");
    if (!(first_fraction > 0.0 && first_fraction < 1.0))
        throw std::invalid_argument("first-step fraction must lie in (0, 1)");
    if (ell && *ell < 1) throw std::invalid_argument("--ell must be >= 1");
    if (ell0 && *ell0 < 1) throw std::invalid_argument("--ell0 must be >= 1");
    if (experiment == ExperimentKind::moments && degree < 1)
        throw std::invalid_argument("Chebyshev degree must be >= 1");
    if (lanczos_iters < 1) throw std::invalid_argument("Lanczos iterations must be >= 1");
    if (power_iters < 1) throw std::invalid_argument("power iterations must be >= 1");
    if (!(margin >= 1.0)) throw std::invalid_argument("scaling margin must be >= 1");
    if (clique_min < 2 || clique_max < clique_min) throw std::invalid_argument("invalid clique size range");
    if (graph_path.empty() && resolved_n() < 2) throw std::invalid_argument("n must be >= 2");
}

std::vector<std::string> ExperimentConfig::describe() const {
    std::vector<std::string> out;
    auto add = [&out](const std::string& k, const std::string& v) { out.push_back(k + "=" + v); };
    auto num = [](double x) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    add("experiment", to_string(experiment));
    add("estimator", to_string(estimator));
    add("budget", std::to_string(budget));
    add("steps", std::to_string(steps));
    add("seed", std::to_string(seed));
    add("data_seed", std::to_string(data_seed));
    add("count_mode", to_string(count_mode));
    add("ell", ell ? std::to_string(*ell) : "auto");
    add("ell0", ell0 ? std::to_string(*ell0) : "auto");
    if (estimator == EstimatorKind::deltashift_fixed) add("gamma", num(gamma));
    if (estimator == EstimatorKind::restart || estimator == EstimatorKind::norestart) {
        add("restart_every", std::to_string(restart_every));
        add("first_fraction", num(first_fraction));
    }
    if (estimator == EstimatorKind::deltashiftpp) add("pp_mode", to_string(pp_mode));
    switch (experiment) {
        case ExperimentKind::synth:
            add("n", std::to_string(resolved_n()));
            add("sequence", to_string(sequence));
            if (sequence == SequenceKind::low_perturb) add("rank1_scale", num(rank1_scale));
            if (sequence == SequenceKind::high_perturb || sequence == SequenceKind::lowrank_psd) {
                add("perturb_rank", std::to_string(perturb_rank));
                add("psd_fraction", num(psd_fraction));
            }
            if (sequence == SequenceKind::lowrank_psd) add("decay", num(decay));
            break;
        case ExperimentKind::triangles:
        case ExperimentKind::connectivity:
            if (graph_path.empty()) {
                add("graph", "erdos_renyi");
                add("n", std::to_string(resolved_n()));
                add("edge_prob", num(resolved_edge_prob()));
            } else {
                add("graph", graph_path);
                add("format", graph_format == EdgeListFormat::snap ? "snap" : "matrix-market");
            }
            if (experiment == ExperimentKind::triangles) {
                add("clique_min", std::to_string(clique_min));
                add("clique_max", std::to_string(clique_max));
                add("delete_after", std::to_string(delete_after));
            } else {
                add("lanczos_iters", std::to_string(lanczos_iters));
            }
            break;
        case ExperimentKind::moments:
            add("n", std::to_string(resolved_n()));
            add("rank1_scale", num(rank1_scale));
            add("degree", std::to_string(degree));
            add("power_iters", std::to_string(power_iters));
            add("margin", num(margin));
            break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// budget

std::vector<std::int64_t> allocate_budget(std::int64_t Q, std::size_t m, const BudgetScheme& scheme) {
    if (m < 1) throw std::invalid_argument("allocate_budget: m must be >= 1");
    if (Q < static_cast<std::int64_t>(m)) throw std::invalid_argument("allocate_budget: Q must be >= m");
    const auto sm = static_cast<std::int64_t>(m);
    std::vector<std::int64_t> out(m, 0);
    if (scheme.kind == BudgetScheme::Kind::uniform) {
        std::fill(out.begin(), out.end(), Q / sm);
        return out;
    }
    if (scheme.q < 1 || scheme.q > m) throw std::invalid_argument("allocate_budget: restart period must lie in [1, m]");
    if (!(scheme.first_fraction > 0.0 && scheme.first_fraction < 1.0))
        throw std::invalid_argument("allocate_budget: first fraction must lie in (0, 1)");
    const auto q = static_cast<std::int64_t>(scheme.q);
    const std::int64_t blocks = (sm + q - 1) / q;
    const std::int64_t per_block = Q / blocks;
    const auto first = static_cast<std::int64_t>(std::floor(static_cast<double>(per_block) * scheme.first_fraction));
    if (scheme.kind == BudgetScheme::Kind::front_loaded) {
        out[0] = m == 1 ? Q : first;
        if (m > 1) std::fill(out.begin() + 1, out.end(), (Q - first) / (sm - 1));
        return out;
    }
    for (std::int64_t b = 0; b < blocks; ++b) {
        const std::int64_t start = b * q;
        const std::int64_t len = std::min(q, sm - start);
        if (len == 1) {
            out[static_cast<std::size_t>(start)] = per_block;
            continue;
        }
        out[static_cast<std::size_t>(start)] = first;
        const std::int64_t rest = (per_block - first) / (len - 1);
        for (std::int64_t i = 1; i < len; ++i) out[static_cast<std::size_t>(start + i)] = rest;
    }
    return out;
}

std::vector<StepPlan> plan_steps(const ExperimentConfig& config) {
    config.validate();
    BudgetScheme scheme;
    scheme.q = config.restart_every;
    scheme.first_fraction = config.first_fraction;
    if (config.estimator == EstimatorKind::restart) scheme.kind = BudgetScheme::Kind::restart_blocks;
    else if (config.estimator == EstimatorKind::norestart) {
        scheme.kind = BudgetScheme::Kind::front_loaded;
        scheme.q = std::min(config.restart_every, config.steps);
    }
    const auto alloc = allocate_budget(config.budget, config.steps, scheme);
    const bool by_matvecs = config.count_mode == CountMode::base_matvecs;

    std::vector<StepPlan> plan(config.steps);
    std::int64_t calls = 0;
    std::int64_t vectors = 0;
    for (std::size_t j = 1; j <= config.steps; ++j) {
        StepPlan& p = plan[j - 1];
        const std::int64_t b = alloc[j - 1];
        p.fresh = j == 1 || config.estimator == EstimatorKind::hutchinson ||
                  (config.estimator == EstimatorKind::restart && (j - 1) % config.restart_every == 0);
        if (config.estimator == EstimatorKind::deltashiftpp) {
            if (p.fresh) {
                p.ell = config.ell0.value_or(b);
                if (p.ell < 3) throw std::invalid_argument("budget infeasible: first Hutch++ call needs >= 3 products");
                p.vectors = p.ell;
            } else {
                p.ell = config.ell.value_or(by_matvecs ? b : 2 * b);
                if (p.ell < deltashiftpp_min_budget(config.pp_mode))
                    throw std::invalid_argument("budget infeasible: DeltaShift++ steps need >= " +
                                                std::to_string(deltashiftpp_min_budget(config.pp_mode)) +
                                                " products, plan gives " + std::to_string(p.ell));
                p.vectors = p.ell / 2;
            }
            p.oracle_calls = p.ell;
        } else if (p.fresh) {
            const bool first_like = j == 1 || config.estimator == EstimatorKind::restart;
            p.ell = (first_like ? config.ell0 : config.ell).value_or(b);
            p.oracle_calls = p.ell;
            p.vectors = p.ell;
        } else {
            p.ell = config.ell.value_or(by_matvecs ? b / 2 : b);
            p.oracle_calls = 2 * p.ell;
            p.vectors = p.ell;
        }
        if (p.ell < 1)
            throw std::invalid_argument("budget infeasible: step " + std::to_string(j) + " gets no probes");
        calls += p.oracle_calls;
        vectors += p.vectors;
    }
    const std::int64_t charged = by_matvecs ? calls : vectors;
    if (charged > config.budget) {
        throw std::invalid_argument("budget infeasible: plan needs " + std::to_string(charged) + " " +
                                    (by_matvecs ? "oracle applications" : "probe vectors") + " but Q = " +
                                    std::to_string(config.budget));
    }
    return plan;
}

// ---------------------------------------------------------------------------
// step sources

namespace {

struct Truth {
    std::optional<double> value;
    std::optional<double> frobenius;
};

class StepSource {
public:
    virtual ~StepSource() = default;
    virtual void advance(std::size_t step) = 0;
    virtual MatVecOracle oracle() const = 0;
    virtual Truth truth() const = 0;
    virtual std::string truth_label() const { return "exact"; }
    virtual std::vector<std::string> notes() const { return {}; }
};

Vector symmetric_eigenvalues(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw std::runtime_error("ground truth: eigensolver failed");
    return eig.eigenvalues();
}

class SynthSource final : public StepSource {
public:
    explicit SynthSource(const ExperimentConfig& c)
        : seq_([&] {
              MatrixSequenceSpec spec;
              spec.n = c.resolved_n();
              spec.m = c.steps;
              spec.kind = c.sequence;
              spec.seed = c.data_seed;
              spec.rank1_scale = c.rank1_scale;
              spec.rank = c.perturb_rank;
              spec.psd_fraction = c.psd_fraction;
              spec.decay = c.decay;
              return spec;
          }()) {}

    void advance(std::size_t) override { seq_.advance(); }
    MatVecOracle oracle() const override { return dense_oracle(seq_.current()); }
    Truth truth() const override { return {exact_trace(seq_.current()), seq_.current().norm()}; }

private:
    MatrixSequence seq_;
};

DynamicGraph initial_graph(const ExperimentConfig& c) {
    if (!c.graph_path.empty()) return load_edge_list_file(c.graph_path, c.graph_format);
    return erdos_renyi(c.resolved_n(), c.resolved_edge_prob(), c.data_seed);
}

class TrianglesSource final : public StepSource {
public:
    explicit TrianglesSource(const ExperimentConfig& c)
        : graph_(initial_graph(c)), dynamics_{c.clique_min, c.clique_max, c.delete_after, c.data_seed} {}

    void advance(std::size_t step) override { dynamics_.apply(graph_, step); }
    MatVecOracle oracle() const override { return power_oracle(adjacency_oracle(graph_), 3); }
    Truth truth() const override {
        Truth t;
        t.value = 6.0 * static_cast<double>(exact_triangles(graph_));
        if (graph_.node_count() <= 2000) {
            const Matrix b = graph_.dense_adjacency();
            const Matrix b2 = b * b;
            t.frobenius = (b2 * b).norm();
        }
        return t;
    }

private:
    DynamicGraph graph_;
    CliqueDynamics dynamics_;
};

class ConnectivitySource final : public StepSource {
public:
    ConnectivitySource(const ExperimentConfig& c, std::int64_t reference_probes)
        : graph_(initial_graph(c)), data_seed_(c.data_seed), iters_(c.lanczos_iters),
          reference_probes_(reference_probes) {}

    void advance(std::size_t step) override {
        graph_.add_random_edge(data_seed_, step);
        ++current_step_;
    }
    MatVecOracle oracle() const override { return expm_oracle(adjacency_oracle(graph_), iters_); }
    Truth truth() const override {
        if (graph_.node_count() <= 2000) {
            const Vector lam = symmetric_eigenvalues(graph_.dense_adjacency());
            return {lam.array().exp().sum(), std::sqrt((2.0 * lam.array()).exp().sum())};
        }
        // Stand-in for truth on large graphs: a far larger Hutchinson run on an
        // independent probe stream.
        const ProbeBatch batch = rademacher_batch(data_seed_ ^ 0x7e7e7e7eULL, current_step_,
                                                  static_cast<Index>(reference_probes_), graph_.node_count(), 9);
        return {hutchinson(oracle(), batch.count(), batch), std::nullopt};
    }
    std::string truth_label() const override { return graph_.node_count() <= 2000 ? "exact" : "reference"; }

private:
    DynamicGraph graph_;
    std::uint64_t data_seed_;
    Index iters_;
    std::int64_t reference_probes_;
    std::size_t current_step_ = 1;
};

class MomentsSource final : public StepSource {
public:
    explicit MomentsSource(const ExperimentConfig& c)
        : seq_([&] {
              MatrixSequenceSpec spec;
              spec.n = c.resolved_n();
              spec.m = c.steps;
              spec.kind = SequenceKind::low_perturb;
              spec.seed = c.data_seed;
              spec.rank1_scale = c.rank1_scale;
              return spec;
          }()),
          degree_(c.degree) {
        const MatVecOracle first = dense_oracle(seq_.current());
        scaling_.lambda_max = power_iteration(first, c.power_iters, c.data_seed);
        scaling_.margin = c.margin;
        power_iters_ = c.power_iters;
        if (!(scaling_.scale() > 0.0)) throw std::runtime_error("moments: operator has zero spectral radius");
    }

    void advance(std::size_t) override { seq_.advance(); }
    MatVecOracle oracle() const override { return chebyshev_oracle(dense_oracle(seq_.current()), scaling_, degree_); }
    Truth truth() const override {
        const Vector lam = symmetric_eigenvalues(seq_.current()) / scaling_.scale();
        double sum = 0.0;
        double sq = 0.0;
        for (Index i = 0; i < lam.size(); ++i) {
            double prev = 1.0;
            double cur = lam(i);
            for (int d = 2; d <= degree_; ++d) {
                const double next = 2.0 * lam(i) * cur - prev;
                prev = cur;
                cur = next;
            }
            sum += cur;
            sq += cur * cur;
        }
        return {sum, std::sqrt(sq)};
    }
    std::vector<std::string> notes() const override {
        char buf[128];
        std::snprintf(buf, sizeof buf, "chebyshev_scale=%.17g", scaling_.scale());
        return {buf, "power_iteration_matvecs=" + std::to_string(power_iters_) + " (not charged to Q)"};
    }

private:
    MatrixSequence seq_;
    int degree_;
    ChebyshevScaling scaling_;
    int power_iters_ = 0;
};

std::unique_ptr<StepSource> make_source(const ExperimentConfig& c, const std::vector<StepPlan>& plan) {
    switch (c.experiment) {
        case ExperimentKind::synth: return std::make_unique<SynthSource>(c);
        case ExperimentKind::triangles: return std::make_unique<TrianglesSource>(c);
        case ExperimentKind::connectivity: {
            std::int64_t most = 1;
            for (const auto& p : plan) most = std::max(most, p.vectors);
            return std::make_unique<ConnectivitySource>(c, 20 * most);
        }
        case ExperimentKind::moments: return std::make_unique<MomentsSource>(c);
    }
    throw std::logic_error("unhandled experiment kind");
}

EstimatorState run_step(const ExperimentConfig& c, const StepPlan& p, std::size_t j, const EstimatorState& state,
                        std::uint64_t seed, const MatVecOracle* prev, const MatVecOracle& cur) {
    if (j == 1) {
        return c.estimator == EstimatorKind::deltashiftpp ? deltashiftpp_init(cur, p.ell, seed)
                                                          : deltashift_init(cur, p.ell, seed);
    }
    if (p.fresh) return hutchinson_step(state, cur, p.ell);
    switch (c.estimator) {
        case EstimatorKind::hutchinson: return hutchinson_step(state, cur, p.ell);
        case EstimatorKind::norestart:
        case EstimatorKind::restart: return norestart_step(state, *prev, cur, p.ell);
        case EstimatorKind::deltashift_fixed: return deltashift_fixed_step(state, *prev, cur, p.ell, c.gamma);
        case EstimatorKind::deltashift_auto: return deltashift_auto_step(state, *prev, cur, p.ell);
        case EstimatorKind::deltashiftpp: return deltashiftpp_step(state, *prev, cur, p.ell, c.pp_mode);
    }
    throw std::logic_error("unhandled estimator kind");
}

}  // namespace

std::vector<ExperimentResult> run_replications(const ExperimentConfig& config,
                                               const std::vector<std::uint64_t>& seeds) {
    const std::vector<StepPlan> plan = plan_steps(config);
    auto source = make_source(config, plan);

    struct Replica {
        ExperimentResult result;
        EstimatorState state;
        MatVecLedger ledger;
        std::int64_t cumulative = 0;
    };
    std::vector<std::unique_ptr<Replica>> reps;
    for (auto s : seeds) {
        auto r = std::make_unique<Replica>();
        r->result.seed = s;
        reps.push_back(std::move(r));
    }

    const bool damped = config.estimator == EstimatorKind::deltashift_fixed ||
                        config.estimator == EstimatorKind::deltashift_auto ||
                        config.estimator == EstimatorKind::deltashiftpp;
    std::optional<MatVecOracle> prev;
    for (std::size_t j = 1; j <= config.steps; ++j) {
        if (j > 1) source->advance(j);
        const MatVecOracle cur = source->oracle();
        const Truth truth = source->truth();
        for (auto& rep : reps) {
            const MatVecOracle counted_cur = counted(cur, rep->ledger, j);
            std::optional<MatVecOracle> counted_prev;
            if (prev) counted_prev = counted(*prev, rep->ledger, j);
            rep->state = run_step(config, plan[j - 1], j, rep->state, rep->result.seed,
                                  counted_prev ? &*counted_prev : nullptr, counted_cur);

            ExperimentRecord rec;
            rec.step = j;
            rec.estimate = rep->state.t;
            rec.ground_truth = truth.value;
            if (truth.value) {
                const double err = std::abs(rec.estimate - *truth.value);
                rec.abs_error = err;
                if (*truth.value != 0.0) rec.rel_error = err / std::abs(*truth.value);
                if (truth.frobenius && *truth.frobenius > 0.0) rec.scaled_error = err / *truth.frobenius;
            }
            rec.matvecs_step = rep->ledger.oracle_calls_at(j);
            rep->cumulative += rec.matvecs_step;
            rec.matvecs_cum = rep->cumulative;
            if (damped && j > 1 && !plan[j - 1].fresh && !std::isnan(rep->state.gamma)) rec.gamma = rep->state.gamma;
            rep->result.records.push_back(rec);
        }
        prev = cur;
    }

    std::vector<ExperimentResult> out;
    out.reserve(reps.size());
    for (auto& rep : reps) {
        rep->result.total_oracle_calls = rep->ledger.total_oracle_calls();
        rep->result.total_base_matvecs = rep->ledger.total_base_matvecs();
        rep->result.matvec_cost = prev ? prev->matvec_cost() : 1;
        rep->result.truth_label = source->truth_label();
        rep->result.notes = source->notes();
        out.push_back(std::move(rep->result));
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    return std::move(run_replications(config, {config.seed}).front());
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt(const std::optional<double>& x) { return x ? fmt(*x) : std::string(); }

std::optional<double> parse_opt(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
}

}  // namespace

void write_records(std::ostream& out, const std::vector<ExperimentRecord>& records,
                   const std::vector<std::string>& comments) {
    for (const auto& c : comments) out << "# " << c << '\n';
    out << kRecordHeader << '\n';
    for (const auto& r : records) {
        out << r.step << ',' << fmt(r.estimate) << ',' << fmt(r.ground_truth) << ',' << fmt(r.abs_error) << ','
            << fmt(r.rel_error) << ',' << fmt(r.scaled_error) << ',' << r.matvecs_step << ',' << r.matvecs_cum
            << ',' << fmt(r.gamma) << '\n';
    }
}

void write_records(const std::vector<ExperimentRecord>& records, const std::string& path,
                   const std::vector<std::string>& comments) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_records(file, records, comments);
    file.flush();
    if (!file) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<ExperimentRecord> read_records(std::istream& in) {
    std::vector<ExperimentRecord> out;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != kRecordHeader) throw std::runtime_error("read_records: unexpected header '" + line + "'");
            header = true;
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (line.back() == ',') f.emplace_back();
        if (f.size() != 9) throw std::runtime_error("read_records: expected 9 fields in '" + line + "'");
        ExperimentRecord r;
        r.step = std::stoul(f[0]);
        r.estimate = std::stod(f[1]);
        r.ground_truth = parse_opt(f[2]);
        r.abs_error = parse_opt(f[3]);
        r.rel_error = parse_opt(f[4]);
        r.scaled_error = parse_opt(f[5]);
        r.matvecs_step = std::stoll(f[6]);
        r.matvecs_cum = std::stoll(f[7]);
        r.gamma = parse_opt(f[8]);
        out.push_back(r);
    }
    if (!header) throw std::runtime_error("read_records: missing header");
    return out;
}

std::vector<std::string> result_comments(const ExperimentConfig& config, const ExperimentResult& result) {
    std::vector<std::string> c = config.describe();
    c.push_back("ground_truth=" + result.truth_label);
    c.push_back("matvec_columns=oracle_applications");
    c.push_back("matvec_cost_per_application=" + std::to_string(result.matvec_cost));
    c.push_back("total_oracle_applications=" + std::to_string(result.total_oracle_calls));
    c.push_back("total_base_matvecs=" + std::to_string(result.total_base_matvecs));
    for (const auto& n : result.notes) c.push_back(n);
    return c;
}

ErrorSummary summarize(const std::vector<ExperimentRecord>& records, std::size_t first, std::size_t last) {
    ErrorSummary s;
    std::size_t na = 0, nr = 0, ns = 0;
    for (const auto& r : records) {
        if (r.step < first || r.step > last) continue;
        if (r.abs_error) s.mean_abs += *r.abs_error, ++na;
        if (r.rel_error) s.mean_rel += *r.rel_error, ++nr;
        if (r.scaled_error) s.mean_scaled += *r.scaled_error, ++ns;
    }
    if (na) s.mean_abs /= static_cast<double>(na);
    if (nr) s.mean_rel /= static_cast<double>(nr);
    if (ns) s.mean_scaled /= static_cast<double>(ns);
    return s;
}

}  // namespace dtrace
