#pragma once

#include "dtrace/dyngraph.hpp"
#include "dtrace/estimators.hpp"
#include "dtrace/oracle.hpp"
#include "dtrace/synth.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace dtrace {

enum class ExperimentKind { synth, triangles, connectivity, moments };
enum class EstimatorKind { hutchinson, norestart, restart, deltashift_fixed, deltashift_auto, deltashiftpp };

/**
 How the budget Q is charged.

 base_matvecs: every oracle application counts, so a paired-probe step pays
 two per probe vector. oracle_calls: Q counts probe vectors, Q/m per step for
 every estimator regardless of how many applications a vector needs.
 */
enum class CountMode { base_matvecs, oracle_calls };

ExperimentKind parse_experiment(const std::string& name);
EstimatorKind parse_estimator(const std::string& name);
CountMode parse_count_mode(const std::string& name);
DeltaShiftPPMode parse_pp_mode(const std::string& name);
std::string to_string(ExperimentKind kind);
std::string to_string(EstimatorKind kind);
std::string to_string(CountMode mode);
std::string to_string(DeltaShiftPPMode mode);

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::synth;
    EstimatorKind estimator = EstimatorKind::deltashift_auto;
    std::int64_t budget = 10000;
    std::size_t steps = 100;
    std::uint64_t seed = 0;
    /// Seeds the matrix / graph sequence; kept apart from the probe seed so
    /// replications share one sequence.
    std::uint64_t data_seed = 0;

    /// Overrides: probes per delta step (DeltaShift++: step budget) and step-1 probes.
    std::optional<Index> ell;
    std::optional<Index> ell0;
    double gamma = 0.1;
    std::size_t restart_every = 20;
    double first_fraction = 1.0 / 3.0;
    DeltaShiftPPMode pp_mode = DeltaShiftPPMode::independent;
    CountMode count_mode = CountMode::base_matvecs;

    /// Dimension / node count; 0 picks the experiment default.
    Index n = 0;

    // synth and moments sequences
    SequenceKind sequence = SequenceKind::low_perturb;
    double rank1_scale = 5e-5;
    Index perturb_rank = 25;
    double psd_fraction = 0.05;
    double decay = 0.9;

    // graph experiments
    std::string graph_path;
    EdgeListFormat graph_format = EdgeListFormat::snap;
    double edge_prob = -1.0;  ///< < 0 picks the experiment default
    int clique_min = 10;
    int clique_max = 150;
    std::size_t delete_after = 75;
    Index lanczos_iters = 15;

    // moments
    int degree = 1;
    int power_iters = 100;
    double margin = 1.05;

    std::string out;

    Index resolved_n() const;
    double resolved_edge_prob() const;
    /// Throws std::invalid_argument on inconsistent settings.
    void validate() const;
    /// "key=value" lines echoed into CSV headers.
    std::vector<std::string> describe() const;
};

struct BudgetScheme {
    enum class Kind { uniform, restart_blocks, front_loaded };
    Kind kind = Kind::uniform;
    std::size_t q = 20;
    double first_fraction = 1.0 / 3.0;
};

/**
 Per-step budget (index 0 is step 1).

 uniform: ⌊Q/m⌋ each. restart_blocks: ⌊Q/⌈m/q⌉⌋ per block, the block's first
 step takes ⌊block·first_fraction⌋ and the rest is split evenly over the other
 steps. front_loaded: step 1 as in restart_blocks, the remainder split evenly
 over steps 2..m.
 */
std::vector<std::int64_t> allocate_budget(std::int64_t Q, std::size_t m, const BudgetScheme& scheme);

/// What one step of the planned run will consume.
struct StepPlan {
    Index ell = 0;                  ///< probes, or Hutch++ budget for DeltaShift++
    bool fresh = false;             ///< single-oracle estimate of A_j
    std::int64_t oracle_calls = 0;  ///< applications charged to the ledger
    std::int64_t vectors = 0;       ///< probe vectors charged under oracle_calls counting
};

/// Resolves the budget into per-step probe counts; throws if infeasible.
std::vector<StepPlan> plan_steps(const ExperimentConfig& config);

struct ExperimentRecord {
    std::size_t step = 0;
    double estimate = 0.0;
    std::optional<double> ground_truth;
    std::optional<double> abs_error;
    std::optional<double> rel_error;
    std::optional<double> scaled_error;
    std::int64_t matvecs_step = 0;
    std::int64_t matvecs_cum = 0;
    std::optional<double> gamma;
};

struct ExperimentResult {
    std::uint64_t seed = 0;
    std::vector<ExperimentRecord> records;
    std::int64_t total_oracle_calls = 0;
    std::int64_t total_base_matvecs = 0;
    std::int64_t matvec_cost = 1;
    /// "exact" or "reference" (high-budget Hutchinson stand-in).
    std::string truth_label;
    std::vector<std::string> notes;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// One sequence, one replication per probe seed; each has its own ledger and state.
std::vector<ExperimentResult> run_replications(const ExperimentConfig& config,
                                               const std::vector<std::uint64_t>& seeds);

inline constexpr const char* kRecordHeader =
    "step,estimate,ground_truth,abs_error,rel_error,scaled_error,matvecs_step,matvecs_cum,gamma";

void write_records(std::ostream& out, const std::vector<ExperimentRecord>& records,
                   const std::vector<std::string>& comments);
/// Throws std::runtime_error naming `path` on I/O failure.
void write_records(const std::vector<ExperimentRecord>& records, const std::string& path,
                   const std::vector<std::string>& comments);
std::vector<ExperimentRecord> read_records(std::istream& in);

/// Config echo plus run totals, for the CSV comment header.
std::vector<std::string> result_comments(const ExperimentConfig& config, const ExperimentResult& result);

struct ErrorSummary {
    double mean_abs = 0.0;
    double mean_rel = 0.0;
    double mean_scaled = 0.0;
};

/// Mean errors over records with step in [first, last] (1-based, inclusive).
ErrorSummary summarize(const std::vector<ExperimentRecord>& records, std::size_t first, std::size_t last);

}  // namespace dtrace
