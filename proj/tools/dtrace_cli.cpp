// Command-line runner for dynamic trace estimation experiments.

#include "dtrace/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace dtrace;

struct Flags {
    std::string estimator = "deltashift_auto";
    std::int64_t budget = 10000;
    std::size_t steps = 100;
    std::uint64_t seed = 0;
    std::uint64_t data_seed = 0;
    Index ell = 0;
    Index ell0 = 0;
    double gamma = 0.1;
    std::size_t restart_every = 20;
    double first_fraction = 1.0 / 3.0;
    std::string count_mode = "base_matvecs";
    std::string pp_mode = "independent";
    Index n = 0;
    std::string sequence = "low_perturb";
    double rank1_scale = -1.0;
    Index perturb_rank = 25;
    double psd_fraction = 0.05;
    double decay = 0.9;
    std::string graph;
    std::string format = "snap";
    double edge_prob = -1.0;
    int clique_min = 10;
    int clique_max = 150;
    std::size_t delete_after = 75;
    Index lanczos_iters = 15;
    std::vector<int> degrees{1, 2, 3, 4, 5};
    int power_iters = 100;
    double margin = 1.05;
    std::string out;
};

void add_core(CLI::App* cmd, Flags& f) {
    cmd->add_option("--estimator", f.estimator,
                    "hutchinson | norestart | restart | deltashift_fixed | deltashift_auto | deltashiftpp")
        ->capture_default_str();
    cmd->add_option("--budget", f.budget, "total budget Q over all steps")->capture_default_str();
    cmd->add_option("--steps", f.steps, "number of time steps m")->capture_default_str();
    cmd->add_option("--seed", f.seed, "probe seed")->capture_default_str();
    cmd->add_option("--data-seed", f.data_seed, "seed of the matrix or graph sequence")->capture_default_str();
    cmd->add_option("--ell", f.ell, "override: probes per delta step (DeltaShift++: products per step)");
    cmd->add_option("--ell0", f.ell0, "override: probes for the first step (and Restart block starts)");
    cmd->add_option("--gamma", f.gamma, "damping for deltashift_fixed")->capture_default_str();
    cmd->add_option("--restart-every", f.restart_every, "Restart block length q")->capture_default_str();
    cmd->add_option("--first-fraction", f.first_fraction, "budget share of a block's first step")
        ->capture_default_str();
    cmd->add_option("--count-mode", f.count_mode, "base_matvecs | oracle_calls")->capture_default_str();
    cmd->add_option("--pp-mode", f.pp_mode, "DeltaShift++ product sharing: independent | reuse")
        ->capture_default_str();
    cmd->add_option("--n", f.n, "dimension or node count (0: experiment default)");
    cmd->add_option("--out", f.out, "output CSV path")->required();
}

void add_graph(CLI::App* cmd, Flags& f) {
    cmd->add_option("--graph", f.graph, "edge list; a random graph is generated when omitted");
    cmd->add_option("--format", f.format, "snap | matrix-market")->capture_default_str();
    cmd->add_option("--edge-prob", f.edge_prob, "edge probability of the generated graph");
}

ExperimentConfig to_config(const Flags& f, ExperimentKind kind) {
    ExperimentConfig c;
    c.experiment = kind;
    c.estimator = parse_estimator(f.estimator);
    c.budget = f.budget;
    c.steps = f.steps;
    c.seed = f.seed;
    c.data_seed = f.data_seed;
    if (f.ell > 0) c.ell = f.ell;
    if (f.ell0 > 0) c.ell0 = f.ell0;
    c.gamma = f.gamma;
    c.restart_every = f.restart_every;
    c.first_fraction = f.first_fraction;
    c.count_mode = parse_count_mode(f.count_mode);
    c.pp_mode = parse_pp_mode(f.pp_mode);
    c.n = f.n;
    c.sequence = parse_sequence_kind(f.sequence);
    if (f.rank1_scale > 0.0) c.rank1_scale = f.rank1_scale;
    else if (kind == ExperimentKind::moments) c.rank1_scale = 1e-3;
    c.perturb_rank = f.perturb_rank;
    c.psd_fraction = f.psd_fraction;
    c.decay = f.decay;
    c.graph_path = f.graph;
    c.graph_format = parse_edge_list_format(f.format);
    c.edge_prob = f.edge_prob;
    c.clique_min = f.clique_min;
    c.clique_max = f.clique_max;
    c.delete_after = f.delete_after;
    c.lanczos_iters = f.lanczos_iters;
    c.power_iters = f.power_iters;
    c.margin = f.margin;
    c.out = f.out;
    return c;
}

void run_one(const ExperimentConfig& c, const std::string& path) {
    const ExperimentResult r = run_experiment(c);
    write_records(r.records, path, result_comments(c, r));
}

std::string degree_path(const std::string& out, int q) {
    const std::filesystem::path p(out);
    return (p.parent_path() / (p.stem().string() + "_T" + std::to_string(q) + p.extension().string())).string();
}

void run_sweep(const Flags& f, const std::string& experiment, const std::vector<std::string>& estimators,
               const std::vector<std::int64_t>& budgets, std::size_t seeds) {
    const ExperimentKind kind = parse_experiment(experiment);
    std::ofstream out(f.out, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + f.out + "' for writing");
    Flags base = f;
    ExperimentConfig echo = to_config(base, kind);
    for (const auto& line : echo.describe()) {
        if (line.rfind("estimator=", 0) == 0 || line.rfind("budget=", 0) == 0 || line.rfind("seed=", 0) == 0) continue;
        out << "# " << line << '\n';
    }
    out << "# seeds=" << f.seed << ".." << f.seed + seeds - 1 << '\n';
    out << "estimator,budget,seed,mean_abs_error,mean_rel_error,mean_scaled_error,oracle_applications,base_matvecs\n";
    std::vector<std::uint64_t> seed_list;
    for (std::size_t i = 0; i < seeds; ++i) seed_list.push_back(f.seed + i);
    for (const auto& est : estimators) {
        for (auto q : budgets) {
            Flags g = f;
            g.estimator = est;
            g.budget = q;
            const ExperimentConfig c = to_config(g, kind);
            const auto results = run_replications(c, seed_list);
            for (const auto& r : results) {
                const ErrorSummary s = summarize(r.records, 1, c.steps);
                char buf[256];
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", s.mean_abs, s.mean_rel, s.mean_scaled);
                out << est << ',' << q << ',' << r.seed << ',' << buf << ',' << r.total_oracle_calls << ','
                    << r.total_base_matvecs << '\n';
            }
        }
    }
    if (!out) throw std::runtime_error("write to '" + f.out + "' failed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic trace estimation experiments"};
    app.set_config("--config", "", "key = value configuration file; command-line flags take precedence");
    app.require_subcommand(1);
    Flags f;

    auto* synth = app.add_subcommand("synth", "synthetic dense matrix sequences");
    add_core(synth, f);
    synth->add_option("--sequence", f.sequence, "low_perturb | high_perturb | stationary | lowrank_psd")
        ->capture_default_str();
    synth->add_option("--rank1-scale", f.rank1_scale, "magnitude of rank-1 updates (default 5e-5)");
    synth->add_option("--perturb-rank", f.perturb_rank, "rank of PSD updates")->capture_default_str();
    synth->add_option("--psd-fraction", f.psd_fraction, "PSD update Frobenius norm relative to A1")
        ->capture_default_str();
    synth->add_option("--decay", f.decay, "spectral decay of the lowrank_psd start matrix")->capture_default_str();

    auto* tri = app.add_subcommand("triangles", "triangle counting under clique insertions and deletions");
    add_core(tri, f);
    add_graph(tri, f);
    tri->add_option("--clique-min", f.clique_min)->capture_default_str();
    tri->add_option("--clique-max", f.clique_max)->capture_default_str();
    tri->add_option("--delete-after", f.delete_after, "steps after which cliques are deleted")->capture_default_str();

    auto* conn = app.add_subcommand("connectivity", "natural connectivity tr(exp(B)) under edge insertions");
    add_core(conn, f);
    add_graph(conn, f);
    conn->add_option("--lanczos-iters", f.lanczos_iters)->capture_default_str();

    auto* mom = app.add_subcommand("moments", "Chebyshev moments tr(T_q(H)) of a drifting symmetric operator");
    add_core(mom, f);
    mom->add_option("--degrees", f.degrees, "Chebyshev degrees; several degrees write <out>_T<q>.csv")
        ->delimiter(',');
    mom->add_option("--rank1-scale", f.rank1_scale, "magnitude of rank-1 updates (default 1e-3)");
    mom->add_option("--power-iters", f.power_iters)->capture_default_str();
    mom->add_option("--margin", f.margin, "spectral scaling margin")->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "error summaries over estimator, budget and seed grids");
    std::string sweep_experiment = "synth";
    std::vector<std::string> sweep_estimators{"hutchinson", "norestart", "deltashift_auto"};
    std::vector<std::int64_t> sweep_budgets{2000, 8000, 10000};
    std::size_t sweep_seeds = 5;
    add_core(sweep, f);
    add_graph(sweep, f);
    sweep->add_option("--experiment", sweep_experiment, "synth | triangles | connectivity | moments")
        ->capture_default_str();
    sweep->add_option("--estimators", sweep_estimators)->delimiter(',');
    sweep->add_option("--budgets", sweep_budgets)->delimiter(',');
    sweep->add_option("--seeds", sweep_seeds, "replications, seeds seed..seed+N-1")->capture_default_str();
    sweep->add_option("--sequence", f.sequence)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) run_one(to_config(f, ExperimentKind::synth), f.out);
        else if (tri->parsed()) run_one(to_config(f, ExperimentKind::triangles), f.out);
        else if (conn->parsed()) run_one(to_config(f, ExperimentKind::connectivity), f.out);
        else if (mom->parsed()) {
            if (f.degrees.empty()) throw std::invalid_argument("--degrees needs at least one value");
            for (int q : f.degrees) {
                ExperimentConfig c = to_config(f, ExperimentKind::moments);
                c.degree = q;
                run_one(c, f.degrees.size() == 1 ? f.out : degree_path(f.out, q));
            }
        } else if (sweep->parsed()) {
            run_sweep(f, sweep_experiment, sweep_estimators, sweep_budgets, sweep_seeds);
        }
    } catch (const std::exception& e) {
        std::cerr << "dtrace: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
