#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "redgraf/config.hpp"
#include "redgraf/engine.hpp"
#include "redgraf/metrics.hpp"
#include "redgraf/theory.hpp"

namespace redgraf {

/// Everything shared by the runs of one experiment: the graph, the Byzantine
/// identities and the regular agents' objectives stay fixed while initial
/// states and adversary randomness change from run to run.
struct Problem {
    Digraph graph;
    std::optional<RobustnessCertificate> certificate;
    AdversaryPlacement placement;
    CostEnsemble ensemble;
    MinimizerGeometry geometry;
};

/// Throws ConfigError when the graph, placement or ensemble cannot be built.
Problem build_problem(const ExperimentConfig& cfg);

std::uint64_t run_init_seed(std::uint64_t master, std::size_t run);
std::uint64_t run_adversary_seed(std::uint64_t master, std::size_t run);

struct RunSummary {
    AlgorithmKind kind = AlgorithmKind::cwtm;
    double alpha = 0.0;
    std::size_t run = 0;
    RunMetrics metrics;
    /// max_i ||x_i* - x_c|| over the local minimizers.
    double r_c = 0.0;
    double max_gamma_eff = 0.0;
    /// Largest excess, over all rounds, of max_i ||x_tilde_i - x_c|| above
    /// sqrt(gamma) max_j ||x_j - x_c|| + c[k]; c[k] = 2 max_i ||y_i[k] - y_inf||
    /// for algorithms with an auxiliary channel and 0 otherwise.
    double contraction_excess = 0.0;
    /// Geometric factor of max_i ||x_i[k] - x_c||, when the fit succeeds.
    std::optional<double> fitted_rate;
    std::string fit_error;
    /// Mean and standard deviation of the diameter over the last 10% of rounds.
    double plateau_diameter = 0.0;
    double plateau_diameter_std = 0.0;
};

/// Runs one (algorithm, alpha, run) cell of the grid.
RunSummary execute_run(const ExperimentConfig& cfg, const Problem& problem, AlgorithmKind kind, double alpha,
                       std::size_t run, std::ostream* trace_dump = nullptr);

/// REDGRAF_THREADS when set to a positive integer, else the hardware concurrency.
std::size_t worker_count();

/// Executes the grid algorithms x alphas x runs on a pool of `threads`
/// workers. Results come back in grid order regardless of scheduling; the
/// first failing cell's exception is rethrown after all workers stop.
std::vector<RunSummary> run_experiment(const ExperimentConfig& cfg, const Problem& problem, std::size_t threads,
                                       const std::string& trace_dir = "");

std::string format_alpha(double alpha);
std::string run_file_stem(AlgorithmKind kind, double alpha, std::size_t run);
std::string group_file_stem(AlgorithmKind kind, double alpha);

inline constexpr const char* kRunCsvHeader =
    "run_id,k,dist_to_xstar,optimality_gap,diameter,gamma_eff,max_grad_norm,max_dist_to_xstar,max_dist_to_center";
inline constexpr const char* kAggregateCsvHeader = "k,metric,mean,std";

/// %.17g: round-trips every double.
std::string format_double(double v);

void write_run_csv(std::ostream& out, const RunSummary& run);
/// Rows (k, metric, mean, std) for every per-round metric, plus the
/// min_local_dist and min_local_gap baselines at k = 0.
void write_aggregate_csv(std::ostream& out, const std::vector<const RunSummary*>& group);

/// Theory bounds for one (algorithm, alpha) group; SDMMFD and SDFD use the
/// first run's y_inf as centre when available.
TheoryBounds group_bounds(const ExperimentConfig& cfg, const Problem& problem, AlgorithmKind kind, double alpha,
                          const std::optional<Vector>& y_inf);

std::string summary_json(const ExperimentConfig& cfg, const Problem& problem, const std::vector<RunSummary>& runs);

/// Writes runs/, aggregate/ and summary.json under `dir`.
void write_outputs(const ExperimentConfig& cfg, const Problem& problem, const std::vector<RunSummary>& runs,
                   const std::string& dir);

}  // namespace redgraf
