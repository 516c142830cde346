#pragma once

#include <optional>
#include <span>
#include <vector>

#include "redgraf/engine.hpp"
#include "redgraf/functions.hpp"

namespace redgraf {

Vector regular_mean(const std::vector<Vector>& x, const IdSet& regular);
/// Largest pairwise distance among the listed agents (0 for fewer than two).
double diameter(const std::vector<Vector>& x, const IdSet& regular);
/// max over the listed agents of ||x_i - center||.
double max_distance(const std::vector<Vector>& x, const IdSet& regular, const Vector& center);

/// (max_i ||x_tilde_i - x_c|| / max_j ||x_j - x_c||)^2, the smallest gamma for
/// which the round satisfies the contraction inequality with no perturbation.
/// Returns 1 when every x_j sits at x_c.
double effective_gamma(const std::vector<Vector>& x, const std::vector<Vector>& x_tilde, const IdSet& regular,
                       const Vector& x_c);

struct RoundRecord {
    std::size_t k = 0;
    Vector mean;
    double dist_to_xstar = 0.0;
    double optimality_gap = 0.0;
    double diameter = 0.0;
    /// NaN for the final snapshot, which has no filtered state.
    double gamma_eff = 1.0;
    double max_grad_norm = 0.0;
    /// max_i ||x_i - x*||.
    double max_dist_to_xstar = 0.0;
    /// max_i ||x_i - x_c||.
    double max_dist_to_center = 0.0;
};

/// Metrics of round k from the states x[k], the filtered states x_tilde[k]
/// and the gradients evaluated there.
RoundRecord round_metrics(std::size_t k, const std::vector<Vector>& x, const std::vector<Vector>& x_tilde,
                          const std::vector<Vector>& gradient, const IdSet& regular, const CostEnsemble& ensemble,
                          const MinimizerGeometry& geometry, const Vector& x_c);

struct Baselines {
    /// min_i ||x_i* - x*|| over the local minimizers.
    double min_local_dist = 0.0;
    /// min_i f(x_i*) - f*.
    double min_local_gap = 0.0;
};

Baselines baselines(const CostEnsemble& ensemble, const MinimizerGeometry& geometry);

struct RunMetrics {
    std::vector<RoundRecord> rounds;
    Baselines baselines;
    Vector x_c;
    double gamma = 1.0;
    /// Mean of the final regular y, for algorithms with an auxiliary channel.
    std::optional<Vector> y_inf;
    /// max_i ||y_i[k] - y_inf|| for k = 0..K.
    std::vector<double> aux_error;
};

/// One record per snapshot k = 0..K. Record K has no filtered state: its
/// gamma_eff is NaN and its gradients are evaluated at x[K].
RunMetrics compute_run_metrics(const RunTrace& trace, const CostEnsemble& ensemble, const MinimizerGeometry& geometry,
                               std::size_t F);

/// Subtracts the plateau (median of the last 10% of the series) and returns
/// the median ratio e[k+1]/e[k] for first <= k < last (last clamped to the
/// series end). Throws FitError when an adjusted value is not positive or the
/// window holds fewer than two points.
double fit_geometric_rate(std::span<const double> series, std::size_t first = 5, std::size_t last = 50);

/// e[k] ~ c1 exp(-c2 k), with xi = exp(-c2) the per-round decay factor.
struct ExponentialDecay {
    double c1 = 0.0;
    double c2 = 0.0;
    double xi = 1.0;
};

/// Least-squares fit of log e[k] against k over the leading rounds, from
/// `first` up to the last round before e first drops to `floor` or below.
/// Throws FitError when fewer than two rounds qualify.
ExponentialDecay fit_exponential_decay(std::span<const double> series, std::size_t first = 1, double floor = 1e-12);

double median(std::vector<double> v);

struct MeanStd {
    std::vector<double> mean;
    std::vector<double> std;
};

/// Per-index mean and sample standard deviation over equally long series.
/// Throws EmptyInputError without series and DimensionError on ragged input.
MeanStd aggregate(const std::vector<std::vector<double>>& series);

}  // namespace redgraf
