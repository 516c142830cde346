#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "redgraf/adversary.hpp"
#include "redgraf/algorithm.hpp"
#include "redgraf/filters.hpp"
#include "redgraf/functions.hpp"
#include "redgraf/graph.hpp"
#include "redgraf/state.hpp"

namespace redgraf {

/// x_i[0] uniform in the box, seeded per agent from `seed`. Algorithms with an
/// auxiliary channel start y_i[0] at the agent's local minimizer (Byzantine
/// agents at x_i[0]). Throws ConfigError when the ensemble registers an id
/// outside 0..node_count-1 or the box dimension differs from the ensemble's.
NetworkState init(AlgorithmKind kind, const CostEnsemble& ensemble, std::size_t node_count, std::uint64_t seed,
                  const Box& init_box);

struct StepResult {
    NetworkState next;
    /// Filtered states indexed by agent; Byzantine entries hold the agent's
    /// fabricated self-broadcast.
    std::vector<Vector> x_tilde;
    std::vector<Vector> gradient;
    /// Kept id sets per agent: one set for the full-vector filters, one per
    /// dimension for the coordinate-wise filter, none for RVO.
    std::vector<std::vector<IdSet>> kept;
};

struct StepOptions {
    SafePointLimits safe_point;
};

/// One synchronous round: broadcast, filter, gradient update. Throws
/// ConfigError when some node has in-degree below the required robustness
/// (a necessary condition for robustness at least 2).
StepResult step(AlgorithmKind kind, const Digraph& g, const CostEnsemble& ensemble, const NetworkState& state,
                const AdversaryPlacement& placement, const ByzantineStrategy& strategy, double alpha,
                const StepOptions& options = {});

struct RunOptions {
    std::size_t rounds = 100;
    double alpha = 0.01;
    Box init_box;
    std::uint64_t init_seed = 0;
    /// Skip the reduction-type check on alpha.
    bool allow_any_step = false;
    /// Accepted in place of the exhaustive robustness check.
    const RobustnessCertificate* certificate = nullptr;
    StepOptions step;
    /// Receives the line-delimited round trace when set.
    std::ostream* trace_dump = nullptr;
};

/// Full state history of one run.
struct RunTrace {
    AlgorithmKind kind = AlgorithmKind::cwtm;
    double alpha = 0.0;
    IdSet regular;
    /// rounds + 1 snapshots of every agent's x.
    std::vector<std::vector<Vector>> x;
    /// rounds entries: x_tilde[k] is the filtered state used in round k.
    std::vector<std::vector<Vector>> x_tilde;
    std::vector<std::vector<Vector>> gradient;
    /// rounds + 1 snapshots when the algorithm has an auxiliary channel.
    std::vector<std::vector<Vector>> y;

    std::size_t rounds() const { return x_tilde.size(); }
};

/// Checks everything `run` requires before the first round. Throws
/// ConfigError with the first failing condition.
void validate_run(AlgorithmKind kind, const Digraph& g, const CostEnsemble& ensemble,
                  const AdversaryPlacement& placement, const ByzantineStrategy& strategy, const RunOptions& options);

/// Validates, initializes and executes `options.rounds` rounds. Throws
/// DivergenceError naming the round at which a state becomes non-finite.
RunTrace run(AlgorithmKind kind, const Digraph& g, const CostEnsemble& ensemble, const AdversaryPlacement& placement,
             const ByzantineStrategy& strategy, const RunOptions& options);

inline constexpr int kTraceSchemaVersion = 1;

}  // namespace redgraf
