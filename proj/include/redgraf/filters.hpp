#pragma once

#include <optional>
#include <span>
#include <vector>

#include "redgraf/types.hpp"

namespace redgraf {

enum class Field { x, y };

struct Received {
    AgentId sender;
    Vector x;
    std::optional<Vector> y;
};

/// What a regular agent sees in one round: its own state plus everything its
/// in-neighbours sent. The agent itself is always a candidate.
struct NeighborhoodView {
    AgentId self_id = 0;
    Vector self_x;
    std::optional<Vector> self_y;
    std::vector<Received> received;

    std::size_t candidate_count() const { return received.size() + 1; }
    /// Sorted ids of self and all senders.
    IdSet candidate_ids() const;
    const Vector& x_of(AgentId id) const;
    /// Throws StateError if the candidate carries no auxiliary state.
    const Vector& y_of(AgentId id) const;
    const Vector& value_of(AgentId id, Field field) const { return field == Field::x ? x_of(id) : y_of(id); }
    std::size_t dim() const { return static_cast<std::size_t>(self_x.size()); }
    /// Throws DimensionError on mismatched sizes or repeated senders.
    void validate() const;
};

/// Uniform weights over kept sets; `node_count` fixes the lower bound 1/N.
struct WeightPolicy {
    std::size_t node_count = 1;
    double floor() const { return 1.0 / static_cast<double>(node_count); }
    double weight(std::size_t kept) const { return 1.0 / static_cast<double>(kept); }
};

// Order-statistic convention: the filters threshold at the (F+1)-th largest
// and smallest values, dropping at most F candidates strictly beyond the self
// value on each side. Ties at the threshold are kept.

/// Keeps v_j iff ||x_j - y_i|| <= max(q, ||x_i - y_i||), q the (F+1)-th largest
/// distance among `candidates` (all candidates when empty). Throws StateError
/// without a self y and ConfigError when F >= |candidates|.
IdSet dist_filt(const NeighborhoodView& view, std::size_t F, std::span<const AgentId> candidates = {});

/// Per-dimension trimmed sets. Throws ConfigError for fewer than 2F+1 candidates.
std::vector<IdSet> cw_mm_filt(const NeighborhoodView& view, std::size_t F, Field field,
                              std::span<const AgentId> candidates = {});

/// Candidates within the trimming bounds in every dimension of x.
IdSet full_mm_filt(const NeighborhoodView& view, std::size_t F, std::span<const AgentId> candidates = {});

/// Uniform average of the kept x vectors. Throws StateError for an empty set
/// or one missing the self id.
Vector full_average(const NeighborhoodView& view, std::span<const AgentId> kept, const WeightPolicy& policy);

/// Dimension l of the result averages dimension l over kept[l].
Vector cw_average(const NeighborhoodView& view, std::span<const IdSet> kept, const WeightPolicy& policy,
                  Field field);

struct SafePointLimits {
    std::size_t max_candidates = 25;
    std::size_t max_faults = 3;
    /// Absolute feasibility tolerance, scaled by the data magnitude.
    double tolerance = 1e-10;
};

/// A point in the intersection of the convex hulls of every (n-F)-subset of
/// the candidate x vectors. For d <= 2 the region is built exactly and the
/// midpoint of its bounding box is returned, so the point moves continuously
/// with the candidates; higher dimensions use linear feasibility. Throws ConfigError
/// when n < (d+1)F+1 or the limits are exceeded, NumericalError if the
/// feasibility system cannot be solved in floating point.
Vector safe_point(const NeighborhoodView& view, std::size_t F, const SafePointLimits& limits = {});

}  // namespace redgraf
