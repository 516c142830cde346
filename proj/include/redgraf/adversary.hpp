#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>

#include "redgraf/graph.hpp"
#include "redgraf/state.hpp"

namespace redgraf {

struct AdversaryPlacement {
    IdSet byzantine;
    std::size_t F = 0;

    bool is_byzantine(AgentId id) const;
    /// Complement of `byzantine` in 0..n-1.
    IdSet regular(std::size_t n) const;
};

/// True iff every non-Byzantine node has at most F Byzantine in-neighbours.
/// Throws DimensionError for ids out of range.
bool validate_f_local(const Digraph& g, const AdversaryPlacement& placement);

inline constexpr std::size_t kMaxByzantine = std::numeric_limits<std::size_t>::max();

/// Visits nodes in seeded random order and marks each Byzantine when the
/// placement stays F-local, stopping after `count` nodes (kMaxByzantine for
/// as many as possible).
AdversaryPlacement random_f_local_placement(const Digraph& g, std::size_t F, std::size_t count, std::uint64_t seed);

enum class StrategyKind { blend, fixed_target, coordinate_spoof };

std::string_view to_string(StrategyKind kind);
/// Throws ConfigError for unknown names.
StrategyKind parse_strategy(std::string_view name);

struct ByzantineStrategy {
    StrategyKind kind = StrategyKind::blend;
    /// Box inflation for blend.
    double eta = 1.2;
    /// Emitted point for fixed_target.
    std::optional<Vector> target;
    /// Shift past the box maximum for coordinate_spoof.
    double offset = 1.0;
    std::uint64_t seed = 0;

    /// Throws ConfigError when a required parameter is missing or invalid.
    void validate(std::size_t dim) const;
};

/// Message from Byzantine `sender` to `receiver` in the given round. May read
/// the whole state. Deterministic in (seed, round, sender, receiver). When
/// receiver == sender the result is the sender's own recorded state.
Payload fabricate(const ByzantineStrategy& strategy, std::size_t round, AgentId sender, AgentId receiver,
                  const NetworkState& state, const Digraph& g, const AdversaryPlacement& placement);

}  // namespace redgraf
