#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "redgraf/types.hpp"

namespace redgraf {

/// What one agent broadcasts in a round.
struct Payload {
    Vector x;
    std::optional<Vector> y;
};

/// Network-wide state at the start of round `round`. Vectors are indexed by
/// agent id; `y` is present only for algorithms with an auxiliary channel.
struct NetworkState {
    std::size_t round = 0;
    std::vector<Vector> x;
    std::optional<std::vector<Vector>> y;
    /// Fabricated payloads of the previous round, keyed by (sender, receiver).
    std::map<std::pair<AgentId, AgentId>, Payload> byzantine_outbox;

    std::size_t node_count() const { return x.size(); }
    std::size_t dim() const { return x.empty() ? 0 : static_cast<std::size_t>(x.front().size()); }
};

}  // namespace redgraf
