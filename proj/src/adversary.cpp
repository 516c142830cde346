#include "redgraf/adversary.hpp"

#include <algorithm>
#include <string>

#include "redgraf/errors.hpp"
#include "redgraf/random.hpp"

namespace redgraf {

bool AdversaryPlacement::is_byzantine(AgentId id) const {
    return std::binary_search(byzantine.begin(), byzantine.end(), id);
}

IdSet AdversaryPlacement::regular(std::size_t n) const {
    IdSet out;
    for (AgentId i = 0; i < n; ++i)
        if (!is_byzantine(i)) out.push_back(i);
    return out;
}

bool validate_f_local(const Digraph& g, const AdversaryPlacement& placement) {
    for (AgentId b : placement.byzantine)
        if (b >= g.node_count()) throw DimensionError("Byzantine id " + std::to_string(b) + " out of range");
    for (AgentId i = 0; i < g.node_count(); ++i) {
        if (placement.is_byzantine(i)) continue;
        std::size_t count = 0;
        for (AgentId j : g.in_neighbors(i))
            if (placement.is_byzantine(j)) ++count;
        if (count > placement.F) return false;
    }
    return true;
}

AdversaryPlacement random_f_local_placement(const Digraph& g, std::size_t F, std::size_t count, std::uint64_t seed) {
    const std::size_t n = g.node_count();
    std::vector<AgentId> order(n);
    for (AgentId i = 0; i < n; ++i) order[i] = i;
    Rng rng(derive_seed(seed, {tag(SeedPurpose::placement)}));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    AdversaryPlacement placement;
    placement.F = F;
    std::vector<std::size_t> byz_in(n, 0);
    std::vector<char> is_byz(n, 0);
    for (AgentId v : order) {
        if (placement.byzantine.size() >= count) break;
        // v turning Byzantine adds one to each out-neighbour's count and
        // removes v from the regular set it is checked against.
        bool ok = true;
        for (AgentId w : g.out_neighbors(v))
            if (!is_byz[w] && byz_in[w] + 1 > F) ok = false;
        if (!ok) continue;
        is_byz[v] = 1;
        for (AgentId w : g.out_neighbors(v)) ++byz_in[w];
        placement.byzantine.push_back(v);
    }
    std::sort(placement.byzantine.begin(), placement.byzantine.end());
    return placement;
}

std::string_view to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::blend: return "blend";
        case StrategyKind::fixed_target: return "fixed_target";
        case StrategyKind::coordinate_spoof: return "coordinate_spoof";
    }
    return "unknown";
}

StrategyKind parse_strategy(std::string_view name) {
    if (name == "blend") return StrategyKind::blend;
    if (name == "fixed_target") return StrategyKind::fixed_target;
    if (name == "coordinate_spoof") return StrategyKind::coordinate_spoof;
    throw ConfigError("unknown strategy kind '" + std::string(name) + "'");
}

void ByzantineStrategy::validate(std::size_t dim) const {
    switch (kind) {
        case StrategyKind::blend:
            if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("blend needs a positive eta");
            break;
        case StrategyKind::fixed_target:
            if (!target) throw ConfigError("fixed_target needs a target point");
            if (static_cast<std::size_t>(target->size()) != dim) throw ConfigError("fixed_target dimension mismatch");
            if (!target->allFinite()) throw ConfigError("fixed_target must be finite");
            break;
        case StrategyKind::coordinate_spoof:
            if (!std::isfinite(offset)) throw ConfigError("coordinate_spoof needs a finite offset");
            break;
    }
}

namespace {

// Regular agents whose values shape the fabricated message: the receiver's
// regular in-neighbours and the receiver itself. For the sender's own record
// the sender's regular in-neighbours, or every regular agent if it has none.
IdSet reference_set(AgentId sender, AgentId receiver, const Digraph& g, const AdversaryPlacement& placement) {
    IdSet ids;
    for (AgentId j : g.in_neighbors(receiver))
        if (!placement.is_byzantine(j)) ids.push_back(j);
    if (!placement.is_byzantine(receiver)) ids.push_back(receiver);
    if (ids.empty() && receiver == sender) ids = placement.regular(g.node_count());
    std::sort(ids.begin(), ids.end());
    return ids;
}

Vector fabricate_channel(const ByzantineStrategy& s, Rng& rng, const std::vector<Vector>& values, const IdSet& ref,
                         const Vector& receiver_value) {
    const Eigen::Index d = receiver_value.size();
    if (s.kind == StrategyKind::fixed_target) return *s.target;
    if (ref.empty()) return receiver_value;
    Vector lo = values[ref.front()];
    Vector hi = lo;
    for (AgentId j : ref) {
        lo = lo.cwiseMin(values[j]);
        hi = hi.cwiseMax(values[j]);
    }
    if (s.kind == StrategyKind::blend) {
        Vector out(d);
        for (Eigen::Index l = 0; l < d; ++l) {
            const double c = 0.5 * (lo[l] + hi[l]);
            const double half = 0.5 * (hi[l] - lo[l]) * s.eta;
            out[l] = c + half * (2.0 * rng.uniform() - 1.0);
        }
        return out;
    }
    Vector out = receiver_value;
    const auto l = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(d)));
    out[l] = hi[l] + s.offset;
    return out;
}

}  // namespace

Payload fabricate(const ByzantineStrategy& strategy, std::size_t round, AgentId sender, AgentId receiver,
                  const NetworkState& state, const Digraph& g, const AdversaryPlacement& placement) {
    if (sender >= state.node_count() || receiver >= state.node_count())
        throw DimensionError("fabricate: agent id out of range");
    const IdSet ref = reference_set(sender, receiver, g, placement);
    Payload p;
    Rng rx(derive_seed(strategy.seed, {tag(SeedPurpose::adversary), round, sender, receiver, 0}));
    p.x = fabricate_channel(strategy, rx, state.x, ref, state.x[receiver]);
    if (state.y) {
        Rng ry(derive_seed(strategy.seed, {tag(SeedPurpose::adversary), round, sender, receiver, 1}));
        p.y = fabricate_channel(strategy, ry, *state.y, ref, (*state.y)[receiver]);
    }
    return p;
}

}  // namespace redgraf
