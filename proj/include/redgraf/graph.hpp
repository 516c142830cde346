#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "redgraf/types.hpp"

namespace redgraf {

/// Ordered pair (source, target): the target receives from the source.
struct Edge {
    AgentId source;
    AgentId target;
    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Immutable directed graph on nodes 0..N-1 without self-loops.
class Digraph {
public:
    /// Duplicate edges collapse. Throws DimensionError for out-of-range ids
    /// and ConfigError for self-loops or N == 0.
    Digraph(std::size_t node_count, std::span<const Edge> edges);

    static Digraph complete(std::size_t n);
    /// Both directions of every listed pair.
    static Digraph undirected(std::size_t n, std::span<const std::pair<AgentId, AgentId>> pairs);

    std::size_t node_count() const { return in_.size(); }
    std::size_t edge_count() const { return edge_count_; }
    /// Sorted in-neighbours (nodes that send to `i`).
    const IdSet& in_neighbors(AgentId i) const { return in_.at(i); }
    const IdSet& out_neighbors(AgentId i) const { return out_.at(i); }
    bool has_edge(AgentId source, AgentId target) const;
    std::vector<Edge> edges() const;
    std::size_t min_in_degree() const;

    friend bool operator==(const Digraph& a, const Digraph& b) { return a.in_ == b.in_; }

private:
    std::vector<IdSet> in_;
    std::vector<IdSet> out_;
    std::size_t edge_count_ = 0;
};

/// True iff some member of `subset` has at least r in-neighbours outside it.
/// Throws EmptyInputError for an empty subset and DimensionError for ids out
/// of range.
bool is_r_reachable(const Digraph& g, std::span<const AgentId> subset, std::size_t r);

inline constexpr std::size_t kExhaustiveRobustnessLimit = 14;

/// Exhaustive r-robustness test over all pairs of disjoint nonempty subsets.
/// Throws SizeLimitError when N exceeds `node_limit`.
bool is_r_robust(const Digraph& g, std::size_t r, std::size_t node_limit = kExhaustiveRobustnessLimit);

/// Largest r for which the graph is r-robust (0 if not even 1-robust).
std::size_t robustness_level(const Digraph& g, std::size_t node_limit = kExhaustiveRobustnessLimit);

/// True iff some node reaches every other node.
bool is_rooted(const Digraph& g);

/// G2 o G1 with implicit self-loops on both operands: (i, j) is an edge iff
/// i != j and some k has (i, k) in E1 + loops and (k, j) in E2 + loops.
/// Throws DimensionError on node-count mismatch.
Digraph compose(const Digraph& g1, const Digraph& g2);

/// Rootedness of G_K o ... o G_1 for seq = {G_1, ..., G_K}.
bool is_jointly_rooted(std::span<const Digraph> seq);

/// Every consecutive block of length q in `seq` is jointly rooted. A trailing
/// partial block is ignored. Throws ConfigError for q == 0.
bool is_repeatedly_jointly_rooted(std::span<const Digraph> seq, std::size_t q);

/// Graph with the listed incoming edges removed.
Digraph remove_edges(const Digraph& g, std::span<const Edge> removed);

/// Removes a seeded-random set of at most r-1 incoming edges at every node
/// and reports whether the remainder is still rooted.
bool removal_resilience_trial(const Digraph& g, std::size_t r, std::uint64_t seed);

struct Attachment {
    AgentId node;
    IdSet attached_to;
};

/// Evidence that a graph is r-robust by construction: a bidirectional base
/// clique on nodes 0..base-1 with base >= 2r-1, then nodes added in order,
/// each receiving edges from at least r earlier nodes.
struct RobustnessCertificate {
    std::size_t claimed_r = 1;
    std::size_t base_clique_size = 1;
    std::vector<Attachment> attachments;
};

struct RobustGraph {
    Digraph graph;
    RobustnessCertificate certificate;
};

/// Base clique on 2r-1 nodes plus random bidirectional attachments of size r.
/// Throws ConfigError when n < 2r - 1 or r == 0.
RobustGraph generate_robust(std::size_t n, std::size_t r, std::uint64_t seed);

/// Checks that `g` contains the structure the certificate describes.
bool certificate_holds(const Digraph& g, const RobustnessCertificate& cert);

/// "N" on the first line, then one "src dst" pair per line. '#' starts a
/// comment line.
void write_edge_list(std::ostream& out, const Digraph& g);
/// Throws ParseError with the 1-based line number.
Digraph read_edge_list(std::istream& in);

/// JSON sidecar document.
void write_certificate(std::ostream& out, const RobustnessCertificate& cert);
RobustnessCertificate read_certificate(std::istream& in);

}  // namespace redgraf
