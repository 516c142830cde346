#include "redgraf/graph.hpp"

#include <algorithm>
#include <bit>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>

#include "json.hpp"

#include "redgraf/errors.hpp"
#include "redgraf/random.hpp"

namespace redgraf {

Digraph::Digraph(std::size_t node_count, std::span<const Edge> edges) : in_(node_count), out_(node_count) {
    if (node_count == 0) throw ConfigError("graph needs at least one node");
    for (const auto& e : edges) {
        if (e.source >= node_count || e.target >= node_count) {
            throw DimensionError("edge (" + std::to_string(e.source) + ", " + std::to_string(e.target) +
                                 ") out of range for " + std::to_string(node_count) + " nodes");
        }
        if (e.source == e.target) throw ConfigError("self-loop at node " + std::to_string(e.source));
        in_[e.target].push_back(e.source);
        out_[e.source].push_back(e.target);
    }
    auto normalize = [](IdSet& s) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    };
    for (auto& s : in_) {
        normalize(s);
        edge_count_ += s.size();
    }
    for (auto& s : out_) normalize(s);
}

Digraph Digraph::complete(std::size_t n) {
    std::vector<Edge> edges;
    edges.reserve(n * (n > 0 ? n - 1 : 0));
    for (AgentId i = 0; i < n; ++i)
        for (AgentId j = 0; j < n; ++j)
            if (i != j) edges.push_back({i, j});
    return Digraph(n, edges);
}

Digraph Digraph::undirected(std::size_t n, std::span<const std::pair<AgentId, AgentId>> pairs) {
    std::vector<Edge> edges;
    edges.reserve(2 * pairs.size());
    for (const auto& [a, b] : pairs) {
        edges.push_back({a, b});
        edges.push_back({b, a});
    }
    return Digraph(n, edges);
}

bool Digraph::has_edge(AgentId source, AgentId target) const {
    const auto& s = in_.at(target);
    return std::binary_search(s.begin(), s.end(), source);
}

std::vector<Edge> Digraph::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (AgentId s = 0; s < out_.size(); ++s)
        for (AgentId t : out_[s]) out.push_back({s, t});
    return out;
}

std::size_t Digraph::min_in_degree() const {
    std::size_t m = in_.empty() ? 0 : in_[0].size();
    for (const auto& s : in_) m = std::min(m, s.size());
    return m;
}

bool is_r_reachable(const Digraph& g, std::span<const AgentId> subset, std::size_t r) {
    if (subset.empty()) throw EmptyInputError("r-reachability of an empty subset");
    std::vector<char> member(g.node_count(), 0);
    for (AgentId v : subset) {
        if (v >= g.node_count()) throw DimensionError("subset member " + std::to_string(v) + " out of range");
        member[v] = 1;
    }
    for (AgentId v : subset) {
        std::size_t outside = 0;
        for (AgentId u : g.in_neighbors(v)) outside += member[u] ? 0 : 1;
        if (outside >= r) return true;
    }
    return false;
}

bool is_r_robust(const Digraph& g, std::size_t r, std::size_t node_limit) {
    const std::size_t n = g.node_count();
    if (n > node_limit || n > 26) {
        throw SizeLimitError("exhaustive robustness check limited to " + std::to_string(std::min<std::size_t>(node_limit, 26)) +
                             " nodes, graph has " + std::to_string(n) + "; use a construction certificate");
    }
    if (r == 0) return true;
    const std::uint32_t full = (n == 32) ? ~0u : ((1u << n) - 1u);
    std::vector<std::uint32_t> in_mask(n, 0);
    for (AgentId v = 0; v < n; ++v)
        for (AgentId u : g.in_neighbors(v)) in_mask[v] |= 1u << u;

    // unreachable[S]: S nonempty and no member has r in-neighbours outside S.
    const std::size_t count = std::size_t{1} << n;
    std::vector<char> below(count, 0);
    for (std::uint32_t s = 1; s <= full; ++s) {
        bool reachable = false;
        for (std::uint32_t rest = s; rest && !reachable; rest &= rest - 1) {
            const int v = std::countr_zero(rest);
            reachable = static_cast<std::size_t>(std::popcount(in_mask[v] & ~s)) >= r;
        }
        below[s] = reachable ? 0 : 1;
        if (s == full) break;
    }
    std::vector<char> unreachable = below;
    // below[T] := some nonempty S subset of T is unreachable (sum over subsets).
    for (std::size_t bit = 0; bit < n; ++bit)
        for (std::uint32_t t = 0; t <= full; ++t) {
            if (t & (1u << bit)) below[t] |= below[t ^ (1u << bit)];
            if (t == full) break;
        }
    for (std::uint32_t s = 1; s <= full; ++s) {
        if (unreachable[s] && below[full & ~s]) return false;
        if (s == full) break;
    }
    return true;
}

std::size_t robustness_level(const Digraph& g, std::size_t node_limit) {
    std::size_t r = 0;
    while (r < g.node_count() && is_r_robust(g, r + 1, node_limit)) ++r;
    return r;
}

namespace {

bool reaches_all(const Digraph& g, AgentId root) {
    std::vector<char> seen(g.node_count(), 0);
    std::queue<AgentId> frontier;
    frontier.push(root);
    seen[root] = 1;
    std::size_t visited = 1;
    while (!frontier.empty()) {
        const AgentId v = frontier.front();
        frontier.pop();
        for (AgentId w : g.out_neighbors(v)) {
            if (!seen[w]) {
                seen[w] = 1;
                ++visited;
                frontier.push(w);
            }
        }
    }
    return visited == g.node_count();
}

}  // namespace

bool is_rooted(const Digraph& g) {
    for (AgentId v = 0; v < g.node_count(); ++v)
        if (reaches_all(g, v)) return true;
    return false;
}

Digraph compose(const Digraph& g1, const Digraph& g2) {
    if (g1.node_count() != g2.node_count()) throw DimensionError("composed graphs have different node counts");
    const std::size_t n = g1.node_count();
    std::vector<Edge> edges;
    for (AgentId i = 0; i < n; ++i) {
        std::vector<char> hit(n, 0);
        auto via = [&](AgentId k) {
            hit[k] = 1;  // loop at k in g2
            for (AgentId j : g2.out_neighbors(k)) hit[j] = 1;
        };
        via(i);  // loop at i in g1
        for (AgentId k : g1.out_neighbors(i)) via(k);
        for (AgentId j = 0; j < n; ++j)
            if (hit[j] && j != i) edges.push_back({i, j});
    }
    return Digraph(n, edges);
}

bool is_jointly_rooted(std::span<const Digraph> seq) {
    if (seq.empty()) throw EmptyInputError("jointly rooted check of an empty sequence");
    Digraph acc = seq.front();
    for (std::size_t k = 1; k < seq.size(); ++k) acc = compose(acc, seq[k]);
    return is_rooted(acc);
}

bool is_repeatedly_jointly_rooted(std::span<const Digraph> seq, std::size_t q) {
    if (q == 0) throw ConfigError("period q must be positive");
    if (seq.size() < q) throw EmptyInputError("sequence shorter than one period");
    for (std::size_t start = 0; start + q <= seq.size(); start += q)
        if (!is_jointly_rooted(seq.subspan(start, q))) return false;
    return true;
}

Digraph remove_edges(const Digraph& g, std::span<const Edge> removed) {
    std::vector<Edge> drop(removed.begin(), removed.end());
    std::sort(drop.begin(), drop.end());
    std::vector<Edge> kept;
    for (const auto& e : g.edges())
        if (!std::binary_search(drop.begin(), drop.end(), e)) kept.push_back(e);
    return Digraph(g.node_count(), kept);
}

bool removal_resilience_trial(const Digraph& g, std::size_t r, std::uint64_t seed) {
    Rng rng(derive_seed(seed, {tag(SeedPurpose::removal)}));
    std::vector<Edge> removed;
    for (AgentId v = 0; v < g.node_count(); ++v) {
        IdSet in = g.in_neighbors(v);
        const std::size_t k = std::min(r > 0 ? r - 1 : 0, in.size());
        for (std::size_t j = 0; j < k; ++j) {
            const std::size_t pick = j + rng.below(in.size() - j);
            std::swap(in[j], in[pick]);
            removed.push_back({in[j], v});
        }
    }
    return is_rooted(remove_edges(g, removed));
}

RobustGraph generate_robust(std::size_t n, std::size_t r, std::uint64_t seed) {
    if (r == 0) throw ConfigError("robustness parameter r must be positive");
    if (n < 2 * r - 1) {
        throw ConfigError("need n >= 2r - 1 (n = " + std::to_string(n) + ", r = " + std::to_string(r) + ")");
    }
    const std::size_t base = 2 * r - 1;
    std::vector<std::pair<AgentId, AgentId>> pairs;
    for (AgentId i = 0; i < base; ++i)
        for (AgentId j = i + 1; j < base; ++j) pairs.emplace_back(i, j);

    RobustnessCertificate cert;
    cert.claimed_r = r;
    cert.base_clique_size = base;
    Rng rng(derive_seed(seed, {tag(SeedPurpose::graph), n, r}));
    for (AgentId v = base; v < n; ++v) {
        std::vector<AgentId> pool(v);
        for (AgentId u = 0; u < v; ++u) pool[u] = u;
        for (std::size_t j = 0; j < r; ++j) std::swap(pool[j], pool[j + rng.below(pool.size() - j)]);
        IdSet chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(r));
        std::sort(chosen.begin(), chosen.end());
        for (AgentId u : chosen) pairs.emplace_back(u, v);
        cert.attachments.push_back({v, std::move(chosen)});
    }
    return {Digraph::undirected(n, pairs), std::move(cert)};
}

bool certificate_holds(const Digraph& g, const RobustnessCertificate& cert) {
    const std::size_t n = g.node_count();
    const std::size_t r = cert.claimed_r;
    if (r == 0 || cert.base_clique_size < 2 * r - 1 || cert.base_clique_size > n) return false;
    if (cert.base_clique_size + cert.attachments.size() != n) return false;
    for (AgentId i = 0; i < cert.base_clique_size; ++i)
        for (AgentId j = 0; j < cert.base_clique_size; ++j)
            if (i != j && !g.has_edge(i, j)) return false;
    AgentId expected = cert.base_clique_size;
    for (const auto& a : cert.attachments) {
        if (a.node != expected++) return false;
        if (a.attached_to.size() < r) return false;
        IdSet uniq = a.attached_to;
        std::sort(uniq.begin(), uniq.end());
        if (std::adjacent_find(uniq.begin(), uniq.end()) != uniq.end()) return false;
        for (AgentId u : uniq)
            if (u >= a.node || !g.has_edge(u, a.node)) return false;
    }
    return true;
}

void write_edge_list(std::ostream& out, const Digraph& g) {
    out << g.node_count() << "\n";
    for (const auto& e : g.edges()) out << e.source << ' ' << e.target << "\n";
}

namespace {

std::size_t parse_id(const std::string& tok, std::size_t line) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
        throw ParseError("expected a non-negative integer, found '" + tok + "'", line);
    }
    try {
        return std::stoull(tok);
    } catch (const std::out_of_range&) {
        throw ParseError("integer out of range '" + tok + "'", line);
    }
}

}  // namespace

Digraph read_edge_list(std::istream& in) {
    std::string text;
    std::size_t line = 0;
    std::size_t n = 0;
    bool have_n = false;
    std::vector<Edge> edges;
    while (std::getline(in, text)) {
        ++line;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (text.find_first_not_of(" \t") == std::string::npos || text[text.find_first_not_of(" \t")] == '#') continue;
        std::istringstream ss(text);
        std::vector<std::string> tok;
        for (std::string t; ss >> t;) tok.push_back(t);
        if (!have_n) {
            if (tok.size() != 1) throw ParseError("first line must hold the node count", line);
            n = parse_id(tok[0], line);
            if (n == 0) throw ParseError("node count must be positive", line);
            have_n = true;
            continue;
        }
        if (tok.size() != 2) throw ParseError("expected 'src dst'", line);
        const Edge e{parse_id(tok[0], line), parse_id(tok[1], line)};
        if (e.source >= n || e.target >= n) throw ParseError("node id out of range", line);
        if (e.source == e.target) throw ParseError("self-loop", line);
        edges.push_back(e);
    }
    if (!have_n) throw ParseError("missing node count", line);
    return Digraph(n, edges);
}

void write_certificate(std::ostream& out, const RobustnessCertificate& cert) {
    nlohmann::json j;
    j["claimed_r"] = cert.claimed_r;
    j["base_clique_size"] = cert.base_clique_size;
    j["attachments"] = nlohmann::json::array();
    for (const auto& a : cert.attachments) j["attachments"].push_back({{"node", a.node}, {"attached_to", a.attached_to}});
    out << j.dump(2) << "\n";
}

RobustnessCertificate read_certificate(std::istream& in) {
    try {
        const auto j = nlohmann::json::parse(in);
        RobustnessCertificate cert;
        cert.claimed_r = j.at("claimed_r").get<std::size_t>();
        cert.base_clique_size = j.at("base_clique_size").get<std::size_t>();
        for (const auto& a : j.at("attachments"))
            cert.attachments.push_back({a.at("node").get<AgentId>(), a.at("attached_to").get<IdSet>()});
        return cert;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("certificate: ") + e.what(), 0);
    }
}

}  // namespace redgraf
