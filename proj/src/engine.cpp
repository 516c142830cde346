#include "redgraf/engine.hpp"

#include <ostream>
#include <string>

#include "json.hpp"
#include "redgraf/errors.hpp"
#include "redgraf/random.hpp"
#include "redgraf/theory.hpp"

namespace redgraf {

NetworkState init(AlgorithmKind kind, const CostEnsemble& ensemble, std::size_t node_count, std::uint64_t seed,
                  const Box& init_box) {
    const auto d = static_cast<Eigen::Index>(ensemble.dim());
    if (init_box.lo.size() != d || init_box.hi.size() != d) throw ConfigError("init box dimension mismatch");
    if ((init_box.hi.array() < init_box.lo.array()).any()) throw ConfigError("init box has hi < lo");
    for (const auto& e : ensemble.entries())
        if (e.id >= node_count) throw ConfigError("ensemble agent " + std::to_string(e.id) + " out of range");

    NetworkState s;
    s.x.resize(node_count);
    for (AgentId i = 0; i < node_count; ++i) {
        Rng rng(derive_seed(seed, {tag(SeedPurpose::init_state), i}));
        Vector v(d);
        for (Eigen::Index l = 0; l < d; ++l) v[l] = rng.uniform(init_box.lo[l], init_box.hi[l]);
        s.x[i] = v;
    }
    if (uses_auxiliary(kind)) {
        std::vector<Vector> y = s.x;
        for (const auto& e : ensemble.entries()) {
            if (auto m = e.cost->minimizer()) {
                y[e.id] = *m;
            } else {
                y[e.id] = minimize_local(*e.cost, s.x[e.id], MinimizerOptions{});
            }
        }
        s.y = std::move(y);
    }
    return s;
}

StepResult step(AlgorithmKind kind, const Digraph& g, const CostEnsemble& ensemble, const NetworkState& state,
                const AdversaryPlacement& placement, const ByzantineStrategy& strategy, double alpha,
                const StepOptions& options) {
    const std::size_t n = g.node_count();
    if (state.node_count() != n) throw DimensionError("state and graph sizes differ");
    if (uses_auxiliary(kind) != state.y.has_value()) throw StateError("auxiliary state does not match the algorithm");
    const std::size_t d = state.dim();
    const std::size_t F = placement.F;
    const std::size_t r = required_robustness(kind, d, F);
    if (r >= 2 && g.min_in_degree() < r)
        throw ConfigError("graph cannot be " + std::to_string(r) + "-robust: minimum in-degree " +
                          std::to_string(g.min_in_degree()));

    const WeightPolicy policy{n};
    StepResult out;
    out.next.round = state.round + 1;
    out.next.x.resize(n);
    if (state.y) out.next.y.emplace(n);
    out.x_tilde.resize(n);
    out.gradient.assign(n, Vector::Zero(static_cast<Eigen::Index>(d)));
    out.kept.resize(n);

    for (AgentId i = 0; i < n; ++i) {
        if (placement.is_byzantine(i)) {
            Payload own = fabricate(strategy, state.round, i, i, state, g, placement);
            out.x_tilde[i] = own.x;
            out.next.x[i] = std::move(own.x);
            if (out.next.y) (*out.next.y)[i] = own.y ? *own.y : out.next.x[i];
            continue;
        }
        const CostFunction* f = ensemble.find(i);
        if (!f) throw StateError("regular agent " + std::to_string(i) + " has no cost function");

        NeighborhoodView view;
        view.self_id = i;
        view.self_x = state.x[i];
        if (state.y) view.self_y = (*state.y)[i];
        for (AgentId j : g.in_neighbors(i)) {
            if (placement.is_byzantine(j)) {
                Payload p = fabricate(strategy, state.round, j, i, state, g, placement);
                out.next.byzantine_outbox[{j, i}] = p;
                view.received.push_back({j, std::move(p.x), std::move(p.y)});
            } else {
                std::optional<Vector> y;
                if (state.y) y = (*state.y)[j];
                view.received.push_back({j, state.x[j], std::move(y)});
            }
        }

        Vector xt;
        switch (kind) {
            case AlgorithmKind::sdmmfd: {
                const IdSet dist = dist_filt(view, F);
                IdSet mm = full_mm_filt(view, F, dist);
                xt = full_average(view, mm, policy);
                out.kept[i] = {std::move(mm)};
                break;
            }
            case AlgorithmKind::sdfd: {
                IdSet dist = dist_filt(view, F);
                xt = full_average(view, dist, policy);
                out.kept[i] = {std::move(dist)};
                break;
            }
            case AlgorithmKind::cwtm: {
                auto per_dim = cw_mm_filt(view, F, Field::x);
                xt = cw_average(view, per_dim, policy, Field::x);
                out.kept[i] = std::move(per_dim);
                break;
            }
            case AlgorithmKind::rvo:
                xt = safe_point(view, F, options.safe_point);
                break;
        }
        if (state.y) {
            const auto per_dim = cw_mm_filt(view, F, Field::y);
            (*out.next.y)[i] = cw_average(view, per_dim, policy, Field::y);
        }
        Vector grad = f->gradient(xt);
        out.next.x[i] = xt - alpha * grad;
        out.gradient[i] = std::move(grad);
        out.x_tilde[i] = std::move(xt);
    }
    return out;
}

void validate_run(AlgorithmKind kind, const Digraph& g, const CostEnsemble& ensemble,
                  const AdversaryPlacement& placement, const ByzantineStrategy& strategy, const RunOptions& options) {
    const std::size_t n = g.node_count();
    const std::size_t d = ensemble.dim();
    IdSet registered;
    for (const auto& e : ensemble.entries()) registered.push_back(e.id);
    if (registered != placement.regular(n))
        throw ConfigError("cost functions must be registered for exactly the regular agents");
    if (!validate_f_local(g, placement))
        throw ConfigError("Byzantine placement is not " + std::to_string(placement.F) + "-local");
    strategy.validate(d);

    const std::size_t r = required_robustness(kind, d, placement.F);
    if (options.certificate) {
        if (!certificate_holds(g, *options.certificate))
            throw ConfigError("robustness certificate does not match the graph");
        if (options.certificate->claimed_r < r)
            throw ConfigError(std::string(to_string(kind)) + " needs a " + std::to_string(r) +
                              "-robust graph; certificate claims " + std::to_string(options.certificate->claimed_r));
    } else if (n <= kExhaustiveRobustnessLimit) {
        if (!is_r_robust(g, r)) throw ConfigError("graph is not " + std::to_string(r) + "-robust");
    } else {
        throw ConfigError("graph with " + std::to_string(n) + " nodes needs a robustness certificate");
    }

    if (!(options.alpha >= 0.0) || !std::isfinite(options.alpha)) throw ConfigError("step size must be nonnegative");
    if (!options.allow_any_step) {
        const double gamma = kind == AlgorithmKind::cwtm ? static_cast<double>(d) : 1.0;
        const ReductionType t = classify_reduction(gamma, options.alpha, ensemble.mu_tilde(), ensemble.L_tilde());
        if (t == ReductionType::invalid)
            throw ConfigError("step size " + std::to_string(options.alpha) + " gives no valid reduction for " +
                              std::string(to_string(kind)) + " (allow_any_step overrides)");
    }
    if (kind == AlgorithmKind::rvo) {
        std::size_t largest = 0;
        for (AgentId i = 0; i < n; ++i) largest = std::max(largest, g.in_neighbors(i).size() + 1);
        if (largest > options.step.safe_point.max_candidates)
            throw ConfigError("RVO neighbourhood of " + std::to_string(largest) + " exceeds the safe-point limit");
    }
}

namespace {

bool all_finite(const std::vector<Vector>& v, const IdSet& ids) {
    for (AgentId i : ids)
        if (!v[i].allFinite()) return false;
    return true;
}

void dump_round(std::ostream& out, const NetworkState& state, const StepResult& res,
                const AdversaryPlacement& placement) {
    for (AgentId i = 0; i < state.node_count(); ++i) {
        nlohmann::json rec;
        rec["k"] = state.round;
        rec["agent"] = i;
        rec["byzantine"] = placement.is_byzantine(i);
        rec["x"] = std::vector<double>(state.x[i].data(), state.x[i].data() + state.x[i].size());
        const Vector& xt = res.x_tilde[i];
        rec["x_tilde"] = std::vector<double>(xt.data(), xt.data() + xt.size());
        rec["grad_norm"] = res.gradient[i].norm();
        nlohmann::json kept = nlohmann::json::array();
        for (const auto& s : res.kept[i]) kept.push_back(s);
        rec["kept"] = kept;
        out << rec.dump() << '\n';
    }
}

}  // namespace

RunTrace run(AlgorithmKind kind, const Digraph& g, const CostEnsemble& ensemble, const AdversaryPlacement& placement,
             const ByzantineStrategy& strategy, const RunOptions& options) {
    validate_run(kind, g, ensemble, placement, strategy, options);
    RunTrace trace;
    trace.kind = kind;
    trace.alpha = options.alpha;
    trace.regular = placement.regular(g.node_count());

    NetworkState state = init(kind, ensemble, g.node_count(), options.init_seed, options.init_box);
    trace.x.push_back(state.x);
    if (state.y) trace.y.push_back(*state.y);
    if (options.trace_dump) {
        nlohmann::json header{{"schema", "redgraf-trace"},
                              {"version", kTraceSchemaVersion},
                              {"algorithm", std::string(to_string(kind))},
                              {"alpha", options.alpha},
                              {"nodes", g.node_count()},
                              {"byzantine", placement.byzantine}};
        *options.trace_dump << header.dump() << '\n';
    }
    for (std::size_t k = 0; k < options.rounds; ++k) {
        StepResult res = step(kind, g, ensemble, state, placement, strategy, options.alpha, options.step);
        if (!all_finite(res.next.x, trace.regular) || (res.next.y && !all_finite(*res.next.y, trace.regular)))
            throw DivergenceError("non-finite state after round " + std::to_string(k), k);
        if (options.trace_dump) dump_round(*options.trace_dump, state, res, placement);
        trace.x_tilde.push_back(std::move(res.x_tilde));
        trace.gradient.push_back(std::move(res.gradient));
        state = std::move(res.next);
        trace.x.push_back(state.x);
        if (state.y) trace.y.push_back(*state.y);
    }
    return trace;
}

}  // namespace redgraf
