#include "redgraf/experiment.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "redgraf/errors.hpp"
#include "redgraf/random.hpp"

namespace redgraf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Digraph load_graph(const ExperimentConfig& cfg, std::optional<RobustnessCertificate>& cert) {
    if (cfg.graph_source == "generate") {
        RobustGraph rg = generate_robust(cfg.n_agents, cfg.graph_r, derive_seed(cfg.seed, {tag(SeedPurpose::graph)}));
        cert = rg.certificate;
        return rg.graph;
    }
    std::ifstream in(cfg.graph_path);
    if (!in) throw ConfigError("cannot open graph file '" + cfg.graph_path + "'");
    Digraph g = read_edge_list(in);
    if (g.node_count() != cfg.n_agents) throw ConfigError("graph file node count differs from n_agents");
    std::ifstream cin(cfg.graph_path + ".cert.json");
    if (cin) cert = read_certificate(cin);
    return g;
}

}  // namespace

Problem build_problem(const ExperimentConfig& cfg) {
    std::optional<RobustnessCertificate> cert;
    Digraph g = load_graph(cfg, cert);

    AdversaryPlacement placement;
    if (!cfg.byzantine_ids.empty()) {
        placement.byzantine = cfg.byzantine_ids;
        placement.F = cfg.F;
    } else {
        placement = random_f_local_placement(g, cfg.F, cfg.byzantine_count.value_or(kMaxByzantine),
                                             derive_seed(cfg.seed, {tag(SeedPurpose::placement)}));
    }
    if (!validate_f_local(g, placement)) throw ConfigError("Byzantine placement is not F-local");
    const IdSet regular = placement.regular(g.node_count());
    if (regular.empty()) throw ConfigError("no regular agents left");

    std::optional<CostEnsemble> ensemble;
    if (!cfg.ensemble_file.empty()) {
        std::ifstream in(cfg.ensemble_file);
        if (!in) throw ConfigError("cannot open ensemble file '" + cfg.ensemble_file + "'");
        ensemble.emplace(read_ensemble(in));
        IdSet ids;
        for (const auto& e : ensemble->entries()) ids.push_back(e.id);
        if (ids != regular) throw ConfigError("ensemble file ids differ from the regular agents");
        if (ensemble->dim() != cfg.dim) throw ConfigError("ensemble file dimension differs from dim");
    } else {
        EnsembleSpec spec;
        spec.dim = cfg.dim;
        spec.n_regular = regular.size();
        spec.spread = cfg.spread;
        spec.mu_low = cfg.mu_low;
        spec.mu_high = cfg.mu_high;
        spec.L_low = cfg.L_low;
        spec.L_high = cfg.L_high;
        spec.seed = derive_seed(cfg.seed, {tag(SeedPurpose::ensemble)});
        ensemble.emplace(sample_ensemble(spec, regular));
    }
    MinimizerGeometry geometry = global_minimizer(*ensemble);
    return Problem{std::move(g), std::move(cert), std::move(placement), std::move(*ensemble), std::move(geometry)};
}

std::uint64_t run_init_seed(std::uint64_t master, std::size_t run) {
    return derive_seed(master, {tag(SeedPurpose::init_state), run});
}

std::uint64_t run_adversary_seed(std::uint64_t master, std::size_t run) {
    return derive_seed(master, {tag(SeedPurpose::adversary), run});
}

namespace {

double contraction_excess(const RunTrace& trace, const RunMetrics& m) {
    double worst = -std::numeric_limits<double>::infinity();
    const double sg = std::sqrt(m.gamma);
    for (std::size_t k = 0; k < trace.rounds(); ++k) {
        const double lhs = max_distance(trace.x_tilde[k], trace.regular, m.x_c);
        const double c = m.aux_error.empty() ? 0.0 : 2.0 * m.aux_error[k];
        const double rhs = sg * max_distance(trace.x[k], trace.regular, m.x_c) + c;
        worst = std::max(worst, lhs - rhs);
    }
    return trace.rounds() ? worst : 0.0;
}

}  // namespace

RunSummary execute_run(const ExperimentConfig& cfg, const Problem& problem, AlgorithmKind kind, double alpha,
                       std::size_t run, std::ostream* trace_dump) {
    RunOptions opt;
    opt.rounds = cfg.rounds;
    opt.alpha = alpha;
    opt.init_box = Box{Vector::Constant(static_cast<Eigen::Index>(cfg.dim), cfg.init_lo),
                       Vector::Constant(static_cast<Eigen::Index>(cfg.dim), cfg.init_hi)};
    opt.init_seed = run_init_seed(cfg.seed, run);
    opt.allow_any_step = cfg.allow_any_step;
    opt.certificate = problem.certificate ? &*problem.certificate : nullptr;
    opt.step.safe_point = cfg.safe_point;
    opt.trace_dump = trace_dump;

    ByzantineStrategy strategy = cfg.strategy;
    strategy.seed = run_adversary_seed(cfg.seed, run);

    const RunTrace trace = redgraf::run(kind, problem.graph, problem.ensemble, problem.placement, strategy, opt);

    RunSummary s;
    s.kind = kind;
    s.alpha = alpha;
    s.run = run;
    s.metrics = compute_run_metrics(trace, problem.ensemble, problem.geometry, problem.placement.F);
    for (const auto& m : problem.geometry.local_minimizers) s.r_c = std::max(s.r_c, (m - s.metrics.x_c).norm());
    s.contraction_excess = contraction_excess(trace, s.metrics);

    std::vector<double> center_dist, diam;
    for (const auto& r : s.metrics.rounds) {
        if (std::isfinite(r.gamma_eff)) s.max_gamma_eff = std::max(s.max_gamma_eff, r.gamma_eff);
        center_dist.push_back(r.max_dist_to_center);
        diam.push_back(r.diameter);
    }
    try {
        s.fitted_rate = fit_geometric_rate(center_dist);
    } catch (const FitError& e) {
        s.fit_error = e.what();
    }
    if (!diam.empty()) {
        const std::size_t tail = std::max<std::size_t>(1, diam.size() / 10);
        double sum = 0.0;
        for (std::size_t k = diam.size() - tail; k < diam.size(); ++k) sum += diam[k];
        s.plateau_diameter = sum / static_cast<double>(tail);
        double sq = 0.0;
        for (std::size_t k = diam.size() - tail; k < diam.size(); ++k)
            sq += (diam[k] - s.plateau_diameter) * (diam[k] - s.plateau_diameter);
        s.plateau_diameter_std = tail > 1 ? std::sqrt(sq / static_cast<double>(tail - 1)) : 0.0;
    }
    return s;
}

std::size_t worker_count() {
    if (const char* env = std::getenv("REDGRAF_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

std::string format_alpha(double alpha) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", alpha);
    return buf;
}

std::string run_file_stem(AlgorithmKind kind, double alpha, std::size_t run) {
    return group_file_stem(kind, alpha) + "_run" + std::to_string(run);
}

std::string group_file_stem(AlgorithmKind kind, double alpha) {
    return std::string(to_string(kind)) + "_alpha" + format_alpha(alpha);
}

std::vector<RunSummary> run_experiment(const ExperimentConfig& cfg, const Problem& problem, std::size_t threads,
                                       const std::string& trace_dir) {
    struct Cell {
        AlgorithmKind kind;
        double alpha;
        std::size_t run;
    };
    std::vector<Cell> cells;
    for (auto kind : cfg.algorithms)
        for (double alpha : cfg.alphas)
            for (std::size_t r = 0; r < cfg.runs; ++r) cells.push_back({kind, alpha, r});

    std::vector<std::optional<RunSummary>> results(cells.size());
    std::vector<std::exception_ptr> errors(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            try {
                const Cell& c = cells[i];
                if (trace_dir.empty()) {
                    results[i] = execute_run(cfg, problem, c.kind, c.alpha, c.run);
                } else {
                    std::ofstream dump(fs::path(trace_dir) / (run_file_stem(c.kind, c.alpha, c.run) + ".jsonl"));
                    results[i] = execute_run(cfg, problem, c.kind, c.alpha, c.run, &dump);
                }
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    threads = std::max<std::size_t>(1, std::min(threads, cells.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<RunSummary> out;
    out.reserve(cells.size());
    for (auto& r : results) out.push_back(std::move(*r));
    return out;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_run_csv(std::ostream& out, const RunSummary& run) {
    out << kRunCsvHeader << '\n';
    for (const auto& r : run.metrics.rounds) {
        out << run.run << ',' << r.k << ',' << format_double(r.dist_to_xstar) << ','
            << format_double(r.optimality_gap) << ',' << format_double(r.diameter) << ','
            << format_double(r.gamma_eff) << ',' << format_double(r.max_grad_norm) << ','
            << format_double(r.max_dist_to_xstar) << ',' << format_double(r.max_dist_to_center) << '\n';
    }
}

void write_aggregate_csv(std::ostream& out, const std::vector<const RunSummary*>& group) {
    out << kAggregateCsvHeader << '\n';
    if (group.empty()) return;
    using Getter = double (*)(const RoundRecord&);
    const std::pair<const char*, Getter> metrics[] = {
        {"dist_to_xstar", [](const RoundRecord& r) { return r.dist_to_xstar; }},
        {"optimality_gap", [](const RoundRecord& r) { return r.optimality_gap; }},
        {"diameter", [](const RoundRecord& r) { return r.diameter; }},
        {"gamma_eff", [](const RoundRecord& r) { return r.gamma_eff; }},
        {"max_grad_norm", [](const RoundRecord& r) { return r.max_grad_norm; }},
        {"max_dist_to_xstar", [](const RoundRecord& r) { return r.max_dist_to_xstar; }},
        {"max_dist_to_center", [](const RoundRecord& r) { return r.max_dist_to_center; }},
    };
    std::vector<MeanStd> stats;
    for (const auto& [name, get] : metrics) {
        std::vector<std::vector<double>> series;
        for (const RunSummary* s : group) {
            std::vector<double> v;
            for (const auto& r : s->metrics.rounds) v.push_back(get(r));
            series.push_back(std::move(v));
        }
        stats.push_back(aggregate(series));
    }
    const std::size_t K = group.front()->metrics.rounds.size();
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t m = 0; m < stats.size(); ++m)
            out << k << ',' << metrics[m].first << ',' << format_double(stats[m].mean[k]) << ','
                << format_double(stats[m].std[k]) << '\n';
    const Baselines& b = group.front()->metrics.baselines;
    out << 0 << ",min_local_dist," << format_double(b.min_local_dist) << ",0\n";
    out << 0 << ",min_local_gap," << format_double(b.min_local_gap) << ",0\n";
}

TheoryBounds group_bounds(const ExperimentConfig& cfg, const Problem& problem, AlgorithmKind kind, double alpha,
                          const std::optional<Vector>& y_inf) {
    BoundsInput in;
    in.kind = kind;
    in.d = cfg.dim;
    in.F = cfg.F;
    in.alpha = alpha;
    in.mu = problem.ensemble.mu_tilde();
    in.L = problem.ensemble.L_tilde();
    in.y_inf = y_inf;
    if (uses_auxiliary(kind) && !in.y_inf) in.y_inf = problem.geometry.c_star;
    return compute_bounds(in, problem.geometry);
}

namespace {

json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json optional_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json bounds_json(const TheoryBounds& b) {
    json j{{"beta", b.beta},
           {"gamma", b.gamma},
           {"x_c", vec_json(b.x_c)},
           {"r_c", b.r_c},
           {"R_star", b.R_star},
           {"rate", b.rate},
           {"G", b.G},
           {"G_contraction_only", b.G_contraction_only},
           {"reduction", std::string(to_string(b.reduction))},
           {"required_robustness", b.required_robustness}};
    j["D_star_normalized"] = b.D_star_in_domain ? json(b.D_star_normalized) : json(nullptr);
    j["D_star"] = b.D_star ? json(*b.D_star) : json(nullptr);
    return j;
}

}  // namespace

std::string summary_json(const ExperimentConfig& cfg, const Problem& problem, const std::vector<RunSummary>& runs) {
    json doc;
    doc["schema"] = "redgraf-summary";
    doc["version"] = 1;
    doc["config"] = json::parse(config_to_json(cfg));
    const auto& geo = problem.geometry;
    doc["problem"] = {{"nodes", problem.graph.node_count()},
                      {"edges", problem.graph.edge_count()},
                      {"certified_r", problem.certificate ? json(problem.certificate->claimed_r) : json(nullptr)},
                      {"byzantine", problem.placement.byzantine},
                      {"x_star", vec_json(geo.x_star)},
                      {"f_star", geo.f_star},
                      {"c_star", vec_json(geo.c_star)},
                      {"r_star", geo.r_star},
                      {"mu_tilde", problem.ensemble.mu_tilde()},
                      {"L_tilde", problem.ensemble.L_tilde()},
                      {"kappa", problem.ensemble.kappa()}};
    json groups = json::array();
    for (auto kind : cfg.algorithms) {
        for (double alpha : cfg.alphas) {
            std::vector<const RunSummary*> members;
            for (const auto& r : runs)
                if (r.kind == kind && r.alpha == alpha) members.push_back(&r);
            if (members.empty()) continue;
            const TheoryBounds bounds = group_bounds(cfg, problem, kind, alpha, members.front()->metrics.y_inf);
            json g;
            g["algorithm"] = std::string(to_string(kind));
            g["alpha"] = alpha;
            g["theory"] = bounds_json(bounds);
            json rs = json::array();
            bool contraction_ok = true;
            bool gap_ok = true;
            for (const RunSummary* s : members) {
                json r;
                r["run"] = s->run;
                r["fitted_rate"] = s->fitted_rate ? json(*s->fitted_rate) : json(nullptr);
                if (!s->fit_error.empty()) r["fit_error"] = s->fit_error;
                r["plateau_diameter"] = s->plateau_diameter;
                r["plateau_diameter_std"] = s->plateau_diameter_std;
                r["max_gamma_eff"] = s->max_gamma_eff;
                r["contraction_excess"] = optional_number(s->contraction_excess);
                r["r_c"] = s->r_c;
                if (s->metrics.y_inf) {
                    r["y_inf"] = vec_json(*s->metrics.y_inf);
                    try {
                        const ExponentialDecay fit = fit_exponential_decay(s->metrics.aux_error);
                        r["aux_decay"] = {{"c1", fit.c1}, {"c2", fit.c2}, {"xi", fit.xi}};
                    } catch (const FitError& e) {
                        r["aux_decay"] = {{"error", e.what()}};
                    }
                }
                if (!s->metrics.rounds.empty()) {
                    const auto& last = s->metrics.rounds.back();
                    r["final"] = {{"dist_to_xstar", last.dist_to_xstar},
                                  {"optimality_gap", last.optimality_gap},
                                  {"diameter", last.diameter}};
                }
                contraction_ok = contraction_ok && s->contraction_excess <= 1e-9;
                for (const auto& rec : s->metrics.rounds) gap_ok = gap_ok && rec.optimality_gap >= -1e-9;
                rs.push_back(std::move(r));
            }
            g["runs"] = std::move(rs);
            g["invariants"] = {{"contraction", contraction_ok ? "pass" : "fail"},
                               {"optimality_gap_nonnegative", gap_ok ? "pass" : "fail"}};
            groups.push_back(std::move(g));
        }
    }
    doc["groups"] = std::move(groups);
    return doc.dump(2) + "\n";
}

void write_outputs(const ExperimentConfig& cfg, const Problem& problem, const std::vector<RunSummary>& runs,
                   const std::string& dir) {
    const fs::path root(dir);
    fs::create_directories(root / "runs");
    fs::create_directories(root / "aggregate");
    for (const auto& r : runs) {
        std::ofstream out(root / "runs" / (run_file_stem(r.kind, r.alpha, r.run) + ".csv"));
        write_run_csv(out, r);
    }
    for (auto kind : cfg.algorithms) {
        for (double alpha : cfg.alphas) {
            std::vector<const RunSummary*> group;
            for (const auto& r : runs)
                if (r.kind == kind && r.alpha == alpha) group.push_back(&r);
            std::ofstream out(root / "aggregate" / (group_file_stem(kind, alpha) + ".csv"));
            write_aggregate_csv(out, group);
        }
    }
    std::ofstream out(root / "summary.json");
    out << summary_json(cfg, problem, runs);
}

}  // namespace redgraf
