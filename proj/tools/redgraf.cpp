// redgraf: command-line front end.
//
// Exit codes: 0 success, 1 usage or unexpected failure, 2 check failed,
// 3 size limit exceeded, 4 malformed input file, 5 invalid configuration or
// out-of-domain parameters, 6 divergence.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "redgraf/config.hpp"
#include "redgraf/errors.hpp"
#include "redgraf/experiment.hpp"
#include "redgraf/graph.hpp"
#include "redgraf/svg_plot.hpp"
#include "redgraf/theory.hpp"

namespace fs = std::filesystem;
using namespace redgraf;

namespace {

enum Exit { ok = 0, usage = 1, check_failed = 2, size_limit = 3, malformed = 4, bad_config = 5, diverged = 6 };

int cmd_graph_gen(std::size_t n, std::size_t r, std::uint64_t seed, const std::string& out_path) {
    const RobustGraph rg = generate_robust(n, r, seed);
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot write '" + out_path + "'");
    write_edge_list(out, rg.graph);
    std::ofstream cert(out_path + ".cert.json");
    write_certificate(cert, rg.certificate);
    std::cout << "wrote " << out_path << " (" << rg.graph.node_count() << " nodes, " << rg.graph.edge_count()
              << " edges) and " << out_path << ".cert.json\n";
    return ok;
}

int cmd_graph_check(const std::string& in_path, std::size_t r, std::size_t limit) {
    std::ifstream in(in_path);
    if (!in) throw ConfigError("cannot open '" + in_path + "'");
    const Digraph g = read_edge_list(in);
    const bool pass = is_r_robust(g, r, limit);
    std::cout << (pass ? "pass" : "fail") << ": graph is " << (pass ? "" : "not ") << r << "-robust\n";
    return pass ? ok : check_failed;
}

int cmd_run(const std::string& path, const std::string& out_override, std::size_t threads) {
    ExperimentConfig cfg = load_config(path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    const Problem problem = build_problem(cfg);
    std::string trace_dir;
    if (cfg.trace_dump) {
        trace_dir = (fs::path(cfg.output_dir) / "traces").string();
        fs::create_directories(trace_dir);
    }
    const auto runs = run_experiment(cfg, problem, threads ? threads : worker_count(), trace_dir);
    write_outputs(cfg, problem, runs, cfg.output_dir);
    std::cout << "wrote " << runs.size() << " runs to " << cfg.output_dir << '\n';
    return ok;
}

int cmd_plot(const std::vector<std::string>& inputs, const std::string& out_dir) {
    std::vector<fs::path> files;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            for (const auto& entry : fs::directory_iterator(in))
                if (entry.path().extension() == ".csv") files.push_back(entry.path());
        } else {
            files.emplace_back(in);
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ParseError("no aggregate CSV files found", 0);
    std::vector<AggregateSeries> series;
    for (const auto& f : files) {
        std::ifstream in(f);
        if (!in) throw ParseError("cannot open '" + f.string() + "'", 0);
        const auto [kind, alpha] = parse_group_stem(f.stem().string());
        try {
            series.push_back(read_aggregate_csv(in, kind, alpha));
        } catch (const ParseError& e) {
            throw ParseError(f.string() + ": " + e.what(), e.line());
        }
    }
    // Legend order follows the fixed algorithm order, then step size.
    std::stable_sort(series.begin(), series.end(), [](const AggregateSeries& a, const AggregateSeries& b) {
        return std::pair(static_cast<int>(a.kind), a.alpha) < std::pair(static_cast<int>(b.kind), b.alpha);
    });
    fs::create_directories(out_dir);
    const PlotSpec specs[] = {
        {"dist_to_xstar", "Distance to the minimizer", "||x_bar - x*||", true, "min_local_dist"},
        {"optimality_gap", "Optimality gap", "f(x_bar) - f*", true, "min_local_gap"},
        {"diameter", "Regular states' diameter", "max ||x_i - x_j||", false, std::nullopt},
    };
    const char* names[] = {"distance.svg", "gap.svg", "diameter.svg"};
    for (std::size_t i = 0; i < 3; ++i) {
        std::ostringstream svg;
        write_plot_svg(svg, series, specs[i]);
        std::ofstream out(fs::path(out_dir) / names[i]);
        out << svg.str();
    }
    std::cout << "wrote distance.svg, gap.svg, diameter.svg to " << out_dir << '\n';
    return ok;
}

void print_bounds_table(const std::string& config_path) {
    const ExperimentConfig cfg = load_config(config_path);
    const Problem problem = build_problem(cfg);
    std::printf("mu_tilde %.6g  L_tilde %.6g  kappa %.6g  r* %.6g  byzantine %zu\n", problem.ensemble.mu_tilde(),
                problem.ensemble.L_tilde(), problem.ensemble.kappa(), problem.geometry.r_star,
                problem.placement.byzantine.size());
    std::printf("%-7s %-7s %-6s %-8s %-10s %-10s %-10s %-12s %-12s %-10s\n", "alg", "alpha", "gamma", "robust",
                "reduction", "beta", "rate", "r_c(bound)", "R*", "D*_norm");
    for (auto kind : cfg.algorithms) {
        for (double alpha : cfg.alphas) {
            const TheoryBounds b = group_bounds(cfg, problem, kind, alpha, std::nullopt);
            const std::string dn = b.D_star_in_domain ? std::to_string(b.D_star_normalized) : "-";
            std::printf("%-7s %-7g %-6g %-8zu %-10s %-10.6g %-10.6g %-12.6g %-12.6g %-10s\n",
                        std::string(to_string(kind)).c_str(), alpha, b.gamma, b.required_robustness,
                        std::string(to_string(b.reduction)).c_str(), b.beta, b.rate, b.r_c, b.R_star, dn.c_str());
        }
    }
    std::printf("SDMMFD/SDFD centre is the empirical y consensus; R* above does not depend on it.\n");
}

int cmd_theory(const std::vector<double>& gammas, const std::vector<double>& kappas,
               const std::vector<double>& alpha_scaled, std::size_t points, const std::string& out_path,
               const std::string& config_path) {
    if (!config_path.empty()) {
        print_bounds_table(config_path);
        return ok;
    }
    if (points == 0 && alpha_scaled.empty()) throw DomainError("need --points > 0 or --alpha-scaled");
    std::ostringstream csv;
    csv << "kappa,gamma,alpha_scaled,rate,radius,diameter\n";
    for (double kappa : kappas) {
        if (!(kappa >= 1.0)) throw DomainError("kappa must be at least 1");
        for (double gamma : gammas) {
            std::vector<double> grid = alpha_scaled;
            if (grid.empty()) {
                const double lo = gamma > 1.0 ? 1.0 - 1.0 / gamma : 0.0;
                for (std::size_t i = 1; i <= points; ++i)
                    grid.push_back(lo + (1.0 - lo) * static_cast<double>(i) / static_cast<double>(points));
            }
            for (double a : grid) {
                const double rate = convergence_rate(gamma, a);
                const double radius = normalized_radius(gamma, a);
                csv << format_double(kappa) << ',' << format_double(gamma) << ',' << format_double(a) << ','
                    << format_double(rate) << ',' << format_double(radius) << ',';
                if (in_diameter_domain(kappa, gamma, a)) csv << format_double(normalized_consensus_diameter(kappa, gamma, a));
                csv << '\n';
            }
        }
    }
    if (out_path.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream out(out_path);
        out << csv.str();
    }
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Resilient distributed gradient descent simulator"};
    app.require_subcommand(1);

    auto* graph = app.add_subcommand("graph", "Generate or check r-robust graphs");
    graph->require_subcommand(1);
    auto* gen = graph->add_subcommand("gen", "Generate a certified r-robust graph");
    std::size_t gen_n = 0, gen_r = 1;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    gen->add_option("--n", gen_n, "Number of nodes")->required();
    gen->add_option("--r", gen_r, "Robustness")->required();
    gen->add_option("--seed", gen_seed, "Random seed");
    gen->add_option("--out", gen_out, "Edge list path (certificate goes to <out>.cert.json)")->required();

    auto* check = graph->add_subcommand("check", "Exhaustively check r-robustness");
    std::string check_in;
    std::size_t check_r = 1, check_limit = kExhaustiveRobustnessLimit;
    check->add_option("--in", check_in, "Edge list path")->required();
    check->add_option("--r", check_r, "Robustness to test")->required();
    check->add_option("--limit", check_limit, "Largest node count for the exhaustive check");

    auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
    std::string run_config, run_out;
    std::size_t run_threads = 0;
    bool print_config = false;
    run->add_option("config", run_config, "Config path");
    run->add_option("--out", run_out, "Override the output directory");
    run->add_option("--threads", run_threads, "Worker count (default REDGRAF_THREADS or all cores)");
    run->add_flag("--print-config", print_config, "Print the default config and exit");

    auto* plot = app.add_subcommand("plot", "Render aggregate CSVs as SVG");
    std::vector<std::string> plot_in;
    std::string plot_out = ".";
    plot->add_option("--in", plot_in, "Aggregate CSV files or directories")->required();
    plot->add_option("--out", plot_out, "Output directory");

    auto* theory = app.add_subcommand("theory", "Sweep the closed-form bounds");
    std::vector<double> gammas{0.0, 0.5, 1.0, 1.5};
    std::vector<double> kappas{1.5, 2.0, 3.0};
    std::vector<double> alpha_scaled;
    std::size_t points = 100;
    std::string theory_out, theory_config;
    theory->add_option("--gamma", gammas, "Contraction factors")->delimiter(',');
    theory->add_option("--kappa", kappas, "Condition numbers")->delimiter(',');
    theory->add_option("--alpha-scaled", alpha_scaled, "Explicit alpha*mu values")->delimiter(',');
    theory->add_option("--points", points, "Grid points per gamma when --alpha-scaled is absent");
    theory->add_option("--out", theory_out, "CSV path (stdout when absent)");
    theory->add_option("--config", theory_config, "Print a bounds table for this config instead");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ok : usage;
    }

    try {
        if (*gen) return cmd_graph_gen(gen_n, gen_r, gen_seed, gen_out);
        if (*check) return cmd_graph_check(check_in, check_r, check_limit);
        if (*run) {
            if (print_config) {
                std::cout << config_to_json(ExperimentConfig{}) << '\n';
                return ok;
            }
            if (run_config.empty()) {
                std::cerr << "run: a config path is required\n";
                return usage;
            }
            return cmd_run(run_config, run_out, run_threads);
        }
        if (*plot) return cmd_plot(plot_in, plot_out);
        if (*theory) return cmd_theory(gammas, kappas, alpha_scaled, points, theory_out, theory_config);
    } catch (const ParseError& e) {
        std::cerr << "malformed input";
        if (e.line()) std::cerr << " (line " << e.line() << ")";
        std::cerr << ": " << e.what() << '\n';
        return malformed;
    } catch (const SizeLimitError& e) {
        std::cerr << "size limit: " << e.what() << '\n';
        return size_limit;
    } catch (const DivergenceError& e) {
        std::cerr << "diverged at round " << e.round() << ": " << e.what() << '\n';
        return diverged;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return bad_config;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return bad_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return usage;
    }
    return usage;
}
