#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "redgraf/adversary.hpp"
#include "redgraf/algorithm.hpp"
#include "redgraf/filters.hpp"

namespace redgraf {

/// Experiment description loaded from JSON. Every key is optional; missing
/// keys keep the defaults below (printed by `redgraf run --print-config`).
struct ExperimentConfig {
    std::size_t dim = 2;
    std::size_t n_agents = 40;
    std::size_t F = 2;
    std::vector<AlgorithmKind> algorithms{AlgorithmKind::sdmmfd, AlgorithmKind::sdfd, AlgorithmKind::cwtm,
                                          AlgorithmKind::rvo};
    std::vector<double> alphas{0.02, 0.04};
    std::size_t rounds = 500;
    std::size_t runs = 4;
    std::uint64_t seed = 2024;

    /// "generate" builds a certified graph with robustness graph_r; "file"
    /// reads graph_path (edge list) and, when present, graph_path + ".cert.json".
    std::string graph_source = "generate";
    std::size_t graph_r = 11;
    std::string graph_path;

    /// Explicit Byzantine ids; when empty, byzantine_count agents (nullopt
    /// meaning as many as possible) are placed at random, keeping F-locality.
    IdSet byzantine_ids;
    std::optional<std::size_t> byzantine_count;
    ByzantineStrategy strategy;

    double init_lo = -10.0;
    double init_hi = 10.0;

    /// Either an ensemble file or the sampling parameters.
    std::string ensemble_file;
    double spread = 5.0;
    double mu_low = 1.0;
    double mu_high = 2.0;
    double L_low = 5.0;
    double L_high = 10.0;

    bool allow_any_step = false;
    SafePointLimits safe_point{40, 3, 1e-10};
    /// Round-trace dumps (one .jsonl per run) next to the run CSVs.
    bool trace_dump = false;
    std::string output_dir = "redgraf_out";
};

/// Throws ConfigError naming the offending key; ParseError for invalid JSON.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
/// Canonical JSON form, including defaults.
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace redgraf
