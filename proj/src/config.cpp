#include "redgraf/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "redgraf/errors.hpp"

namespace redgraf {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items())
        if (!ok.count(key)) throw ConfigError("unknown key '" + where + "." + key + "'");
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("key '" + where + "." + key + "' has the wrong type");
    }
}

std::pair<double, double> read_range(const json& obj, const char* key, std::pair<double, double> def,
                                     const std::string& where) {
    if (!obj.contains(key)) return def;
    std::vector<double> v;
    read(obj, key, v, where);
    if (v.size() != 2 || v[0] > v[1])
        throw ConfigError("key '" + where + "." + key + "' must be [low, high] with low <= high");
    return {v[0], v[1]};
}

void validate(const ExperimentConfig& c) {
    if (c.dim == 0) throw ConfigError("dim must be positive");
    if (c.n_agents == 0) throw ConfigError("n_agents must be positive");
    if (c.algorithms.empty()) throw ConfigError("algorithms must not be empty");
    if (c.alphas.empty()) throw ConfigError("alphas must not be empty");
    for (double a : c.alphas)
        if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("alphas must be finite and nonnegative");
    if (c.runs == 0) throw ConfigError("runs must be positive");
    if (c.graph_source != "generate" && c.graph_source != "file")
        throw ConfigError("graph.source must be 'generate' or 'file'");
    if (c.graph_source == "file" && c.graph_path.empty()) throw ConfigError("graph.path is required for file graphs");
    if (!(c.init_lo <= c.init_hi)) throw ConfigError("init_box.lo must not exceed init_box.hi");
    if (!(c.spread >= 0.0)) throw ConfigError("ensemble.spread must be nonnegative");
    if (!(c.mu_low > 0.0)) throw ConfigError("ensemble.mu_range must be positive");
    if (!(c.L_low > 0.0)) throw ConfigError("ensemble.L_range must be positive");
    for (AgentId b : c.byzantine_ids)
        if (b >= c.n_agents) throw ConfigError("adversary.ids contains an id out of range");
    c.strategy.validate(c.dim);
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what(), 0);
    }
    ExperimentConfig c;
    check_keys(doc, "config",
               {"dim", "n_agents", "F", "algorithms", "alphas", "rounds", "runs", "seed", "graph", "adversary",
                "init_box", "ensemble", "allow_any_step", "safe_point", "trace_dump", "output_dir"});
    read(doc, "dim", c.dim, "config");
    read(doc, "n_agents", c.n_agents, "config");
    read(doc, "F", c.F, "config");
    if (doc.contains("algorithms")) {
        std::vector<std::string> names;
        read(doc, "algorithms", names, "config");
        c.algorithms.clear();
        for (const auto& n : names) c.algorithms.push_back(parse_algorithm(n));
    }
    read(doc, "alphas", c.alphas, "config");
    read(doc, "rounds", c.rounds, "config");
    read(doc, "runs", c.runs, "config");
    read(doc, "seed", c.seed, "config");
    read(doc, "allow_any_step", c.allow_any_step, "config");
    read(doc, "trace_dump", c.trace_dump, "config");
    read(doc, "output_dir", c.output_dir, "config");

    if (doc.contains("graph")) {
        const json& g = doc["graph"];
        check_keys(g, "graph", {"source", "r", "path"});
        read(g, "source", c.graph_source, "graph");
        read(g, "r", c.graph_r, "graph");
        read(g, "path", c.graph_path, "graph");
    }
    if (doc.contains("adversary")) {
        const json& a = doc["adversary"];
        check_keys(a, "adversary", {"ids", "count", "strategy"});
        read(a, "ids", c.byzantine_ids, "adversary");
        std::sort(c.byzantine_ids.begin(), c.byzantine_ids.end());
        if (a.contains("count")) {
            if (a["count"].is_string()) {
                if (a["count"] != "max") throw ConfigError("adversary.count must be a number or \"max\"");
                c.byzantine_count.reset();
            } else {
                std::size_t n = 0;
                read(a, "count", n, "adversary");
                c.byzantine_count = n;
            }
        }
        if (a.contains("strategy")) {
            const json& s = a["strategy"];
            check_keys(s, "adversary.strategy", {"kind", "eta", "target", "offset"});
            std::string kind = std::string(to_string(c.strategy.kind));
            read(s, "kind", kind, "adversary.strategy");
            c.strategy.kind = parse_strategy(kind);
            read(s, "eta", c.strategy.eta, "adversary.strategy");
            read(s, "offset", c.strategy.offset, "adversary.strategy");
            if (s.contains("target")) {
                std::vector<double> t;
                read(s, "target", t, "adversary.strategy");
                c.strategy.target = Eigen::Map<const Vector>(t.data(), static_cast<Eigen::Index>(t.size()));
            }
        }
    }
    if (doc.contains("init_box")) {
        const json& b = doc["init_box"];
        check_keys(b, "init_box", {"lo", "hi"});
        read(b, "lo", c.init_lo, "init_box");
        read(b, "hi", c.init_hi, "init_box");
    }
    if (doc.contains("ensemble")) {
        const json& e = doc["ensemble"];
        check_keys(e, "ensemble", {"file", "spread", "mu_range", "L_range"});
        read(e, "file", c.ensemble_file, "ensemble");
        read(e, "spread", c.spread, "ensemble");
        std::tie(c.mu_low, c.mu_high) = read_range(e, "mu_range", {c.mu_low, c.mu_high}, "ensemble");
        std::tie(c.L_low, c.L_high) = read_range(e, "L_range", {c.L_low, c.L_high}, "ensemble");
    }
    if (doc.contains("safe_point")) {
        const json& s = doc["safe_point"];
        check_keys(s, "safe_point", {"max_candidates", "max_faults", "tolerance"});
        read(s, "max_candidates", c.safe_point.max_candidates, "safe_point");
        read(s, "max_faults", c.safe_point.max_faults, "safe_point");
        read(s, "tolerance", c.safe_point.tolerance, "safe_point");
    }
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    return parse_config(in);
}

std::string config_to_json(const ExperimentConfig& c) {
    json doc;
    doc["dim"] = c.dim;
    doc["n_agents"] = c.n_agents;
    doc["F"] = c.F;
    std::vector<std::string> algs;
    for (auto a : c.algorithms) algs.emplace_back(to_string(a));
    doc["algorithms"] = algs;
    doc["alphas"] = c.alphas;
    doc["rounds"] = c.rounds;
    doc["runs"] = c.runs;
    doc["seed"] = c.seed;
    doc["graph"] = {{"source", c.graph_source}, {"r", c.graph_r}, {"path", c.graph_path}};
    json strategy{{"kind", std::string(to_string(c.strategy.kind))},
                  {"eta", c.strategy.eta},
                  {"offset", c.strategy.offset}};
    if (c.strategy.target)
        strategy["target"] = std::vector<double>(c.strategy.target->data(),
                                                 c.strategy.target->data() + c.strategy.target->size());
    json adversary{{"ids", c.byzantine_ids}, {"strategy", strategy}};
    if (c.byzantine_count)
        adversary["count"] = *c.byzantine_count;
    else
        adversary["count"] = "max";
    doc["adversary"] = adversary;
    doc["init_box"] = {{"lo", c.init_lo}, {"hi", c.init_hi}};
    doc["ensemble"] = {{"file", c.ensemble_file},
                       {"spread", c.spread},
                       {"mu_range", {c.mu_low, c.mu_high}},
                       {"L_range", {c.L_low, c.L_high}}};
    doc["allow_any_step"] = c.allow_any_step;
    doc["safe_point"] = {{"max_candidates", c.safe_point.max_candidates},
                         {"max_faults", c.safe_point.max_faults},
                         {"tolerance", c.safe_point.tolerance}};
    doc["trace_dump"] = c.trace_dump;
    doc["output_dir"] = c.output_dir;
    return doc.dump(2);
}

}  // namespace redgraf
