#include "redgraf/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "redgraf/errors.hpp"

namespace redgraf {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& s, std::size_t line) {
    if (s.empty()) throw ParseError("empty numeric field", line);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) throw ParseError("bad number '" + s + "'", line);
    return v;
}

}  // namespace

AggregateSeries read_aggregate_csv(std::istream& in, AlgorithmKind kind, double alpha) {
    AggregateSeries out;
    out.kind = kind;
    out.alpha = alpha;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError("missing header", 1);
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "k,metric,mean,std") throw ParseError("header must be 'k,metric,mean,std'", lineno);
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 4) throw ParseError("expected 4 columns", lineno);
        const double kd = parse_number(cells[0], lineno);
        if (kd < 0 || kd != std::floor(kd)) throw ParseError("k must be a nonnegative integer", lineno);
        const auto k = static_cast<std::size_t>(kd);
        const std::string& metric = cells[1];
        if (metric.empty()) throw ParseError("empty metric name", lineno);
        const double mean = parse_number(cells[2], lineno);
        const double sd = parse_number(cells[3], lineno);
        if (metric.rfind("min_local_", 0) == 0) {
            out.baselines[metric] = mean;
            continue;
        }
        MetricSeries& s = out.metrics[metric];
        if (k != s.mean.size()) throw ParseError("rounds of '" + metric + "' out of order", lineno);
        s.mean.push_back(mean);
        s.std.push_back(sd);
    }
    return out;
}

std::pair<AlgorithmKind, double> parse_group_stem(const std::string& stem) {
    const auto pos = stem.find("_alpha");
    if (pos == std::string::npos) throw ParseError("file name '" + stem + "' lacks '_alpha'", 0);
    AlgorithmKind kind;
    try {
        kind = parse_algorithm(stem.substr(0, pos));
    } catch (const ConfigError& e) {
        throw ParseError(e.what(), 0);
    }
    const std::string a = stem.substr(pos + 6);
    return {kind, parse_number(a, 0)};
}

const char* algorithm_color(AlgorithmKind kind) {
    switch (kind) {
        case AlgorithmKind::sdmmfd: return "#1f77b4";
        case AlgorithmKind::sdfd: return "#ff7f0e";
        case AlgorithmKind::cwtm: return "#2ca02c";
        case AlgorithmKind::rvo: return "#d62728";
    }
    return "#000000";
}

namespace {

constexpr double kWidth = 760, kHeight = 480;
constexpr double kLeft = 80, kRight = 200, kTop = 40, kBottom = 60;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

const char* dash_for(std::size_t idx) {
    static const char* dashes[] = {"", "8,4", "3,3", "10,3,2,3"};
    return dashes[idx % 4];
}

}  // namespace

void write_plot_svg(std::ostream& out, const std::vector<AggregateSeries>& series, const PlotSpec& spec) {
    if (series.empty()) throw ParseError("no series to plot", 0);
    std::size_t K = 0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double min_positive = std::numeric_limits<double>::infinity();
    std::set<double> alphas;
    for (const auto& s : series) {
        const auto it = s.metrics.find(spec.metric);
        if (it == s.metrics.end() || it->second.mean.empty())
            throw ParseError("metric '" + spec.metric + "' missing or empty", 0);
        const MetricSeries& m = it->second;
        K = std::max(K, m.mean.size());
        alphas.insert(s.alpha);
        for (std::size_t k = 0; k < m.mean.size(); ++k) {
            lo = std::min(lo, m.mean[k] - m.std[k]);
            hi = std::max(hi, m.mean[k] + m.std[k]);
            if (m.mean[k] > 0) min_positive = std::min(min_positive, m.mean[k]);
        }
        if (spec.baseline) {
            if (auto b = s.baselines.find(*spec.baseline); b != s.baselines.end()) {
                lo = std::min(lo, b->second);
                hi = std::max(hi, b->second);
                if (b->second > 0) min_positive = std::min(min_positive, b->second);
            }
        }
    }
    double ylo, yhi;
    if (spec.log_scale) {
        if (!std::isfinite(min_positive)) min_positive = 1e-16;
        ylo = std::floor(std::log10(min_positive * 0.5));
        yhi = std::ceil(std::log10(std::max(hi, min_positive * 10)));
        if (yhi <= ylo) yhi = ylo + 1;
    } else {
        ylo = std::min(0.0, lo);
        yhi = hi > ylo ? hi * 1.05 : ylo + 1.0;
    }
    const double floor_value = spec.log_scale ? std::pow(10.0, ylo) : ylo;
    const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
    const double xmax = std::max<double>(1.0, static_cast<double>(K - 1));
    auto X = [&](double k) { return kLeft + plot_w * k / xmax; };
    auto Y = [&](double v) {
        double t;
        if (spec.log_scale) {
            t = (std::log10(std::max(v, floor_value)) - ylo) / (yhi - ylo);
        } else {
            t = (v - ylo) / (yhi - ylo);
        }
        t = std::clamp(t, 0.0, 1.0);
        return kTop + plot_h * (1.0 - t);
    };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << fmt(kLeft + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
        << spec.title << "</text>\n";
    // Axes and ticks.
    out << "<g stroke=\"black\" fill=\"none\"><rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\""
        << fmt(plot_w) << "\" height=\"" << fmt(plot_h) << "\"/></g>\n";
    out << "<g class=\"yticks\">\n";
    if (spec.log_scale) {
        for (double e = ylo; e <= yhi + 1e-9; e += 1.0) {
            const double y = Y(std::pow(10.0, e));
            out << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(kLeft) << "\" y2=\""
                << fmt(y) << "\" stroke=\"black\"/><text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(y + 4)
                << "\" text-anchor=\"end\">1e" << static_cast<int>(e) << "</text>\n";
        }
    } else {
        for (int i = 0; i <= 5; ++i) {
            const double v = ylo + (yhi - ylo) * i / 5.0;
            const double y = Y(v);
            out << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(kLeft) << "\" y2=\""
                << fmt(y) << "\" stroke=\"black\"/><text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(y + 4)
                << "\" text-anchor=\"end\">" << tick_label(v) << "</text>\n";
        }
    }
    out << "</g>\n<g class=\"xticks\">\n";
    for (int i = 0; i <= 5; ++i) {
        const double k = std::round(xmax * i / 5.0);
        const double x = X(k);
        out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(kTop + plot_h) << "\" x2=\"" << fmt(x) << "\" y2=\""
            << fmt(kTop + plot_h + 5) << "\" stroke=\"black\"/><text x=\"" << fmt(x) << "\" y=\""
            << fmt(kTop + plot_h + 20) << "\" text-anchor=\"middle\">" << static_cast<long>(k) << "</text>\n";
    }
    out << "</g>\n";
    out << "<text x=\"" << fmt(kLeft + plot_w / 2) << "\" y=\"" << fmt(kHeight - 15)
        << "\" text-anchor=\"middle\">time-step k</text>\n";
    out << "<text transform=\"translate(18," << fmt(kTop + plot_h / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
        << spec.y_label << "</text>\n";

    const std::vector<double> alpha_list(alphas.begin(), alphas.end());
    auto alpha_index = [&](double a) {
        return static_cast<std::size_t>(std::find(alpha_list.begin(), alpha_list.end(), a) - alpha_list.begin());
    };

    // Bands first so that every mean line stays visible.
    out << "<g class=\"bands\">\n";
    for (const auto& s : series) {
        const MetricSeries& m = s.metrics.at(spec.metric);
        out << "<path class=\"band\" fill=\"" << algorithm_color(s.kind) << "\" fill-opacity=\"0.18\" stroke=\"none\" d=\"";
        for (std::size_t k = 0; k < m.mean.size(); ++k)
            out << (k ? 'L' : 'M') << fmt(X(static_cast<double>(k))) << ',' << fmt(Y(m.mean[k] + m.std[k]));
        for (std::size_t k = m.mean.size(); k-- > 0;)
            out << 'L' << fmt(X(static_cast<double>(k))) << ',' << fmt(Y(m.mean[k] - m.std[k]));
        out << "Z\"/>\n";
    }
    out << "</g>\n<g class=\"means\">\n";
    for (const auto& s : series) {
        const MetricSeries& m = s.metrics.at(spec.metric);
        out << "<path class=\"mean\" fill=\"none\" stroke=\"" << algorithm_color(s.kind) << "\" stroke-width=\"1.6\"";
        if (const char* dash = dash_for(alpha_index(s.alpha)); *dash) out << " stroke-dasharray=\"" << dash << '"';
        out << " d=\"";
        for (std::size_t k = 0; k < m.mean.size(); ++k)
            out << (k ? 'L' : 'M') << fmt(X(static_cast<double>(k))) << ',' << fmt(Y(m.mean[k]));
        out << "\"/>\n";
    }
    out << "</g>\n";
    if (spec.baseline) {
        const auto& b = series.front().baselines;
        if (auto it = b.find(*spec.baseline); it != b.end()) {
            const double y = Y(it->second);
            out << "<path class=\"baseline\" fill=\"none\" stroke=\"black\" stroke-dasharray=\"1,3\" d=\"M"
                << fmt(kLeft) << ',' << fmt(y) << 'L' << fmt(kLeft + plot_w) << ',' << fmt(y) << "\"/>\n";
        }
    }
    // Legend.
    out << "<g class=\"legend\">\n";
    double ly = kTop + 10;
    for (const auto& s : series) {
        const double lx = kLeft + plot_w + 15;
        out << "<path fill=\"none\" stroke=\"" << algorithm_color(s.kind) << "\" stroke-width=\"1.6\"";
        if (const char* dash = dash_for(alpha_index(s.alpha)); *dash) out << " stroke-dasharray=\"" << dash << '"';
        out << " d=\"M" << fmt(lx) << ',' << fmt(ly) << 'L' << fmt(lx + 30) << ',' << fmt(ly) << "\"/><text x=\""
            << fmt(lx + 36) << "\" y=\"" << fmt(ly + 4) << "\">" << to_string(s.kind) << " &#945;=" << s.alpha
            << "</text>\n";
        ly += 18;
    }
    if (spec.baseline && series.front().baselines.count(*spec.baseline)) {
        const double lx = kLeft + plot_w + 15;
        out << "<path fill=\"none\" stroke=\"black\" stroke-dasharray=\"1,3\" d=\"M" << fmt(lx) << ',' << fmt(ly)
            << 'L' << fmt(lx + 30) << ',' << fmt(ly) << "\"/><text x=\"" << fmt(lx + 36) << "\" y=\"" << fmt(ly + 4)
            << "\">local minimizers</text>\n";
    }
    out << "</g>\n</svg>\n";
}

}  // namespace redgraf
