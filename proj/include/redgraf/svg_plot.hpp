#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "redgraf/algorithm.hpp"

namespace redgraf {

struct MetricSeries {
    std::vector<double> mean;
    std::vector<double> std;
};

/// One aggregate CSV: per-round mean/std per metric, and baselines.
struct AggregateSeries {
    AlgorithmKind kind = AlgorithmKind::cwtm;
    double alpha = 0.0;
    std::map<std::string, MetricSeries> metrics;
    std::map<std::string, double> baselines;
};

/// Parses "k,metric,mean,std" rows. Rows must list k = 0, 1, ... in order for
/// each metric. Throws ParseError with the line number on schema mismatch.
AggregateSeries read_aggregate_csv(std::istream& in, AlgorithmKind kind, double alpha);

/// Recovers (algorithm, alpha) from a stem such as "CWTM_alpha0.02". Throws
/// ParseError when the stem does not follow that pattern.
std::pair<AlgorithmKind, double> parse_group_stem(const std::string& stem);

/// Fixed legend colours: SDMMFD blue, SDFD orange, CWTM green, RVO red.
const char* algorithm_color(AlgorithmKind kind);

struct PlotSpec {
    std::string metric;
    std::string title;
    std::string y_label;
    bool log_scale = false;
    /// Dotted horizontal reference line, read from the series baselines.
    std::optional<std::string> baseline;
};

/// Mean lines with +-1 std bands; line dash encodes the step size. Throws
/// ParseError(line 0) when a series lacks the metric or the metric is empty.
void write_plot_svg(std::ostream& out, const std::vector<AggregateSeries>& series, const PlotSpec& spec);

}  // namespace redgraf
