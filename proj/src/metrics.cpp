#include "redgraf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "redgraf/errors.hpp"
#include "redgraf/theory.hpp"

namespace redgraf {

Vector regular_mean(const std::vector<Vector>& x, const IdSet& regular) {
    if (regular.empty()) throw EmptyInputError("no regular agents");
    Vector sum = Vector::Zero(x[regular.front()].size());
    for (AgentId i : regular) sum += x[i];
    return sum / static_cast<double>(regular.size());
}

double diameter(const std::vector<Vector>& x, const IdSet& regular) {
    double best = 0.0;
    for (std::size_t a = 0; a < regular.size(); ++a)
        for (std::size_t b = a + 1; b < regular.size(); ++b)
            best = std::max(best, (x[regular[a]] - x[regular[b]]).norm());
    return best;
}

double max_distance(const std::vector<Vector>& x, const IdSet& regular, const Vector& center) {
    double best = 0.0;
    for (AgentId i : regular) best = std::max(best, (x[i] - center).norm());
    return best;
}

double effective_gamma(const std::vector<Vector>& x, const std::vector<Vector>& x_tilde, const IdSet& regular,
                       const Vector& x_c) {
    const double denom = max_distance(x, regular, x_c);
    if (denom == 0.0) return 1.0;
    const double ratio = max_distance(x_tilde, regular, x_c) / denom;
    return ratio * ratio;
}

RoundRecord round_metrics(std::size_t k, const std::vector<Vector>& x, const std::vector<Vector>& x_tilde,
                          const std::vector<Vector>& gradient, const IdSet& regular, const CostEnsemble& ensemble,
                          const MinimizerGeometry& geometry, const Vector& x_c) {
    RoundRecord r;
    r.k = k;
    r.mean = regular_mean(x, regular);
    r.dist_to_xstar = (r.mean - geometry.x_star).norm();
    r.optimality_gap = ensemble.average_value(r.mean) - geometry.f_star;
    r.diameter = diameter(x, regular);
    r.gamma_eff = effective_gamma(x, x_tilde, regular, x_c);
    for (AgentId i : regular) r.max_grad_norm = std::max(r.max_grad_norm, gradient[i].norm());
    r.max_dist_to_xstar = max_distance(x, regular, geometry.x_star);
    r.max_dist_to_center = max_distance(x, regular, x_c);
    return r;
}

Baselines baselines(const CostEnsemble& ensemble, const MinimizerGeometry& geometry) {
    Baselines b;
    bool first = true;
    for (const auto& m : geometry.local_minimizers) {
        const double dist = (m - geometry.x_star).norm();
        const double gap = ensemble.average_value(m) - geometry.f_star;
        b.min_local_dist = first ? dist : std::min(b.min_local_dist, dist);
        b.min_local_gap = first ? gap : std::min(b.min_local_gap, gap);
        first = false;
    }
    return b;
}

RunMetrics compute_run_metrics(const RunTrace& trace, const CostEnsemble& ensemble, const MinimizerGeometry& geometry,
                               std::size_t F) {
    RunMetrics m;
    m.baselines = baselines(ensemble, geometry);
    if (uses_auxiliary(trace.kind)) {
        if (trace.y.empty()) throw StateError("trace lacks the auxiliary history");
        m.y_inf = regular_mean(trace.y.back(), trace.regular);
        for (const auto& y : trace.y) m.aux_error.push_back(max_distance(y, trace.regular, *m.y_inf));
    }
    const AlgorithmParams params = algorithm_params(trace.kind, ensemble.dim(), F, geometry, m.y_inf);
    m.x_c = params.x_c;
    m.gamma = params.gamma;
    const std::size_t K = trace.rounds();
    m.rounds.reserve(K + 1);
    for (std::size_t k = 0; k < K; ++k)
        m.rounds.push_back(round_metrics(k, trace.x[k], trace.x_tilde[k], trace.gradient[k], trace.regular, ensemble,
                                         geometry, m.x_c));
    // The final snapshot has no filtered state; its gradients are taken at x.
    const std::vector<Vector>& last = trace.x[K];
    std::vector<Vector> grad(last.size(), Vector::Zero(static_cast<Eigen::Index>(ensemble.dim())));
    for (AgentId i : trace.regular) grad[i] = ensemble.find(i)->gradient(last[i]);
    RoundRecord final_record = round_metrics(K, last, last, grad, trace.regular, ensemble, geometry, m.x_c);
    final_record.gamma_eff = std::numeric_limits<double>::quiet_NaN();
    m.rounds.push_back(std::move(final_record));
    return m;
}

double median(std::vector<double> v) {
    if (v.empty()) throw EmptyInputError("median of an empty list");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double fit_geometric_rate(std::span<const double> series, std::size_t first, std::size_t last) {
    const std::size_t n = series.size();
    if (n == 0) throw FitError("empty series");
    const std::size_t tail = std::max<std::size_t>(1, n / 10);
    const double plateau = median(std::vector<double>(series.end() - static_cast<std::ptrdiff_t>(tail), series.end()));
    last = std::min(last, n - 1);
    if (first >= last) throw FitError("fit window holds fewer than two points");
    std::vector<double> ratios;
    double prev = series[first] - plateau;
    if (!(prev > 0.0)) throw FitError("series does not exceed its plateau at k = " + std::to_string(first));
    for (std::size_t k = first + 1; k <= last; ++k) {
        const double e = series[k] - plateau;
        if (!(e > 0.0)) throw FitError("series does not exceed its plateau at k = " + std::to_string(k));
        ratios.push_back(e / prev);
        prev = e;
    }
    return median(std::move(ratios));
}

ExponentialDecay fit_exponential_decay(std::span<const double> series, std::size_t first, double floor) {
    double sk = 0.0, sy = 0.0, skk = 0.0, sky = 0.0;
    std::size_t count = 0;
    for (std::size_t k = first; k < series.size() && series[k] > floor; ++k) {
        const auto kk = static_cast<double>(k);
        const double y = std::log(series[k]);
        sk += kk;
        sy += y;
        skk += kk * kk;
        sky += kk * y;
        ++count;
    }
    if (count < 2) throw FitError("fewer than two rounds above the decay floor");
    const auto n = static_cast<double>(count);
    const double slope = (n * sky - sk * sy) / (n * skk - sk * sk);
    ExponentialDecay out;
    out.c2 = -slope;
    out.c1 = std::exp((sy - slope * sk) / n);
    out.xi = std::exp(slope);
    return out;
}

MeanStd aggregate(const std::vector<std::vector<double>>& series) {
    if (series.empty()) throw EmptyInputError("no series to aggregate");
    const std::size_t len = series.front().size();
    for (const auto& s : series)
        if (s.size() != len) throw DimensionError("series lengths differ");
    MeanStd out;
    out.mean.assign(len, 0.0);
    out.std.assign(len, 0.0);
    const auto count = static_cast<double>(series.size());
    for (std::size_t k = 0; k < len; ++k) {
        double sum = 0.0;
        for (const auto& s : series) sum += s[k];
        const double mean = sum / count;
        double sq = 0.0;
        for (const auto& s : series) sq += (s[k] - mean) * (s[k] - mean);
        out.mean[k] = mean;
        out.std[k] = series.size() > 1 ? std::sqrt(sq / (count - 1.0)) : 0.0;
    }
    return out;
}

}  // namespace redgraf
