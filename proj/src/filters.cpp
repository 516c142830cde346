#include "redgraf/filters.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "redgraf/errors.hpp"
#include "redgraf/simplex.hpp"

namespace redgraf {

IdSet NeighborhoodView::candidate_ids() const {
    IdSet ids;
    ids.reserve(candidate_count());
    ids.push_back(self_id);
    for (const auto& r : received) ids.push_back(r.sender);
    std::sort(ids.begin(), ids.end());
    return ids;
}

const Vector& NeighborhoodView::x_of(AgentId id) const {
    if (id == self_id) return self_x;
    for (const auto& r : received)
        if (r.sender == id) return r.x;
    throw StateError("agent " + std::to_string(id) + " is not a candidate of " + std::to_string(self_id));
}

const Vector& NeighborhoodView::y_of(AgentId id) const {
    const std::optional<Vector>* y = nullptr;
    if (id == self_id) {
        y = &self_y;
    } else {
        for (const auto& r : received)
            if (r.sender == id) y = &r.y;
    }
    if (!y) throw StateError("agent " + std::to_string(id) + " is not a candidate of " + std::to_string(self_id));
    if (!y->has_value()) throw StateError("candidate " + std::to_string(id) + " carries no auxiliary state");
    return **y;
}

void NeighborhoodView::validate() const {
    const Eigen::Index d = self_x.size();
    if (d == 0) throw DimensionError("empty state vector");
    if (self_y && self_y->size() != d) throw DimensionError("self y dimension mismatch");
    for (const auto& r : received) {
        if (r.x.size() != d) throw DimensionError("received x dimension mismatch");
        if (r.y && r.y->size() != d) throw DimensionError("received y dimension mismatch");
    }
    const IdSet ids = candidate_ids();
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw DimensionError("repeated candidate id");
}

namespace {

IdSet resolve_candidates(const NeighborhoodView& view, std::span<const AgentId> candidates) {
    if (candidates.empty()) return view.candidate_ids();
    IdSet ids(candidates.begin(), candidates.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

// (k+1)-th largest of the values (k zero-based).
double kth_largest(std::vector<double> v, std::size_t k) {
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end(), std::greater<>());
    return v[k];
}

double kth_smallest(std::vector<double> v, std::size_t k) {
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    return v[k];
}

void require_self(const NeighborhoodView& view, std::span<const AgentId> kept, const char* what) {
    if (kept.empty()) throw StateError(std::string(what) + ": empty kept set");
    if (std::find(kept.begin(), kept.end(), view.self_id) == kept.end())
        throw StateError(std::string(what) + ": kept set misses the self id");
}

}  // namespace

IdSet dist_filt(const NeighborhoodView& view, std::size_t F, std::span<const AgentId> candidates) {
    if (!view.self_y) throw StateError("dist_filt needs the auxiliary state of the receiver");
    const IdSet ids = resolve_candidates(view, candidates);
    if (F >= ids.size()) throw ConfigError("dist_filt: F must be smaller than the number of candidates");
    const Vector& y = *view.self_y;
    std::vector<double> dist;
    dist.reserve(ids.size());
    for (AgentId id : ids) dist.push_back((view.x_of(id) - y).norm());
    const double bound = std::max(kth_largest(dist, F), (view.self_x - y).norm());
    IdSet kept;
    for (std::size_t j = 0; j < ids.size(); ++j)
        if (dist[j] <= bound) kept.push_back(ids[j]);
    return kept;
}

std::vector<IdSet> cw_mm_filt(const NeighborhoodView& view, std::size_t F, Field field,
                              std::span<const AgentId> candidates) {
    const IdSet ids = resolve_candidates(view, candidates);
    if (ids.size() < 2 * F + 1) throw ConfigError("cw_mm_filt: needs at least 2F+1 candidates");
    const Vector& self = view.value_of(view.self_id, field);
    const std::size_t d = view.dim();
    std::vector<const Vector*> values;
    values.reserve(ids.size());
    for (AgentId id : ids) values.push_back(&view.value_of(id, field));

    std::vector<IdSet> kept(d);
    std::vector<double> column(ids.size());
    for (std::size_t l = 0; l < d; ++l) {
        const auto li = static_cast<Eigen::Index>(l);
        for (std::size_t j = 0; j < ids.size(); ++j) column[j] = (*values[j])[li];
        const double hi = std::max(kth_largest(column, F), self[li]);
        const double lo = std::min(kth_smallest(column, F), self[li]);
        for (std::size_t j = 0; j < ids.size(); ++j)
            if (column[j] >= lo && column[j] <= hi) kept[l].push_back(ids[j]);
    }
    return kept;
}

IdSet full_mm_filt(const NeighborhoodView& view, std::size_t F, std::span<const AgentId> candidates) {
    const auto per_dim = cw_mm_filt(view, F, Field::x, candidates);
    IdSet kept = per_dim.front();
    for (std::size_t l = 1; l < per_dim.size(); ++l) {
        IdSet next;
        std::set_intersection(kept.begin(), kept.end(), per_dim[l].begin(), per_dim[l].end(),
                              std::back_inserter(next));
        kept.swap(next);
    }
    return kept;
}

Vector full_average(const NeighborhoodView& view, std::span<const AgentId> kept, const WeightPolicy& policy) {
    require_self(view, kept, "full_average");
    IdSet ids(kept.begin(), kept.end());
    std::sort(ids.begin(), ids.end());
    const double w = policy.weight(ids.size());
    Vector sum = Vector::Zero(static_cast<Eigen::Index>(view.dim()));
    for (AgentId id : ids) sum += view.x_of(id);
    return w * sum;
}

Vector cw_average(const NeighborhoodView& view, std::span<const IdSet> kept, const WeightPolicy& policy,
                  Field field) {
    const std::size_t d = view.dim();
    if (kept.size() != d) throw DimensionError("cw_average: one kept set per dimension required");
    Vector out(static_cast<Eigen::Index>(d));
    for (std::size_t l = 0; l < d; ++l) {
        require_self(view, kept[l], "cw_average");
        IdSet ids = kept[l];
        std::sort(ids.begin(), ids.end());
        const auto li = static_cast<Eigen::Index>(l);
        double sum = 0.0;
        for (AgentId id : ids) sum += view.value_of(id, field)[li];
        out[li] = policy.weight(ids.size()) * sum;
    }
    return out;
}

namespace {

using Mask = std::uint64_t;

// Candidate points shifted so the bounding-box corner sits at the origin.
struct PointSet {
    std::vector<Vector> pts;
    Vector lo;
    std::size_t d = 0;
    double scale = 1.0;
};

struct Membership {
    bool inside = false;
    double residual = 0.0;
    Mask support = 0;
};

// Is p in conv{pts[j] : j not in removed}?
Membership hull_membership(const PointSet& ps, const Vector& p, Mask removed, double tol) {
    const std::size_t n = ps.pts.size();
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < n; ++j)
        if (!(removed >> j & 1U)) cols.push_back(j);
    const auto d = static_cast<Eigen::Index>(ps.d);
    Matrix A(d + 1, static_cast<Eigen::Index>(cols.size()));
    Vector b(d + 1);
    b[0] = 1.0;
    b.tail(d) = p;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto ci = static_cast<Eigen::Index>(c);
        A(0, ci) = 1.0;
        A.col(ci).tail(d) = ps.pts[cols[c]];
    }
    const auto res = lp::feasible_point(A, b, tol);
    Membership m;
    m.residual = res.infeasibility;
    m.inside = res.status != lp::Status::infeasible;
    if (m.inside)
        for (std::size_t c = 0; c < cols.size(); ++c)
            if (res.x[static_cast<Eigen::Index>(c)] > 0.0) m.support |= Mask{1} << cols[c];
    return m;
}

struct MasterSolution {
    Vector p;
    std::vector<Mask> supports;
};

// Variables: s = p - lo (d entries, nonnegative), then the weights of each
// working subset. Rows per subset: sum of weights = 1 and sum w_j x_j - s = 0.
MasterSolution solve_master(const PointSet& ps, const std::vector<Mask>& working, double tol) {
    const std::size_t n = ps.pts.size();
    const auto d = static_cast<Eigen::Index>(ps.d);
    std::vector<std::vector<std::size_t>> members;
    Eigen::Index cols = d;
    for (Mask removed : working) {
        std::vector<std::size_t> m;
        for (std::size_t j = 0; j < n; ++j)
            if (!(removed >> j & 1U)) m.push_back(j);
        cols += static_cast<Eigen::Index>(m.size());
        members.push_back(std::move(m));
    }
    const auto rows = static_cast<Eigen::Index>(working.size()) * (d + 1);
    Matrix A = Matrix::Zero(rows, cols);
    Vector b = Vector::Zero(rows);
    Eigen::Index col = d;
    for (std::size_t s = 0; s < working.size(); ++s) {
        const Eigen::Index r0 = static_cast<Eigen::Index>(s) * (d + 1);
        b[r0] = 1.0;
        for (Eigen::Index l = 0; l < d; ++l) A(r0 + 1 + l, l) = -1.0;
        for (std::size_t j : members[s]) {
            A(r0, col) = 1.0;
            A.col(col).segment(r0 + 1, d) = ps.pts[j];
            ++col;
        }
    }
    const auto res = lp::feasible_point(A, b, tol);
    if (res.status == lp::Status::infeasible)
        throw NumericalError("safe point system infeasible in floating point", res.infeasibility);
    MasterSolution out;
    out.p = res.x.head(d);
    col = d;
    for (const auto& m : members) {
        Mask support = 0;
        for (std::size_t j : m) {
            if (res.x[col] > 0.0) support |= Mask{1} << j;
            ++col;
        }
        out.supports.push_back(support);
    }
    return out;
}

// Keeps the part of a convex polygon with a.v <= c.
std::vector<Vector> clip_polygon(const std::vector<Vector>& poly, const Vector& a, double c) {
    std::vector<Vector> out;
    const std::size_t m = poly.size();
    for (std::size_t i = 0; i < m; ++i) {
        const Vector& p = poly[i];
        const Vector& q = poly[(i + 1) % m];
        const double fp = a.dot(p) - c;
        const double fq = a.dot(q) - c;
        if (fp <= 0.0) out.push_back(p);
        if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) out.push_back(p + (fp / (fp - fq)) * (q - p));
    }
    return out;
}

// In the plane the intersection of the (n-F)-subset hulls is the set of points
// of Tukey depth above F: the intersection of the closed half-planes bounded by
// a line through two candidates with at most F candidates strictly outside.
// Returns an empty polygon when floating point loses a degenerate region.
std::vector<Vector> planar_region(const PointSet& ps, std::size_t F, double tol) {
    const std::size_t n = ps.pts.size();
    std::vector<Vector> poly(4, Vector::Zero(2));
    poly[1] << ps.scale, 0.0;
    poly[2] << ps.scale, ps.scale;
    poly[3] << 0.0, ps.scale;
    for (std::size_t i = 0; i < n && !poly.empty(); ++i)
        for (std::size_t j = 0; j < n && !poly.empty(); ++j) {
            const Vector dir = ps.pts[j] - ps.pts[i];
            if (i == j || dir.norm() <= tol * ps.scale) continue;
            Vector a(2);
            a << dir[1], -dir[0];
            a /= a.norm();
            const double c = a.dot(ps.pts[i]);
            std::size_t outside = 0;
            for (const auto& x : ps.pts)
                if (a.dot(x) - c > tol * ps.scale) ++outside;
            if (outside <= F) poly = clip_polygon(poly, a, c);
        }
    return poly;
}

// Midpoint of the bounding box of the region, which moves continuously with the
// candidates, unlike an LP vertex.
std::optional<Vector> planar_safe_point(const PointSet& ps, std::size_t F, double tol) {
    const std::vector<Vector> poly = planar_region(ps, F, tol);
    if (poly.empty()) return std::nullopt;
    Vector lo = poly.front(), hi = poly.front();
    for (const auto& v : poly) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    return 0.5 * (lo + hi);
}

template <typename Fn>
void for_each_subset(std::size_t n, std::size_t k, Fn&& fn) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        Mask m = 0;
        for (std::size_t i : idx) m |= Mask{1} << i;
        if (!fn(m)) return;
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace

Vector safe_point(const NeighborhoodView& view, std::size_t F, const SafePointLimits& limits) {
    const IdSet ids = view.candidate_ids();
    const std::size_t n = ids.size();
    const std::size_t d = view.dim();
    if (n < (d + 1) * F + 1)
        throw ConfigError("safe_point: needs at least (d+1)F+1 candidates, got " + std::to_string(n));
    if (n > limits.max_candidates || F > limits.max_faults || n > 64)
        throw ConfigError("safe_point: candidate or fault count exceeds the configured limit");

    PointSet ps;
    ps.d = d;
    for (AgentId id : ids) ps.pts.push_back(view.x_of(id));
    const Vector& first = ps.pts.front();
    if (std::all_of(ps.pts.begin(), ps.pts.end(), [&](const Vector& v) { return v == first; })) return first;
    if (F == 0) {
        Vector sum = Vector::Zero(static_cast<Eigen::Index>(d));
        for (const auto& v : ps.pts) sum += v;
        return sum / static_cast<double>(n);
    }

    if (d == 1) {
        // The region is the interval between the (F+1)-th smallest and largest values.
        std::vector<double> v;
        for (const auto& x : ps.pts) v.push_back(x[0]);
        Vector mid(1);
        mid[0] = 0.5 * (kth_smallest(v, F) + kth_largest(v, F));
        return mid;
    }

    ps.lo = first;
    for (const auto& v : ps.pts) ps.lo = ps.lo.cwiseMin(v);
    double extent = 0.0;
    for (auto& v : ps.pts) {
        v -= ps.lo;
        extent = std::max(extent, v.maxCoeff());
    }
    ps.scale = std::max(1.0, extent);
    const double tol = limits.tolerance;
    if (d == 2)
        if (auto p = planar_safe_point(ps, F, tol)) return *p + ps.lo;

    // Start from the subsets that drop the F most extreme points along each
    // coordinate; these usually pin down the intersection.
    std::vector<Mask> working;
    auto add_working = [&](Mask m) {
        if (std::find(working.begin(), working.end(), m) == working.end()) working.push_back(m);
    };
    std::vector<std::size_t> order(n);
    for (std::size_t l = 0; l < d; ++l) {
        const auto li = static_cast<Eigen::Index>(l);
        for (std::size_t j = 0; j < n; ++j) order[j] = j;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return ps.pts[a][li] < ps.pts[b][li]; });
        Mask low = 0, high = 0;
        for (std::size_t i = 0; i < F; ++i) {
            low |= Mask{1} << order[i];
            high |= Mask{1} << order[n - 1 - i];
        }
        add_working(low);
        add_working(high);
    }

    constexpr std::size_t kMaxViolatorsPerRound = 8;
    double worst = 0.0;
    for (std::size_t round = 0; round < 10'000; ++round) {
        MasterSolution master = solve_master(ps, working, tol);
        // If p lies in the hull of a support set Y, it lies in conv(X \ T) for
        // every T disjoint from Y; only subsets hitting every support need an LP.
        std::vector<Mask> supports = master.supports;
        std::vector<Mask> violators;
        worst = 0.0;
        for_each_subset(n, F, [&](Mask removed) {
            for (Mask s : supports)
                if ((s & removed) == 0) return true;
            const Membership m = hull_membership(ps, master.p, removed, tol);
            if (m.inside) {
                supports.push_back(m.support);
            } else {
                worst = std::max(worst, m.residual);
                violators.push_back(removed);
            }
            return violators.size() < kMaxViolatorsPerRound;
        });
        if (violators.empty()) return master.p + ps.lo;
        const std::size_t before = working.size();
        for (Mask m : violators) add_working(m);
        if (working.size() == before)
            throw NumericalError("safe point constraint generation stalled", worst);
    }
    throw NumericalError("safe point constraint generation did not converge", worst);
}

}  // namespace redgraf
