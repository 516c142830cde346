#include "redgraf/functions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "redgraf/errors.hpp"
#include "redgraf/random.hpp"

namespace redgraf {

namespace {

void require_dim(const CostFunction& f, const Vector& x) {
    if (static_cast<std::size_t>(x.size()) != f.dim()) {
        throw DimensionError("point has dimension " + std::to_string(x.size()) + ", function expects " +
                             std::to_string(f.dim()));
    }
}

}  // namespace

QuadraticCost::QuadraticCost(Vector center, Matrix curvature, double offset)
    : center_(std::move(center)), curvature_(std::move(curvature)), offset_(offset) {
    const auto d = center_.size();
    if (d == 0) throw DimensionError("quadratic cost needs dimension >= 1");
    if (curvature_.rows() != d || curvature_.cols() != d) {
        throw DimensionError("curvature must be " + std::to_string(d) + "x" + std::to_string(d));
    }
    const double scale = std::max(1.0, curvature_.cwiseAbs().maxCoeff());
    if ((curvature_ - curvature_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw ConfigError("curvature matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(curvature_, Eigen::EigenvaluesOnly);
    mu_ = eig.eigenvalues().minCoeff();
    L_ = eig.eigenvalues().maxCoeff();
    if (!(mu_ > 0.0)) throw ConfigError("curvature matrix is not positive definite");
}

double QuadraticCost::value(const Vector& x) const {
    require_dim(*this, x);
    const Vector r = x - center_;
    return 0.5 * r.dot(curvature_ * r) + offset_;
}

Vector QuadraticCost::gradient(const Vector& x) const {
    require_dim(*this, x);
    return curvature_ * (x - center_);
}

LogCoshCost::LogCoshCost(Vector center, double mu, double weight)
    : center_(std::move(center)), mu_(mu), weight_(weight) {
    if (center_.size() == 0) throw DimensionError("log-cosh cost needs dimension >= 1");
    if (!(mu_ > 0.0) || weight_ < 0.0) throw ConfigError("log-cosh cost needs mu > 0 and weight >= 0");
}

double LogCoshCost::value(const Vector& x) const {
    require_dim(*this, x);
    const Vector r = x - center_;
    double s = 0.0;
    for (Eigen::Index l = 0; l < r.size(); ++l) {
        // log cosh(t) = |t| + log1p(exp(-2|t|)) - log 2, stable for large |t|.
        const double t = std::abs(r[l]);
        s += t + std::log1p(std::exp(-2.0 * t)) - std::log(2.0);
    }
    return 0.5 * mu_ * r.squaredNorm() + weight_ * s;
}

Vector LogCoshCost::gradient(const Vector& x) const {
    require_dim(*this, x);
    const Vector r = x - center_;
    return mu_ * r + weight_ * r.array().tanh().matrix();
}

ValueAndGradient eval_and_grad(const CostFunction& f, const Vector& x) {
    require_dim(f, x);
    return {f.value(x), f.gradient(x)};
}

CostEnsemble::CostEnsemble(std::vector<Entry> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw EmptyInputError("cost ensemble needs at least one regular agent");
    std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) { return a.id < b.id; });
    dim_ = entries_.front().cost->dim();
    mu_tilde_ = std::numeric_limits<double>::infinity();
    L_tilde_ = 0.0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (!e.cost) throw ConfigError("null cost for agent " + std::to_string(e.id));
        if (e.cost->dim() != dim_) throw DimensionError("ensemble mixes dimensions");
        if (i > 0 && entries_[i - 1].id == e.id) throw DimensionError("duplicate agent id " + std::to_string(e.id));
        mu_tilde_ = std::min(mu_tilde_, e.cost->mu());
        L_tilde_ = std::max(L_tilde_, e.cost->L());
    }
}

const CostFunction* CostEnsemble::find(AgentId id) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                               [](const Entry& e, AgentId v) { return e.id < v; });
    return (it != entries_.end() && it->id == id) ? it->cost.get() : nullptr;
}

double CostEnsemble::average_value(const Vector& x) const {
    double s = 0.0;
    for (const auto& e : entries_) s += e.cost->value(x);
    return s / static_cast<double>(entries_.size());
}

Vector CostEnsemble::average_gradient(const Vector& x) const {
    Vector g = Vector::Zero(static_cast<Eigen::Index>(dim_));
    for (const auto& e : entries_) g += e.cost->gradient(x);
    return g / static_cast<double>(entries_.size());
}

bool CostEnsemble::all_quadratic() const {
    return std::all_of(entries_.begin(), entries_.end(),
                       [](const Entry& e) { return dynamic_cast<const QuadraticCost*>(e.cost.get()) != nullptr; });
}

// ---------------------------------------------------------------------------
// Minimum enclosing ball

namespace {

// Smallest ball having every support point on its boundary, centred in their
// affine hull. Degenerate supports fall back to the widest pair.
Ball circumball(const std::vector<const Vector*>& support, Eigen::Index d) {
    Ball b;
    if (support.empty()) {
        b.center = Vector::Zero(d);
        b.radius = -1.0;
        return b;
    }
    const Vector& p0 = *support[0];
    const auto k = static_cast<Eigen::Index>(support.size()) - 1;
    if (k == 0) {
        b.center = p0;
        return b;
    }
    Matrix V(d, k);
    for (Eigen::Index i = 0; i < k; ++i) V.col(i) = *support[static_cast<std::size_t>(i + 1)] - p0;
    const Matrix M = 2.0 * V.transpose() * V;
    const Vector rhs = V.colwise().squaredNorm().transpose();
    Eigen::FullPivLU<Matrix> lu(M);
    lu.setThreshold(1e-12);
    if (lu.rank() == k) {
        const Vector lambda = lu.solve(rhs);
        b.center = p0 + V * lambda;
        b.radius = 0.0;
        for (const Vector* p : support) b.radius = std::max(b.radius, (*p - b.center).norm());
        return b;
    }
    double best = -1.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
        for (std::size_t j = i; j < support.size(); ++j) {
            const double dist = (*support[i] - *support[j]).norm();
            if (dist > best) {
                best = dist;
                b.center = 0.5 * (*support[i] + *support[j]);
                b.radius = 0.5 * dist;
            }
        }
    }
    return b;
}

bool inside(const Ball& b, const Vector& p) {
    return b.radius >= 0.0 && (p - b.center).norm() <= b.radius * (1.0 + 1e-12) + 1e-12;
}

Ball welzl(const std::vector<const Vector*>& pts, std::size_t n, std::vector<const Vector*>& support,
           Eigen::Index d) {
    if (n == 0 || static_cast<Eigen::Index>(support.size()) == d + 1) return circumball(support, d);
    const Vector* p = pts[n - 1];
    Ball b = welzl(pts, n - 1, support, d);
    if (inside(b, *p)) return b;
    support.push_back(p);
    b = welzl(pts, n - 1, support, d);
    support.pop_back();
    return b;
}

}  // namespace

Ball enclosing_ball(std::span<const Vector> points) {
    if (points.empty()) throw EmptyInputError("enclosing ball of an empty point set");
    const Eigen::Index d = points.front().size();
    for (const auto& p : points) {
        if (p.size() != d) throw DimensionError("enclosing ball points differ in dimension");
    }
    Ball ball;
    if (d <= 3) {
        std::vector<const Vector*> pts;
        pts.reserve(points.size());
        for (const auto& p : points) pts.push_back(&p);
        // Fixed shuffle for the expected-linear running time.
        Rng rng(0x5eedba11ULL);
        for (std::size_t i = pts.size(); i > 1; --i) std::swap(pts[i - 1], pts[rng.below(i)]);
        std::vector<const Vector*> support;
        ball = welzl(pts, pts.size(), support, d);
    } else {
        Vector c = Vector::Zero(d);
        for (const auto& p : points) c += p;
        ball.center = c / static_cast<double>(points.size());
        ball.minimal = false;
    }
    for (const auto& p : points) ball.radius = std::max(ball.radius, (p - ball.center).norm());
    return ball;
}

// ---------------------------------------------------------------------------
// Global minimizer

Vector minimize_local(const CostFunction& f, const Vector& start, const MinimizerOptions& options,
                      double* achieved_tolerance) {
    Vector x = start;
    const double step = 1.0 / f.L();
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        const Vector g = f.gradient(x);
        const double gn = g.norm();
        if (gn < options.gradient_tolerance) {
            if (achieved_tolerance) *achieved_tolerance = gn;
            return x;
        }
        x -= step * g;
    }
    throw ConvergenceError("local gradient descent did not converge in " + std::to_string(options.max_iterations) +
                           " iterations");
}

MinimizerGeometry global_minimizer(const CostEnsemble& ensemble, const MinimizerOptions& options) {
    MinimizerGeometry geo;
    const auto d = static_cast<Eigen::Index>(ensemble.dim());
    geo.local_minimizers.reserve(ensemble.size());
    for (const auto& e : ensemble.entries()) {
        if (auto m = e.cost->minimizer()) {
            geo.local_minimizers.push_back(*m);
        } else {
            double tol = 0.0;
            geo.local_minimizers.push_back(minimize_local(*e.cost, Vector::Zero(d), options, &tol));
            geo.eps_star = std::max(geo.eps_star, tol);
        }
    }

    if (ensemble.all_quadratic() && !options.force_gradient_descent) {
        Matrix A = Matrix::Zero(d, d);
        Vector rhs = Vector::Zero(d);
        for (const auto& e : ensemble.entries()) {
            const auto& q = static_cast<const QuadraticCost&>(*e.cost);
            A += q.curvature();
            rhs += q.curvature() * q.center();
        }
        geo.x_star = A.ldlt().solve(rhs);
    } else {
        Vector x = Vector::Zero(d);
        for (const auto& m : geo.local_minimizers) x += m;
        x /= static_cast<double>(geo.local_minimizers.size());
        const double step = 1.0 / ensemble.L_tilde();
        bool converged = false;
        for (std::size_t it = 0; it < options.max_iterations; ++it) {
            const Vector g = ensemble.average_gradient(x);
            if (g.norm() < options.gradient_tolerance) {
                converged = true;
                break;
            }
            x -= step * g;
        }
        if (!converged) {
            throw ConvergenceError("gradient descent on the average objective did not converge in " +
                                   std::to_string(options.max_iterations) + " iterations");
        }
        geo.x_star = x;
    }
    geo.f_star = ensemble.average_value(geo.x_star);

    const Ball ball = enclosing_ball(geo.local_minimizers);
    geo.c_star = ball.center;
    geo.r_star = ball.radius;
    geo.ball_minimal = ball.minimal;
    return geo;
}

// ---------------------------------------------------------------------------
// Sampling

CostEnsemble sample_ensemble(const EnsembleSpec& spec, std::span<const AgentId> ids) {
    if (spec.dim == 0 || spec.n_regular == 0) throw ConfigError("ensemble needs dim >= 1 and n_regular >= 1");
    if (!(spec.mu_low > 0.0) || spec.mu_low > spec.mu_high || spec.L_low > spec.L_high ||
        spec.mu_low > spec.L_high) {
        throw ConfigError("invalid modulus ranges: need 0 < mu_low <= mu_high, L_low <= L_high, mu_low <= L_high");
    }
    if (!(spec.spread >= 0.0)) throw ConfigError("spread must be non-negative");
    if (!ids.empty() && ids.size() != spec.n_regular) throw ConfigError("id list length differs from n_regular");

    const auto d = static_cast<Eigen::Index>(spec.dim);
    std::vector<CostEnsemble::Entry> entries;
    entries.reserve(spec.n_regular);
    for (std::size_t i = 0; i < spec.n_regular; ++i) {
        Rng rng(derive_seed(spec.seed, {tag(SeedPurpose::ensemble), i}));
        Vector m(d);
        for (Eigen::Index l = 0; l < d; ++l) m[l] = spec.spread > 0.0 ? rng.uniform(-spec.spread, spec.spread) : 0.0;

        const double lo = rng.uniform(spec.mu_low, spec.mu_high);
        const double hi = std::max(lo, rng.uniform(spec.L_low, spec.L_high));
        Vector eig(d);
        eig[0] = lo;
        if (d > 1) eig[d - 1] = hi;
        for (Eigen::Index l = 1; l + 1 < d; ++l) eig[l] = rng.uniform(lo, hi);

        Matrix Q;
        if (eig.maxCoeff() == eig.minCoeff()) {
            Q = eig[0] * Matrix::Identity(d, d);
        } else {
            Matrix G(d, d);
            for (Eigen::Index r = 0; r < d; ++r)
                for (Eigen::Index c = 0; c < d; ++c) G(r, c) = rng.normal();
            Eigen::HouseholderQR<Matrix> qr(G);
            Matrix R = qr.householderQ();
            // Sign fix makes the rotation Haar distributed.
            const Matrix upper = qr.matrixQR().triangularView<Eigen::Upper>();
            for (Eigen::Index c = 0; c < d; ++c)
                if (upper(c, c) < 0.0) R.col(c) *= -1.0;
            Q = R * eig.asDiagonal() * R.transpose();
            Q = 0.5 * (Q + Q.transpose()).eval();
        }
        const AgentId id = ids.empty() ? i : ids[i];
        entries.push_back({id, std::make_shared<QuadraticCost>(std::move(m), std::move(Q), 0.0)});
    }
    return CostEnsemble(std::move(entries));
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct LineReader {
    std::istream& in;
    std::size_t line = 0;

    std::istringstream next(const std::string& expect_key) {
        std::string text;
        while (std::getline(in, text)) {
            ++line;
            if (text.empty() || text[0] == '#') continue;
            std::istringstream ss(text);
            std::string key;
            ss >> key;
            if (key != expect_key) throw ParseError("expected '" + expect_key + "', found '" + key + "'", line);
            return ss;
        }
        throw ParseError("unexpected end of input, expected '" + expect_key + "'", line);
    }

    double number(std::istringstream& ss) {
        std::string tok;
        if (!(ss >> tok)) throw ParseError("missing number", line);
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used != tok.size()) throw ParseError("bad number '" + tok + "'", line);
            return v;
        } catch (const std::logic_error&) {
            throw ParseError("bad number '" + tok + "'", line);
        }
    }

    void end(std::istringstream& ss) {
        std::string extra;
        if (ss >> extra) throw ParseError("trailing token '" + extra + "'", line);
    }
};

}  // namespace

void write_ensemble(std::ostream& out, const CostEnsemble& ensemble) {
    out << "redgraf-ensemble 1\n";
    out << "dim " << ensemble.dim() << "\n";
    out << "agents " << ensemble.size() << "\n";
    for (const auto& e : ensemble.entries()) {
        const auto* q = dynamic_cast<const QuadraticCost*>(e.cost.get());
        if (!q) throw ConfigError("only quadratic ensembles can be serialized");
        out << "agent " << e.id << "\n";
        out << "b " << fmt17(q->offset()) << "\n";
        out << "m";
        for (Eigen::Index l = 0; l < q->center().size(); ++l) out << ' ' << fmt17(q->center()[l]);
        out << "\nQ";
        for (Eigen::Index r = 0; r < q->curvature().rows(); ++r)
            for (Eigen::Index c = 0; c < q->curvature().cols(); ++c) out << ' ' << fmt17(q->curvature()(r, c));
        out << "\n";
    }
}

CostEnsemble read_ensemble(std::istream& in) {
    LineReader rd{in};
    {
        auto ss = rd.next("redgraf-ensemble");
        if (rd.number(ss) != 1.0) throw ParseError("unsupported ensemble version", rd.line);
        rd.end(ss);
    }
    auto count = [&](const std::string& key) {
        auto ss = rd.next(key);
        const double v = rd.number(ss);
        rd.end(ss);
        if (v < 0 || v != std::floor(v)) throw ParseError(key + " must be a non-negative integer", rd.line);
        return static_cast<std::size_t>(v);
    };
    const std::size_t d = count("dim");
    const std::size_t n = count("agents");
    if (d == 0) throw ParseError("dim must be positive", rd.line);
    std::vector<CostEnsemble::Entry> entries;
    for (std::size_t i = 0; i < n; ++i) {
        const AgentId id = count("agent");
        auto bs = rd.next("b");
        const double b = rd.number(bs);
        rd.end(bs);
        auto ms = rd.next("m");
        Vector m(static_cast<Eigen::Index>(d));
        for (std::size_t l = 0; l < d; ++l) m[static_cast<Eigen::Index>(l)] = rd.number(ms);
        rd.end(ms);
        auto qs = rd.next("Q");
        Matrix Q(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c) Q(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rd.number(qs);
        rd.end(qs);
        try {
            entries.push_back({id, std::make_shared<QuadraticCost>(std::move(m), std::move(Q), b)});
        } catch (const Error& e) {
            throw ParseError(e.what(), rd.line);
        }
    }
    try {
        return CostEnsemble(std::move(entries));
    } catch (const Error& e) {
        throw ParseError(e.what(), rd.line);
    }
}

}  // namespace redgraf
