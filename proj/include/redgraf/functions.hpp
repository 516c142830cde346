#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "redgraf/types.hpp"

namespace redgraf {

/// A strongly convex, differentiable local objective with Lipschitz gradient.
class CostFunction {
public:
    virtual ~CostFunction() = default;

    virtual std::size_t dim() const = 0;
    virtual double value(const Vector& x) const = 0;
    virtual Vector gradient(const Vector& x) const = 0;
    /// Strong convexity modulus.
    virtual double mu() const = 0;
    /// Lipschitz constant of the gradient.
    virtual double L() const = 0;
    /// Closed-form minimizer, when one is known.
    virtual std::optional<Vector> minimizer() const { return std::nullopt; }
};

/// f(x) = 1/2 (x - m)^T Q (x - m) + b with Q symmetric positive definite.
class QuadraticCost final : public CostFunction {
public:
    /// Throws DimensionError on shape mismatch and ConfigError when Q is not
    /// symmetric positive definite.
    QuadraticCost(Vector center, Matrix curvature, double offset = 0.0);

    std::size_t dim() const override { return static_cast<std::size_t>(center_.size()); }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    double mu() const override { return mu_; }
    double L() const override { return L_; }
    std::optional<Vector> minimizer() const override { return center_; }

    const Vector& center() const { return center_; }
    const Matrix& curvature() const { return curvature_; }
    double offset() const { return offset_; }

private:
    Vector center_;
    Matrix curvature_;
    double offset_;
    double mu_;
    double L_;
};

/// f(x) = mu/2 ||x - m||^2 + c * sum_l log cosh(x_l - m_l).
///
/// Non-quadratic but strongly convex with modulus mu and gradient Lipschitz
/// constant mu + c; the minimizer is m. Exercises the generic code paths.
class LogCoshCost final : public CostFunction {
public:
    LogCoshCost(Vector center, double mu, double weight);

    std::size_t dim() const override { return static_cast<std::size_t>(center_.size()); }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    double mu() const override { return mu_; }
    double L() const override { return mu_ + weight_; }
    std::optional<Vector> minimizer() const override { return center_; }

private:
    Vector center_;
    double mu_;
    double weight_;
};

struct ValueAndGradient {
    double value;
    Vector gradient;
};

/// Throws DimensionError when x has the wrong size.
ValueAndGradient eval_and_grad(const CostFunction& f, const Vector& x);

using CostPtr = std::shared_ptr<const CostFunction>;

/// The regular agents' local objectives, keyed by agent id.
class CostEnsemble {
public:
    struct Entry {
        AgentId id;
        CostPtr cost;
    };

    /// Entries are sorted by id. Throws EmptyInputError for an empty list and
    /// DimensionError when dimensions disagree or ids repeat.
    explicit CostEnsemble(std::vector<Entry> entries);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }
    /// nullptr when the agent has no registered cost (e.g. a Byzantine agent).
    const CostFunction* find(AgentId id) const;
    bool contains(AgentId id) const { return find(id) != nullptr; }

    double mu_tilde() const { return mu_tilde_; }
    double L_tilde() const { return L_tilde_; }
    double kappa() const { return L_tilde_ / mu_tilde_; }

    /// Average objective f(x) = (1/|V_R|) sum_i f_i(x) and its gradient.
    double average_value(const Vector& x) const;
    Vector average_gradient(const Vector& x) const;

    /// True when every entry is a QuadraticCost.
    bool all_quadratic() const;

private:
    std::vector<Entry> entries_;
    std::size_t dim_ = 0;
    double mu_tilde_ = 0.0;
    double L_tilde_ = 0.0;
};

struct Ball {
    Vector center;
    double radius = 0.0;
    /// False when the ball is a bounding ball rather than the minimum one.
    bool minimal = true;
};

/// Minimum enclosing ball for d <= 3 (Welzl's algorithm with a fixed shuffle);
/// for larger d a centroid-centred bounding ball flagged non-minimal.
Ball enclosing_ball(std::span<const Vector> points);

struct MinimizerGeometry {
    Vector x_star;
    Vector c_star;
    double r_star = 0.0;
    double f_star = 0.0;
    bool ball_minimal = true;
    /// Accuracy of the local minimizers: 0 for closed forms, otherwise the
    /// achieved gradient tolerance.
    double eps_star = 0.0;
    /// Local minimizers in ensemble order.
    std::vector<Vector> local_minimizers;
};

struct MinimizerOptions {
    double gradient_tolerance = 1e-10;
    std::size_t max_iterations = 1'000'000;
    /// Skip the closed-form linear solve even for quadratic ensembles.
    bool force_gradient_descent = false;
};

/// Minimizer of the regular average objective plus the ball around the local
/// minimizers. Throws ConvergenceError if gradient descent does not reach the
/// tolerance.
MinimizerGeometry global_minimizer(const CostEnsemble& ensemble, const MinimizerOptions& options = {});

/// Gradient descent with step 1/L on a single function; used for local
/// minimizers without closed form.
Vector minimize_local(const CostFunction& f, const Vector& start, const MinimizerOptions& options,
                      double* achieved_tolerance = nullptr);

struct EnsembleSpec {
    std::size_t dim = 2;
    std::size_t n_regular = 1;
    double spread = 1.0;
    double mu_low = 1.0;
    double mu_high = 1.0;
    double L_low = 1.0;
    double L_high = 1.0;
    std::uint64_t seed = 0;
};

/// Random quadratic ensemble: minimizers uniform in [-spread, spread]^d; the
/// smallest eigenvalue of Q drawn from [mu_low, mu_high], the largest from
/// [L_low, L_high] (clamped to be at least the smallest), intermediate ones
/// uniform in between, under a random rotation. Agent ids are taken from
/// `ids` (size n_regular) or default to 0..n_regular-1.
CostEnsemble sample_ensemble(const EnsembleSpec& spec, std::span<const AgentId> ids = {});

/// Line-oriented text serialization of a quadratic ensemble with 17
/// significant digits. Throws ConfigError for non-quadratic entries.
void write_ensemble(std::ostream& out, const CostEnsemble& ensemble);
/// Throws ParseError with the offending line.
CostEnsemble read_ensemble(std::istream& in);

}  // namespace redgraf
