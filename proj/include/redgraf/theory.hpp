#pragma once

#include <optional>
#include <string_view>

#include "redgraf/algorithm.hpp"
#include "redgraf/functions.hpp"

namespace redgraf {

// Notation: alpha is the constant step size, mu and L the smallest strong
// convexity modulus and largest Lipschitz constant over the regular agents,
// kappa = L / mu and alpha_scaled = alpha * mu.

enum class ReductionType { type_i, type_ii, invalid };

std::string_view to_string(ReductionType type);

struct AlgorithmParams {
    Vector x_c;
    double gamma = 1.0;
    std::size_t required_robustness = 1;
};

/// Contraction centre and factor: CWTM (c*, d), RVO (c*, 1), SDMMFD and SDFD
/// (y_inf, 1). Throws StateError when y_inf is needed but missing.
AlgorithmParams algorithm_params(AlgorithmKind kind, std::size_t d, std::size_t F, const MinimizerGeometry& geometry,
                                 const std::optional<Vector>& y_inf = std::nullopt);

ReductionType classify_reduction(double gamma, double alpha, double mu, double L);

/// beta = sqrt(1 - alpha mu). Throws DomainError unless 0 < alpha mu <= 1.
double beta(double alpha, double mu);

/// gamma >= 0 and alpha_scaled in (max(0, 1 - 1/gamma), 1].
bool in_radius_domain(double gamma, double alpha_scaled);
/// kappa >= 1 and either gamma in [0,1) with alpha_scaled in (0, 1/kappa], or
/// gamma in [1, kappa/(kappa-1)) with alpha_scaled in (1 - 1/gamma, 1/kappa].
bool in_diameter_domain(double kappa, double gamma, double alpha_scaled);

/// sqrt(gamma) sqrt(1 - alpha_scaled). Throws DomainError outside the radius domain.
double convergence_rate(double gamma, double alpha_scaled);

/// sqrt(alpha_scaled) / (1 - sqrt(gamma) sqrt(1 - alpha_scaled)).
double normalized_radius(double gamma, double alpha_scaled);

/// kappa alpha_scaled (1 + sqrt(kappa gamma alpha_scaled) / (1 - sqrt(gamma) sqrt(1 - alpha_scaled))).
double normalized_consensus_diameter(double kappa, double gamma, double alpha_scaled);

/// R* = r_c sqrt(alpha L) / (1 - beta sqrt(gamma)). Throws DomainError when
/// beta sqrt(gamma) >= 1.
double radius_bound(double r_c, double alpha, double mu, double L, double gamma);

/// alpha rho r_c L sqrt(d) / (1 - lambda) (1 + sqrt(alpha gamma L) / (1 - beta sqrt(gamma))).
double consensus_diameter(double r_c, double alpha, double mu, double L, double gamma, std::size_t d, double rho,
                          double lambda);

struct GradientBound {
    double value = 0.0;
    /// Set for SDFD, whose bound rests on the contraction property alone.
    bool contraction_only = false;
};

/// r_c L (1 + sqrt(alpha gamma L) / (1 - beta sqrt(gamma))) with gamma = d for
/// CWTM and 1 otherwise.
GradientBound gradient_bound_G(AlgorithmKind kind, double r_c, double L, double mu, double alpha, std::size_t d);

/// SDMMFD and SDFD: sqrt(d)(r* + eps*) + r*; CWTM and RVO: r*.
double r_c_bound(AlgorithmKind kind, double r_star, double eps_star, std::size_t d);

/// ||x* - x_c|| <= kappa r_c + 1e-9.
bool check_minimizer_containment(const MinimizerGeometry& geometry, const Vector& x_c, double r_c, double kappa);

/// Samples h(s) = sqrt(s) / (1 - sqrt(gamma) sqrt(1 - s)) on `grid` points and
/// checks the monotonicity pattern: strictly decreasing on (1 - 1/gamma, 1]
/// for gamma >= 1; increasing up to 1 - gamma and decreasing after for
/// gamma < 1. Throws DomainError for gamma < 0 or grid < 3.
bool check_h_monotonicity(double gamma, std::size_t grid);

struct TheoryBounds {
    double beta = 0.0;
    double gamma = 1.0;
    Vector x_c;
    double r_c = 0.0;
    double R_star = 0.0;
    double rate = 0.0;
    double G = 0.0;
    bool G_contraction_only = false;
    double D_star_normalized = 0.0;
    bool D_star_in_domain = false;
    ReductionType reduction = ReductionType::invalid;
    std::optional<double> rho;
    std::optional<double> lambda;
    std::optional<double> xi;
    std::optional<double> D_star;
    std::size_t required_robustness = 1;
};

struct BoundsInput {
    AlgorithmKind kind = AlgorithmKind::cwtm;
    std::size_t d = 1;
    std::size_t F = 0;
    double alpha = 0.0;
    double mu = 1.0;
    double L = 1.0;
    /// Measured r_c; defaults to r_c_bound when absent.
    std::optional<double> r_c;
    std::optional<Vector> y_inf;
    std::optional<double> rho;
    std::optional<double> lambda;
    std::optional<double> xi;
};

/// Evaluates every bound for one configuration. Quantities that need
/// beta sqrt(gamma) < 1 are left at zero when the reduction is invalid.
TheoryBounds compute_bounds(const BoundsInput& in, const MinimizerGeometry& geometry);

}  // namespace redgraf
