#include "redgraf/theory.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "redgraf/errors.hpp"

namespace redgraf {

std::string_view to_string(ReductionType type) {
    switch (type) {
        case ReductionType::type_i: return "TypeI";
        case ReductionType::type_ii: return "TypeII";
        case ReductionType::invalid: return "Invalid";
    }
    return "Invalid";
}

AlgorithmParams algorithm_params(AlgorithmKind kind, std::size_t d, std::size_t F, const MinimizerGeometry& geometry,
                                 const std::optional<Vector>& y_inf) {
    AlgorithmParams p;
    p.required_robustness = required_robustness(kind, d, F);
    switch (kind) {
        case AlgorithmKind::cwtm:
            p.x_c = geometry.c_star;
            p.gamma = static_cast<double>(d);
            break;
        case AlgorithmKind::rvo:
            p.x_c = geometry.c_star;
            p.gamma = 1.0;
            break;
        case AlgorithmKind::sdmmfd:
        case AlgorithmKind::sdfd:
            if (!y_inf) throw StateError(std::string(to_string(kind)) + " needs the auxiliary consensus estimate");
            p.x_c = *y_inf;
            p.gamma = 1.0;
            break;
    }
    return p;
}

ReductionType classify_reduction(double gamma, double alpha, double mu, double L) {
    if (!(alpha > 0.0) || !(alpha <= 1.0 / L) || gamma < 0.0) return ReductionType::invalid;
    if (gamma < 1.0) return ReductionType::type_i;
    const double ceiling = mu >= L ? std::numeric_limits<double>::infinity() : 1.0 / (1.0 - mu / L);
    if (gamma < ceiling && alpha > (1.0 / mu) * (1.0 - 1.0 / gamma)) return ReductionType::type_ii;
    return ReductionType::invalid;
}

double beta(double alpha, double mu) {
    const double a = alpha * mu;
    if (!(a > 0.0) || a > 1.0) throw DomainError("beta needs 0 < alpha mu <= 1");
    return std::sqrt(1.0 - a);
}

namespace {

double radius_lower(double gamma) { return gamma > 1.0 ? 1.0 - 1.0 / gamma : 0.0; }

void require_radius_domain(double gamma, double alpha_scaled) {
    if (!in_radius_domain(gamma, alpha_scaled))
        throw DomainError("(gamma, alpha_scaled) = (" + std::to_string(gamma) + ", " + std::to_string(alpha_scaled) +
                          ") outside the convergence domain");
}

double h(double gamma, double s) { return std::sqrt(s) / (1.0 - std::sqrt(gamma) * std::sqrt(1.0 - s)); }

}  // namespace

bool in_radius_domain(double gamma, double alpha_scaled) {
    return gamma >= 0.0 && alpha_scaled > radius_lower(gamma) && alpha_scaled <= 1.0;
}

bool in_diameter_domain(double kappa, double gamma, double alpha_scaled) {
    if (!(kappa >= 1.0) || gamma < 0.0) return false;
    const double right = 1.0 / kappa;
    if (gamma < 1.0) return alpha_scaled > 0.0 && alpha_scaled <= right;
    const double ceiling = kappa == 1.0 ? std::numeric_limits<double>::infinity() : kappa / (kappa - 1.0);
    return gamma < ceiling && alpha_scaled > 1.0 - 1.0 / gamma && alpha_scaled <= right;
}

double convergence_rate(double gamma, double alpha_scaled) {
    require_radius_domain(gamma, alpha_scaled);
    return std::sqrt(gamma) * std::sqrt(1.0 - alpha_scaled);
}

double normalized_radius(double gamma, double alpha_scaled) {
    require_radius_domain(gamma, alpha_scaled);
    return h(gamma, alpha_scaled);
}

double normalized_consensus_diameter(double kappa, double gamma, double alpha_scaled) {
    if (!in_diameter_domain(kappa, gamma, alpha_scaled))
        throw DomainError("(kappa, gamma, alpha_scaled) outside the consensus-diameter domain");
    return kappa * alpha_scaled *
           (1.0 + std::sqrt(kappa * gamma * alpha_scaled) / (1.0 - std::sqrt(gamma) * std::sqrt(1.0 - alpha_scaled)));
}

namespace {

double contraction_denominator(double alpha, double mu, double gamma) {
    const double denom = 1.0 - beta(alpha, mu) * std::sqrt(gamma);
    if (!(denom > 0.0)) throw DomainError("beta sqrt(gamma) >= 1: no contraction");
    return denom;
}

}  // namespace

double radius_bound(double r_c, double alpha, double mu, double L, double gamma) {
    return r_c * std::sqrt(alpha * L) / contraction_denominator(alpha, mu, gamma);
}

double consensus_diameter(double r_c, double alpha, double mu, double L, double gamma, std::size_t d, double rho,
                          double lambda) {
    if (rho < 0.0 || !(lambda > 0.0 && lambda < 1.0)) throw DomainError("rho >= 0 and lambda in (0,1) required");
    const double denom = contraction_denominator(alpha, mu, gamma);
    return alpha * rho * r_c * L * std::sqrt(static_cast<double>(d)) / (1.0 - lambda) *
           (1.0 + std::sqrt(alpha * gamma * L) / denom);
}

GradientBound gradient_bound_G(AlgorithmKind kind, double r_c, double L, double mu, double alpha, std::size_t d) {
    const double gamma = kind == AlgorithmKind::cwtm ? static_cast<double>(d) : 1.0;
    const double denom = contraction_denominator(alpha, mu, gamma);
    GradientBound g;
    g.value = r_c * L * (1.0 + std::sqrt(alpha * gamma * L) / denom);
    g.contraction_only = kind == AlgorithmKind::sdfd;
    return g;
}

double r_c_bound(AlgorithmKind kind, double r_star, double eps_star, std::size_t d) {
    if (uses_auxiliary(kind)) return std::sqrt(static_cast<double>(d)) * (r_star + eps_star) + r_star;
    return r_star;
}

bool check_minimizer_containment(const MinimizerGeometry& geometry, const Vector& x_c, double r_c, double kappa) {
    return (geometry.x_star - x_c).norm() <= kappa * r_c + 1e-9;
}

bool check_h_monotonicity(double gamma, std::size_t grid) {
    if (gamma < 0.0) throw DomainError("gamma must be nonnegative");
    if (grid < 3) throw DomainError("grid needs at least 3 points");
    const double lo = radius_lower(gamma);
    const double peak = gamma < 1.0 ? 1.0 - gamma : lo;
    double prev_s = 0.0, prev_h = 0.0;
    for (std::size_t i = 1; i <= grid; ++i) {
        const double s = lo + (1.0 - lo) * static_cast<double>(i) / static_cast<double>(grid);
        const double value = h(gamma, s);
        if (i > 1) {
            if (s <= peak && !(value > prev_h)) return false;
            if (prev_s >= peak && !(value < prev_h)) return false;
        }
        prev_s = s;
        prev_h = value;
    }
    return true;
}

TheoryBounds compute_bounds(const BoundsInput& in, const MinimizerGeometry& geometry) {
    TheoryBounds b;
    const AlgorithmParams params = algorithm_params(in.kind, in.d, in.F, geometry, in.y_inf);
    b.gamma = params.gamma;
    b.x_c = params.x_c;
    b.required_robustness = params.required_robustness;
    b.r_c = in.r_c ? *in.r_c : r_c_bound(in.kind, geometry.r_star, geometry.eps_star, in.d);
    b.reduction = classify_reduction(b.gamma, in.alpha, in.mu, in.L);
    b.rho = in.rho;
    b.lambda = in.lambda;
    b.xi = in.xi;
    const double kappa = in.L / in.mu;
    const double a = in.alpha * in.mu;
    const bool has_beta = a > 0.0 && a <= 1.0;
    if (has_beta) b.beta = beta(in.alpha, in.mu);
    if (has_beta && b.beta * std::sqrt(b.gamma) < 1.0) {
        b.rate = b.beta * std::sqrt(b.gamma);
        b.R_star = radius_bound(b.r_c, in.alpha, in.mu, in.L, b.gamma);
        const GradientBound g = gradient_bound_G(in.kind, b.r_c, in.L, in.mu, in.alpha, in.d);
        b.G = g.value;
        b.G_contraction_only = g.contraction_only;
        if (in.rho && in.lambda)
            b.D_star = consensus_diameter(b.r_c, in.alpha, in.mu, in.L, b.gamma, in.d, *in.rho, *in.lambda);
    }
    b.D_star_in_domain = in_diameter_domain(kappa, b.gamma, a);
    if (b.D_star_in_domain) b.D_star_normalized = normalized_consensus_diameter(kappa, b.gamma, a);
    return b;
}

}  // namespace redgraf
