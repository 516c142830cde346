#include <cmath>

#include "doctest.h"
#include "redgraf/errors.hpp"
#include "redgraf/random.hpp"
#include "redgraf/theory.hpp"
#include "test_util.hpp"

using namespace redgraf;
using redgraf::test::vec;

namespace {

MinimizerGeometry geometry_2d() {
    MinimizerGeometry g;
    g.x_star = vec({1, 1});
    g.c_star = vec({0.5, 0.5});
    g.r_star = 2.0;
    return g;
}

}  // namespace

TEST_SUITE("theory") {
    TEST_CASE("algorithm parameters") {
        const MinimizerGeometry geo = geometry_2d();
        const auto cwtm = algorithm_params(AlgorithmKind::cwtm, 2, 2, geo);
        CHECK(cwtm.gamma == 2.0);
        CHECK(cwtm.x_c == geo.c_star);
        CHECK(cwtm.required_robustness == 5);
        const auto rvo = algorithm_params(AlgorithmKind::rvo, 2, 2, geo);
        CHECK(rvo.gamma == 1.0);
        CHECK(rvo.required_robustness == 7);
        const Vector y = vec({0.25, 0.75});
        const auto sd = algorithm_params(AlgorithmKind::sdmmfd, 2, 2, geo, y);
        CHECK(sd.gamma == 1.0);
        CHECK(sd.x_c == y);
        CHECK(sd.required_robustness == 11);
        CHECK(algorithm_params(AlgorithmKind::sdfd, 2, 2, geo, y).required_robustness == 5);
        CHECK_THROWS_AS(algorithm_params(AlgorithmKind::sdmmfd, 2, 2, geo), StateError);
        CHECK_THROWS_AS(algorithm_params(AlgorithmKind::sdfd, 2, 2, geo), StateError);
    }

    TEST_CASE("reduction classification examples") {
        // kappa = 2 with mu = 1, L = 2, so alpha_scaled = alpha.
        CHECK(classify_reduction(0.5, 0.4, 1.0, 2.0) == ReductionType::type_i);
        CHECK(classify_reduction(1.2, 0.3, 1.0, 2.0) == ReductionType::type_ii);
        for (double a = 0.01; a <= 0.5; a += 0.01) CHECK(classify_reduction(3.0, a, 1.0, 2.0) == ReductionType::invalid);
        CHECK(classify_reduction(0.5, 0.6, 1.0, 2.0) == ReductionType::invalid);
        CHECK(classify_reduction(0.5, 0.0, 1.0, 2.0) == ReductionType::invalid);
        CHECK(classify_reduction(1.2, 0.1, 1.0, 2.0) == ReductionType::invalid);
        CHECK(classify_reduction(1.2, 0.5, 1.0, 2.0) == ReductionType::type_ii);
        // Equal moduli put the Type-II ceiling at infinity.
        CHECK(classify_reduction(50.0, 1.0, 1.0, 1.0) == ReductionType::type_ii);
        CHECK(to_string(ReductionType::type_i) == "TypeI");
        CHECK(to_string(ReductionType::type_ii) == "TypeII");
        CHECK(to_string(ReductionType::invalid) == "Invalid");
    }

    TEST_CASE("beta") {
        CHECK(beta(0.75, 1.0) == doctest::Approx(0.5));
        CHECK(beta(1.0, 1.0) == 0.0);
        CHECK_THROWS_AS(beta(2.0, 1.0), DomainError);
        CHECK_THROWS_AS(beta(0.0, 1.0), DomainError);
    }

    TEST_CASE("convergence rate examples") {
        CHECK(convergence_rate(1.0, 1.0) == 0.0);
        CHECK(convergence_rate(1.0, 0.75) == doctest::Approx(0.5));
        CHECK(convergence_rate(4.0, 0.9375) == doctest::Approx(0.5));
        CHECK_THROWS_AS(convergence_rate(2.0, 0.3), DomainError);
        CHECK_THROWS_AS(convergence_rate(1.0, 0.0), DomainError);
        CHECK_THROWS_AS(convergence_rate(1.0, 1.5), DomainError);
    }

    TEST_CASE("normalized radius examples") {
        CHECK(normalized_radius(0.0, 0.25) == doctest::Approx(0.5));
        CHECK(normalized_radius(0.0, 1.0) == doctest::Approx(1.0));
        CHECK(normalized_radius(1.0, 0.25) == doctest::Approx(0.5 / (1.0 - std::sqrt(0.75))));
        CHECK(normalized_radius(1.0, 0.25) == doctest::Approx(3.732).epsilon(1e-4));
        CHECK_THROWS_AS(normalized_radius(2.0, 0.5), DomainError);
    }

    TEST_CASE("normalized consensus diameter examples") {
        CHECK(normalized_consensus_diameter(1.0, 0.0, 1.0) == doctest::Approx(1.0));
        CHECK(normalized_consensus_diameter(2.0, 0.0, 0.5) == doctest::Approx(1.0));
        // Equals kappa alpha (1 + sqrt(kappa gamma) R_normalized).
        const double k = 3.0, g = 0.7, a = 0.2;
        CHECK(normalized_consensus_diameter(k, g, a) ==
              doctest::Approx(k * a * (1.0 + std::sqrt(k * g) * normalized_radius(g, a))));
        CHECK_THROWS_AS(normalized_consensus_diameter(2.0, 0.0, 0.75), DomainError);
        CHECK_THROWS_AS(normalized_consensus_diameter(2.0, 2.5, 0.7), DomainError);
        CHECK_THROWS_AS(normalized_consensus_diameter(0.5, 0.0, 0.1), DomainError);
    }

    TEST_CASE("domains") {
        CHECK(in_radius_domain(0.0, 1.0));
        CHECK_FALSE(in_radius_domain(0.0, 0.0));
        CHECK(in_radius_domain(2.0, 0.51));
        CHECK_FALSE(in_radius_domain(2.0, 0.5));
        CHECK_FALSE(in_radius_domain(-1.0, 0.5));
        CHECK(in_diameter_domain(2.0, 1.5, 0.4));
        CHECK_FALSE(in_diameter_domain(2.0, 1.5, 0.3));
        CHECK_FALSE(in_diameter_domain(2.0, 2.0, 0.5));
        CHECK(in_diameter_domain(1.0, 0.3, 1.0));
    }

    TEST_CASE("gradient bound examples") {
        const auto g = gradient_bound_G(AlgorithmKind::rvo, 1.0, 1.0, 1.0, 1.0, 2);
        CHECK(g.value == doctest::Approx(2.0));
        CHECK_FALSE(g.contraction_only);
        CHECK(gradient_bound_G(AlgorithmKind::cwtm, 0.0, 1.5, 1.0, 0.6, 2).value == 0.0);
        CHECK(gradient_bound_G(AlgorithmKind::cwtm, 1.3, 2.0, 1.0, 0.3, 1).value ==
              doctest::Approx(gradient_bound_G(AlgorithmKind::rvo, 1.3, 2.0, 1.0, 0.3, 1).value));
        CHECK(gradient_bound_G(AlgorithmKind::sdfd, 1.0, 2.0, 1.0, 0.3, 2).contraction_only);
        CHECK(gradient_bound_G(AlgorithmKind::sdfd, 1.0, 2.0, 1.0, 0.3, 2).value ==
              doctest::Approx(gradient_bound_G(AlgorithmKind::sdmmfd, 1.0, 2.0, 1.0, 0.3, 2).value));
        // CWTM with d = 4: beta sqrt(4) >= 1 for small steps.
        CHECK_THROWS_AS(gradient_bound_G(AlgorithmKind::cwtm, 1.0, 2.0, 1.0, 0.1, 4), DomainError);
    }

    TEST_CASE("r_c bound examples") {
        CHECK(r_c_bound(AlgorithmKind::cwtm, 3.0, 0.0, 2) == 3.0);
        CHECK(r_c_bound(AlgorithmKind::rvo, 3.0, 0.5, 2) == 3.0);
        CHECK(r_c_bound(AlgorithmKind::sdmmfd, 1.0, 0.0, 4) == doctest::Approx(3.0));
        CHECK(r_c_bound(AlgorithmKind::sdfd, 1.0, 1.0, 4) == doctest::Approx(5.0));
        for (AlgorithmKind k : {AlgorithmKind::sdmmfd, AlgorithmKind::sdfd, AlgorithmKind::cwtm, AlgorithmKind::rvo})
            CHECK(r_c_bound(k, 0.0, 0.0, 3) == 0.0);
    }

    TEST_CASE("minimizer containment examples") {
        const CostEnsemble one({{0, std::make_shared<QuadraticCost>(vec({2, 3}), Matrix::Identity(2, 2))}});
        const auto g1 = global_minimizer(one);
        CHECK(check_minimizer_containment(g1, g1.c_star, 0.0, one.kappa()));

        const CostEnsemble two({{0, std::make_shared<QuadraticCost>(vec({0, 0}), Matrix::Identity(2, 2))},
                                {1, std::make_shared<QuadraticCost>(vec({2, 0}), Matrix::Identity(2, 2))}});
        const auto g2 = global_minimizer(two);
        CHECK(check_minimizer_containment(g2, vec({1, 0}), 1.0, 1.0));
        CHECK_FALSE(check_minimizer_containment(g2, vec({5, 0}), 1.0, 1.0));

        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const CostEnsemble e = sample_ensemble({2, 10, 5.0, 0.3, 1.0, 1.0, 6.0, seed});
            const auto g = global_minimizer(e);
            CHECK(check_minimizer_containment(g, g.c_star, g.r_star, e.kappa()));
        }
    }

    TEST_CASE("h monotonicity examples") {
        CHECK(check_h_monotonicity(2.0, 200));
        CHECK(check_h_monotonicity(0.5, 200));
        CHECK(check_h_monotonicity(0.0, 200));
        CHECK(check_h_monotonicity(1.0, 200));
        CHECK_THROWS_AS(check_h_monotonicity(-0.5, 10), DomainError);
        CHECK_THROWS_AS(check_h_monotonicity(1.0, 2), DomainError);
    }

    TEST_CASE("raw and normalized convergence radius agree") {
        Rng rng(2718);
        for (int trial = 0; trial < 1000; ++trial) {
            const double gamma = rng.uniform(0.0, 3.0);
            const double mu = rng.uniform(0.1, 2.0);
            const double kappa = rng.uniform(1.0, 6.0);
            const double lo = std::max(0.0, 1.0 - 1.0 / gamma);
            const double a = rng.uniform(lo + 1e-3 * (1.0 - lo), 1.0);
            const double r_c = rng.uniform(0.0, 10.0);
            const double raw = radius_bound(r_c, a / mu, mu, kappa * mu, gamma);
            const double norm = r_c * std::sqrt(kappa) * normalized_radius(gamma, a);
            CHECK(std::abs(raw - norm) <= 1e-12 * std::max(1.0, norm));
        }
    }

    TEST_CASE("rate decreases with the scaled step and stays below one for valid reductions") {
        for (double gamma : {0.0, 0.3, 1.0, 1.7, 3.0}) {
            const double lo = std::max(0.0, 1.0 - 1.0 / gamma);
            double prev = 2.0;
            for (int i = 1; i <= 100; ++i) {
                const double a = lo + (1.0 - lo) * i / 100.0;
                const double r = convergence_rate(gamma, a);
                if (gamma > 0.0) CHECK(r < prev);
                prev = r;
            }
        }
        Rng rng(9);
        for (int trial = 0; trial < 2000; ++trial) {
            const double mu = rng.uniform(0.1, 2.0);
            const double L = mu * rng.uniform(1.0, 5.0);
            const double gamma = rng.uniform(0.0, 3.0);
            const double alpha = rng.uniform(0.0, 1.2 / L);
            if (classify_reduction(gamma, alpha, mu, L) != ReductionType::invalid)
                CHECK(convergence_rate(gamma, alpha * mu) < 1.0);
        }
    }

    TEST_CASE("normalized radius follows the h pattern") {
        for (double gamma : {0.0, 0.25, 0.5, 0.8}) {
            const double peak = 1.0 - gamma;
            double prev = 0.0;
            for (int i = 1; i <= 200; ++i) {
                const double a = i / 200.0;
                const double r = normalized_radius(gamma, a);
                if (a <= peak + 1e-12)
                    CHECK(r > prev);
                else
                    CHECK(r < prev);
                prev = r;
            }
        }
        for (double gamma : {1.0, 1.5, 2.0}) {
            const double lo = 1.0 - 1.0 / gamma;
            double prev = 1e300;
            for (int i = 1; i <= 200; ++i) {
                const double r = normalized_radius(gamma, lo + (1.0 - lo) * i / 200.0);
                CHECK(r < prev);
                prev = r;
            }
        }
    }

    TEST_CASE("normalized consensus diameter increases with kappa and gamma") {
        for (double a : {0.05, 0.1, 0.2}) {
            for (double gamma : {0.0, 0.5, 0.9}) {
                double prev = 0.0;
                for (double kappa = 1.0; kappa <= 1.0 / a; kappa += 0.25) {
                    const double v = normalized_consensus_diameter(kappa, gamma, a);
                    CHECK(v > prev);
                    prev = v;
                }
            }
            double prev = 0.0;
            for (double gamma = 0.0; gamma < 1.0; gamma += 0.05) {
                const double v = normalized_consensus_diameter(3.0, gamma, a);
                CHECK(v >= prev);
                prev = v;
            }
        }
    }

    TEST_CASE("small step asymptotics") {
        const double eps = 1e-6;
        const double kappa = 2.0;
        // gamma in [0, 1): R ~ sqrt(a) / (1 - sqrt(gamma)), D ~ kappa a.
        CHECK(normalized_radius(0.5, eps) / (std::sqrt(eps) / (1.0 - std::sqrt(0.5))) == doctest::Approx(1.0).epsilon(0.01));
        CHECK(normalized_consensus_diameter(kappa, 0.5, eps) / (kappa * eps) == doctest::Approx(1.0).epsilon(0.01));
        // gamma = 1: R ~ 2 / sqrt(a), D ~ 2 kappa^1.5 sqrt(a).
        CHECK(normalized_radius(1.0, eps) / (2.0 / std::sqrt(eps)) == doctest::Approx(1.0).epsilon(0.01));
        CHECK(normalized_consensus_diameter(kappa, 1.0, eps) / (2.0 * std::pow(kappa, 1.5) * std::sqrt(eps)) ==
              doctest::Approx(1.0).epsilon(0.01));
        // gamma > 1 near the left end a = 1 - 1/gamma + h.
        const double gamma = 1.5, lo = 1.0 - 1.0 / gamma;
        CHECK(normalized_radius(gamma, lo + eps) / (2.0 / gamma * std::sqrt(lo) / eps) == doctest::Approx(1.0).epsilon(0.01));
        CHECK(normalized_consensus_diameter(kappa, gamma, lo + eps) /
                  (2.0 * std::sqrt(1.0 / gamma) * std::pow(kappa * lo, 1.5) / eps) ==
              doctest::Approx(1.0).epsilon(0.01));
    }

    TEST_CASE("compute_bounds invariants") {
        const MinimizerGeometry geo = geometry_2d();
        BoundsInput in;
        in.kind = AlgorithmKind::rvo;
        in.d = 2;
        in.F = 2;
        in.alpha = 0.1;
        in.mu = 1.0;
        in.L = 4.0;
        const TheoryBounds b = compute_bounds(in, geo);
        CHECK(b.beta * b.beta + in.alpha * in.mu == doctest::Approx(1.0).epsilon(1e-15));
        // gamma = 1 is never Type-I.
        CHECK(b.reduction == ReductionType::type_ii);
        CHECK(b.gamma == 1.0);
        CHECK(b.rate == doctest::Approx(b.beta));
        CHECK(b.rate < 1.0);
        CHECK(b.r_c == geo.r_star);
        CHECK(b.R_star == doctest::Approx(b.r_c * std::sqrt(in.alpha * in.L) / (1.0 - b.rate)));
        CHECK(b.required_robustness == 7);
        CHECK(b.D_star_in_domain);
        CHECK_FALSE(b.D_star.has_value());

        in.rho = 2.0;
        in.lambda = 0.5;
        in.r_c = 1.0;
        const TheoryBounds c = compute_bounds(in, geo);
        REQUIRE(c.D_star.has_value());
        CHECK(*c.D_star == doctest::Approx(consensus_diameter(1.0, 0.1, 1.0, 4.0, 1.0, 2, 2.0, 0.5)));
        CHECK(*c.D_star ==
              doctest::Approx(2.0 * 1.0 * std::sqrt(2.0) / 0.5 * c.D_star_normalized));

        in.kind = AlgorithmKind::cwtm;
        in.d = 3;
        const TheoryBounds bad = compute_bounds(in, geo);
        CHECK(bad.reduction == ReductionType::invalid);
        CHECK(bad.R_star == 0.0);

        in.kind = AlgorithmKind::sdmmfd;
        in.d = 2;
        in.y_inf = vec({0, 0});
        in.r_c.reset();
        const TheoryBounds s = compute_bounds(in, geo);
        CHECK(s.r_c == doctest::Approx(std::sqrt(2.0) * 2.0 + 2.0));
        CHECK(s.x_c == vec({0, 0}));

        BoundsInput full;
        full.alpha = 1.0;
        full.mu = 1.0;
        full.L = 1.0;
        full.kind = AlgorithmKind::rvo;
        full.d = 1;
        const TheoryBounds t = compute_bounds(full, geo);
        CHECK(t.beta == 0.0);
        CHECK(t.rate == 0.0);
        CHECK(t.R_star == doctest::Approx(geo.r_star));
    }
}
