#include <cmath>

#include "doctest.h"
#include "redgraf/errors.hpp"
#include "redgraf/metrics.hpp"
#include "redgraf/random.hpp"
#include "test_util.hpp"

using namespace redgraf;
using redgraf::test::scalar;
using redgraf::test::vec;

TEST_SUITE("metrics") {
    TEST_CASE("3-4-5 states: diameter and mean") {
        const std::vector<Vector> x{vec({0, 0}), vec({3, 4}), vec({100, 100})};
        const IdSet regular{0, 1};
        CHECK(diameter(x, regular) == doctest::Approx(5.0));
        CHECK(regular_mean(x, regular) == vec({1.5, 2}));
        CHECK(max_distance(x, regular, vec({0, 0})) == doctest::Approx(5.0));
        CHECK(diameter(x, IdSet{0}) == 0.0);
    }

    TEST_CASE("round metrics at the minimizer and for a symmetric pair") {
        const CostEnsemble e({{0, std::make_shared<QuadraticCost>(scalar(0.0), Matrix::Identity(1, 1))},
                              {1, std::make_shared<QuadraticCost>(scalar(2.0), Matrix::Identity(1, 1))}});
        const MinimizerGeometry geo = global_minimizer(e);
        const IdSet regular{0, 1};
        const std::vector<Vector> at{geo.x_star, geo.x_star};
        const std::vector<Vector> zero{scalar(0.0), scalar(0.0)};
        const RoundRecord a = round_metrics(0, at, at, zero, regular, e, geo, geo.c_star);
        CHECK(a.dist_to_xstar == 0.0);
        CHECK(a.optimality_gap == doctest::Approx(0.0));
        CHECK(a.diameter == 0.0);

        const std::vector<Vector> pair{scalar(0.0), scalar(2.0)};
        const std::vector<Vector> grads{scalar(-1.0), scalar(3.0)};
        const RoundRecord b = round_metrics(4, pair, pair, grads, regular, e, geo, geo.c_star);
        CHECK(b.k == 4);
        CHECK(b.mean[0] == doctest::Approx(1.0));
        CHECK(b.dist_to_xstar == doctest::Approx(0.0));
        CHECK(b.optimality_gap == doctest::Approx(0.0));
        CHECK(b.diameter == doctest::Approx(2.0));
        CHECK(b.max_grad_norm == doctest::Approx(3.0));
        CHECK(b.max_dist_to_xstar == doctest::Approx(1.0));
        CHECK(b.gamma_eff == doctest::Approx(1.0));
    }

    TEST_CASE("effective gamma examples") {
        const std::vector<Vector> x{vec({1, 0}), vec({0, 2})};
        const IdSet regular{0, 1};
        const Vector c = vec({0, 0});
        CHECK(effective_gamma(x, x, regular, c) == doctest::Approx(1.0));
        const std::vector<Vector> at_center{c, c};
        CHECK(effective_gamma(x, at_center, regular, c) == 0.0);
        CHECK(effective_gamma(at_center, x, regular, c) == 1.0);
        const std::vector<Vector> half{vec({0.5, 0}), vec({0, 1})};
        CHECK(effective_gamma(x, half, regular, c) == doctest::Approx(0.25));
    }

    TEST_CASE("diameter is permutation invariant and consistent with the triangle inequality") {
        Rng rng(3);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<Vector> x;
            for (int i = 0; i < 8; ++i) x.push_back(vec({rng.uniform(-5, 5), rng.uniform(-5, 5)}));
            IdSet all{0, 1, 2, 3, 4, 5, 6, 7};
            const double d = diameter(x, all);
            std::vector<Vector> y = x;
            for (std::size_t i = y.size(); i > 1; --i) std::swap(y[i - 1], y[rng.below(i)]);
            CHECK(diameter(y, all) == doctest::Approx(d));
            for (std::size_t i = 0; i < 8; ++i)
                for (std::size_t j = 0; j < 8; ++j) CHECK((x[i] - x[j]).norm() <= d + 1e-12);
            // Any pair is within the sum of distances to a third agent.
            CHECK(d <= 2.0 * max_distance(x, all, x[0]) + 1e-12);
        }
    }

    TEST_CASE("baselines") {
        const CostEnsemble e({{0, std::make_shared<QuadraticCost>(scalar(0.0), Matrix::Identity(1, 1))},
                              {1, std::make_shared<QuadraticCost>(scalar(4.0), 3.0 * Matrix::Identity(1, 1))}});
        const MinimizerGeometry geo = global_minimizer(e);
        const Baselines b = baselines(e, geo);
        CHECK(b.min_local_dist == doctest::Approx(1.0));
        // f(4) - f* = 4 - 3 = 1 and f(0) - f* = 12 - 3 = 9.
        CHECK(b.min_local_gap == doctest::Approx(1.0));
    }

    TEST_CASE("geometric rate fits") {
        std::vector<double> e;
        for (int k = 0; k < 100; ++k) e.push_back(std::pow(2.0, -k));
        CHECK(fit_geometric_rate(e, 5, 20) == doctest::Approx(0.5));

        const std::vector<double> flat(100, 5.0);
        CHECK_THROWS_AS(fit_geometric_rate(flat), FitError);

        std::vector<double> shifted;
        for (int k = 0; k < 200; ++k) shifted.push_back(3.0 * std::pow(0.9, k) + 1.0);
        CHECK(std::abs(fit_geometric_rate(shifted) - 0.9) <= 0.02);

        CHECK_THROWS_AS(fit_geometric_rate(std::vector<double>{}), FitError);
        CHECK_THROWS_AS(fit_geometric_rate(std::vector<double>{1.0, 0.5}, 5, 50), FitError);
    }

    TEST_CASE("exponential decay fit") {
        std::vector<double> e;
        for (int k = 0; k < 30; ++k) e.push_back(3.0 * std::exp(-0.7 * k));
        e.push_back(0.0);
        e.push_back(1.0);
        const ExponentialDecay fit = fit_exponential_decay(e);
        CHECK(fit.c1 == doctest::Approx(3.0));
        CHECK(fit.c2 == doctest::Approx(0.7));
        CHECK(fit.xi == doctest::Approx(std::exp(-0.7)));
        CHECK_THROWS_AS(fit_exponential_decay(std::vector<double>{1.0, 0.5, 0.0}), FitError);
        CHECK_THROWS_AS(fit_exponential_decay(std::vector<double>{}), FitError);
    }

    TEST_CASE("median and aggregate") {
        CHECK(median({3, 1, 2}) == 2.0);
        CHECK(median({4, 1, 2, 3}) == 2.5);
        CHECK_THROWS_AS(median({}), EmptyInputError);
        const MeanStd m = aggregate({{1, 2}, {3, 2}, {5, 2}});
        CHECK(m.mean == std::vector<double>{3, 2});
        CHECK(m.std[0] == doctest::Approx(2.0));
        CHECK(m.std[1] == 0.0);
        const MeanStd single = aggregate({{1, 7}});
        CHECK(single.std == std::vector<double>{0, 0});
        CHECK_THROWS_AS(aggregate({}), EmptyInputError);
        CHECK_THROWS_AS(aggregate({{1, 2}, {1}}), DimensionError);
    }

    TEST_CASE("run metrics over a short CWTM run") {
        const RobustGraph g = generate_robust(12, 5, 1);
        const AdversaryPlacement p = random_f_local_placement(g.graph, 1, kMaxByzantine, 1);
        const IdSet regular = p.regular(12);
        const CostEnsemble e = sample_ensemble({2, regular.size(), 3.0, 0.5, 1.0, 1.0, 2.0, 1}, regular);
        const MinimizerGeometry geo = global_minimizer(e);
        RunOptions o;
        o.rounds = 40;
        o.alpha = 0.1;
        o.init_box = {vec({-5, -5}), vec({5, 5})};
        o.allow_any_step = true;
        o.certificate = &g.certificate;
        const RunTrace t = run(AlgorithmKind::cwtm, g.graph, e, p, {}, o);
        const RunMetrics m = compute_run_metrics(t, e, geo, 1);
        REQUIRE(m.rounds.size() == 41);
        CHECK(m.gamma == 2.0);
        CHECK(m.x_c == geo.c_star);
        CHECK_FALSE(m.y_inf.has_value());
        for (const auto& r : m.rounds) {
            CHECK(r.optimality_gap >= -1e-9);
            CHECK(r.diameter >= 0.0);
            if (r.k < 40) CHECK(r.gamma_eff <= 2.0 + 1e-9);
            CHECK(r.dist_to_xstar == doctest::Approx((r.mean - geo.x_star).norm()));
        }
        CHECK(m.rounds.front().k == 0);
        CHECK(m.rounds.back().k == 40);
        CHECK(std::isnan(m.rounds.back().gamma_eff));
    }
}
