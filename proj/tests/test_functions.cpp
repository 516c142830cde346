#include <sstream>

#include "doctest.h"
#include "redgraf/errors.hpp"
#include "redgraf/functions.hpp"
#include "redgraf/random.hpp"
#include "test_util.hpp"

using namespace redgraf;
using redgraf::test::scalar;
using redgraf::test::vec;

namespace {

CostPtr quad1(double m, double q, double b = 0.0) {
    return std::make_shared<QuadraticCost>(scalar(m), Matrix::Constant(1, 1, q), b);
}

Vector random_point(Rng& rng, std::size_t d, double scale) {
    Vector x(static_cast<Eigen::Index>(d));
    for (auto& v : x) v = rng.uniform(-scale, scale);
    return x;
}

std::vector<CostPtr> sample_functions() {
    std::vector<CostPtr> out;
    EnsembleSpec spec{3, 4, 5.0, 0.5, 1.5, 2.0, 6.0, 99};
    const CostEnsemble ensemble = sample_ensemble(spec);
    for (const auto& e : ensemble.entries()) out.push_back(e.cost);
    out.push_back(std::make_shared<LogCoshCost>(vec({1.0, -2.0, 0.5}), 0.7, 2.0));
    return out;
}

}  // namespace

TEST_SUITE("functions") {
    TEST_CASE("eval_and_grad at the minimizer returns the offset and a zero gradient") {
        const auto f = quad1(5.0, 1.0, 3.25);
        const auto r = eval_and_grad(*f, scalar(5.0));
        CHECK(r.value == 3.25);
        CHECK(r.gradient[0] == 0.0);
    }

    TEST_CASE("eval_and_grad matches hand evaluation of the quadratic form") {
        const auto r = eval_and_grad(*quad1(5.0, 1.0), scalar(0.0));
        CHECK(r.value == doctest::Approx(12.5));
        CHECK(r.gradient[0] == doctest::Approx(-5.0));

        Matrix Q = Matrix::Zero(2, 2);
        Q(0, 0) = 1.0;
        Q(1, 1) = 3.0;
        const QuadraticCost g(vec({0.0, 0.0}), Q);
        const auto s = eval_and_grad(g, vec({1.0, 1.0}));
        CHECK(s.value == doctest::Approx(2.0));
        CHECK(s.gradient[0] == doctest::Approx(1.0));
        CHECK(s.gradient[1] == doctest::Approx(3.0));
    }

    TEST_CASE("eval_and_grad rejects a dimension mismatch") {
        CHECK_THROWS_AS(eval_and_grad(*quad1(0.0, 1.0), vec({1.0, 2.0})), DimensionError);
    }

    TEST_CASE("quadratic moduli are the extreme eigenvalues") {
        Matrix Q(2, 2);
        Q << 2.0, 1.0, 1.0, 2.0;
        const QuadraticCost f(vec({1.0, 1.0}), Q);
        CHECK(f.mu() == doctest::Approx(1.0));
        CHECK(f.L() == doctest::Approx(3.0));
        CHECK(f.gradient(vec({1.0, 1.0})).norm() == 0.0);
        CHECK(*f.minimizer() == vec({1.0, 1.0}));
    }

    TEST_CASE("quadratic construction rejects invalid curvature") {
        Matrix asym(2, 2);
        asym << 1.0, 0.5, 0.0, 1.0;
        CHECK_THROWS_AS(QuadraticCost(vec({0.0, 0.0}), asym), ConfigError);
        Matrix indefinite(2, 2);
        indefinite << 1.0, 0.0, 0.0, -1.0;
        CHECK_THROWS_AS(QuadraticCost(vec({0.0, 0.0}), indefinite), ConfigError);
        CHECK_THROWS_AS(QuadraticCost(vec({0.0, 0.0}), Matrix::Identity(3, 3)), DimensionError);
    }

    TEST_CASE("ensemble moduli and kappa") {
        const CostEnsemble e({{0, quad1(0.0, 2.0)}, {3, quad1(1.0, 0.5)}, {1, quad1(2.0, 4.0)}});
        CHECK(e.mu_tilde() == 0.5);
        CHECK(e.L_tilde() == 4.0);
        CHECK(e.kappa() == 8.0);
        CHECK(e.entries()[0].id == 0);
        CHECK(e.entries()[2].id == 3);
        CHECK(e.find(2) == nullptr);
        CHECK(e.contains(1));
        CHECK_THROWS_AS(CostEnsemble({}), EmptyInputError);
        CHECK_THROWS_AS(CostEnsemble({{0, quad1(0.0, 1.0)}, {0, quad1(1.0, 1.0)}}), DimensionError);
    }

    TEST_CASE("global minimizer of symmetric quadratics is the midpoint") {
        const CostEnsemble e({{0, quad1(0.0, 1.0)}, {1, quad1(4.0, 1.0)}});
        CHECK(global_minimizer(e).x_star[0] == doctest::Approx(2.0));
    }

    TEST_CASE("global minimizer solves the weighted normal equation") {
        const CostEnsemble e({{0, quad1(0.0, 1.0)}, {1, quad1(4.0, 3.0)}});
        const auto g = global_minimizer(e);
        CHECK(g.x_star[0] == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(e.average_gradient(g.x_star).norm() <= 1e-8);
        // f* = (1/2)(1/2 * 9 + 3/2 * 1) = 3
        CHECK(g.f_star == doctest::Approx(3.0));
        CHECK(g.c_star[0] == doctest::Approx(2.0));
        CHECK(g.r_star == doctest::Approx(2.0));
    }

    TEST_CASE("single agent: the global minimizer is the local one") {
        const CostEnsemble e({{0, quad1(1.5, 2.0)}});
        const auto g = global_minimizer(e);
        CHECK(g.x_star[0] == doctest::Approx(1.5));
        CHECK(g.r_star == 0.0);
    }

    TEST_CASE("generic gradient descent agrees with the closed form") {
        const CostEnsemble e = sample_ensemble({3, 6, 4.0, 0.5, 1.0, 2.0, 5.0, 7});
        const auto exact = global_minimizer(e);
        MinimizerOptions opt;
        opt.force_gradient_descent = true;
        const auto gd = global_minimizer(e, opt);
        CHECK((exact.x_star - gd.x_star).norm() <= 1e-7);
        CHECK(e.average_gradient(gd.x_star).norm() < 1e-10);
    }

    TEST_CASE("non-quadratic ensemble uses gradient descent") {
        const CostEnsemble e({{0, std::make_shared<LogCoshCost>(vec({0.0, 1.0}), 1.0, 0.5)},
                              {1, std::make_shared<LogCoshCost>(vec({2.0, 1.0}), 1.0, 0.5)}});
        const auto g = global_minimizer(e);
        CHECK(g.x_star[0] == doctest::Approx(1.0));
        CHECK(g.x_star[1] == doctest::Approx(1.0));
        CHECK(e.average_gradient(g.x_star).norm() < 1e-10);
    }

    TEST_CASE("gradient descent reports non-convergence") {
        const CostEnsemble e({{0, std::make_shared<LogCoshCost>(vec({0.0}), 1.0, 0.5)},
                              {1, std::make_shared<LogCoshCost>(vec({50.0}), 3.0, 0.5)}});
        MinimizerOptions opt;
        opt.max_iterations = 1;
        CHECK_THROWS_AS(global_minimizer(e, opt), ConvergenceError);
    }

    TEST_CASE("minimizer geometry: every local minimizer lies in the ball") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const CostEnsemble e = sample_ensemble({2, 10, 5.0, 1.0, 2.0, 2.0, 4.0, seed});
            const auto g = global_minimizer(e);
            for (const auto& m : g.local_minimizers) CHECK((m - g.c_star).norm() <= g.r_star + 1e-9);
            CHECK(e.average_gradient(g.x_star).norm() <= 1e-8);
        }
    }

    TEST_CASE("enclosing ball examples") {
        const std::vector<Vector> two{vec({0, 0}), vec({2, 0})};
        auto b = enclosing_ball(two);
        CHECK(b.center[0] == doctest::Approx(1.0));
        CHECK(b.center[1] == doctest::Approx(0.0));
        CHECK(b.radius == doctest::Approx(1.0));
        CHECK(b.minimal);

        const std::vector<Vector> one{vec({0, 0})};
        b = enclosing_ball(one);
        CHECK(b.center.norm() == 0.0);
        CHECK(b.radius == 0.0);

        const std::vector<Vector> three{vec({0, 0}), vec({2, 0}), vec({1, 1})};
        b = enclosing_ball(three);
        CHECK(b.center[0] == doctest::Approx(1.0));
        CHECK(b.center[1] == doctest::Approx(0.0));
        CHECK(b.radius == doctest::Approx(1.0));

        CHECK_THROWS_AS(enclosing_ball(std::vector<Vector>{}), EmptyInputError);
    }

    TEST_CASE("enclosing ball is no larger than any brute-force candidate") {
        Rng rng(5);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<Vector> pts;
            for (int i = 0; i < 7; ++i) pts.push_back(random_point(rng, 2, 3.0));
            const Ball b = enclosing_ball(pts);
            double best = 1e300;
            auto try_ball = [&](const Vector& c) {
                double r = 0.0;
                for (const auto& p : pts) r = std::max(r, (p - c).norm());
                best = std::min(best, r);
            };
            for (std::size_t i = 0; i < pts.size(); ++i)
                for (std::size_t j = i + 1; j < pts.size(); ++j) {
                    try_ball((pts[i] + pts[j]) / 2.0);
                    for (std::size_t k = j + 1; k < pts.size(); ++k) {
                        // Circumcentre of the triangle.
                        const Vector a = pts[i], bb = pts[j], c = pts[k];
                        const double dd = 2.0 * (a[0] * (bb[1] - c[1]) + bb[0] * (c[1] - a[1]) + c[0] * (a[1] - bb[1]));
                        if (std::abs(dd) < 1e-12) continue;
                        const double ux = (a.squaredNorm() * (bb[1] - c[1]) + bb.squaredNorm() * (c[1] - a[1]) +
                                           c.squaredNorm() * (a[1] - bb[1])) / dd;
                        const double uy = (a.squaredNorm() * (c[0] - bb[0]) + bb.squaredNorm() * (a[0] - c[0]) +
                                           c.squaredNorm() * (bb[0] - a[0])) / dd;
                        try_ball(vec({ux, uy}));
                    }
                }
            for (const auto& p : pts) CHECK((p - b.center).norm() <= b.radius + 1e-9);
            CHECK(b.radius <= best + 1e-9);
        }
    }

    TEST_CASE("enclosing ball in high dimension is a flagged bounding ball") {
        Rng rng(1);
        std::vector<Vector> pts;
        for (int i = 0; i < 6; ++i) pts.push_back(random_point(rng, 5, 1.0));
        const Ball b = enclosing_ball(pts);
        CHECK_FALSE(b.minimal);
        for (const auto& p : pts) CHECK((p - b.center).norm() <= b.radius + 1e-9);
    }

    TEST_CASE("sample_ensemble with zero spread puts every minimizer at the origin") {
        const CostEnsemble e = sample_ensemble({2, 5, 0.0, 1.0, 2.0, 3.0, 4.0, 11});
        for (const auto& en : e.entries()) CHECK(en.cost->minimizer()->norm() == 0.0);
        CHECK(global_minimizer(e).r_star == 0.0);
    }

    TEST_CASE("sample_ensemble is deterministic in the seed") {
        const EnsembleSpec spec{2, 5, 3.0, 1.0, 2.0, 3.0, 4.0, 1234};
        std::ostringstream a, b;
        write_ensemble(a, sample_ensemble(spec));
        write_ensemble(b, sample_ensemble(spec));
        CHECK(a.str() == b.str());
        EnsembleSpec other = spec;
        other.seed = 1235;
        std::ostringstream c;
        write_ensemble(c, sample_ensemble(other));
        CHECK(a.str() != c.str());
    }

    TEST_CASE("unit modulus ranges give identity curvature") {
        const CostEnsemble e = sample_ensemble({2, 4, 2.0, 1.0, 1.0, 1.0, 1.0, 3});
        for (const auto& en : e.entries()) {
            const auto& q = dynamic_cast<const QuadraticCost&>(*en.cost);
            CHECK((q.curvature() - Matrix::Identity(2, 2)).norm() <= 1e-12);
        }
    }

    TEST_CASE("sampled moduli fall in the requested ranges") {
        const CostEnsemble e = sample_ensemble({3, 8, 2.0, 0.5, 1.0, 3.0, 6.0, 8});
        for (const auto& en : e.entries()) {
            CHECK(en.cost->mu() >= 0.5 - 1e-9);
            CHECK(en.cost->mu() <= 1.0 + 1e-9);
            CHECK(en.cost->L() >= 3.0 - 1e-9);
            CHECK(en.cost->L() <= 6.0 + 1e-9);
        }
    }

    TEST_CASE("sample_ensemble rejects invalid ranges") {
        CHECK_THROWS_AS(sample_ensemble({2, 4, 1.0, 0.0, 1.0, 1.0, 1.0, 0}), ConfigError);
        CHECK_THROWS_AS(sample_ensemble({2, 4, 1.0, 2.0, 1.0, 1.0, 1.0, 0}), ConfigError);
        CHECK_THROWS_AS(sample_ensemble({2, 4, 1.0, 3.0, 3.0, 1.0, 2.0, 0}), ConfigError);
        CHECK_THROWS_AS(sample_ensemble({2, 4, -1.0, 1.0, 1.0, 1.0, 1.0, 0}), ConfigError);
    }

    TEST_CASE("analytic gradients match central finite differences") {
        Rng rng(17);
        const double h = 1e-6;
        for (const auto& f : sample_functions()) {
            for (int trial = 0; trial < 20; ++trial) {
                const Vector x = random_point(rng, f->dim(), 6.0);
                const Vector g = f->gradient(x);
                Vector fd(x.size());
                for (Eigen::Index l = 0; l < x.size(); ++l) {
                    Vector xp = x, xm = x;
                    xp[l] += h;
                    xm[l] -= h;
                    fd[l] = (f->value(xp) - f->value(xm)) / (2.0 * h);
                }
                CHECK((fd - g).norm() <= 1e-5 * std::max(1.0, g.norm()));
            }
        }
    }

    TEST_CASE("strong convexity and gradient Lipschitz inequalities hold on random pairs") {
        Rng rng(23);
        for (const auto& f : sample_functions()) {
            int sc_fail = 0, lip_fail = 0;
            for (int trial = 0; trial < 1000; ++trial) {
                const Vector a = random_point(rng, f->dim(), 8.0);
                const Vector b = random_point(rng, f->dim(), 8.0);
                const Vector gb = f->gradient(b);
                const double lower = f->value(b) + gb.dot(a - b) + 0.5 * f->mu() * (a - b).squaredNorm();
                if (f->value(a) < lower - 1e-9 * std::max(1.0, std::abs(lower))) ++sc_fail;
                if ((f->gradient(a) - gb).norm() > f->L() * (a - b).norm() * (1.0 + 1e-12) + 1e-12) ++lip_fail;
            }
            CHECK(sc_fail == 0);
            CHECK(lip_fail == 0);
        }
    }

    TEST_CASE("ensemble text serialization round-trips exactly") {
        const CostEnsemble e = sample_ensemble({3, 5, 4.0, 0.3, 0.9, 2.0, 7.0, 77});
        std::ostringstream out;
        write_ensemble(out, e);
        std::istringstream in(out.str());
        const CostEnsemble back = read_ensemble(in);
        REQUIRE(back.size() == e.size());
        for (std::size_t i = 0; i < e.size(); ++i) {
            const auto& a = dynamic_cast<const QuadraticCost&>(*e.entries()[i].cost);
            const auto& b = dynamic_cast<const QuadraticCost&>(*back.entries()[i].cost);
            CHECK(e.entries()[i].id == back.entries()[i].id);
            CHECK(a.center() == b.center());
            CHECK(a.curvature() == b.curvature());
            CHECK(a.offset() == b.offset());
        }
    }

    TEST_CASE("malformed ensemble text reports the line") {
        const CostEnsemble e = sample_ensemble({1, 2, 1.0, 1.0, 1.0, 1.0, 1.0, 0});
        std::ostringstream out;
        write_ensemble(out, e);
        std::string text = out.str();
        const auto pos = text.find('\n', text.find('\n') + 1);
        text.insert(pos + 1, "garbage line\n");
        std::istringstream in(text);
        try {
            read_ensemble(in);
            FAIL("expected ParseError");
        } catch (const ParseError& err) {
            CHECK(err.line() >= 3);
        }
        CHECK_THROWS_AS(write_ensemble(out, CostEnsemble({{0, std::make_shared<LogCoshCost>(vec({0.0}), 1.0, 1.0)}})),
                        ConfigError);
    }
}
