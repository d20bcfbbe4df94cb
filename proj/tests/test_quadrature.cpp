#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oseen/poly.hpp"
#include "oseen/quadrature.hpp"

using namespace oseen;

TEST_CASE("monomial exactness against the closed form", "[quadrature]") {
    // oracle: int_T x^a y^b = a! b! / (a+b+2)!
    for (int d = 0; d <= 10; ++d) {
        const QuadRule rule = rule_for_degree(d);
        REQUIRE(rule.exact_degree >= d);
        for (int a = 0; a + 0 <= d; ++a)
            for (int b = 0; a + b <= d; ++b) {
                double sum = 0.0;
                for (int q = 0; q < rule.size(); ++q)
                    sum += rule.weights[static_cast<std::size_t>(q)] *
                           std::pow(rule.points[static_cast<std::size_t>(q)].x(), a) *
                           std::pow(rule.points[static_cast<std::size_t>(q)].y(), b);
                const double exact = ref_triangle_monomial_integral(a, b);
                REQUIRE(std::abs(sum - exact) <= 1e-13 * std::max(1.0, std::abs(exact)));
            }
    }
}

TEST_CASE("weights are positive and sum to the reference area", "[quadrature]") {
    for (int d = 0; d <= 10; ++d) {
        const QuadRule rule = rule_for_degree(d);
        double sum = 0.0;
        for (double w : rule.weights) {
            REQUIRE(w > 0.0);
            sum += w;
        }
        REQUIRE(std::abs(sum - 0.5) <= 1e-14);
        for (const auto& p : rule.points) {
            REQUIRE(p.x() >= -1e-14);
            REQUIRE(p.y() >= -1e-14);
            REQUIRE(p.x() + p.y() <= 1.0 + 1e-14);
        }
    }
}

TEST_CASE("degree 0 request yields the centroid rule", "[quadrature]") {
    const QuadRule rule = rule_for_degree(0);
    REQUIRE(rule.size() == 1);
    REQUIRE(rule.weights[0] == Catch::Approx(0.5));
    // int 1 = 1/2, int x^2 y = 2! 1! / 5! = 1/60
    REQUIRE(ref_triangle_monomial_integral(0, 0) == Catch::Approx(0.5));
    REQUIRE(ref_triangle_monomial_integral(2, 1) == Catch::Approx(1.0 / 60.0));
}

TEST_CASE("degree out of range is rejected", "[quadrature]") {
    REQUIRE_THROWS_AS(rule_for_degree(11), std::invalid_argument);
    REQUIRE_THROWS_AS(rule_for_degree(-1), std::invalid_argument);
}

TEST_CASE("affine mapping consistency on random cells", "[quadrature]") {
    // property: mapping the rule to a physical cell integrates polynomials of
    // degree <= exact_degree to the analytic value
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::Vector2d p0(dist(rng), dist(rng));
        Eigen::Matrix2d jac;
        do {
            jac << dist(rng), dist(rng), dist(rng), dist(rng);
        } while (jac.determinant() < 0.2);
        std::uniform_int_distribution<int> deg_dist(0, 10);
        const int d = deg_dist(rng);
        const QuadRule rule = rule_for_degree(d);

        // random polynomial of total degree d in physical coordinates
        Poly2 poly(d);
        for (int dd = 0; dd <= d; ++dd)
            for (int b = 0; b <= dd; ++b) poly.at(dd - b, b) = dist(rng);

        double mapped = 0.0;
        for (int q = 0; q < rule.size(); ++q) {
            const Eigen::Vector2d x = p0 + jac * rule.points[static_cast<std::size_t>(q)];
            mapped += rule.weights[static_cast<std::size_t>(q)] * jac.determinant() *
                      poly.eval(x.x(), x.y());
        }

        // analytic value: substitute the affine map symbolically and integrate
        // exactly on the reference triangle
        Poly2 xhat = Poly2::monomial(1, 0), yhat = Poly2::monomial(0, 1);
        Poly2 xphys = Poly2::constant(p0.x()) + xhat * jac(0, 0) + yhat * jac(0, 1);
        Poly2 yphys = Poly2::constant(p0.y()) + xhat * jac(1, 0) + yhat * jac(1, 1);
        Poly2 composed(0);
        Poly2 xpow = Poly2::constant(1.0);
        for (int a = 0; a <= d; ++a) {
            Poly2 term = xpow;
            for (int b = 0; a + b <= d; ++b) {
                composed = composed + term * poly.at(a, b);
                term = term * yphys;
            }
            xpow = xpow * xphys;
        }
        const double exact = composed.integrate_ref_triangle() * jac.determinant();
        REQUIRE(std::abs(mapped - exact) <= 1e-12 * std::max(1.0, std::abs(exact)));
    }
}
