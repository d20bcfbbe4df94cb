#include <catch2/catch_amalgamated.hpp>

#include "oseen/element.hpp"
#include "oseen/quadrature.hpp"

using namespace oseen;

namespace {

const std::vector<std::pair<Family, int>> kSupported = {
    {Family::RT, 0}, {Family::RT, 1}, {Family::RT, 2},
    {Family::BDM, 1}, {Family::BDM, 2}, {Family::BDM, 3}};

int expected_dim(Family family, int k) {
    return family == Family::RT ? (k + 1) * (k + 3) : (k + 1) * (k + 2);
}

}  // namespace

TEST_CASE("space dimensions", "[elements]") {
    REQUIRE(reference_basis(Family::RT, 0).dim() == 3);
    REQUIRE(reference_basis(Family::RT, 1).dim() == 8);
    REQUIRE(reference_basis(Family::BDM, 1).dim() == 6);
    for (const auto& [family, k] : kSupported)
        REQUIRE(reference_basis(family, k).dim() == expected_dim(family, k));
}

TEST_CASE("unsupported family/degree is rejected", "[elements]") {
    REQUIRE_THROWS_AS(reference_basis(Family::RT, 3), std::invalid_argument);
    REQUIRE_THROWS_AS(reference_basis(Family::RT, -1), std::invalid_argument);
    REQUIRE_THROWS_AS(reference_basis(Family::BDM, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(reference_basis(Family::BDM, 4), std::invalid_argument);
}

TEST_CASE("unisolvence: DoF matrix of the basis is the identity", "[elements]") {
    for (const auto& [family, k] : kSupported) {
        const ScalarVectorBasis basis = reference_basis(family, k);
        for (int m = 0; m < basis.dim(); ++m)
            for (int j = 0; j < basis.dim(); ++j) {
                const double value = detail::apply_dof(basis.dofs[static_cast<std::size_t>(m)],
                                                       basis.funcs[static_cast<std::size_t>(j)]);
                REQUIRE(std::abs(value - (m == j ? 1.0 : 0.0)) <= 1e-10);
            }
    }
}

TEST_CASE("RT0 divergences are constant, BDM1 divergences constant", "[elements]") {
    const ScalarVectorBasis rt0 = reference_basis(Family::RT, 0);
    for (const auto& div : rt0.divs) REQUIRE(div.degree() == 0);
    const ScalarVectorBasis bdm1 = reference_basis(Family::BDM, 1);
    // div BDM_1 spans P_0
    const QuadRule rule = rule_for_degree(2);
    for (const auto& div : bdm1.divs) {
        const double at0 = div.eval(0.25, 0.25);
        for (const auto& p : rule.points)
            REQUIRE(div.eval(p.x(), p.y()) == Catch::Approx(at0).margin(1e-12));
    }
}

TEST_CASE("divergence theorem on the reference cell", "[elements]") {
    // int_T div(phi) equals the sum of the lowest edge moments of phi . n, so
    // the symbolic divergence is consistent with the basis fields
    for (const auto& [family, k] : kSupported) {
        const ScalarVectorBasis basis = reference_basis(family, k);
        for (int j = 0; j < basis.dim(); ++j) {
            const double vol = basis.divs[static_cast<std::size_t>(j)].integrate_ref_triangle();
            double flux = 0.0;
            for (int edge = 0; edge < 3; ++edge) {
                const DofDescriptor dof{DofDescriptor::Kind::EdgeMoment, edge, 0, {}};
                flux += detail::apply_dof(dof, basis.funcs[static_cast<std::size_t>(j)]);
            }
            REQUIRE(std::abs(vol - flux) <= 1e-11);
        }
    }
}

TEST_CASE("edge DoFs see only the normal trace", "[elements]") {
    // a field with vanishing normal trace on every edge has zero edge DoFs:
    // use curl of the cubic bubble
    const Poly2 bubble = Poly2::monomial(1, 0) * Poly2::monomial(0, 1) *
                         (Poly2::constant(1.0) - Poly2::monomial(1, 0) - Poly2::monomial(0, 1));
    const VectorPoly curl_bubble{bubble.dy(), bubble.dx() * -1.0};
    for (int edge = 0; edge < 3; ++edge)
        for (int moment = 0; moment <= 2; ++moment) {
            const DofDescriptor dof{DofDescriptor::Kind::EdgeMoment, edge, moment, {}};
            REQUIRE(std::abs(detail::apply_dof(dof, curl_bubble)) <= 1e-13);
        }
}
