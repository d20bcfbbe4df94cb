#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <sstream>

#include "oseen/mesh.hpp"

using namespace oseen;

namespace {

void check_invariants(const Mesh& mesh, double expected_area) {
    // positive areas, area sum, Euler formula, edge incidence and signs
    double area = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        REQUIRE(mesh.signed_cell_area(c) > 0.0);
        area += mesh.signed_cell_area(c);
    }
    REQUIRE(std::abs(area - expected_area) <= 1e-12 * expected_area);
    REQUIRE(mesh.n_vertices() - mesh.n_edges() + mesh.n_cells() == 1);

    std::vector<int> incidence(static_cast<std::size_t>(mesh.n_edges()), 0);
    std::vector<int> sign_sum(static_cast<std::size_t>(mesh.n_edges()), 0);
    for (int c = 0; c < mesh.n_cells(); ++c)
        for (int l = 0; l < 3; ++l) {
            const int e = mesh.cell_edges[static_cast<std::size_t>(c)][static_cast<std::size_t>(l)];
            ++incidence[static_cast<std::size_t>(e)];
            sign_sum[static_cast<std::size_t>(e)] +=
                mesh.cell_edge_signs[static_cast<std::size_t>(c)][static_cast<std::size_t>(l)];
        }
    for (int e = 0; e < mesh.n_edges(); ++e) {
        if (mesh.boundary_edge[static_cast<std::size_t>(e)]) {
            REQUIRE(incidence[static_cast<std::size_t>(e)] == 1);
        } else {
            REQUIRE(incidence[static_cast<std::size_t>(e)] == 2);
            REQUIRE(sign_sum[static_cast<std::size_t>(e)] == 0);
        }
    }
}

}  // namespace

TEST_CASE("smallest square mesh", "[mesh]") {
    const Mesh mesh = build_square(1);
    REQUIRE(mesh.n_cells() == 2);
    REQUIRE(mesh.n_vertices() == 4);
    REQUIRE(mesh.n_edges() == 5);
    check_invariants(mesh, 1.0);
}

TEST_CASE("square counting formulas", "[mesh]") {
    const Mesh mesh = build_square(20);
    REQUIRE(mesh.n_cells() == 800);
    REQUIRE(mesh.n_vertices() == 441);
    check_invariants(mesh, 1.0);
}

TEST_CASE("square h_max is the cell diagonal", "[mesh]") {
    const Mesh mesh = build_square(4);
    REQUIRE(mesh.h_max == Catch::Approx(std::sqrt(2.0) / 4.0));
}

TEST_CASE("square rejects N = 0", "[mesh]") {
    REQUIRE_THROWS_AS(build_square(0), std::invalid_argument);
}

TEST_CASE("left pattern also satisfies the invariants", "[mesh]") {
    check_invariants(build_square(5, DiagonalPattern::Left), 1.0);
}

TEST_CASE("lshape small and counting", "[mesh]") {
    const Mesh mesh = build_lshape(2);
    REQUIRE(mesh.n_cells() == 6);
    check_invariants(mesh, 3.0);
    REQUIRE(build_lshape(64).n_cells() == 6144);
}

TEST_CASE("lshape rejects odd N", "[mesh]") {
    REQUIRE_THROWS_AS(build_lshape(3), std::invalid_argument);
    REQUIRE_THROWS_AS(build_lshape(1), std::invalid_argument);
}

TEST_CASE("lshape contains the re-entrant corner exactly once", "[mesh]") {
    for (int N : {2, 6, 10}) {
        const Mesh mesh = build_lshape(N);
        int hits = 0;
        for (const auto& v : mesh.vertices)
            if (v.norm() < 1e-15) ++hits;
        REQUIRE(hits == 1);
        check_invariants(mesh, 3.0);
    }
}

TEST_CASE("uniform refinement", "[mesh]") {
    const Mesh coarse = build_square(1);
    const Mesh fine = uniform_refine(coarse);
    REQUIRE(fine.n_cells() == 8);
    REQUIRE(std::abs(fine.total_area() - coarse.total_area()) <= 1e-12);
    REQUIRE(fine.h_max == Catch::Approx(0.5 * coarse.h_max));
    int coarse_boundary = 0, fine_boundary = 0;
    for (auto b : coarse.boundary_edge) coarse_boundary += b;
    for (auto b : fine.boundary_edge) fine_boundary += b;
    REQUIRE(fine_boundary == 2 * coarse_boundary);
    check_invariants(fine, 1.0);
    check_invariants(uniform_refine(build_lshape(2)), 3.0);
}

TEST_CASE("rebuilding is bit-identical", "[mesh]") {
    const Mesh a = build_square(7);
    const Mesh b = build_square(7);
    REQUIRE(a.cells == b.cells);
    REQUIRE(a.edges == b.edges);
    REQUIRE(a.cell_edges == b.cell_edges);
    REQUIRE(a.cell_edge_signs == b.cell_edge_signs);
    for (int v = 0; v < a.n_vertices(); ++v)
        REQUIRE(a.vertices[static_cast<std::size_t>(v)] ==
                b.vertices[static_cast<std::size_t>(v)]);
}

TEST_CASE("plain text export round trip", "[mesh]") {
    const Mesh mesh = build_square(3);
    std::ostringstream out;
    write_mesh(mesh, out);
    std::istringstream in(out.str());
    int nv = 0, ne = 0, nc = 0;
    in >> nv >> ne >> nc;
    REQUIRE(nv == mesh.n_vertices());
    REQUIRE(ne == mesh.n_edges());
    REQUIRE(nc == mesh.n_cells());
    for (int v = 0; v < nv; ++v) {
        double x = 0.0, y = 0.0;
        in >> x >> y;
        REQUIRE(x == mesh.vertices[static_cast<std::size_t>(v)].x());
        REQUIRE(y == mesh.vertices[static_cast<std::size_t>(v)].y());
    }
    for (int c = 0; c < nc; ++c) {
        int a = 0, b = 0, d = 0;
        in >> a >> b >> d;
        REQUIRE(std::array<int, 3>{a, b, d} == mesh.cells[static_cast<std::size_t>(c)]);
    }
}
