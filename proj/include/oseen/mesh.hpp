#pragma once

// Structured conforming triangulations of the unit square and of the
// L-shaped domain (-1,1)^2 \ (-1,0)^2, with globally oriented edges.
//
// Global edge orientation runs from the lower to the higher vertex index.
// Each cell stores a sign per local edge: +1 when the cell's counterclockwise
// traversal of that edge agrees with the global orientation. Two cells
// sharing an edge always carry opposite signs.

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oseen {

enum class DiagonalPattern { Right, Left };
enum class Domain { Square, SquareCentered, LShape };

struct Mesh {
    std::vector<Eigen::Vector2d> vertices;
    std::vector<std::array<int, 3>> cells;           // CCW vertex triples
    std::vector<std::array<int, 2>> edges;           // (lo, hi), lo < hi
    std::vector<std::array<int, 3>> cell_edges;      // local edge l sits opposite vertex l
    std::vector<std::array<int, 3>> cell_edge_signs; // +-1, see header comment
    std::vector<std::uint8_t> boundary_edge;
    double h_max = 0.0;

    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_cells() const { return static_cast<int>(cells.size()); }
    int n_edges() const { return static_cast<int>(edges.size()); }

    double signed_cell_area(int c) const {
        const auto& t = cells[static_cast<std::size_t>(c)];
        const Eigen::Vector2d a = vertices[static_cast<std::size_t>(t[0])];
        const Eigen::Vector2d b = vertices[static_cast<std::size_t>(t[1])];
        const Eigen::Vector2d d = vertices[static_cast<std::size_t>(t[2])];
        return 0.5 * ((b.x() - a.x()) * (d.y() - a.y()) - (b.y() - a.y()) * (d.x() - a.x()));
    }
    double total_area() const {
        double area = 0.0;
        for (int c = 0; c < n_cells(); ++c) area += signed_cell_area(c);
        return area;
    }
};

namespace detail {

inline void build_connectivity(Mesh& mesh) {
    const int nc = mesh.n_cells();
    std::vector<std::array<int, 2>> all;
    all.reserve(static_cast<std::size_t>(3 * nc));
    for (const auto& cell : mesh.cells)
        for (int l = 0; l < 3; ++l) {
            int a = cell[static_cast<std::size_t>((l + 1) % 3)];
            int b = cell[static_cast<std::size_t>((l + 2) % 3)];
            if (a > b) std::swap(a, b);
            all.push_back({a, b});
        }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    mesh.edges = std::move(all);

    auto edge_id = [&mesh](int a, int b) {
        std::array<int, 2> key{std::min(a, b), std::max(a, b)};
        auto it = std::lower_bound(mesh.edges.begin(), mesh.edges.end(), key);
        return static_cast<int>(it - mesh.edges.begin());
    };

    mesh.cell_edges.assign(static_cast<std::size_t>(nc), {0, 0, 0});
    mesh.cell_edge_signs.assign(static_cast<std::size_t>(nc), {0, 0, 0});
    std::vector<int> incidence(mesh.edges.size(), 0);
    for (int c = 0; c < nc; ++c) {
        const auto& cell = mesh.cells[static_cast<std::size_t>(c)];
        for (int l = 0; l < 3; ++l) {
            const int a = cell[static_cast<std::size_t>((l + 1) % 3)];
            const int b = cell[static_cast<std::size_t>((l + 2) % 3)];
            const int e = edge_id(a, b);
            mesh.cell_edges[static_cast<std::size_t>(c)][static_cast<std::size_t>(l)] = e;
            mesh.cell_edge_signs[static_cast<std::size_t>(c)][static_cast<std::size_t>(l)] =
                (a < b) ? 1 : -1;
            ++incidence[static_cast<std::size_t>(e)];
        }
    }

    mesh.boundary_edge.assign(mesh.edges.size(), 0);
    for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
        if (incidence[e] != 1 && incidence[e] != 2)
            throw std::runtime_error("mesh: edge shared by more than two cells");
        mesh.boundary_edge[e] = (incidence[e] == 1) ? 1 : 0;
    }

    mesh.h_max = 0.0;
    for (int c = 0; c < nc; ++c) {
        const auto& t = mesh.cells[static_cast<std::size_t>(c)];
        const Eigen::Vector2d p0 = mesh.vertices[static_cast<std::size_t>(t[0])];
        const Eigen::Vector2d p1 = mesh.vertices[static_cast<std::size_t>(t[1])];
        const Eigen::Vector2d p2 = mesh.vertices[static_cast<std::size_t>(t[2])];
        const double a = (p1 - p2).norm();
        const double b = (p2 - p0).norm();
        const double d = (p0 - p1).norm();
        const double area = mesh.signed_cell_area(c);
        if (area <= 0.0) throw std::runtime_error("mesh: cell with non-positive area");
        mesh.h_max = std::max(mesh.h_max, a * b * d / (2.0 * area));  // circumdiameter
    }
}

}  // namespace detail

namespace detail {

inline Mesh build_structured_square(int N, double lo, double hi, DiagonalPattern pattern) {
    Mesh mesh;
    const double h = (hi - lo) / N;
    mesh.vertices.reserve(static_cast<std::size_t>((N + 1) * (N + 1)));
    for (int j = 0; j <= N; ++j)
        for (int i = 0; i <= N; ++i) mesh.vertices.emplace_back(lo + i * h, lo + j * h);
    auto vid = [N](int i, int j) { return j * (N + 1) + i; };
    mesh.cells.reserve(static_cast<std::size_t>(2 * N * N));
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j);
            const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            if (pattern == DiagonalPattern::Right) {
                mesh.cells.push_back({v00, v10, v11});
                mesh.cells.push_back({v00, v11, v01});
            } else {
                mesh.cells.push_back({v00, v10, v01});
                mesh.cells.push_back({v10, v11, v01});
            }
        }
    build_connectivity(mesh);
    return mesh;
}

}  // namespace detail

inline Mesh build_square(int N, DiagonalPattern pattern = DiagonalPattern::Right) {
    if (N < 1) throw std::invalid_argument("build_square: N must be >= 1");
    return detail::build_structured_square(N, 0.0, 1.0, pattern);
}

// Centered variant (-1,1)^2: the frame in which the reference eigenvalue
// tables and the suite's convective fields are set up.
inline Mesh build_square_centered(int N, DiagonalPattern pattern = DiagonalPattern::Right) {
    if (N < 1) throw std::invalid_argument("build_square_centered: N must be >= 1");
    return detail::build_structured_square(N, -1.0, 1.0, pattern);
}

inline Mesh build_lshape(int N, DiagonalPattern pattern = DiagonalPattern::Right) {
    if (N < 2 || N % 2 != 0) throw std::invalid_argument("build_lshape: N must be even and >= 2");
    const int M = N / 2;  // grid index of the re-entrant corner (0,0)
    Mesh mesh;
    const double h = 2.0 / N;
    std::vector<int> vid(static_cast<std::size_t>((N + 1) * (N + 1)), -1);
    auto keep_vertex = [M](int i, int j) { return i >= M || j >= M; };
    for (int j = 0; j <= N; ++j)
        for (int i = 0; i <= N; ++i)
            if (keep_vertex(i, j)) {
                vid[static_cast<std::size_t>(j * (N + 1) + i)] = mesh.n_vertices();
                mesh.vertices.emplace_back(-1.0 + i * h, -1.0 + j * h);
            }
    auto v = [&vid, N](int i, int j) { return vid[static_cast<std::size_t>(j * (N + 1) + i)]; };
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            if (!(i >= M || j >= M)) continue;  // cell inside the removed quadrant
            const int v00 = v(i, j), v10 = v(i + 1, j);
            const int v01 = v(i, j + 1), v11 = v(i + 1, j + 1);
            if (pattern == DiagonalPattern::Right) {
                mesh.cells.push_back({v00, v10, v11});
                mesh.cells.push_back({v00, v11, v01});
            } else {
                mesh.cells.push_back({v00, v10, v01});
                mesh.cells.push_back({v10, v11, v01});
            }
        }
    detail::build_connectivity(mesh);
    return mesh;
}

// Red refinement: every triangle is split into four congruent children.
inline Mesh uniform_refine(const Mesh& mesh) {
    Mesh fine;
    fine.vertices = mesh.vertices;
    fine.vertices.reserve(mesh.vertices.size() + mesh.edges.size());
    for (const auto& e : mesh.edges)
        fine.vertices.emplace_back(0.5 * (mesh.vertices[static_cast<std::size_t>(e[0])] +
                                          mesh.vertices[static_cast<std::size_t>(e[1])]));
    const int nv = mesh.n_vertices();
    fine.cells.reserve(static_cast<std::size_t>(4 * mesh.n_cells()));
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto& t = mesh.cells[static_cast<std::size_t>(c)];
        const auto& ce = mesh.cell_edges[static_cast<std::size_t>(c)];
        const int m0 = nv + ce[0];  // midpoint opposite vertex 0
        const int m1 = nv + ce[1];
        const int m2 = nv + ce[2];
        fine.cells.push_back({t[0], m2, m1});
        fine.cells.push_back({t[1], m0, m2});
        fine.cells.push_back({t[2], m1, m0});
        fine.cells.push_back({m0, m1, m2});
    }
    detail::build_connectivity(fine);
    return fine;
}

// Plain-text export: a header "V E C" with the three counts, then V vertex
// rows "x y", then C cell rows "a b c" (17 significant digits, whitespace
// separated).
inline void write_mesh(const Mesh& mesh, std::ostream& out) {
    out << mesh.n_vertices() << " " << mesh.n_edges() << " " << mesh.n_cells() << "\n";
    char buf[64];
    for (const auto& p : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", p.x(), p.y());
        out << buf;
    }
    for (const auto& c : mesh.cells) out << c[0] << " " << c[1] << " " << c[2] << "\n";
}

inline void write_mesh(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_mesh: cannot open " + path);
    write_mesh(mesh, out);
}

}  // namespace oseen
