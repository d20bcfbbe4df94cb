#pragma once

// Reference H(div) elements on the triangle (0,0)-(1,0)-(0,1): Raviart-Thomas
// RT_k (k = 0,1,2) and Brezzi-Douglas-Marini BDM_k (k = 1,2,3), one scalar
// vector-valued copy. The tensor pseudostress space applies this basis to
// each tensor row.
//
// Degrees of freedom:
//   - edge moments of the normal trace against shifted Legendre polynomials,
//     taken along the edge from local vertex (l+1)%3 to (l+2)%3 (the CCW
//     direction), with the non-unit outward normal rot(t) = (t_y, -t_x);
//   - interior moments: vector monomials of degree <= k-1 for RT_k, the
//     classic grad(P_{k-1}) + curl(bubble * P_{k-2}) set for BDM_k.
//
// The basis is produced by inverting the DoF matrix of a monomial spanning
// set; all integrals in that matrix are evaluated exactly.

#include <array>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "oseen/poly.hpp"

namespace oseen {

enum class Family { RT, BDM };

struct VectorPoly {
    Poly2 x, y;
    Poly2 div() const { return x.dx() + y.dy(); }
    Eigen::Vector2d eval(const Eigen::Vector2d& p) const {
        return {x.eval(p.x(), p.y()), y.eval(p.x(), p.y())};
    }
};

struct DofDescriptor {
    enum class Kind { EdgeMoment, InteriorMoment };
    Kind kind;
    int edge = -1;    // local edge for EdgeMoment
    int moment = -1;  // Legendre index for EdgeMoment, ordinal otherwise
    VectorPoly weight;  // moment field for InteriorMoment
};

struct ScalarVectorBasis {
    Family family;
    int degree;             // family's own degree
    int edge_moments;       // per edge
    std::vector<VectorPoly> funcs;
    std::vector<Poly2> divs;
    std::vector<DofDescriptor> dofs;

    int dim() const { return static_cast<int>(funcs.size()); }
    int n_interior() const { return dim() - 3 * edge_moments; }
    // Maximal polynomial degree of a member field.
    int poly_degree() const { return family == Family::RT ? degree + 1 : degree; }
};

namespace detail {

inline const std::array<Eigen::Vector2d, 3>& ref_vertices() {
    static const std::array<Eigen::Vector2d, 3> v = {Eigen::Vector2d(0.0, 0.0),
                                                     Eigen::Vector2d(1.0, 0.0),
                                                     Eigen::Vector2d(0.0, 1.0)};
    return v;
}

// Shifted Legendre polynomials on [0,1], orthogonal and L_j(1-s) = (-1)^j L_j(s).
inline Eigen::VectorXd shifted_legendre(int j) {
    switch (j) {
        case 0: return Eigen::Vector<double, 1>{1.0};
        case 1: return Eigen::Vector2d{-1.0, 2.0};
        case 2: return Eigen::Vector3d{1.0, -6.0, 6.0};
        case 3: return Eigen::Vector4d{-1.0, 12.0, -30.0, 20.0};
        default: throw std::logic_error("shifted_legendre: order not tabulated");
    }
}

inline double apply_dof(const DofDescriptor& dof, const VectorPoly& f) {
    if (dof.kind == DofDescriptor::Kind::EdgeMoment) {
        const auto& v = ref_vertices();
        const Eigen::Vector2d a = v[static_cast<std::size_t>((dof.edge + 1) % 3)];
        const Eigen::Vector2d b = v[static_cast<std::size_t>((dof.edge + 2) % 3)];
        const Eigen::Vector2d d = b - a;
        const Eigen::Vector2d n(d.y(), -d.x());  // outward, length |edge|
        const Eigen::VectorXd fx = f.x.restrict_to_segment(a, d);
        const Eigen::VectorXd fy = f.y.restrict_to_segment(a, d);
        Eigen::VectorXd fn = Eigen::VectorXd::Zero(std::max(fx.size(), fy.size()));
        fn.head(fx.size()) += n.x() * fx;
        fn.head(fy.size()) += n.y() * fy;
        const Eigen::VectorXd leg = shifted_legendre(dof.moment);
        Eigen::VectorXd prod = Eigen::VectorXd::Zero(fn.size() + leg.size() - 1);
        for (int i = 0; i < fn.size(); ++i)
            for (int j = 0; j < leg.size(); ++j) prod[i + j] += fn[i] * leg[j];
        return integrate_unit_segment(prod);
    }
    return (f.x * dof.weight.x + f.y * dof.weight.y).integrate_ref_triangle();
}

inline std::vector<VectorPoly> spanning_set(Family family, int k) {
    std::vector<VectorPoly> span;
    for (int d = 0; d <= k; ++d)
        for (int b = 0; b <= d; ++b) {
            const Poly2 m = Poly2::monomial(d - b, b);
            span.push_back({m, Poly2(0)});
            span.push_back({Poly2(0), m});
        }
    if (family == Family::RT) {
        // radial part x * homogeneous degree k
        for (int b = 0; b <= k; ++b) {
            const Poly2 m = Poly2::monomial(k - b, b);
            span.push_back({Poly2::monomial(1, 0) * m, Poly2::monomial(0, 1) * m});
        }
    }
    return span;
}

inline std::vector<DofDescriptor> dof_set(Family family, int k) {
    std::vector<DofDescriptor> dofs;
    for (int edge = 0; edge < 3; ++edge)
        for (int j = 0; j <= k; ++j)
            dofs.push_back({DofDescriptor::Kind::EdgeMoment, edge, j, {}});
    if (family == Family::RT) {
        int ordinal = 0;
        for (int d = 0; d + 1 <= k; ++d)
            for (int b = 0; b <= d; ++b) {
                const Poly2 m = Poly2::monomial(d - b, b);
                dofs.push_back({DofDescriptor::Kind::InteriorMoment, -1, ordinal++, {m, Poly2(0)}});
                dofs.push_back({DofDescriptor::Kind::InteriorMoment, -1, ordinal++, {Poly2(0), m}});
            }
    } else {
        int ordinal = 0;
        // gradients of P_{k-1} monomials of degree >= 1
        for (int d = 1; d <= k - 1; ++d)
            for (int b = 0; b <= d; ++b) {
                const Poly2 m = Poly2::monomial(d - b, b);
                dofs.push_back({DofDescriptor::Kind::InteriorMoment, -1, ordinal++, {m.dx(), m.dy()}});
            }
        // curl(bubble * P_{k-2})
        const Poly2 bubble = Poly2::monomial(1, 0) * Poly2::monomial(0, 1) *
                             (Poly2::constant(1.0) - Poly2::monomial(1, 0) - Poly2::monomial(0, 1));
        for (int d = 0; d <= k - 2; ++d)
            for (int b = 0; b <= d; ++b) {
                const Poly2 q = bubble * Poly2::monomial(d - b, b);
                dofs.push_back({DofDescriptor::Kind::InteriorMoment, -1, ordinal++, {q.dy(), q.dx() * -1.0}});
            }
    }
    return dofs;
}

}  // namespace detail

inline ScalarVectorBasis reference_basis(Family family, int k) {
    const bool supported = (family == Family::RT && k >= 0 && k <= 2) ||
                           (family == Family::BDM && k >= 1 && k <= 3);
    if (!supported) throw std::invalid_argument("reference_basis: unsupported (family, degree)");

    const std::vector<VectorPoly> span = detail::spanning_set(family, k);
    std::vector<DofDescriptor> dofs = detail::dof_set(family, k);
    const int n = static_cast<int>(span.size());
    if (static_cast<int>(dofs.size()) != n)
        throw std::logic_error("reference_basis: DoF count does not match space dimension");

    Eigen::MatrixXd D(n, n);
    for (int m = 0; m < n; ++m)
        for (int j = 0; j < n; ++j)
            D(m, j) = detail::apply_dof(dofs[static_cast<std::size_t>(m)],
                                        span[static_cast<std::size_t>(j)]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(D);
    if (!lu.isInvertible())
        throw std::logic_error("reference_basis: DoF set is not unisolvent");
    const Eigen::MatrixXd coeff = lu.inverse();

    ScalarVectorBasis basis;
    basis.family = family;
    basis.degree = k;
    basis.edge_moments = k + 1;
    basis.dofs = std::move(dofs);
    basis.funcs.reserve(static_cast<std::size_t>(n));
    basis.divs.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        VectorPoly f{Poly2(0), Poly2(0)};
        for (int m = 0; m < n; ++m) {
            const double c = coeff(m, j);
            if (c != 0.0) {
                f.x = f.x + span[static_cast<std::size_t>(m)].x * c;
                f.y = f.y + span[static_cast<std::size_t>(m)].y * c;
            }
        }
        basis.divs.push_back(f.div());
        basis.funcs.push_back(std::move(f));
    }
    return basis;
}

}  // namespace oseen
