#pragma once

// Global discrete pair (H_h, Q_h): the tensor pseudostress space with each
// row in scalar RT_k / BDM_{k+1}, and the discontinuous vector P_k velocity
// space. Also provides the trace constraint vector g with
// g . coeffs(tau) = integral of tr(tau).
//
// Tensor row r of a sigma field re-uses the scalar DoF map: global sigma
// index = r * n_scalar + scalar_id. Velocity DoFs are cell-local:
// cell * 2 * dim(P_k) + component * dim(P_k) + j.

#include <array>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "oseen/element.hpp"
#include "oseen/mesh.hpp"
#include "oseen/quadrature.hpp"

namespace oseen {

struct SpacePair {
    const Mesh* mesh = nullptr;
    Family family = Family::RT;
    int family_degree = 0;    // RT_k or BDM_k
    int velocity_degree = 0;  // P_k: k for RT_k, k-1 for BDM_k
    ScalarVectorBasis ref;

    int n_scalar = 0;  // dim of one scalar vector-valued copy
    int n_sigma = 0;   // = 2 * n_scalar
    int n_u = 0;
    std::vector<std::vector<int>> cell_scalar_ids;   // per cell, local -> global
    std::vector<std::vector<double>> cell_signs;     // per cell, local -> +-1
    Eigen::VectorXd trace_vector;                    // length n_sigma

    int sigma_dof(int row, int scalar_id) const { return row * n_scalar + scalar_id; }
    int velocity_dim_local() const { return (velocity_degree + 1) * (velocity_degree + 2) / 2; }
    int velocity_dof(int cell, int comp, int j) const {
        return cell * 2 * velocity_dim_local() + comp * velocity_dim_local() + j;
    }
    int n_total() const { return n_sigma + 1 + n_u; }  // trace multiplier included
};

namespace detail {

inline std::vector<std::array<int, 2>> velocity_monomials(int degree) {
    std::vector<std::array<int, 2>> exps;
    for (int d = 0; d <= degree; ++d)
        for (int b = 0; b <= d; ++b) exps.push_back({d - b, b});
    return exps;
}

}  // namespace detail

// Evaluated data for one cell at the points of a quadrature rule. The sigma
// basis values carry the orientation sign and the contravariant Piola map;
// divergences scale by 1/detJ as well.
struct CellEval {
    int cell = 0;
    double det_j = 0.0;
    Eigen::Matrix2d jac, jac_inv;
    Eigen::Vector2d origin;
    std::vector<Eigen::Vector2d> xq;  // physical quadrature points
    std::vector<double> wq;           // physical weights (sum to |K|)
    // dimensions: n_q rows are implicit in the vector index
    std::vector<std::vector<Eigen::Vector2d>> sig;  // [q][local] vector value
    std::vector<std::vector<double>> sig_div;       // [q][local]
    std::vector<std::vector<double>> vel;           // [q][local scalar]
};

class CellWalker {
public:
    CellWalker(const SpacePair& space, const QuadRule& rule) : space_(space), rule_(rule) {
        const int nq = rule.size();
        const int nb = space.ref.dim();
        ref_vals_.assign(static_cast<std::size_t>(nq), {});
        ref_divs_.assign(static_cast<std::size_t>(nq), {});
        ref_vel_.assign(static_cast<std::size_t>(nq), {});
        const auto monos = detail::velocity_monomials(space.velocity_degree);
        for (int q = 0; q < nq; ++q) {
            const Eigen::Vector2d p = rule.points[static_cast<std::size_t>(q)];
            auto& vals = ref_vals_[static_cast<std::size_t>(q)];
            auto& divs = ref_divs_[static_cast<std::size_t>(q)];
            vals.reserve(static_cast<std::size_t>(nb));
            divs.reserve(static_cast<std::size_t>(nb));
            for (int m = 0; m < nb; ++m) {
                vals.push_back(space.ref.funcs[static_cast<std::size_t>(m)].eval(p));
                divs.push_back(space.ref.divs[static_cast<std::size_t>(m)].eval(p.x(), p.y()));
            }
            auto& vel = ref_vel_[static_cast<std::size_t>(q)];
            vel.reserve(monos.size());
            for (const auto& e : monos)
                vel.push_back(std::pow(p.x(), e[0]) * std::pow(p.y(), e[1]));
        }
    }

    void load(int cell, CellEval& ev) const {
        const Mesh& mesh = *space_.mesh;
        const auto& t = mesh.cells[static_cast<std::size_t>(cell)];
        const Eigen::Vector2d p0 = mesh.vertices[static_cast<std::size_t>(t[0])];
        const Eigen::Vector2d p1 = mesh.vertices[static_cast<std::size_t>(t[1])];
        const Eigen::Vector2d p2 = mesh.vertices[static_cast<std::size_t>(t[2])];
        ev.cell = cell;
        ev.origin = p0;
        ev.jac.col(0) = p1 - p0;
        ev.jac.col(1) = p2 - p0;
        ev.det_j = ev.jac.determinant();
        ev.jac_inv = ev.jac.inverse();

        const int nq = rule_.size();
        const int nb = space_.ref.dim();
        ev.xq.resize(static_cast<std::size_t>(nq));
        ev.wq.resize(static_cast<std::size_t>(nq));
        ev.sig.assign(static_cast<std::size_t>(nq),
                      std::vector<Eigen::Vector2d>(static_cast<std::size_t>(nb)));
        ev.sig_div.assign(static_cast<std::size_t>(nq),
                          std::vector<double>(static_cast<std::size_t>(nb)));
        ev.vel = ref_vel_;
        const auto& signs = space_.cell_signs[static_cast<std::size_t>(cell)];
        for (int q = 0; q < nq; ++q) {
            ev.xq[static_cast<std::size_t>(q)] =
                p0 + ev.jac * rule_.points[static_cast<std::size_t>(q)];
            ev.wq[static_cast<std::size_t>(q)] =
                rule_.weights[static_cast<std::size_t>(q)] * ev.det_j;
            for (int m = 0; m < nb; ++m) {
                const double s = signs[static_cast<std::size_t>(m)] / ev.det_j;
                ev.sig[static_cast<std::size_t>(q)][static_cast<std::size_t>(m)] =
                    s * (ev.jac * ref_vals_[static_cast<std::size_t>(q)][static_cast<std::size_t>(m)]);
                ev.sig_div[static_cast<std::size_t>(q)][static_cast<std::size_t>(m)] =
                    s * ref_divs_[static_cast<std::size_t>(q)][static_cast<std::size_t>(m)];
            }
        }
    }

    const QuadRule& rule() const { return rule_; }

private:
    const SpacePair& space_;
    QuadRule rule_;
    std::vector<std::vector<Eigen::Vector2d>> ref_vals_;
    std::vector<std::vector<double>> ref_divs_;
    std::vector<std::vector<double>> ref_vel_;
};

inline SpacePair build_space_pair(const Mesh& mesh, Family family, int degree) {
    SpacePair space;
    space.mesh = &mesh;
    space.family = family;
    space.family_degree = degree;
    space.velocity_degree = (family == Family::RT) ? degree : degree - 1;
    space.ref = reference_basis(family, degree);

    const int per_edge = space.ref.edge_moments;
    const int per_cell = space.ref.n_interior();
    const int edge_block = mesh.n_edges() * per_edge;
    space.n_scalar = edge_block + mesh.n_cells() * per_cell;
    space.n_sigma = 2 * space.n_scalar;
    space.n_u = 2 * space.velocity_dim_local() * mesh.n_cells();

    space.cell_scalar_ids.resize(static_cast<std::size_t>(mesh.n_cells()));
    space.cell_signs.resize(static_cast<std::size_t>(mesh.n_cells()));
    for (int c = 0; c < mesh.n_cells(); ++c) {
        auto& ids = space.cell_scalar_ids[static_cast<std::size_t>(c)];
        auto& signs = space.cell_signs[static_cast<std::size_t>(c)];
        ids.reserve(static_cast<std::size_t>(space.ref.dim()));
        signs.reserve(static_cast<std::size_t>(space.ref.dim()));
        for (int l = 0; l < 3; ++l) {
            const int e = mesh.cell_edges[static_cast<std::size_t>(c)][static_cast<std::size_t>(l)];
            const int orient =
                mesh.cell_edge_signs[static_cast<std::size_t>(c)][static_cast<std::size_t>(l)];
            for (int j = 0; j < per_edge; ++j) {
                ids.push_back(e * per_edge + j);
                // Reversed traversal flips the normal and mirrors the edge
                // parameter; Legendre parity folds both into one sign.
                signs.push_back(orient > 0 ? 1.0 : ((j % 2 == 0) ? -1.0 : 1.0));
            }
        }
        for (int i = 0; i < per_cell; ++i) {
            ids.push_back(edge_block + c * per_cell + i);
            signs.push_back(1.0);
        }
    }

    // trace vector: g[(r, i)] = integral of the r-th component of basis fn i
    space.trace_vector = Eigen::VectorXd::Zero(space.n_sigma);
    const QuadRule rule = rule_for_degree(space.ref.poly_degree());
    CellWalker walker(space, rule);
    CellEval ev;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        walker.load(c, ev);
        const auto& ids = space.cell_scalar_ids[static_cast<std::size_t>(c)];
        for (int q = 0; q < rule.size(); ++q) {
            const double w = ev.wq[static_cast<std::size_t>(q)];
            for (int m = 0; m < space.ref.dim(); ++m) {
                const Eigen::Vector2d phi = ev.sig[static_cast<std::size_t>(q)][static_cast<std::size_t>(m)];
                const int sid = ids[static_cast<std::size_t>(m)];
                space.trace_vector[space.sigma_dof(0, sid)] += w * phi.x();
                space.trace_vector[space.sigma_dof(1, sid)] += w * phi.y();
            }
        }
    }
    return space;
}

// Interpolates a smooth tensor field (rows in the scalar space) by applying
// the global DoF functionals row by row. Edge moments are taken along the
// global edge direction with the normal rot(t); interior moments act on the
// Piola pull-back.
inline Eigen::VectorXd interpolate_tensor(
    const SpacePair& space, const std::function<Eigen::Matrix2d(const Eigen::Vector2d&)>& field) {
    const Mesh& mesh = *space.mesh;
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(space.n_sigma);

    const int per_edge = space.ref.edge_moments;
    std::vector<double> gl_x, gl_w;
    gauss_legendre_01(space.ref.poly_degree() + 3, gl_x, gl_w);
    std::vector<Eigen::VectorXd> legendre;
    for (int j = 0; j < per_edge; ++j) legendre.push_back(detail::shifted_legendre(j));
    auto eval_1d = [](const Eigen::VectorXd& c, double s) {
        double r = 0.0;
        for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) r = r * s + c[i];
        return r;
    };

    for (int e = 0; e < mesh.n_edges(); ++e) {
        const Eigen::Vector2d a = mesh.vertices[static_cast<std::size_t>(mesh.edges[static_cast<std::size_t>(e)][0])];
        const Eigen::Vector2d b = mesh.vertices[static_cast<std::size_t>(mesh.edges[static_cast<std::size_t>(e)][1])];
        const Eigen::Vector2d d = b - a;
        const Eigen::Vector2d n(d.y(), -d.x());
        for (std::size_t q = 0; q < gl_x.size(); ++q) {
            const Eigen::Vector2d x = a + gl_x[q] * d;
            const Eigen::Matrix2d f = field(x);
            const Eigen::Vector2d fn = f * n;  // row-wise normal trace
            for (int j = 0; j < per_edge; ++j) {
                const double lw = gl_w[q] * eval_1d(legendre[static_cast<std::size_t>(j)], gl_x[q]);
                coeffs[space.sigma_dof(0, e * per_edge + j)] += lw * fn.x();
                coeffs[space.sigma_dof(1, e * per_edge + j)] += lw * fn.y();
            }
        }
    }

    const int per_cell = space.ref.n_interior();
    if (per_cell > 0) {
        const int edge_block = mesh.n_edges() * per_edge;
        const QuadRule rule = rule_for_degree(10);
        for (int c = 0; c < mesh.n_cells(); ++c) {
            const auto& t = mesh.cells[static_cast<std::size_t>(c)];
            const Eigen::Vector2d p0 = mesh.vertices[static_cast<std::size_t>(t[0])];
            Eigen::Matrix2d jac;
            jac.col(0) = mesh.vertices[static_cast<std::size_t>(t[1])] - p0;
            jac.col(1) = mesh.vertices[static_cast<std::size_t>(t[2])] - p0;
            const double det_j = jac.determinant();
            const Eigen::Matrix2d jac_inv = jac.inverse();
            for (int q = 0; q < rule.size(); ++q) {
                const Eigen::Vector2d ref_p = rule.points[static_cast<std::size_t>(q)];
                const Eigen::Matrix2d f = field(p0 + jac * ref_p);
                // Piola pull-back of each row: det(J) J^{-1} f_row
                const Eigen::Matrix2d fhat = det_j * (f * jac_inv.transpose());
                for (int i = 0; i < per_cell; ++i) {
                    const auto& dof =
                        space.ref.dofs[static_cast<std::size_t>(3 * per_edge + i)];
                    const Eigen::Vector2d wvec = dof.weight.eval(ref_p);
                    const double w = rule.weights[static_cast<std::size_t>(q)];
                    coeffs[space.sigma_dof(0, edge_block + c * per_cell + i)] +=
                        w * fhat.row(0).dot(wvec);
                    coeffs[space.sigma_dof(1, edge_block + c * per_cell + i)] +=
                        w * fhat.row(1).dot(wvec);
                }
            }
        }
    }
    return coeffs;
}

// Evaluates a sigma coefficient vector as a 2x2 tensor at a reference point
// of one cell; used by tests and the pressure post-processing.
template <typename Scalar>
inline Eigen::Matrix<Scalar, 2, 2> eval_sigma(const SpacePair& space,
                                              const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& coeffs,
                                              const CellEval& ev, int q) {
    Eigen::Matrix<Scalar, 2, 2> result = Eigen::Matrix<Scalar, 2, 2>::Zero();
    const auto& ids = space.cell_scalar_ids[static_cast<std::size_t>(ev.cell)];
    for (int m = 0; m < space.ref.dim(); ++m) {
        const Eigen::Vector2d phi = ev.sig[static_cast<std::size_t>(q)][static_cast<std::size_t>(m)];
        const int sid = ids[static_cast<std::size_t>(m)];
        for (int r = 0; r < 2; ++r) {
            const Scalar c = coeffs[space.sigma_dof(r, sid)];
            result(r, 0) += c * phi.x();
            result(r, 1) += c * phi.y();
        }
    }
    return result;
}

template <typename Scalar>
inline Eigen::Matrix<Scalar, 2, 1> eval_velocity(const SpacePair& space,
                                                 const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& coeffs,
                                                 const CellEval& ev, int q) {
    Eigen::Matrix<Scalar, 2, 1> result = Eigen::Matrix<Scalar, 2, 1>::Zero();
    const int dv = space.velocity_dim_local();
    for (int comp = 0; comp < 2; ++comp)
        for (int j = 0; j < dv; ++j)
            result[comp] += coeffs[space.velocity_dof(ev.cell, comp, j)] *
                            ev.vel[static_cast<std::size_t>(q)][static_cast<std::size_t>(j)];
    return result;
}

}  // namespace oseen
