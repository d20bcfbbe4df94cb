#pragma once

// Sparse blocks of the discrete mixed systems:
//   A[(r,i),(s,j)] = (1/nu) int (e_r phi_i)^d : (e_s phi_j)^d
//   B[(s,jv),(r,i)] = int div(e_r phi_i) . (e_s m_jv)
//   C[(s,jv),(r,i)] = (1/nu) int ((e_s m_jv) x beta)^d : (e_r phi_i)
//   M = velocity mass, g = trace constraint vector.
//
// The primal eigen/source operator places the convection against the sigma
// test functions; the adjoint system is the transposed pencil and places it
// against the velocity test functions. Unknown ordering is
// [sigma (n_sigma) | trace multiplier (1) | u (n_u)].

#include <complex>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "oseen/convection.hpp"
#include "oseen/spaces.hpp"

namespace oseen {

using SpMat = Eigen::SparseMatrix<double>;
using SpMatC = Eigen::SparseMatrix<std::complex<double>>;
using Triplet = Eigen::Triplet<double>;

struct SparseSystem {
    SpMat A;          // n_sigma x n_sigma
    SpMat B;          // n_u x n_sigma
    SpMat C;          // n_u x n_sigma
    SpMat M;          // n_u x n_u
    Eigen::VectorXd g;
    double nu = 1.0;
    bool adjoint = false;  // convection block moved to the velocity equation
    int n_sigma = 0;
    int n_u = 0;

    int n_total() const { return n_sigma + 1 + n_u; }
};

namespace detail {

inline int assembly_quadrature_degree(const SpacePair& space, const ConvectionField& beta) {
    const int k_sigma = space.ref.poly_degree();       // k+1
    const int k_vel = space.velocity_degree;           // k
    const int base = 2 * k_sigma;                      // A block
    const int conv = k_vel + k_sigma + beta.quadrature_degree();
    return std::min(std::max(base, conv), 10);
}

}  // namespace detail

inline SparseSystem assemble_forms(const SpacePair& space, const ConvectionField& beta,
                                   double nu) {
    if (!(nu > 0.0)) throw std::invalid_argument("assemble_forms: nu must be positive");
    const Mesh& mesh = *space.mesh;
    SparseSystem sys;
    sys.nu = nu;
    sys.n_sigma = space.n_sigma;
    sys.n_u = space.n_u;
    sys.g = space.trace_vector;

    const QuadRule rule = rule_for_degree(detail::assembly_quadrature_degree(space, beta));
    CellWalker walker(space, rule);
    CellEval ev;

    const int nb = space.ref.dim();
    const int dv = space.velocity_dim_local();
    std::vector<Triplet> ta, tb, tc, tm;
    ta.reserve(static_cast<std::size_t>(mesh.n_cells()) * 4 * nb * nb);
    tb.reserve(static_cast<std::size_t>(mesh.n_cells()) * 2 * nb * dv);
    tc.reserve(static_cast<std::size_t>(mesh.n_cells()) * 4 * nb * dv);
    tm.reserve(static_cast<std::size_t>(mesh.n_cells()) * 2 * dv * dv);

    Eigen::MatrixXd a_dot(nb, nb), a_xx(nb, nb), a_xy(nb, nb), a_yx(nb, nb), a_yy(nb, nb);
    Eigen::MatrixXd b_loc(dv, nb), m_loc(dv, dv);
    Eigen::MatrixXd c_dot(dv, nb), c_bx_x(dv, nb), c_bx_y(dv, nb), c_by_x(dv, nb), c_by_y(dv, nb);

    for (int c = 0; c < mesh.n_cells(); ++c) {
        walker.load(c, ev);
        a_dot.setZero(); a_xx.setZero(); a_xy.setZero(); a_yx.setZero(); a_yy.setZero();
        b_loc.setZero(); m_loc.setZero();
        c_dot.setZero(); c_bx_x.setZero(); c_bx_y.setZero(); c_by_x.setZero(); c_by_y.setZero();

        for (int q = 0; q < rule.size(); ++q) {
            const double w = ev.wq[static_cast<std::size_t>(q)];
            const auto& phi = ev.sig[static_cast<std::size_t>(q)];
            const auto& dphi = ev.sig_div[static_cast<std::size_t>(q)];
            const auto& vel = ev.vel[static_cast<std::size_t>(q)];
            const Eigen::Vector2d b = beta.eval(ev.xq[static_cast<std::size_t>(q)]);
            for (int i = 0; i < nb; ++i) {
                const Eigen::Vector2d pi = phi[static_cast<std::size_t>(i)];
                for (int j = 0; j < nb; ++j) {
                    const Eigen::Vector2d pj = phi[static_cast<std::size_t>(j)];
                    a_dot(i, j) += w * pi.dot(pj);
                    a_xx(i, j) += w * pi.x() * pj.x();
                    a_xy(i, j) += w * pi.x() * pj.y();
                    a_yx(i, j) += w * pi.y() * pj.x();
                    a_yy(i, j) += w * pi.y() * pj.y();
                }
                for (int jv = 0; jv < dv; ++jv) {
                    const double mv = vel[static_cast<std::size_t>(jv)];
                    b_loc(jv, i) += w * dphi[static_cast<std::size_t>(i)] * mv;
                    c_dot(jv, i) += w * mv * b.dot(pi);
                    c_bx_x(jv, i) += w * mv * b.x() * pi.x();
                    c_bx_y(jv, i) += w * mv * b.x() * pi.y();
                    c_by_x(jv, i) += w * mv * b.y() * pi.x();
                    c_by_y(jv, i) += w * mv * b.y() * pi.y();
                }
            }
            for (int jv = 0; jv < dv; ++jv)
                for (int kv = 0; kv < dv; ++kv)
                    m_loc(jv, kv) += w * vel[static_cast<std::size_t>(jv)] *
                                     vel[static_cast<std::size_t>(kv)];
        }

        const auto& ids = space.cell_scalar_ids[static_cast<std::size_t>(c)];
        const double inv_nu = 1.0 / nu;
        for (int i = 0; i < nb; ++i) {
            const int gi = ids[static_cast<std::size_t>(i)];
            for (int j = 0; j < nb; ++j) {
                const int gj = ids[static_cast<std::size_t>(j)];
                // (e_r phi_i)^d : (e_s phi_j)^d = delta_rs phi_i.phi_j - 1/2 phi_i[r] phi_j[s]
                const double xx = inv_nu * (a_dot(i, j) - 0.5 * a_xx(i, j));
                const double xy = inv_nu * (-0.5 * a_xy(i, j));
                const double yx = inv_nu * (-0.5 * a_yx(i, j));
                const double yy = inv_nu * (a_dot(i, j) - 0.5 * a_yy(i, j));
                ta.emplace_back(space.sigma_dof(0, gi), space.sigma_dof(0, gj), xx);
                ta.emplace_back(space.sigma_dof(0, gi), space.sigma_dof(1, gj), xy);
                ta.emplace_back(space.sigma_dof(1, gi), space.sigma_dof(0, gj), yx);
                ta.emplace_back(space.sigma_dof(1, gi), space.sigma_dof(1, gj), yy);
            }
            for (int jv = 0; jv < dv; ++jv) {
                for (int s = 0; s < 2; ++s)
                    tb.emplace_back(space.velocity_dof(c, s, jv), space.sigma_dof(s, gi),
                                    b_loc(jv, i));
                // ((e_s m) x beta)^d : (e_r phi) = delta_sr m beta.phi - 1/2 m beta[s] phi[r]
                const double cxx = inv_nu * (c_dot(jv, i) - 0.5 * c_bx_x(jv, i));
                const double cxy = inv_nu * (-0.5 * c_bx_y(jv, i));
                const double cyx = inv_nu * (-0.5 * c_by_x(jv, i));
                const double cyy = inv_nu * (c_dot(jv, i) - 0.5 * c_by_y(jv, i));
                tc.emplace_back(space.velocity_dof(c, 0, jv), space.sigma_dof(0, gi), cxx);
                tc.emplace_back(space.velocity_dof(c, 0, jv), space.sigma_dof(1, gi), cxy);
                tc.emplace_back(space.velocity_dof(c, 1, jv), space.sigma_dof(0, gi), cyx);
                tc.emplace_back(space.velocity_dof(c, 1, jv), space.sigma_dof(1, gi), cyy);
            }
        }
        for (int jv = 0; jv < dv; ++jv)
            for (int kv = 0; kv < dv; ++kv)
                for (int s = 0; s < 2; ++s)
                    tm.emplace_back(space.velocity_dof(c, s, jv), space.velocity_dof(c, s, kv),
                                    m_loc(jv, kv));
    }

    sys.A.resize(space.n_sigma, space.n_sigma);
    sys.A.setFromTriplets(ta.begin(), ta.end());
    sys.B.resize(space.n_u, space.n_sigma);
    sys.B.setFromTriplets(tb.begin(), tb.end());
    sys.C.resize(space.n_u, space.n_sigma);
    sys.C.setFromTriplets(tc.begin(), tc.end());
    sys.M.resize(space.n_u, space.n_u);
    sys.M.setFromTriplets(tm.begin(), tm.end());
    return sys;
}

// Adjoint system: same blocks, convection sign-flipped relative to the dual
// weak form and moved to its transposed pairing, which makes the assembled
// global matrix the exact transpose of the primal one.
inline SparseSystem assemble_adjoint(const SpacePair& space, const ConvectionField& beta,
                                     double nu) {
    SparseSystem sys = assemble_forms(space, beta, nu);
    sys.adjoint = true;
    return sys;
}

// rhs_i = - int f . (velocity basis i)
inline Eigen::VectorXd assemble_source_rhs(
    const SpacePair& space, const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& f) {
    const Mesh& mesh = *space.mesh;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(space.n_u);
    const QuadRule rule = rule_for_degree(std::min(2 * space.velocity_degree + 8, 10));
    CellWalker walker(space, rule);
    CellEval ev;
    const int dv = space.velocity_dim_local();
    for (int c = 0; c < mesh.n_cells(); ++c) {
        walker.load(c, ev);
        for (int q = 0; q < rule.size(); ++q) {
            const double w = ev.wq[static_cast<std::size_t>(q)];
            const Eigen::Vector2d fq = f(ev.xq[static_cast<std::size_t>(q)]);
            for (int jv = 0; jv < dv; ++jv) {
                const double mv = ev.vel[static_cast<std::size_t>(q)][static_cast<std::size_t>(jv)];
                rhs[space.velocity_dof(c, 0, jv)] -= w * fq.x() * mv;
                rhs[space.velocity_dof(c, 1, jv)] -= w * fq.y() * mv;
            }
        }
    }
    return rhs;
}

// Global operator K with the trace multiplier row/column:
//   primal:  [[A, g, (B+C)^T], [g^T, 0, 0], [B, 0, 0]]
//   adjoint: [[A, g,  B^T   ], [g^T, 0, 0], [B+C, 0, 0]]  (= primal^T)
inline SpMat build_global_operator(const SparseSystem& sys) {
    const int n = sys.n_total();
    const int off_u = sys.n_sigma + 1;
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(sys.A.nonZeros() + 2 * sys.B.nonZeros() +
                                          2 * sys.C.nonZeros() + 2 * sys.n_sigma));
    for (int k = 0; k < sys.A.outerSize(); ++k)
        for (SpMat::InnerIterator it(sys.A, k); it; ++it)
            trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int i = 0; i < sys.n_sigma; ++i) {
        if (sys.g[i] != 0.0) {
            trip.emplace_back(i, sys.n_sigma, sys.g[i]);
            trip.emplace_back(sys.n_sigma, i, sys.g[i]);
        }
    }
    for (int k = 0; k < sys.B.outerSize(); ++k)
        for (SpMat::InnerIterator it(sys.B, k); it; ++it) {
            const int r = static_cast<int>(it.row());
            const int c = static_cast<int>(it.col());
            trip.emplace_back(c, off_u + r, it.value());  // B^T in the sigma equation
            trip.emplace_back(off_u + r, c, it.value());  // B in the velocity equation
        }
    for (int k = 0; k < sys.C.outerSize(); ++k)
        for (SpMat::InnerIterator it(sys.C, k); it; ++it) {
            const int r = static_cast<int>(it.row());
            const int c = static_cast<int>(it.col());
            if (sys.adjoint)
                trip.emplace_back(off_u + r, c, it.value());
            else
                trip.emplace_back(c, off_u + r, it.value());
        }
    SpMat K(n, n);
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

// Pencil mass: -M in the velocity block, zero elsewhere, so that computed
// eigenvalues carry the paper's sign convention b(sigma, v) = -lambda (u, v).
inline SpMat build_pencil_mass(const SparseSystem& sys) {
    const int n = sys.n_total();
    const int off_u = sys.n_sigma + 1;
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(sys.M.nonZeros()));
    for (int k = 0; k < sys.M.outerSize(); ++k)
        for (SpMat::InnerIterator it(sys.M, k); it; ++it)
            trip.emplace_back(off_u + static_cast<int>(it.row()),
                              off_u + static_cast<int>(it.col()), -it.value());
    SpMat Mt(n, n);
    Mt.setFromTriplets(trip.begin(), trip.end());
    return Mt;
}

// H(div) Gram matrices of the tensor space, used by the diagnostics module:
// mass = int rho : tau, divdiv = int div rho . div tau.
inline void assemble_sigma_grams(const SpacePair& space, SpMat& mass, SpMat& divdiv) {
    const Mesh& mesh = *space.mesh;
    const QuadRule rule = rule_for_degree(2 * space.ref.poly_degree());
    CellWalker walker(space, rule);
    CellEval ev;
    const int nb = space.ref.dim();
    std::vector<Triplet> tm, td;
    Eigen::MatrixXd dot(nb, nb), dd(nb, nb);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        walker.load(c, ev);
        dot.setZero();
        dd.setZero();
        for (int q = 0; q < rule.size(); ++q) {
            const double w = ev.wq[static_cast<std::size_t>(q)];
            const auto& phi = ev.sig[static_cast<std::size_t>(q)];
            const auto& dphi = ev.sig_div[static_cast<std::size_t>(q)];
            for (int i = 0; i < nb; ++i)
                for (int j = 0; j < nb; ++j) {
                    dot(i, j) += w * phi[static_cast<std::size_t>(i)].dot(phi[static_cast<std::size_t>(j)]);
                    dd(i, j) += w * dphi[static_cast<std::size_t>(i)] * dphi[static_cast<std::size_t>(j)];
                }
        }
        const auto& ids = space.cell_scalar_ids[static_cast<std::size_t>(c)];
        for (int i = 0; i < nb; ++i)
            for (int j = 0; j < nb; ++j)
                for (int r = 0; r < 2; ++r) {
                    const int gi = space.sigma_dof(r, ids[static_cast<std::size_t>(i)]);
                    const int gj = space.sigma_dof(r, ids[static_cast<std::size_t>(j)]);
                    tm.emplace_back(gi, gj, dot(i, j));
                    td.emplace_back(gi, gj, dd(i, j));
                }
    }
    mass.resize(space.n_sigma, space.n_sigma);
    mass.setFromTriplets(tm.begin(), tm.end());
    divdiv.resize(space.n_sigma, space.n_sigma);
    divdiv.setFromTriplets(td.begin(), td.end());
}

inline void write_matrix_market(const SpMat& mat, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_matrix_market: cannot open " + path);
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << mat.rows() << " " << mat.cols() << " " << mat.nonZeros() << "\n";
    char buf[64];
    for (int k = 0; k < mat.outerSize(); ++k)
        for (SpMat::InnerIterator it(mat, k); it; ++it) {
            std::snprintf(buf, sizeof(buf), "%ld %ld %.17g\n", static_cast<long>(it.row()) + 1,
                          static_cast<long>(it.col()) + 1, it.value());
            out << buf;
        }
}

inline void write_matrix_market(const Eigen::VectorXd& vec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_matrix_market: cannot open " + path);
    out << "%%MatrixMarket matrix array real general\n";
    out << vec.size() << " 1\n";
    char buf[64];
    for (int i = 0; i < vec.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", vec[i]);
        out << buf;
    }
}

}  // namespace oseen
