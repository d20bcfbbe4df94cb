#pragma once

// Shift-invert Krylov-Schur eigensolver for the constrained pencil
// K x = lambda Mt x with K the saddle operator (trace multiplier included)
// and Mt = diag(0, 0, -M). The Arnoldi layer always runs in complex
// arithmetic; the inner factorization of (K - shift Mt) stays real whenever
// the shift is real, which halves memory for the large meshes.
//
// Infinite eigenvalues of the singular-mass pencil map to zero in the
// transformed operator and are dropped by a magnitude floor on the Ritz
// values.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "oseen/assembly.hpp"

namespace oseen {

using Complex = std::complex<double>;
using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;

struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& what, std::vector<double> residuals = {})
        : std::runtime_error(what), achieved_residuals(std::move(residuals)) {}
    std::vector<double> achieved_residuals;
};

struct EigenPair {
    Complex lambda;
    VectorXc sigma_coeffs;
    VectorXc u_coeffs;
    double residual = 0.0;  // ||K x - lambda Mt x|| / ||x||
};

struct EigenProblem {
    SpMat K;
    SpMat Mt;
    Complex shift = 0.0;
    int nev = 4;
    int n_sigma = 0;
    int n_u = 0;
    std::uint64_t seed = 13;
    double tol = 1e-10;
    int max_restarts = 300;
};

inline EigenProblem build_eigen_problem(const SparseSystem& sys, Complex shift, int nev,
                                        std::uint64_t seed = 13) {
    if (nev < 1) throw std::invalid_argument("build_eigen_problem: nev must be >= 1");
    EigenProblem problem;
    problem.K = build_global_operator(sys);
    problem.Mt = build_pencil_mass(sys);
    problem.shift = shift;
    problem.nev = nev;
    problem.n_sigma = sys.n_sigma;
    problem.n_u = sys.n_u;
    problem.seed = seed;
    return problem;
}

namespace detail {

class ShiftInvertOperator {
public:
    ShiftInvertOperator(const SpMat& K, const SpMat& Mt, Complex shift)
        : mt_(&Mt), real_shift_(shift.imag() == 0.0) {
        if (real_shift_) {
            SpMat op = K;
            if (shift.real() != 0.0) op -= shift.real() * Mt;
            op.makeCompressed();
            lu_real_.compute(op);
            if (lu_real_.info() != Eigen::Success)
                throw SolverError("shift-invert factorization is singular at the chosen shift");
        } else {
            SpMatC op = K.cast<Complex>();
            op -= SpMatC(Mt.cast<Complex>() * shift);
            op.makeCompressed();
            lu_cplx_.compute(op);
            if (lu_cplx_.info() != Eigen::Success)
                throw SolverError("shift-invert factorization is singular at the chosen shift");
        }
    }

    VectorXc apply(const VectorXc& x) const {
        if (real_shift_) {
            const Eigen::VectorXd zr = *mt_ * x.real();
            const Eigen::VectorXd zi = *mt_ * x.imag();
            const Eigen::VectorXd yr = lu_real_.solve(zr);
            const Eigen::VectorXd yi = lu_real_.solve(zi);
            VectorXc y(x.size());
            y.real() = yr;
            y.imag() = yi;
            return y;
        }
        const VectorXc z = mt_->cast<Complex>() * x;
        return lu_cplx_.solve(z);
    }

private:
    const SpMat* mt_;
    bool real_shift_;
    Eigen::SparseLU<SpMat> lu_real_;
    Eigen::SparseLU<SpMatC> lu_cplx_;
};

// Swaps the (i, i+1) diagonal entries of an upper-triangular complex Schur
// form by a unitary similarity, accumulating the transform into U.
inline void schur_swap(MatrixXc& T, MatrixXc& U, int i) {
    const Complex a = T(i, i);
    const Complex b = T(i, i + 1);
    const Complex d = T(i + 1, i + 1);
    const Complex e = d - a;
    const double n = std::sqrt(std::norm(b) + std::norm(e));
    if (n < 1e-300) return;  // equal eigenvalues, nothing to move
    Eigen::Matrix2cd G;
    G << b / n, -std::conj(e) / n, e / n, std::conj(b) / n;
    T.middleCols(i, 2) = T.middleCols(i, 2) * G;
    T.middleRows(i, 2) = G.adjoint() * T.middleRows(i, 2);
    U.middleCols(i, 2) = U.middleCols(i, 2) * G;
    T(i + 1, i) = 0.0;
}

// Orders the Schur form by descending |T_ii| (closest to the shift first).
inline void schur_sort(MatrixXc& T, MatrixXc& U) {
    const int m = static_cast<int>(T.rows());
    for (int k = 0; k < m; ++k) {
        bool moved = false;
        for (int i = 0; i < m - 1 - k; ++i) {
            if (std::abs(T(i + 1, i + 1)) > std::abs(T(i, i))) {
                schur_swap(T, U, i);
                moved = true;
            }
        }
        if (!moved) break;
    }
}

// Eigenvector of an upper-triangular matrix for the eigenvalue at position i.
inline VectorXc triangular_eigenvector(const MatrixXc& T, int i) {
    const double smallnum = 1e-14 * std::max(T.cwiseAbs().maxCoeff(), 1.0);
    VectorXc z = VectorXc::Zero(T.rows());
    z[i] = 1.0;
    for (int j = i - 1; j >= 0; --j) {
        Complex rhs = 0.0;
        for (int l = j + 1; l <= i; ++l) rhs += T(j, l) * z[l];
        Complex den = T(j, j) - T(i, i);
        if (std::abs(den) < smallnum) den = Complex(smallnum, 0.0);
        z[j] = -rhs / den;
    }
    z.head(i + 1).normalize();
    return z;
}

// Real sparse matrix times complex vector.
inline VectorXc real_mul(const SpMat& A, const VectorXc& x) {
    VectorXc y(A.rows());
    y.real() = A * x.real();
    y.imag() = A * x.imag();
    return y;
}

}  // namespace detail

inline std::vector<EigenPair> solve_shift_invert(const EigenProblem& problem) {
    const int n = static_cast<int>(problem.K.rows());
    const int nev = std::min(problem.nev, n);
    const int m = std::min(n, std::max(20, 4 * nev));
    const double theta_floor = 1e-10;  // transformed magnitude of "infinite" modes

    detail::ShiftInvertOperator op(problem.K, problem.Mt, problem.shift);

    MatrixXc V = MatrixXc::Zero(n, m + 1);
    MatrixXc H = MatrixXc::Zero(m + 1, m);
    std::mt19937_64 rng(problem.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    {
        VectorXc v0(n);
        for (int i = 0; i < n; ++i) v0[i] = Complex(dist(rng), dist(rng));
        V.col(0) = v0.normalized();
    }

    int active = 0;  // current Krylov-Schur block size
    MatrixXc T, U;
    Eigen::VectorXcd spike;
    std::vector<double> last_residuals;
    bool breakdown = false;

    for (int restart = 0; restart <= problem.max_restarts; ++restart) {
        // Arnoldi expansion from column `active` to m
        int top = m;
        for (int j = active; j < m; ++j) {
            VectorXc w = op.apply(V.col(j));
            VectorXc h = V.leftCols(j + 1).adjoint() * w;
            w.noalias() -= V.leftCols(j + 1) * h;
            const VectorXc h2 = V.leftCols(j + 1).adjoint() * w;
            w.noalias() -= V.leftCols(j + 1) * h2;
            h += h2;
            H.col(j).head(j + 1) = h;
            const double beta = w.norm();
            H(j + 1, j) = beta;
            if (beta < 1e-14) {
                top = j + 1;  // invariant subspace: everything available converged
                breakdown = true;
                break;
            }
            V.col(j + 1) = w / beta;
        }

        MatrixXc Hs = H.topLeftCorner(top, top);
        const double beta = breakdown ? 0.0 : std::abs(H(top, top - 1));
        Eigen::ComplexSchur<MatrixXc> schur(Hs, true);
        if (schur.info() != Eigen::Success) throw SolverError("Schur decomposition failed");
        T = schur.matrixT();
        U = schur.matrixU();
        detail::schur_sort(T, U);
        spike = beta * U.row(top - 1).transpose();  // residual spike b^T = beta e^T U

        // Converged leading Ritz pairs
        const int window = std::min(top, nev + 3);
        last_residuals.assign(static_cast<std::size_t>(window), 0.0);
        int converged = 0;
        for (int i = 0; i < window; ++i) {
            const VectorXc z = detail::triangular_eigenvector(T, i);
            const double res = std::abs(spike.cwiseProduct(z).sum());  // |b^T z|
            last_residuals[static_cast<std::size_t>(i)] = res;
            const double theta = std::abs(T(i, i));
            if (res <= problem.tol * std::max(theta, 1e-2) || breakdown)
                ++converged;
            else
                break;
        }

        const bool done = converged >= std::min(nev, window) || breakdown;
        if (done || restart == problem.max_restarts) {
            if (!done) {
                std::ostringstream msg;
                msg << "shift-invert Arnoldi did not converge after " << problem.max_restarts
                    << " restarts; leading Ritz residuals:";
                for (double r : last_residuals) msg << " " << r;
                throw SolverError(msg.str(), last_residuals);
            }
            // Extraction
            std::vector<EigenPair> pairs;
            const int take = breakdown ? top : std::max(converged, std::min(nev, window));
            for (int i = 0; i < take; ++i) {
                const Complex theta = T(i, i);
                if (std::abs(theta) <= theta_floor) continue;  // infinite eigenvalue
                const VectorXc z = detail::triangular_eigenvector(T, i);
                VectorXc x = V.leftCols(top) * (U * z);
                x.normalize();
                const Complex lambda = problem.shift + 1.0 / theta;
                EigenPair pair;
                pair.lambda = lambda;
                // pencil residual, with an inverse-iteration polish if needed
                auto pencil_residual = [&](const VectorXc& xv, Complex lam) {
                    return (detail::real_mul(problem.K, xv) - lam * detail::real_mul(problem.Mt, xv))
                               .norm() /
                           xv.norm();
                };
                double res = pencil_residual(x, lambda);
                Complex lam = lambda;
                for (int polish = 0; polish < 2 && res > 1e-9; ++polish) {
                    VectorXc x2 = op.apply(x);
                    const double nrm = x2.norm();
                    if (nrm <= 0.0) break;
                    x2 /= nrm;
                    const Complex num = x2.dot(detail::real_mul(problem.K, x2));
                    const Complex den = x2.dot(detail::real_mul(problem.Mt, x2));
                    if (std::abs(den) < 1e-300) break;
                    const Complex lam2 = num / den;
                    const double res2 = pencil_residual(x2, lam2);
                    if (res2 < res) {
                        x = x2;
                        lam = lam2;
                        res = res2;
                    } else {
                        break;
                    }
                }
                pair.lambda = lam;
                pair.residual = res;
                pair.sigma_coeffs = x.head(problem.n_sigma);
                pair.u_coeffs = x.tail(problem.n_u);
                pairs.push_back(std::move(pair));
            }
            std::sort(pairs.begin(), pairs.end(), [](const EigenPair& a, const EigenPair& b) {
                const double ma = std::abs(a.lambda), mb = std::abs(b.lambda);
                if (std::abs(ma - mb) > 1e-12 * std::max(1.0, std::max(ma, mb))) return ma < mb;
                return a.lambda.imag() < b.lambda.imag();
            });
            return pairs;
        }

        // Thick restart: keep the leading block
        int keep = std::min(top - 1, std::max(nev + 5, top / 2));
        keep = std::max(keep, converged + 1);
        keep = std::min(keep, top - 1);
        MatrixXc Vnew = V.leftCols(top) * U.leftCols(keep);
        V.leftCols(keep) = Vnew;
        V.col(keep) = V.col(top);  // residual direction becomes the next Arnoldi vector
        H.setZero();
        H.topLeftCorner(keep, keep) = T.topLeftCorner(keep, keep);
        H.row(keep).head(keep) = spike.head(keep).transpose();
        active = keep;
    }
    throw SolverError("unreachable");
}

// Solves the augmented saddle system K [sigma; mult; u] = [0; 0; rhs_u].
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> solve_source(const SparseSystem& sys,
                                                                const Eigen::VectorXd& rhs) {
    if (rhs.size() != sys.n_u) throw std::invalid_argument("solve_source: rhs length mismatch");
    SpMat K = build_global_operator(sys);
    K.makeCompressed();
    Eigen::SparseLU<SpMat> lu(K);
    if (lu.info() != Eigen::Success)
        throw SolverError("solve_source: factorization failed (system may violate the "
                          "discrete uniqueness condition)");
    Eigen::VectorXd full_rhs = Eigen::VectorXd::Zero(sys.n_total());
    full_rhs.tail(sys.n_u) = rhs;
    const Eigen::VectorXd x = lu.solve(full_rhs);
    const double denom = std::max(full_rhs.norm(), 1e-300);
    const double rel_res = (K * x - full_rhs).norm() / denom;
    if (rel_res > 1e-10)
        throw SolverError("solve_source: residual " + std::to_string(rel_res) +
                          " exceeds tolerance");
    return {x.head(sys.n_sigma), x.tail(sys.n_u)};
}

// Greedy nearest-neighbor matching between the primal spectrum and the
// conjugated adjoint spectrum; returns the largest matched distance.
inline double spectrum_adjoint_check(const std::vector<EigenPair>& primal,
                                     const std::vector<EigenPair>& adjoint) {
    const std::size_t count = std::min(primal.size(), adjoint.size());
    std::vector<bool> used(count, false);
    double worst = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_j = count;
        for (std::size_t j = 0; j < count; ++j) {
            if (used[j]) continue;
            const double d = std::abs(primal[i].lambda - std::conj(adjoint[j].lambda));
            if (d < best) {
                best = d;
                best_j = j;
            }
        }
        if (best_j < count) {
            used[best_j] = true;
            worst = std::max(worst, best);
        }
    }
    return worst;
}

}  // namespace oseen
