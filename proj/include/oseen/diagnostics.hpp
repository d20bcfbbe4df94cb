#pragma once

// Numeric surrogates for the theoretical constants of the analysis: the
// discrete inf-sup constant gamma_h of b, the kernel coercivity constant
// c1_h, the B-form stability constant C_J, the fixed-point contraction
// constant L, and the small-data window for R_0. None of these are claims
// about the analytic (mesh-independent) constants; they make the smallness
// hypotheses observable at runtime.
//
// All eigen/singular value computations here run dense, which is the
// intended desk-scale regime (n_sigma up to a few thousand).

#include <cmath>
#include <optional>
#include <stdexcept>

#include <Eigen/Dense>

#include "oseen/assembly.hpp"

namespace oseen {

struct ConstantsReport {
    double gamma_h = 0.0;          // discrete inf-sup constant of b
    double c1_h = 0.0;             // kernel coercivity constant
    double contraction_L = 0.0;    // (|beta| / gamma_h) max(1/nu, 1/c1_h)
    double cj_h = 0.0;             // 1 / min(c1/(2 nu), c1 gamma^2 nu / 2)
    double uniqueness_ratio = 0.0; // C_J |beta| / nu
    bool contraction_ok = false;   // L < 1
    bool uniqueness_ok = false;    // ratio < 1
    // R_0 window of the fixed-point argument, for a given ||f||_0
    double f_norm = 1.0;
    bool r0_window_feasible = false;
    double r0_upper = 0.0;
    int n_sigma = 0;
    int n_u = 0;
};

inline ConstantsReport estimate_constants(const SparseSystem& sys, const SpacePair& space,
                                          double beta_sup, double f_norm = 1.0,
                                          int max_dense = 20000) {
    if (sys.n_sigma > max_dense)
        throw std::invalid_argument("estimate_constants: n_sigma too large for the dense path");

    SpMat mass_sp, divdiv_sp;
    assemble_sigma_grams(space, mass_sp, divdiv_sp);
    const Eigen::MatrixXd D = Eigen::MatrixXd(mass_sp) + Eigen::MatrixXd(divdiv_sp);
    const Eigen::MatrixXd B = Eigen::MatrixXd(sys.B);
    const Eigen::MatrixXd M = Eigen::MatrixXd(sys.M);
    const Eigen::VectorXd& g = sys.g;

    ConstantsReport report;
    report.n_sigma = sys.n_sigma;
    report.n_u = sys.n_u;
    report.f_norm = f_norm;

    // gamma_h^2 = min eig of (B W B^T, M) where W is the H(div)-Gram inverse
    // restricted to the trace-zero hyperplane.
    Eigen::LLT<Eigen::MatrixXd> dllt(D);
    if (dllt.info() != Eigen::Success)
        throw std::runtime_error("estimate_constants: H(div) Gram not SPD");
    const Eigen::MatrixXd DinvBt = dllt.solve(B.transpose());
    const Eigen::VectorXd Dinvg = dllt.solve(g);
    const double gDg = g.dot(Dinvg);
    const Eigen::VectorXd BDg = B * Dinvg;
    Eigen::MatrixXd S = B * DinvBt - (BDg * BDg.transpose()) / gDg;
    S = 0.5 * (S + S.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> infsup(S, M);
    if (infsup.info() != Eigen::Success)
        throw std::runtime_error("estimate_constants: inf-sup eigensolve failed");
    report.gamma_h = std::sqrt(std::max(infsup.eigenvalues().minCoeff(), 0.0));

    // c1_h = min Rayleigh quotient of (nu A + divdiv) against D over the
    // intersection of ker B and the trace-zero hyperplane.
    Eigen::MatrixXd Gmat(sys.n_u + 1, sys.n_sigma);
    Gmat.topRows(sys.n_u) = B;
    Gmat.bottomRows(1) = g.transpose();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Gmat.transpose());
    const Eigen::MatrixXd Q = qr.householderQ();
    const int rank = sys.n_u + 1;  // B is onto and g is independent of its rows
    const Eigen::MatrixXd Z = Q.rightCols(sys.n_sigma - rank);
    const Eigen::MatrixXd numerator =
        Z.transpose() * (sys.nu * Eigen::MatrixXd(sys.A) + Eigen::MatrixXd(divdiv_sp)) * Z;
    const Eigen::MatrixXd denominator = Z.transpose() * D * Z;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> kernel(
        0.5 * (numerator + numerator.transpose()), 0.5 * (denominator + denominator.transpose()));
    if (kernel.info() != Eigen::Success)
        throw std::runtime_error("estimate_constants: kernel eigensolve failed");
    report.c1_h = std::max(kernel.eigenvalues().minCoeff(), 0.0);

    const double nu = sys.nu;
    report.contraction_L =
        (beta_sup / report.gamma_h) * std::max(1.0 / nu, 1.0 / report.c1_h);
    report.cj_h = 1.0 / std::min(report.c1_h / (2.0 * nu),
                                 report.c1_h * report.gamma_h * report.gamma_h * nu / 2.0);
    report.uniqueness_ratio = report.cj_h * beta_sup / nu;
    report.contraction_ok = report.contraction_L < 1.0;
    report.uniqueness_ok = report.uniqueness_ratio < 1.0;

    // R_0 window: (H C1 / 2) R0^2 - R0 + H C2 <= 0 with the surrogates in
    // place of the analytic constants.
    const double a_norm = std::min(1.0, 1.0 / nu);
    const double H = 1.0 + (nu / report.c1_h) * a_norm;
    const double C1 = 1.0 / (2.0 * nu * report.gamma_h);
    const double C2 = (C1 / (2.0 * nu * report.gamma_h)) * beta_sup * beta_sup +
                      (a_norm / (report.gamma_h * report.gamma_h)) * f_norm;
    const double disc = 1.0 - 2.0 * H * H * C1 * C2;
    report.r0_window_feasible = disc >= 0.0;
    report.r0_upper = report.r0_window_feasible ? (1.0 - std::sqrt(disc)) / (H * C1) : 0.0;
    return report;
}

}  // namespace oseen
