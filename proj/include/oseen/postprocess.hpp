#pragma once

// Post-processing: least-squares convergence fits lambda_h ~ lambda_extr +
// C h^alpha, pressure recovery from a pseudostress/velocity pair, and
// spectrum windowing for reporting.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "oseen/assembly.hpp"
#include "oseen/spaces.hpp"

namespace oseen {

struct FitLevel {
    double h = 0.0;
    std::complex<double> lambda;
};

struct FitResult {
    double alpha = 0.0;  // +inf sentinel when all values coincide
    std::complex<double> lambda_extr;
    double fit_residual = 0.0;
    bool monotone_warning = false;
};

namespace detail {

// For fixed alpha, solve the linear least squares for (lambda_extr, C) and
// return the residual; the complex data splits into two real problems with a
// shared design matrix.
inline double fit_linear(const std::vector<FitLevel>& levels, double alpha,
                         std::complex<double>* extr_out) {
    const int n = static_cast<int>(levels.size());
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd yr(n), yi(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = std::pow(levels[static_cast<std::size_t>(i)].h, alpha);
        yr[i] = levels[static_cast<std::size_t>(i)].lambda.real();
        yi[i] = levels[static_cast<std::size_t>(i)].lambda.imag();
    }
    const Eigen::Matrix2d G = X.transpose() * X;
    const Eigen::Vector2d br = X.transpose() * yr;
    const Eigen::Vector2d bi = X.transpose() * yi;
    const Eigen::Vector2d cr = G.ldlt().solve(br);
    const Eigen::Vector2d ci = G.ldlt().solve(bi);
    if (extr_out) *extr_out = {cr[0], ci[0]};
    const double rr = (yr - X * cr).squaredNorm();
    const double ri = (yi - X * ci).squaredNorm();
    return rr + ri;
}

}  // namespace detail

inline FitResult fit_rate(std::vector<FitLevel> levels) {
    if (levels.size() < 3) throw std::invalid_argument("fit_rate: need at least 3 levels");
    std::sort(levels.begin(), levels.end(),
              [](const FitLevel& a, const FitLevel& b) { return a.h > b.h; });
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (!(levels[i].h < levels[i - 1].h))
            throw std::invalid_argument("fit_rate: levels must have distinct h");

    FitResult result;
    double spread = 0.0;
    for (const auto& l : levels) spread = std::max(spread, std::abs(l.lambda - levels[0].lambda));
    const double scale = std::max(1.0, std::abs(levels[0].lambda));
    if (spread <= 1e-14 * scale) {
        result.alpha = std::numeric_limits<double>::infinity();
        result.lambda_extr = levels.back().lambda;
        result.fit_residual = 0.0;
        return result;
    }

    // Golden-section search on alpha; the inner problem is linear.
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = 0.5, hi = 8.0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = detail::fit_linear(levels, x1, nullptr);
    double f2 = detail::fit_linear(levels, x2, nullptr);
    for (int iter = 0; iter < 120 && (hi - lo) > 1e-8; ++iter) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = detail::fit_linear(levels, x1, nullptr);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = detail::fit_linear(levels, x2, nullptr);
        }
    }
    result.alpha = 0.5 * (lo + hi);
    result.fit_residual = std::sqrt(detail::fit_linear(levels, result.alpha, &result.lambda_extr));

    for (std::size_t i = 1; i < levels.size(); ++i) {
        const double prev = std::abs(levels[i - 1].lambda - result.lambda_extr);
        const double curr = std::abs(levels[i].lambda - result.lambda_extr);
        if (curr > prev * (1.0 + 1e-9)) result.monotone_warning = true;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Pressure recovery: p = -1/2 (tr sigma_h + u_h.beta - mean(u_h.beta)),
// projected cellwise onto P_k.

struct PressureField {
    int degree = 0;
    Eigen::MatrixXcd coeffs;          // n_cells x dim(P_k), reference monomial basis
    std::complex<double> mean{0.0};   // integral of p_h over the domain
    double norm0 = 0.0;               // L2 norm of p_h
};

inline PressureField recover_pressure(const SpacePair& space, const Eigen::VectorXcd& sigma,
                                      const Eigen::VectorXcd& u, const ConvectionField& beta) {
    const Mesh& mesh = *space.mesh;
    const int dv = space.velocity_dim_local();
    const QuadRule rule =
        rule_for_degree(std::min(10, std::max(2 * space.ref.poly_degree(),
                                              2 * space.velocity_degree + beta.quadrature_degree() + 2)));
    CellWalker walker(space, rule);
    CellEval ev;

    // mean of tr(u x beta) = u . beta over the domain
    std::complex<double> tr_ub_integral = 0.0;
    double area = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        walker.load(c, ev);
        for (int q = 0; q < rule.size(); ++q) {
            const Eigen::Vector2cd uq = eval_velocity<std::complex<double>>(space, u, ev, q);
            const Eigen::Vector2d bq = beta.eval(ev.xq[static_cast<std::size_t>(q)]);
            tr_ub_integral += ev.wq[static_cast<std::size_t>(q)] * (uq.x() * bq.x() + uq.y() * bq.y());
            area += ev.wq[static_cast<std::size_t>(q)];
        }
    }
    const std::complex<double> tr_ub_mean = tr_ub_integral / area;

    PressureField p;
    p.degree = space.velocity_degree;
    p.coeffs.resize(mesh.n_cells(), dv);
    std::complex<double> integral = 0.0;
    double norm_sq = 0.0;
    Eigen::MatrixXd gram(dv, dv);
    Eigen::VectorXcd rhs(dv);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        walker.load(c, ev);
        gram.setZero();
        rhs.setZero();
        for (int q = 0; q < rule.size(); ++q) {
            const double w = ev.wq[static_cast<std::size_t>(q)];
            const Eigen::Matrix2cd sq = eval_sigma<std::complex<double>>(space, sigma, ev, q);
            const Eigen::Vector2cd uq = eval_velocity<std::complex<double>>(space, u, ev, q);
            const Eigen::Vector2d bq = beta.eval(ev.xq[static_cast<std::size_t>(q)]);
            const std::complex<double> pq =
                -0.5 * (sq(0, 0) + sq(1, 1) + uq.x() * bq.x() + uq.y() * bq.y() - tr_ub_mean);
            const auto& vel = ev.vel[static_cast<std::size_t>(q)];
            for (int i = 0; i < dv; ++i) {
                rhs[i] += w * pq * vel[static_cast<std::size_t>(i)];
                for (int j = 0; j < dv; ++j)
                    gram(i, j) += w * vel[static_cast<std::size_t>(i)] * vel[static_cast<std::size_t>(j)];
            }
            integral += w * pq;
            norm_sq += w * std::norm(pq);
        }
        const Eigen::LLT<Eigen::MatrixXd> llt(gram);
        p.coeffs.row(c) = llt.solve(rhs.real()).transpose().cast<std::complex<double>>() +
                          std::complex<double>(0.0, 1.0) *
                              llt.solve(rhs.imag()).transpose().cast<std::complex<double>>();
    }
    p.mean = integral;
    p.norm0 = std::sqrt(norm_sq);
    return p;
}

// ---------------------------------------------------------------------------
// Spectrum windowing and conjugate grouping.

struct SpectrumWindow {
    double re_min = -std::numeric_limits<double>::infinity();
    double re_max = std::numeric_limits<double>::infinity();
    double im_min = -std::numeric_limits<double>::infinity();
    double im_max = std::numeric_limits<double>::infinity();
};

inline bool is_conjugate_pair(std::complex<double> a, std::complex<double> b) {
    return std::abs(a - std::conj(b)) <= 1e-6 * std::max(1.0, std::abs(a));
}

// Sorts by real part then imaginary part; members of a conjugate pair end up
// adjacent because they share the real part.
inline std::vector<std::complex<double>> filter_spectrum(
    const std::vector<std::complex<double>>& values, const SpectrumWindow& window = {}) {
    std::vector<std::complex<double>> out;
    for (const auto& v : values)
        if (v.real() >= window.re_min && v.real() <= window.re_max && v.imag() >= window.im_min &&
            v.imag() <= window.im_max)
            out.push_back(v);
    std::sort(out.begin(), out.end(), [](std::complex<double> a, std::complex<double> b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return out;
}

}  // namespace oseen
