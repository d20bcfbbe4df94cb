#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oseen/eigensolver.hpp"
#include "qz_oracle.hpp"

using namespace oseen;

namespace {

SparseSystem make_system(int N, Family family, int degree, BetaId beta_id, double nu,
                         bool normalize, bool adjoint = false) {
    const Mesh mesh = build_square(N);
    const SpacePair space = build_space_pair(mesh, family, degree);
    const ConvectionField beta = make_convection_field(beta_id, Domain::Square, 1.0, normalize);
    return adjoint ? assemble_adjoint(space, beta, nu) : assemble_forms(space, beta, nu);
}

}  // namespace

TEST_CASE("one by one sanity pencil", "[eigensolver]") {
    EigenProblem problem;
    problem.K = SpMat(1, 1);
    problem.K.insert(0, 0) = 2.0;
    problem.Mt = SpMat(1, 1);
    problem.Mt.insert(0, 0) = 1.0;
    problem.shift = 0.0;
    problem.nev = 1;
    problem.n_sigma = 0;
    problem.n_u = 0;
    const auto pairs = solve_shift_invert(problem);
    REQUIRE(pairs.size() == 1);
    REQUIRE(std::abs(pairs[0].lambda - Complex(2.0, 0.0)) <= 1e-12);
}

TEST_CASE("shift-invert matches dense QZ on the same pencil", "[eigensolver]") {
    // oracle: dense QZ of the identical pencil, N = 4 square
    for (auto [family, degree] : {std::pair{Family::RT, 0}, std::pair{Family::BDM, 1}}) {
        for (BetaId id : {BetaId::Zero, BetaId::Beta1, BetaId::Beta3}) {
            const bool normalize = id != BetaId::Zero;
            const SparseSystem sys = make_system(4, family, degree, id, 0.5, normalize);
            const EigenProblem problem = build_eigen_problem(sys, Complex(10.0, 0.0), 6);
            const auto pairs = solve_shift_invert(problem);
            REQUIRE(pairs.size() >= 6);
            const auto reference = oseen_test::qz_spectrum(problem.K, problem.Mt);
            REQUIRE(reference.size() >= 6);
            for (int i = 0; i < 6; ++i) {
                const Complex got = pairs[static_cast<std::size_t>(i)].lambda;
                const Complex ref = reference[static_cast<std::size_t>(i)];
                REQUIRE(std::abs(got - ref) <= 1e-8 * std::abs(ref));
            }
        }
    }
}

TEST_CASE("Stokes limit has a real positive spectrum", "[eigensolver]") {
    const SparseSystem sys = make_system(4, Family::RT, 0, BetaId::Zero, 0.5, false);
    const EigenProblem problem = build_eigen_problem(sys, Complex(10.0, 0.0), 6);
    const auto pairs = solve_shift_invert(problem);
    const auto reference = oseen_test::qz_spectrum(problem.K, problem.Mt);
    for (std::size_t i = 0; i < 6; ++i) {
        REQUIRE(std::abs(pairs[i].lambda.imag()) <= 1e-9);
        REQUIRE(pairs[i].lambda.real() > 0.0);
        REQUIRE(std::abs(pairs[i].lambda - reference[i]) <= 1e-8 * std::abs(reference[i]));
    }
}

TEST_CASE("returned pairs satisfy the residual and constraint bounds", "[eigensolver]") {
    const SparseSystem sys = make_system(4, Family::RT, 0, BetaId::Beta1, 0.5, true);
    const EigenProblem problem = build_eigen_problem(sys, Complex(10.0, 0.0), 4);
    const auto pairs = solve_shift_invert(problem);
    const double k_norm = Eigen::MatrixXd(problem.K).norm();
    for (const auto& pair : pairs) {
        REQUIRE(pair.residual <= 1e-8);
        // the multiplier component of an eigenvector vanishes
        VectorXc x(problem.K.rows());
        x << pair.sigma_coeffs, VectorXc::Zero(1), pair.u_coeffs;
        const double direct =
            (detail::real_mul(problem.K, x) - pair.lambda * detail::real_mul(problem.Mt, x))
                .norm();
        REQUIRE(direct <= 1e-8 * k_norm * x.norm());
        // trace constraint transfers to the eigenvector
        const Complex gdotsigma = sys.g.cast<Complex>().dot(pair.sigma_coeffs);
        REQUIRE(std::abs(gdotsigma) <= 1e-9 * pair.sigma_coeffs.norm());
    }
}

TEST_CASE("repeated solves are bit-identical", "[eigensolver]") {
    const SparseSystem sys = make_system(3, Family::RT, 0, BetaId::Beta1, 0.5, true);
    const EigenProblem problem = build_eigen_problem(sys, Complex(8.0, 0.0), 3, 99);
    const auto a = solve_shift_invert(problem);
    const auto b = solve_shift_invert(problem);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].lambda.real() == b[i].lambda.real());
        REQUIRE(a[i].lambda.imag() == b[i].lambda.imag());
        REQUIRE(a[i].sigma_coeffs == b[i].sigma_coeffs);
    }
}

TEST_CASE("complex shift agrees with the real-shift solve", "[eigensolver]") {
    const SparseSystem sys = make_system(3, Family::RT, 0, BetaId::Beta1, 0.5, true);
    const auto real_pairs = solve_shift_invert(build_eigen_problem(sys, Complex(9.0, 0.0), 3));
    const auto cplx_pairs = solve_shift_invert(build_eigen_problem(sys, Complex(9.0, 0.5), 3));
    for (std::size_t i = 0; i < 3; ++i)
        REQUIRE(std::abs(real_pairs[i].lambda - cplx_pairs[i].lambda) <=
                1e-8 * std::abs(real_pairs[i].lambda));
}

TEST_CASE("nev prefix stability", "[eigensolver]") {
    const SparseSystem sys = make_system(4, Family::RT, 0, BetaId::Beta1, 0.5, true);
    const auto one = solve_shift_invert(build_eigen_problem(sys, Complex(10.0, 0.0), 1));
    const auto four = solve_shift_invert(build_eigen_problem(sys, Complex(10.0, 0.0), 4));
    REQUIRE(std::abs(one[0].lambda - four[0].lambda) <= 1e-9 * std::abs(four[0].lambda));
}

TEST_CASE("source solve: zero forcing gives the zero solution", "[eigensolver]") {
    const SparseSystem sys = make_system(3, Family::RT, 0, BetaId::Beta1, 0.5, true);
    const auto [sigma, u] = solve_source(sys, Eigen::VectorXd::Zero(sys.n_u));
    REQUIRE(sigma.cwiseAbs().maxCoeff() <= 1e-14);
    REQUIRE(u.cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("discrete duality of the source operators", "[eigensolver]") {
    // <T_h f, w>_M = <f, T*_h w>_M for random f, w
    const Mesh mesh = build_square(4);
    const SpacePair space = build_space_pair(mesh, Family::RT, 0);
    const ConvectionField beta = make_convection_field(BetaId::Beta3, Domain::Square, 1.0, true);
    const SparseSystem primal = assemble_forms(space, beta, 0.5);
    const SparseSystem adjoint = assemble_adjoint(space, beta, 0.5);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd f(primal.n_u), w(primal.n_u);
        for (int i = 0; i < f.size(); ++i) {
            f[i] = dist(rng);
            w[i] = dist(rng);
        }
        const auto [sig_f, u_f] = solve_source(primal, Eigen::VectorXd(-(primal.M * f)));
        const auto [sig_w, u_w] = solve_source(adjoint, Eigen::VectorXd(-(primal.M * w)));
        const double lhs = (primal.M * u_f).dot(w);
        const double rhs = f.dot(primal.M * u_w);
        REQUIRE(lhs == Catch::Approx(rhs).epsilon(1e-9));
    }
}

TEST_CASE("manufactured source problem converges at the expected rate", "[eigensolver]") {
    // oracle: u = curl(x^2 (1-x)^2 y^2 (1-y)^2), p = x + y - 1,
    // f = -nu lap(u) + (beta.grad) u + grad p with beta = (1, 0)
    const double nu = 0.5;
    const Poly2 x = Poly2::monomial(1, 0), y = Poly2::monomial(0, 1);
    const Poly2 one = Poly2::constant(1.0);
    const Poly2 gx = x * x * (one - x) * (one - x);
    const Poly2 gy = y * y * (one - y) * (one - y);
    const Poly2 psi = gx * gy;
    const Poly2 u1 = psi.dy(), u2 = psi.dx() * -1.0;
    const Poly2 lap_u1 = u1.dx().dx() + u1.dy().dy();
    const Poly2 lap_u2 = u2.dx().dx() + u2.dy().dy();
    const Poly2 f1 = lap_u1 * (-nu) + u1.dx() + one;  // grad p = (1, 1)
    const Poly2 f2 = lap_u2 * (-nu) + u2.dx() + one;

    for (auto [family, degree, expected_rate] :
         {std::tuple{Family::RT, 0, 1.0}, std::tuple{Family::RT, 1, 2.0}}) {
        std::vector<double> errors;
        for (int N : {4, 8, 16}) {
            const Mesh mesh = build_square(N);
            const SpacePair space = build_space_pair(mesh, family, degree);
            const ConvectionField beta = make_convection_field(BetaId::Beta1, Domain::Square);
            const SparseSystem sys = assemble_forms(space, beta, nu);
            const Eigen::VectorXd rhs = assemble_source_rhs(space, [&](const Eigen::Vector2d& p) {
                return Eigen::Vector2d(f1.eval(p.x(), p.y()), f2.eval(p.x(), p.y()));
            });
            const auto [sigma, u] = solve_source(sys, rhs);

            const QuadRule rule = rule_for_degree(10);
            CellWalker walker(space, rule);
            CellEval ev;
            double err_sq = 0.0;
            const Eigen::VectorXd u_real = u;
            for (int c = 0; c < mesh.n_cells(); ++c) {
                walker.load(c, ev);
                for (int q = 0; q < rule.size(); ++q) {
                    const Eigen::Vector2d xq = ev.xq[static_cast<std::size_t>(q)];
                    const Eigen::Vector2d exact(u1.eval(xq.x(), xq.y()), u2.eval(xq.x(), xq.y()));
                    const Eigen::Vector2d approx = eval_velocity<double>(space, u_real, ev, q);
                    err_sq += ev.wq[static_cast<std::size_t>(q)] * (exact - approx).squaredNorm();
                }
            }
            errors.push_back(std::sqrt(err_sq));
        }
        const double rate = std::log2(errors[1] / errors[2]);
        REQUIRE(rate >= expected_rate - 0.2);
    }
}

TEST_CASE("adjoint spectrum is the conjugate of the primal", "[eigensolver]") {
    const SparseSystem primal = make_system(4, Family::RT, 0, BetaId::Beta1, 0.5, true);
    const SparseSystem adjoint = make_system(4, Family::RT, 0, BetaId::Beta1, 0.5, true, true);
    const auto pp = solve_shift_invert(build_eigen_problem(primal, Complex(10.0, 0.0), 4));
    const auto ap = solve_shift_invert(build_eigen_problem(adjoint, Complex(10.0, 0.0), 4));
    REQUIRE(spectrum_adjoint_check(pp, ap) <= 1e-7);

    // beta = 0: identical systems, mismatch at solver tolerance
    const SparseSystem sp = make_system(3, Family::RT, 0, BetaId::Zero, 0.5, false);
    const SparseSystem sa = make_system(3, Family::RT, 0, BetaId::Zero, 0.5, false, true);
    const auto p0 = solve_shift_invert(build_eigen_problem(sp, Complex(10.0, 0.0), 3));
    const auto a0 = solve_shift_invert(build_eigen_problem(sa, Complex(10.0, 0.0), 3));
    REQUIRE(spectrum_adjoint_check(p0, a0) <= 1e-8);
}
