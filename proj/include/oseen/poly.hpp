#pragma once

// Dense bivariate polynomials in graded-lexicographic storage. Used to
// represent reference-element basis functions and their divergences, and to
// evaluate exact integrals over the reference triangle.

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace oseen {

// Exact integral of x^a y^b over the reference triangle {x,y>=0, x+y<=1}.
// Equals a! b! / (a+b+2)!, which is exactly representable up to a+b <= 16.
inline double ref_triangle_monomial_integral(int a, int b) {
    double value = 1.0;
    // a! b! / (a+b+2)! = [prod_{i=1..b} i/(a+i)] / ((a+b+1)(a+b+2))
    for (int i = 1; i <= b; ++i) value *= static_cast<double>(i) / (a + i);
    value /= static_cast<double>(a + b + 1) * (a + b + 2);
    return value;
}

class Poly2 {
public:
    Poly2() = default;
    explicit Poly2(int degree) : degree_(degree), c_(size(degree), 0.0) {}

    static int size(int degree) { return (degree + 1) * (degree + 2) / 2; }
    static int index(int a, int b) {
        const int d = a + b;
        return d * (d + 1) / 2 + b;
    }

    static Poly2 monomial(int a, int b, double coeff = 1.0) {
        Poly2 p(a + b);
        p.at(a, b) = coeff;
        return p;
    }
    static Poly2 constant(double value) { return monomial(0, 0, value); }

    int degree() const { return degree_; }
    double& at(int a, int b) { return c_[static_cast<std::size_t>(index(a, b))]; }
    double at(int a, int b) const {
        if (a + b > degree_) return 0.0;
        return c_[static_cast<std::size_t>(index(a, b))];
    }

    double eval(double x, double y) const {
        // Horner in total degree is overkill here; direct powers are fine for
        // the small degrees this library uses.
        double result = 0.0;
        for (int d = 0; d <= degree_; ++d) {
            for (int b = 0; b <= d; ++b) {
                const double c = c_[static_cast<std::size_t>(index(d - b, b))];
                if (c != 0.0) result += c * ipow(x, d - b) * ipow(y, b);
            }
        }
        return result;
    }

    Poly2 dx() const {
        Poly2 r(std::max(degree_ - 1, 0));
        for (int d = 1; d <= degree_; ++d)
            for (int b = 0; b <= d; ++b) {
                const int a = d - b;
                if (a >= 1) r.at(a - 1, b) += a * at(a, b);
            }
        return r;
    }
    Poly2 dy() const {
        Poly2 r(std::max(degree_ - 1, 0));
        for (int d = 1; d <= degree_; ++d)
            for (int b = 0; b <= d; ++b) {
                const int a = d - b;
                if (b >= 1) r.at(a, b - 1) += b * at(a, b);
            }
        return r;
    }

    Poly2 operator+(const Poly2& other) const {
        Poly2 r(std::max(degree_, other.degree_));
        accumulate(r, *this, 1.0);
        accumulate(r, other, 1.0);
        return r;
    }
    Poly2 operator-(const Poly2& other) const {
        Poly2 r(std::max(degree_, other.degree_));
        accumulate(r, *this, 1.0);
        accumulate(r, other, -1.0);
        return r;
    }
    Poly2 operator*(double s) const {
        Poly2 r = *this;
        for (double& c : r.c_) c *= s;
        return r;
    }
    Poly2 operator*(const Poly2& other) const {
        Poly2 r(degree_ + other.degree_);
        for (int d1 = 0; d1 <= degree_; ++d1)
            for (int b1 = 0; b1 <= d1; ++b1) {
                const double c1 = at(d1 - b1, b1);
                if (c1 == 0.0) continue;
                for (int d2 = 0; d2 <= other.degree_; ++d2)
                    for (int b2 = 0; b2 <= d2; ++b2) {
                        const double c2 = other.at(d2 - b2, b2);
                        if (c2 != 0.0) r.at(d1 - b1 + d2 - b2, b1 + b2) += c1 * c2;
                    }
            }
        return r;
    }

    // Exact integral over the reference triangle.
    double integrate_ref_triangle() const {
        double total = 0.0;
        for (int d = 0; d <= degree_; ++d)
            for (int b = 0; b <= d; ++b) {
                const double c = at(d - b, b);
                if (c != 0.0) total += c * ref_triangle_monomial_integral(d - b, b);
            }
        return total;
    }

    // Restriction to the segment x(s) = p + s*dir, s in [0,1], as coefficients
    // of a univariate polynomial in s.
    Eigen::VectorXd restrict_to_segment(const Eigen::Vector2d& p,
                                        const Eigen::Vector2d& dir) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(degree_ + 1);
        // Powers of the two affine factors (p.x + s dir.x)^a (p.y + s dir.y)^b.
        std::vector<Eigen::VectorXd> xp = affine_powers(p.x(), dir.x(), degree_);
        std::vector<Eigen::VectorXd> yp = affine_powers(p.y(), dir.y(), degree_);
        for (int d = 0; d <= degree_; ++d)
            for (int b = 0; b <= d; ++b) {
                const double c = at(d - b, b);
                if (c == 0.0) continue;
                const Eigen::VectorXd& u = xp[static_cast<std::size_t>(d - b)];
                const Eigen::VectorXd& v = yp[static_cast<std::size_t>(b)];
                for (int i = 0; i < u.size(); ++i)
                    for (int j = 0; j < v.size(); ++j)
                        out[i + j] += c * u[i] * v[j];
            }
        return out;
    }

private:
    static double ipow(double x, int n) {
        double r = 1.0;
        for (int i = 0; i < n; ++i) r *= x;
        return r;
    }
    static void accumulate(Poly2& dst, const Poly2& src, double scale) {
        for (int d = 0; d <= src.degree_; ++d)
            for (int b = 0; b <= d; ++b) dst.at(d - b, b) += scale * src.at(d - b, b);
    }
    // (alpha + s*beta)^k for k = 0..max_k, as 1D coefficient vectors.
    static std::vector<Eigen::VectorXd> affine_powers(double alpha, double beta, int max_k) {
        std::vector<Eigen::VectorXd> powers;
        powers.reserve(static_cast<std::size_t>(max_k) + 1);
        Eigen::VectorXd one(1);
        one[0] = 1.0;
        powers.push_back(one);
        for (int k = 1; k <= max_k; ++k) {
            const Eigen::VectorXd& prev = powers.back();
            Eigen::VectorXd next = Eigen::VectorXd::Zero(k + 1);
            for (int i = 0; i < prev.size(); ++i) {
                next[i] += alpha * prev[i];
                next[i + 1] += beta * prev[i];
            }
            powers.push_back(next);
        }
        return powers;
    }

    int degree_ = 0;
    std::vector<double> c_ = {0.0};
};

// Exact integral over [0,1] of a univariate polynomial given by coefficients.
inline double integrate_unit_segment(const Eigen::VectorXd& coeffs) {
    double total = 0.0;
    for (int i = 0; i < coeffs.size(); ++i) total += coeffs[i] / (i + 1);
    return total;
}

}  // namespace oseen
