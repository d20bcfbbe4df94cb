#pragma once

// Quadrature on the reference triangle {x,y >= 0, x + y <= 1}.
//
// Degrees 1-9 use Dunavant's symmetric rules, restricted to the members with
// strictly positive weights (the 13-point degree-7 rule has a negative
// centroid weight, so degree-7 requests are served by the degree-8 rule).
// Degree 10 uses a collapsed 6x6 Gauss-Legendre product rule whose nodes are
// generated at runtime; the published 25-point Dunavant-10 table only carries
// 15 digits, which is not enough for the exactness this library promises.

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace oseen {

struct QuadRule {
    std::vector<Eigen::Vector2d> points;  // reference coordinates
    std::vector<double> weights;          // sum to 1/2
    int exact_degree = 0;

    int size() const { return static_cast<int>(points.size()); }
};

// Gauss-Legendre nodes/weights on [0,1]. Nodes are Newton-refined roots of
// the Legendre polynomial, accurate to machine precision.
inline void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double dp = n * (x * p1 - p0) / (x * x - 1.0);
        nodes[static_cast<std::size_t>(i)] = 0.5 * (x + 1.0);
        weights[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
}

namespace detail {

inline void add_orbit1(QuadRule& rule, double w) {
    rule.points.emplace_back(1.0 / 3.0, 1.0 / 3.0);
    rule.weights.push_back(w);
}

// Orbit of barycentric (a, a, 1-2a): three points.
inline void add_orbit3(QuadRule& rule, double a, double w) {
    const double c = 1.0 - 2.0 * a;
    // reference coords (x, y) = (lambda_2, lambda_3)
    rule.points.emplace_back(a, c);
    rule.points.emplace_back(c, a);
    rule.points.emplace_back(a, a);
    rule.weights.insert(rule.weights.end(), 3, w);
}

// Orbit of barycentric (a, b, 1-a-b): six points.
inline void add_orbit6(QuadRule& rule, double a, double b, double w) {
    const double c = 1.0 - a - b;
    rule.points.emplace_back(b, c);
    rule.points.emplace_back(c, b);
    rule.points.emplace_back(a, c);
    rule.points.emplace_back(c, a);
    rule.points.emplace_back(a, b);
    rule.points.emplace_back(b, a);
    rule.weights.insert(rule.weights.end(), 6, w);
}

inline QuadRule dunavant(int degree) {
    QuadRule rule;
    rule.exact_degree = degree;
    // Weights in the tables below are normalized to a unit-area triangle and
    // scaled by the reference area 1/2 on insertion.
    const double half = 0.5;
    switch (degree) {
        case 1:
            add_orbit1(rule, half);
            break;
        case 2:
            add_orbit3(rule, 1.0 / 6.0, half / 3.0);
            break;
        case 4:
            add_orbit3(rule, 0.44594849091596488631832925388305,
                       0.22338158967801146569500700843312 * half);
            add_orbit3(rule, 0.09157621350977074345957146340220,
                       0.10995174365532186763832632490021 * half);
            break;
        case 5:
            add_orbit1(rule, 0.225 * half);
            add_orbit3(rule, 0.47014206410511508977044120951345,
                       0.13239415278850618073764938783315 * half);
            add_orbit3(rule, 0.10128650732345633880098736191512,
                       0.12593918054482715259568394550018 * half);
            break;
        case 6:
            add_orbit3(rule, 0.24928674517091042129163855310702,
                       0.11678627572637936602528961138558 * half);
            add_orbit3(rule, 0.06308901449150222834033160287082,
                       0.05084490637020681692093680910686 * half);
            add_orbit6(rule, 0.31035245103378440541660773395655,
                       0.63650249912139864723014259441205,
                       0.08285107561837357519355345642044 * half);
            break;
        case 8:
            add_orbit1(rule, 0.14431560767778716825109111048906 * half);
            add_orbit3(rule, 0.17056930775176020662229350149146,
                       0.10321737053471825028179155029212 * half);
            add_orbit3(rule, 0.05054722831703097545842355059660,
                       0.03245849762319808031092592834178 * half);
            add_orbit3(rule, 0.45929258829272315602881551449417,
                       0.09509163426728462479389610438858 * half);
            add_orbit6(rule, 0.26311282963463811342178578628464,
                       0.72849239295540428124100037917606,
                       0.02723031417443499426484469007390 * half);
            break;
        case 9:
            add_orbit1(rule, 0.09713579628279609890744676309485 * half);
            add_orbit3(rule, 0.48968251919873762778370692483619,
                       0.03133470022713983234393199080984 * half);
            add_orbit3(rule, 0.43708959149293663726993036443535,
                       0.07782754100477543338465495857972 * half);
            add_orbit3(rule, 0.18820353561903273024096128046733,
                       0.07964773892720910288013526957424 * half);
            add_orbit3(rule, 0.04472951339445297061024247196780,
                       0.02557767565869810438673914467637 * half);
            add_orbit6(rule, 0.22196298916076569567510252769319,
                       0.74119859878449802069007987352342,
                       0.04328353937728937728937728937729 * half);
            break;
        default:
            throw std::logic_error("no Dunavant table for this degree");
    }
    return rule;
}

// Collapsed Gauss-Legendre product rule: exact through degree 2n-2 on the
// triangle (the extra (1-x) Jacobian factor costs one degree in x).
inline QuadRule collapsed_product(int n) {
    std::vector<double> x, wx;
    gauss_legendre_01(n, x, wx);
    QuadRule rule;
    rule.exact_degree = 2 * n - 2;
    rule.points.reserve(static_cast<std::size_t>(n) * n);
    rule.weights.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double u = x[static_cast<std::size_t>(i)];
            const double v = x[static_cast<std::size_t>(j)];
            rule.points.emplace_back(u, v * (1.0 - u));
            rule.weights.push_back(wx[static_cast<std::size_t>(i)] *
                                   wx[static_cast<std::size_t>(j)] * (1.0 - u));
        }
    return rule;
}

}  // namespace detail

inline QuadRule rule_for_degree(int d) {
    if (d < 0 || d > 10) throw std::invalid_argument("rule_for_degree: degree must be in [0, 10]");
    switch (d) {
        case 0:
        case 1:
            return detail::dunavant(1);
        case 2:
            return detail::dunavant(2);
        case 3:
        case 4:
            return detail::dunavant(4);
        case 5:
            return detail::dunavant(5);
        case 6:
            return detail::dunavant(6);
        case 7:
        case 8:
            return detail::dunavant(8);
        case 9:
            return detail::dunavant(9);
        default:
            return detail::collapsed_product(6);
    }
}

}  // namespace oseen
