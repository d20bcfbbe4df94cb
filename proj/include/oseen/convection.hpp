#pragma once

// Divergence-free convective velocity fields from the 2D experiment suite,
// with optional scaling and sup-norm normalization.

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "oseen/mesh.hpp"

namespace oseen {

enum class BetaId { Zero, Beta1, Beta2, Beta3, Beta4, AxisConstant };

inline BetaId beta_id_from_string(const std::string& s) {
    if (s == "zero") return BetaId::Zero;
    if (s == "beta1") return BetaId::Beta1;
    if (s == "beta2") return BetaId::Beta2;
    if (s == "beta3") return BetaId::Beta3;
    if (s == "beta4") return BetaId::Beta4;
    if (s == "axis") return BetaId::AxisConstant;
    throw std::invalid_argument("unknown convective field id: " + s);
}

inline std::string to_string(BetaId id) {
    switch (id) {
        case BetaId::Zero: return "zero";
        case BetaId::Beta1: return "beta1";
        case BetaId::Beta2: return "beta2";
        case BetaId::Beta3: return "beta3";
        case BetaId::Beta4: return "beta4";
        default: return "axis";
    }
}

struct ConvectionField {
    BetaId id = BetaId::Beta1;
    Domain domain = Domain::Square;
    double scale = 1.0;      // multiplier applied to the raw field
    bool normalized = false; // divide the scaled field by its sup norm
    double sup_norm = 1.0;   // sup norm of the *effective* field
    double factor = 1.0;     // effective multiplier of the raw field

    Eigen::Vector2d eval(const Eigen::Vector2d& p) const { return factor * raw(p); }

    Eigen::Vector2d raw(const Eigen::Vector2d& p) const {
        const double x = p.x(), y = p.y();
        switch (id) {
            case BetaId::Zero:
                return {0.0, 0.0};
            case BetaId::Beta1:
            case BetaId::AxisConstant:
                return {1.0, 0.0};
            case BetaId::Beta2:
                return {std::cos(M_PI * x) * std::sin(M_PI * y),
                        -std::sin(M_PI * x) * std::cos(M_PI * y)};
            case BetaId::Beta3:
                return {y, -x};
            case BetaId::Beta4:
                return {-4000.0 * y * (1.0 - y * y) * (1.0 - x * x) * (1.0 - x * x),
                        4000.0 * x * (1.0 - x * x) * (1.0 - y * y) * (1.0 - y * y)};
        }
        return {0.0, 0.0};
    }

    // Analytic divergence of the raw field; all suite members are solenoidal.
    double raw_divergence(const Eigen::Vector2d& p) const {
        const double x = p.x(), y = p.y();
        switch (id) {
            case BetaId::Beta2:
                return -M_PI * std::sin(M_PI * x) * std::sin(M_PI * y) +
                       M_PI * std::sin(M_PI * x) * std::sin(M_PI * y);
            case BetaId::Beta4:
                return 16000.0 * x * y * (1.0 - x * x) * (1.0 - y * y) -
                       16000.0 * x * y * (1.0 - x * x) * (1.0 - y * y);
            default:
                return 0.0;
        }
    }

    // Quadrature degree bump for assembling the convection form: polynomial
    // fields contribute their exact degree; the trigonometric field is
    // over-integrated at the same level as the degree-7 stream-function field.
    int quadrature_degree() const {
        switch (id) {
            case BetaId::Beta3: return 1;
            case BetaId::Beta2:
            case BetaId::Beta4: return 7;
            default: return 0;
        }
    }
};

namespace detail {

inline bool in_domain(Domain domain, const Eigen::Vector2d& p) {
    if (domain != Domain::LShape) return true;
    return p.x() >= 0.0 || p.y() >= 0.0;
}

inline double sample_sup_norm(const ConvectionField& field, Domain domain) {
    const double lo = (domain == Domain::Square) ? 0.0 : -1.0;
    const double hi = 1.0;
    const int n = 2000;  // 2001 x 2001 samples
    double sup = 0.0;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            const Eigen::Vector2d p(lo + (hi - lo) * i / n, lo + (hi - lo) * j / n);
            if (!in_domain(domain, p)) continue;
            sup = std::max(sup, field.raw(p).norm());
        }
    return sup;
}

inline double raw_sup_norm(const ConvectionField& field, Domain domain) {
    switch (field.id) {
        case BetaId::Zero: return 0.0;
        case BetaId::Beta1:
        case BetaId::AxisConstant:
        case BetaId::Beta2: return 1.0;
        case BetaId::Beta3: return std::sqrt(2.0);  // attained at the domain corners
        case BetaId::Beta4: return sample_sup_norm(field, domain);
    }
    return 1.0;
}

}  // namespace detail

inline ConvectionField make_convection_field(BetaId id, Domain domain, double scale = 1.0,
                                             bool normalize = false) {
    ConvectionField field;
    field.id = id;
    field.domain = domain;
    field.scale = scale;
    field.normalized = normalize;
    const double raw_sup = detail::raw_sup_norm(field, domain) * std::abs(scale);
    if (normalize) {
        if (raw_sup == 0.0)
            throw std::invalid_argument("make_convection_field: cannot normalize a zero field");
        field.factor = scale / raw_sup;
        field.sup_norm = 1.0;
    } else {
        field.factor = scale;
        field.sup_norm = raw_sup;
    }
    return field;
}

}  // namespace oseen
