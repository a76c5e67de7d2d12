#pragma once

#include <algorithm>
#include <cmath>

#include "binscreen/links.hpp"

namespace binscreen {

/// Log-likelihood contribution of one Bernoulli observation and its first
/// and second derivatives with respect to the linear predictor eta.
struct PointLikelihood {
    double value;
    double d1;
    double d2;
};

namespace detail {

// phi(z)/Phi(z) and z + phi(z)/Phi(z); the asymptotic branch avoids the
// cancellation in the second quantity for very negative z.
inline void probit_ratio(double z, double& lambda, double& z_plus_lambda) noexcept {
    if (z < -30.0) {
        const double r = 1.0 / z;
        const double r2 = r * r;
        z_plus_lambda = -r * (1.0 - 2.0 * r2 + 10.0 * r2 * r2);
        lambda = z_plus_lambda - z;
        return;
    }
    lambda = normal_pdf(z) / normal_cdf(z);
    z_plus_lambda = z + lambda;
}

inline double log_normal_cdf(double z) noexcept {
    if (z < -30.0) {
        const double r2 = 1.0 / (z * z);
        return -0.5 * z * z - std::log(-z) - 0.91893853320467274178 +
               std::log1p(-r2 + 3.0 * r2 * r2 - 15.0 * r2 * r2 * r2);
    }
    if (z > 5.0) return std::log1p(-normal_cdf(-z));
    return std::log(normal_cdf(z));
}

inline double softplus(double t) noexcept { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

}  // namespace detail

inline PointLikelihood point_likelihood(LinkKind link, double y, double eta) noexcept {
    if (link == LinkKind::Logit) {
        const double e = std::exp(-std::abs(eta));
        const double mu = eta >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
        const double softplus = std::max(eta, 0.0) + std::log1p(e);
        return {y * eta - softplus, y - mu, -mu * (1.0 - mu)};
    }
    const double sign = y > 0.5 ? 1.0 : -1.0;
    const double z = sign * eta;
    if (z < -30.0 || z > 5.0) {
        double lam, zpl;
        detail::probit_ratio(z, lam, zpl);
        return {detail::log_normal_cdf(z), sign * lam, -lam * zpl};
    }
    const double cdf = normal_cdf(z);
    const double lam = normal_pdf(z) / cdf;
    return {std::log(cdf), sign * lam, -lam * (z + lam)};
}

/// Expected information (IRLS weight) h(eta)^2 / (H(eta)(1 - H(eta))).
inline double fisher_weight(LinkKind link, double eta) noexcept {
    if (link == LinkKind::Logit) {
        const double e = std::exp(-std::abs(eta));
        return e / ((1.0 + e) * (1.0 + e));
    }
    double lam_pos, zpl_pos, lam_neg, zpl_neg;
    detail::probit_ratio(eta, lam_pos, zpl_pos);
    detail::probit_ratio(-eta, lam_neg, zpl_neg);
    return lam_pos * lam_neg;
}

inline double point_log_likelihood(LinkKind link, double y, double eta) noexcept {
    if (link == LinkKind::Logit) return y * eta - detail::softplus(eta);
    return detail::log_normal_cdf(y > 0.5 ? eta : -eta);
}

}  // namespace binscreen
