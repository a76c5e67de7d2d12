#include "binscreen/links.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "binscreen/error.hpp"

namespace binscreen {

double normal_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0,1)");
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double normal_pdf(double x, double mean, double variance) noexcept {
    const double z = (x - mean);
    return std::exp(-0.5 * z * z / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

namespace {

// Golub-Welsch for starting values, then Newton on the orthonormal
// recurrence to polish nodes and get weights to full precision.
GaussHermiteRule build_rule(int n) {
    GaussHermiteRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    if (n == 1) {
        rule.nodes[0] = 0.0;
        rule.weights[0] = std::sqrt(std::numbers::pi);
        return rule;
    }
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(n - 1);
    for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(0.5 * k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& guess = solver.eigenvalues();

    const double p0 = std::pow(std::numbers::pi, -0.25);
    for (int i = 0; i < n; ++i) {
        double x = guess[i];
        double deriv = 1.0;
        for (int it = 0; it < 8; ++it) {
            double pm1 = p0, pm2 = 0.0, pj = p0;
            for (int j = 1; j <= n; ++j) {
                pj = x * std::sqrt(2.0 / j) * pm1 - std::sqrt((j - 1.0) / j) * pm2;
                pm2 = pm1;
                pm1 = pj;
            }
            // pj = p_n(x), pm2 = p_{n-1}(x)
            deriv = std::sqrt(2.0 * n) * pm2;
            const double step = pj / deriv;
            x -= step;
            if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / (deriv * deriv);
    }
    // Enforce exact symmetry of the rule.
    for (int i = 0; i < n / 2; ++i) {
        const int j = n - 1 - i;
        const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.nodes[i] = -x;
        rule.nodes[j] = x;
        rule.weights[i] = rule.weights[j] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

double logistic_cdf(double t) noexcept {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

// (1/4) sech^2(t/2) written as e/(1+e)^2 with e = exp(-|t|); never overflows.
double logistic_density(double t) noexcept {
    const double e = std::exp(-std::abs(t));
    const double d = 1.0 + e;
    return e / (d * d);
}

void check_variance(double v, const char* who) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError(std::string(who) + ": variance must be finite and >= 0");
}

template <class F>
double gauss_hermite_expectation(const GaussHermiteRule& rule, double mean, double v, F&& f) {
    const double scale = std::sqrt(2.0 * v);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mean + scale * rule.nodes[i]);
    return sum / std::sqrt(std::numbers::pi);
}

template <class F>
double kronrod_expectation(double mean, double v, F&& f) {
    auto integrand = [&](double t) { return normal_pdf(t, mean, v) * f(t); };
    constexpr double inf = std::numeric_limits<double>::infinity();
    using boost::math::quadrature::gauss_kronrod;
    // Split at the peak of h so both half-lines are smooth and monotone-tailed.
    return gauss_kronrod<double, 61>::integrate(integrand, -inf, 0.0, 20, 1e-14) +
           gauss_kronrod<double, 61>::integrate(integrand, 0.0, inf, 20, 1e-14);
}

}  // namespace

const GaussHermiteRule& gauss_hermite_rule(int n) {
    if (n < 1) throw DomainError("gauss_hermite_rule: need at least one node");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<GaussHermiteRule>(build_rule(n));
    return *slot;
}

LinkFamily::LinkFamily(LinkKind kind, int quadrature_nodes)
    : kind_(kind), nodes_(quadrature_nodes), rule_(&gauss_hermite_rule(quadrature_nodes)) {}

std::string_view LinkFamily::name() const noexcept { return kind_ == LinkKind::Probit ? "probit" : "logit"; }

double LinkFamily::cdf(double t) const { return kind_ == LinkKind::Probit ? normal_cdf(t) : logistic_cdf(t); }

double LinkFamily::density(double t) const noexcept {
    return kind_ == LinkKind::Probit ? normal_pdf(t) : logistic_density(t);
}

double LinkFamily::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("link quantile: p must lie in (0,1)");
    if (kind_ == LinkKind::Probit) return normal_quantile(p);
    return std::log(p) - std::log1p(-p);
}

// The rule resolves h(mean + sqrt(2v) x) while the pole/peak width of h in x,
// roughly pi / sqrt(2v), stays well above the node spacing ~ 1/sqrt(n).
double LinkFamily::gauss_hermite_variance_limit() const noexcept { return 0.04 * nodes_; }

LinkKind parse_link(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "probit") return LinkKind::Probit;
    if (lower == "logit") return LinkKind::Logit;
    throw InvalidArgument("unknown link '" + std::string(name) + "' (expected probit or logit)");
}

double link_cdf(const LinkFamily& link, double t) {
    if (!std::isfinite(t)) throw DomainError("link_cdf: argument must be finite");
    return link.cdf(t);
}

double mixture_integral(const LinkFamily& link, double beta0, double v) {
    check_variance(v, "mixture_integral");
    if (!std::isfinite(beta0)) throw DomainError("mixture_integral: beta0 must be finite");
    if (v == 0.0) return link.density(beta0);
    auto h = [&link](double t) { return link.density(t); };
    if (v <= link.gauss_hermite_variance_limit()) return gauss_hermite_expectation(link.rule(), beta0, v, h);
    return kronrod_expectation(beta0, v, h);
}

double population_mean(const LinkFamily& link, double beta0, double v) {
    check_variance(v, "population_mean");
    if (!std::isfinite(beta0)) throw DomainError("population_mean: beta0 must be finite");
    if (v == 0.0) return link.cdf(beta0);
    auto cdf = [&link](double t) { return link.cdf(t); };
    if (v <= link.gauss_hermite_variance_limit()) return gauss_hermite_expectation(link.rule(), beta0, v, cdf);
    return kronrod_expectation(beta0, v, cdf);
}

}  // namespace binscreen
