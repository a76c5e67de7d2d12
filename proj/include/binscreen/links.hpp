#pragma once

#include <string_view>
#include <vector>

namespace binscreen {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

double normal_pdf(double x) noexcept;
double normal_cdf(double x) noexcept;
double normal_quantile(double p);
/// Density of Normal(mean, variance) at x.
double normal_pdf(double x, double mean, double variance) noexcept;

/// Gauss-Hermite rule for the weight exp(-x^2). Nodes ascending.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached, thread-safe. Throws DomainError for n < 1.
const GaussHermiteRule& gauss_hermite_rule(int n);

enum class LinkKind { Probit, Logit };

/// Symmetric scale-mixture-of-normals inverse link H with density h.
///
/// Both families here have h(t) = h(-t) and H(0) = 1/2. Expectations of
/// h or H under a normal law are evaluated with a Gauss-Hermite rule of
/// `quadrature_nodes` points; when the normal is too wide for the rule to
/// resolve h, an adaptive Gauss-Kronrod integral in t is used instead.
class LinkFamily {
public:
    explicit LinkFamily(LinkKind kind = LinkKind::Probit, int quadrature_nodes = 128);

    LinkKind kind() const noexcept { return kind_; }
    int quadrature_nodes() const noexcept { return nodes_; }
    std::string_view name() const noexcept;

    double cdf(double t) const;
    double density(double t) const noexcept;
    /// H^{-1}(p) for p in (0,1).
    double quantile(double p) const;

    const GaussHermiteRule& rule() const noexcept { return *rule_; }

    /// Largest variance for which the Gauss-Hermite rule is trusted.
    double gauss_hermite_variance_limit() const noexcept;

private:
    LinkKind kind_;
    int nodes_;
    const GaussHermiteRule* rule_;
};

/// "probit" / "logit" (case-insensitive). Throws InvalidArgument otherwise.
LinkKind parse_link(std::string_view name);

/// H(t). Throws DomainError for non-finite t.
double link_cdf(const LinkFamily& link, double t);

/// E[h(beta0 + W)], W ~ Normal(0, v); equals h(beta0) when v = 0.
/// Throws DomainError for v < 0.
double mixture_integral(const LinkFamily& link, double beta0, double v);

/// E[H(beta0 + W)], W ~ Normal(0, v). Throws DomainError for v < 0.
double population_mean(const LinkFamily& link, double beta0, double v);

}  // namespace binscreen
