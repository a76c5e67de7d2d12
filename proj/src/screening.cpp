#include "binscreen/screening.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <numeric>

#include "binscreen/error.hpp"
#include "binscreen/likelihood.hpp"
#include "binscreen/parallel.hpp"

namespace binscreen {

ScreeningMethod parse_method(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "less") return ScreeningMethod::LeSS;
    if (lower == "sisl") return ScreeningMethod::SISL;
    if (lower == "sisp") return ScreeningMethod::SISP;
    throw InvalidArgument("unknown screening method '" + std::string(name) + "' (expected less, sisl or sisp)");
}

std::string_view method_name(ScreeningMethod method) noexcept {
    switch (method) {
        case ScreeningMethod::LeSS: return "LeSS";
        case ScreeningMethod::SISL: return "SISL";
        case ScreeningMethod::SISP: return "SISP";
    }
    return "?";
}

std::string_view flag_name(PredictorFlag flag) noexcept {
    switch (flag) {
        case PredictorFlag::Ok: return "ok";
        case PredictorFlag::ZeroVariance: return "zero_variance";
        case PredictorFlag::Separation: return "separation";
        case PredictorFlag::NonConvergence: return "nonconvergence";
    }
    return "?";
}

namespace {

void check_lengths(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgument("predictor and response lengths differ");
    if (x.size() < 2) throw InvalidArgument("need at least two observations");
}

struct Moments {
    double mean;
    double sd;  // population standard deviation
};

Moments column_moments(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / n)};
}

// With an intercept, a single predictor gives no finite MLE exactly when the
// two classes' ranges overlap in at most one point.
int separation_direction(std::span<const double> x, std::span<const double> y) {
    double max0 = -INFINITY, min0 = INFINITY, max1 = -INFINITY, min1 = INFINITY;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (y[i] > 0.5) {
            max1 = std::max(max1, x[i]);
            min1 = std::min(min1, x[i]);
        } else {
            max0 = std::max(max0, x[i]);
            min0 = std::min(min0, x[i]);
        }
    }
    if (max0 <= min1) return 1;
    if (max1 <= min0) return -1;
    return 0;
}

double log_likelihood(LinkKind link, std::span<const double> u, std::span<const double> y, double a, double b) {
    double ll = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) ll += point_log_likelihood(link, y[i], a + b * u[i]);
    return ll;
}

}  // namespace

StatResult less_stat(std::span<const double> x, std::span<const double> y) {
    check_lengths(x, y);
    const double n = static_cast<double>(x.size());
    const double xbar = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - xbar;
        sxy += dx * (y[i] - ybar);
        sxx += dx * dx;
    }
    if (!(sxx > 0.0) || sxx <= 1e-300) return {0.0, PredictorFlag::ZeroVariance};
    return {sxy / sxx, PredictorFlag::Ok};
}

MarginalFit fit_marginal(std::span<const double> x, std::span<const double> y, const LinkFamily& link,
                         const NewtonOptions& options) {
    check_lengths(x, y);
    const double n = static_cast<double>(x.size());
    const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / n;
    if (ybar <= 0.0 || ybar >= 1.0) throw InvalidArgument("both response classes must be present");

    MarginalFit fit;
    const Moments mom = column_moments(x);
    if (!(mom.sd > 0.0)) {
        fit.flag = PredictorFlag::ZeroVariance;
        return fit;
    }
    if (const int dir = separation_direction(x, y); dir != 0) {
        fit.slope = dir * options.separation_cap;
        fit.flag = PredictorFlag::Separation;
        return fit;
    }

    // Newton is affine invariant, so iterating on the standardised predictor
    // u = (x - mean)/sd gives the same iterates with a better-conditioned
    // Hessian. Convergence is judged on the score of the original scale.
    std::vector<double> u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) u[i] = (x[i] - mom.mean) / mom.sd;

    const LinkKind kind = link.kind();
    double a = link.quantile(ybar);
    double b = 0.0;
    bool converged = false;
    int iter = 0;
    double ll = 0.0;
    for (;; ++iter) {
        double ga = 0.0, gb = 0.0, haa = 0.0, hab = 0.0, hbb = 0.0;
        ll = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const PointLikelihood pl = point_likelihood(kind, y[i], a + b * u[i]);
            ll += pl.value;
            ga += pl.d1;
            gb += pl.d1 * u[i];
            haa += pl.d2;
            hab += pl.d2 * u[i];
            hbb += pl.d2 * u[i] * u[i];
        }
        if (fit.log_likelihood_trace.empty()) fit.log_likelihood_trace.push_back(ll);
        const double score_x = gb * mom.sd + mom.mean * ga;
        if (std::max(std::abs(ga), std::abs(score_x)) < options.tolerance) {
            converged = true;
            break;
        }
        if (iter >= options.max_iterations) break;
        const double det = haa * hbb - hab * hab;
        if (!(haa < 0.0) || !(det > 0.0)) break;
        const double da = -(hbb * ga - hab * gb) / det;
        const double db = -(haa * gb - hab * ga) / det;

        double step = 1.0;
        double trial_ll = log_likelihood(kind, u, y, a + da, b + db);
        const bool flat = ga * da + gb * db <= 1e-12 * (1.0 + std::abs(ll));
        for (int halving = 0; halving < 40 && !flat && !(trial_ll >= ll); ++halving) {
            step *= 0.5;
            trial_ll = log_likelihood(kind, u, y, a + step * da, b + step * db);
        }
        if (!(trial_ll >= ll)) {
            // No ascent is representable: converged if the predicted gain is at rounding level.
            converged = flat;
            break;
        }
        a += step * da;
        b += step * db;
        fit.log_likelihood_trace.push_back(trial_ll);
        if (std::max(std::abs(a), std::abs(b)) > options.separation_cap || trial_ll > -1e-8) {
            fit.flag = PredictorFlag::Separation;
            break;
        }
        // Steps below rounding: the score cannot improve further.
        if (std::max(std::abs(step * da), std::abs(step * db)) <= 1e-15 * (1.0 + std::max(std::abs(a), std::abs(b)))) {
            converged = true;
            ll = trial_ll;
            break;
        }
    }
    fit.slope = b / mom.sd;
    fit.intercept = a - fit.slope * mom.mean;
    fit.log_likelihood = ll;
    fit.iterations = iter;
    if (fit.flag == PredictorFlag::Separation) {
        fit.slope = (fit.slope >= 0.0 ? 1.0 : -1.0) * options.separation_cap;
    } else if (!converged) {
        fit.flag = PredictorFlag::NonConvergence;
    }
    return fit;
}

StatResult sis_stat(std::span<const double> x, std::span<const double> y, const LinkFamily& link,
                    const NewtonOptions& options) {
    const MarginalFit fit = fit_marginal(x, y, link, options);
    if (fit.flag == PredictorFlag::Separation) {
        const StatResult ls = less_stat(x, y);
        const double sign = ls.value != 0.0 ? (ls.value > 0.0 ? 1.0 : -1.0) : (fit.slope >= 0.0 ? 1.0 : -1.0);
        return {sign * options.separation_cap, PredictorFlag::Separation};
    }
    return {fit.slope, fit.flag};
}

int selection_size(int n) {
    if (n < 3) throw DomainError("selection_size: n must be at least 3");
    return static_cast<int>(std::floor(n / std::log(static_cast<double>(n))));
}

ScreeningReport screen(const Dataset& data, ScreeningMethod method, const ScreeningOptions& options) {
    data.validate();
    const int n = data.n();
    const int p = data.p();
    ScreeningReport report;
    report.method = method;
    report.stats.assign(p, 0.0);
    report.flags.assign(p, PredictorFlag::Ok);

    const std::span<const double> y(data.y.data(), static_cast<std::size_t>(n));
    if (method != ScreeningMethod::LeSS) {
        const double ysum = data.y.sum();
        if (ysum <= 0.0 || ysum >= n) throw InvalidArgument("screen: response has a single class");
    }
    const LinkFamily link(method == ScreeningMethod::SISP ? LinkKind::Probit : LinkKind::Logit,
                          options.quadrature_nodes);

    const auto started = std::chrono::steady_clock::now();
    parallel_for(static_cast<std::size_t>(p), options.threads, [&](std::size_t j) {
        std::span<const double> x(data.X.col(static_cast<Eigen::Index>(j)).data(), static_cast<std::size_t>(n));
        std::vector<double> scaled;
        if (options.standardize) {
            const Moments mom = column_moments(x);
            if (mom.sd > 0.0) {
                scaled.resize(x.size());
                for (std::size_t i = 0; i < x.size(); ++i) scaled[i] = (x[i] - mom.mean) / mom.sd;
                x = scaled;
            }
        }
        const StatResult r = method == ScreeningMethod::LeSS ? less_stat(x, y) : sis_stat(x, y, link, options.newton);
        report.stats[j] = r.value;
        report.flags[j] = r.flag;
    });
    report.timing_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    report.abs_rank.resize(p);
    std::iota(report.abs_rank.begin(), report.abs_rank.end(), 0);
    std::stable_sort(report.abs_rank.begin(), report.abs_rank.end(),
                     [&](int a, int b) { return std::abs(report.stats[a]) > std::abs(report.stats[b]); });

    const int screenable = static_cast<int>(
        std::count_if(report.flags.begin(), report.flags.end(), [](PredictorFlag f) { return f != PredictorFlag::ZeroVariance; }));
    if (screenable == 0) throw InvalidArgument("no screenable predictors");
    const int wanted = options.d > 0 ? options.d : selection_size(std::max(n, 3));
    report.d = std::min(wanted, screenable);
    for (int j : report.abs_rank) {
        if (static_cast<int>(report.selected.size()) == report.d) break;
        if (report.flags[j] != PredictorFlag::ZeroVariance) report.selected.push_back(j);
    }
    return report;
}

}  // namespace binscreen
