#include "binscreen/asymptotics.hpp"

#include <cmath>
#include <cstdint>
#include <set>

#include <Eigen/Cholesky>
#include <boost/math/tools/roots.hpp>

#include "binscreen/error.hpp"
#include "binscreen/parallel.hpp"

namespace binscreen {

namespace {

void check_subset(const TrueModel& model, const std::vector<int>& subset) {
    if (subset.empty()) throw InvalidArgument("subset must be non-empty");
    std::set<int> seen;
    for (int j : subset) {
        if (j < 0 || j >= model.p()) throw InvalidArgument("subset index " + std::to_string(j) + " out of range");
        if (!seen.insert(j).second) throw InvalidArgument("subset index " + std::to_string(j) + " repeated");
    }
}

// Intercept matching the marginal mean: E[H(beta0 + W)] = target, W ~ N(0, v).
double match_intercept(const LinkFamily& link, double v, double target) {
    double lo = -40.0, hi = 40.0;
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (population_mean(link, mid, v) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double contamination(const TrueModel& model, int j) {
    if (j < 0 || j >= model.p()) throw InvalidArgument("contamination: index out of range");
    double sum = 0.0;
    for (int i = 0; i < model.p(); ++i)
        if (i != j) sum += model.cov.entry(i, j) * model.gamma[i];
    return sum / model.cov.entry(j, j);
}

double true_scale_constant(const TrueModel& model) {
    const double v = model.signal_variance();
    if (model.link.kind() == LinkKind::Probit) return normal_pdf(0.0, model.gamma0, 1.0 + v);
    return mixture_integral(model.link, model.gamma0, v);
}

LeastSquaresLimit beta_ls_population(const TrueModel& model, const std::vector<int>& subset) {
    check_subset(model, subset);
    const int p = model.p();
    const int k = static_cast<int>(subset.size());
    std::vector<bool> in_subset(p, false);
    for (int j : subset) in_subset[j] = true;

    Eigen::MatrixXd sigma11(k, k);
    Eigen::VectorXd gamma1(k);
    Eigen::VectorXd cross = Eigen::VectorXd::Zero(k);  // Sigma12 gamma2
    for (int a = 0; a < k; ++a) {
        gamma1[a] = model.gamma[subset[a]];
        for (int b = 0; b < k; ++b) sigma11(a, b) = model.cov.entry(subset[a], subset[b]);
        for (int i = 0; i < p; ++i)
            if (!in_subset[i]) cross[a] += model.cov.entry(subset[a], i) * model.gamma[i];
    }
    LeastSquaresLimit out;
    out.c1 = true_scale_constant(model);
    Eigen::VectorXd adjust = Eigen::VectorXd::Zero(k);
    if (!cross.isZero(0.0)) {
        Eigen::LLT<Eigen::MatrixXd> llt(sigma11);
        if (llt.info() != Eigen::Success) throw SingularMatrix("beta_ls_population: Sigma11 is not invertible", subset);
        adjust = llt.solve(cross);
    } else if (Eigen::LLT<Eigen::MatrixXd>(sigma11).info() != Eigen::Success) {
        throw SingularMatrix("beta_ls_population: Sigma11 is not invertible", subset);
    }
    out.beta = (gamma1 + adjust) * out.c1;
    return out;
}

MaximumLikelihoodLimit beta_ml_population(const TrueModel& model, const LinkFamily& working_link,
                                          const std::vector<int>& subset) {
    const LeastSquaresLimit ls = beta_ls_population(model, subset);
    const int k = static_cast<int>(subset.size());
    Eigen::MatrixXd sigma11(k, k);
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) sigma11(a, b) = model.cov.entry(subset[a], subset[b]);

    const double v_true = model.signal_variance();
    const double target = model.link.kind() == LinkKind::Probit
                              ? normal_cdf(model.gamma0 / std::sqrt(1.0 + v_true))
                              : population_mean(model.link, model.gamma0, v_true);
    const double spread = ls.beta.dot(sigma11 * ls.beta);  // beta_ls' Sigma11 beta_ls

    MaximumLikelihoodLimit out;
    if (spread == 0.0) {
        out.beta = Eigen::VectorXd::Zero(k);
        out.beta0 = match_intercept(working_link, 0.0, target);
        out.c2 = mixture_integral(working_link, out.beta0, 0.0);
        return out;
    }

    int evaluations = 0;
    auto residual = [&](double kappa) {
        ++evaluations;
        const double v = kappa * kappa * spread;
        const double beta0 = match_intercept(working_link, v, target);
        return kappa * mixture_integral(working_link, beta0, v) - 1.0;
    };

    double lo = 0.0, hi = 1.0;
    double f_lo = -1.0, f_hi = residual(hi);
    for (int doubling = 0; f_hi <= 0.0; ++doubling) {
        if (doubling == 60)
            throw ConvergenceError("beta_ml_population: no finite scale solves beta * c2 = beta_ls",
                                   std::vector<double>(ls.beta.data(), ls.beta.data() + k));
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = residual(hi);
    }
    std::uintmax_t max_iter = 200;
    const auto bracket = boost::math::tools::toms748_solve(residual, lo, hi, f_lo, f_hi,
                                                           boost::math::tools::eps_tolerance<double>(52), max_iter);
    const double kappa = 0.5 * (bracket.first + bracket.second);
    const double v = kappa * kappa * spread;
    out.beta = kappa * ls.beta;
    out.beta0 = match_intercept(working_link, v, target);
    out.c2 = mixture_integral(working_link, out.beta0, v);
    out.iterations = evaluations;

    const double miss = (out.beta * out.c2 - ls.beta).cwiseAbs().maxCoeff();
    if (!(miss <= 1e-8 * std::max(1.0, ls.beta.cwiseAbs().maxCoeff()))) {
        std::vector<double> last{out.beta0};
        last.insert(last.end(), out.beta.data(), out.beta.data() + k);
        throw ConvergenceError("beta_ml_population: fixed point not reached", last);
    }
    return out;
}

PopulationCoefficients population_coefficients(const TrueModel& model, const LinkFamily& working_link,
                                               const std::vector<int>& subset) {
    const LeastSquaresLimit ls = beta_ls_population(model, subset);
    const MaximumLikelihoodLimit ml = beta_ml_population(model, working_link, subset);
    return {subset, ls.beta, ls.c1, ml.beta0, ml.beta, ml.c2};
}

Eigen::VectorXd lsn_mean(double lambda0, const Eigen::VectorXd& lambda1) {
    if (!std::isfinite(lambda0) || !lambda1.allFinite()) throw DomainError("lsn_mean: non-finite input");
    const double scale = std::sqrt(1.0 + lambda1.squaredNorm());
    const double u = lambda0 / scale;
    if (u < -37.0) throw DomainError("lsn_mean: Phi(u) underflows");
    return lambda1 / scale * (normal_pdf(u) / normal_cdf(u));
}

Eigen::VectorXd probit_cross_moment(const TrueModel& model, const std::vector<int>& subset) {
    if (model.link.kind() != LinkKind::Probit) throw InvalidArgument("probit_cross_moment: model link must be probit");
    check_subset(model, subset);
    const Eigen::VectorXd sigma_gamma = model.sigma() * model.gamma;
    const double scale = normal_pdf(0.0, model.gamma0, 1.0 + model.gamma.dot(sigma_gamma));
    Eigen::VectorXd out(static_cast<Eigen::Index>(subset.size()));
    for (std::size_t a = 0; a < subset.size(); ++a) out[static_cast<Eigen::Index>(a)] = sigma_gamma[subset[a]] * scale;
    return out;
}

PopulationCurve population_curve(const TrueModel& model, const LinkFamily& working_link, int threads) {
    const int p = model.p();
    PopulationCurve curve;
    curve.beta_ls.resize(p);
    curve.beta_ml.resize(p);
    curve.contamination.resize(p);
    curve.c1 = true_scale_constant(model);
    parallel_for(static_cast<std::size_t>(p), threads, [&](std::size_t jj) {
        const int j = static_cast<int>(jj);
        curve.beta_ls[j] = beta_ls_population(model, {j}).beta[0];
        curve.beta_ml[j] = beta_ml_population(model, working_link, {j}).beta[0];
        curve.contamination[j] = contamination(model, j);
    });
    return curve;
}

}  // namespace binscreen
