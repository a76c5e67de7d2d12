#pragma once

#include <vector>

#include <Eigen/Core>

#include "binscreen/datagen.hpp"
#include "binscreen/links.hpp"

namespace binscreen {

/// e_j = sum_{i != j} sigma_ij gamma_i / sigma_jj (0-based j).
double contamination(const TrueModel& model, int j);

/// c1 = E[h_T(gamma0 + W)], W ~ Normal(0, gamma' Sigma gamma). Closed form
/// phi(0; gamma0, 1 + gamma' Sigma gamma) for a probit truth.
double true_scale_constant(const TrueModel& model);

struct LeastSquaresLimit {
    Eigen::VectorXd beta;  // (gamma_1 + Sigma11^{-1} Sigma12 gamma_2) * c1
    double c1 = 0.0;
};

/// Probability limit of the least-squares slopes of a working model on the
/// predictors in `subset` (0-based, distinct). Throws SingularMatrix if
/// Sigma11 is not invertible.
LeastSquaresLimit beta_ls_population(const TrueModel& model, const std::vector<int>& subset);

struct MaximumLikelihoodLimit {
    double beta0 = 0.0;
    Eigen::VectorXd beta;
    double c2 = 0.0;
    int iterations = 0;
};

/// Probability limit of the working-link MLE on `subset`.
///
/// The slope solves beta = beta_ls / c2(beta0, beta), so beta = kappa * beta_ls
/// and only the scalar kappa is unknown. kappa is found by bracketed root
/// finding on kappa * c2 - 1; for each trial the intercept is the bisection
/// root of E[H_W(beta0 + Z1'beta)] = E[Y]. Throws ConvergenceError if no
/// bracket exists or the final relation misses 1e-8.
MaximumLikelihoodLimit beta_ml_population(const TrueModel& model, const LinkFamily& working_link,
                                          const std::vector<int>& subset);

struct PopulationCoefficients {
    std::vector<int> subset;
    Eigen::VectorXd beta_ls;
    double c1 = 0.0;
    double beta0_ml = 0.0;
    Eigen::VectorXd beta_ml;
    double c2 = 0.0;
};

PopulationCoefficients population_coefficients(const TrueModel& model, const LinkFamily& working_link,
                                               const std::vector<int>& subset);

/// Mean of the linearly skewed normal LSN(lambda0, lambda1). Throws
/// DomainError when Phi(lambda0 / sqrt(1 + |lambda1|^2)) underflows.
Eigen::VectorXd lsn_mean(double lambda0, const Eigen::VectorXd& lambda1);

/// E(Z1 Y) = (Sigma11 gamma_1 + Sigma12 gamma_2) phi(0; gamma0, 1 + gamma' Sigma gamma)
/// for a probit truth. Throws InvalidArgument for other links.
Eigen::VectorXd probit_cross_moment(const TrueModel& model, const std::vector<int>& subset);

/// Single-predictor limits for every j: the analytic screening curves.
struct PopulationCurve {
    std::vector<double> beta_ls;
    std::vector<double> beta_ml;
    std::vector<double> contamination;
    double c1 = 0.0;
};

PopulationCurve population_curve(const TrueModel& model, const LinkFamily& working_link, int threads = 0);

}  // namespace binscreen
