#pragma once

#include <vector>

#include <Eigen/Core>

#include "binscreen/links.hpp"
#include "binscreen/screening.hpp"

namespace binscreen {

struct GlmOptions {
    double tolerance = 1e-8;  // on max |score| of the original parametrisation
    int max_iterations = 100;
    double separation_cap = kSeparationCap;
};

struct GlmFit {
    LinkKind link = LinkKind::Logit;
    Eigen::VectorXd coefficients;  // intercept first
    bool converged = false;
    bool separation_detected = false;
    double log_likelihood = 0.0;
    int iterations = 0;
    std::vector<double> log_likelihood_trace;  // one entry per accepted iterate
};

/// Binary-response GLM by iteratively reweighted least squares (Fisher
/// scoring) with step halving. Throws SingularMatrix naming the collinear
/// columns when [1, X] is rank deficient and InvalidArgument for bad shapes
/// or a one-class response.
GlmFit fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LinkFamily& link, const GlmOptions& options = {});

Eigen::VectorXd predict_probability(const GlmFit& model, const Eigen::MatrixXd& X);

/// Training-style error rate; a fitted probability of exactly 0.5 counts as class 1.
double misclassification_rate(const GlmFit& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Columns of X listed in `columns` (0-based), in that order.
Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, const std::vector<int>& columns);

}  // namespace binscreen
