#include "binscreen/glm.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "binscreen/error.hpp"
#include "binscreen/likelihood.hpp"

namespace binscreen {

namespace {

void check_rank(const Eigen::MatrixXd& design) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    const Eigen::Index rank = qr.rank();
    if (rank == design.cols()) return;
    std::vector<int> dropped;
    for (Eigen::Index k = rank; k < design.cols(); ++k)
        dropped.push_back(static_cast<int>(qr.colsPermutation().indices()[k]) - 1);
    std::sort(dropped.begin(), dropped.end());
    std::string msg = "design matrix is rank deficient; collinear column(s):";
    for (int c : dropped) msg += c < 0 ? " intercept" : " " + std::to_string(c);
    throw SingularMatrix(msg, dropped);
}

double total_log_likelihood(LinkKind link, const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) ll += point_log_likelihood(link, y[i], eta[i]);
    return ll;
}

}  // namespace

GlmFit fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LinkFamily& link, const GlmOptions& options) {
    const Eigen::Index n = X.rows();
    const Eigen::Index q = X.cols();
    if (y.size() != n) throw InvalidArgument("fit: X and y row counts differ");
    if (n < 2) throw InvalidArgument("fit: need at least two observations");
    if (!X.allFinite()) throw InvalidArgument("fit: X contains non-finite values");
    for (Eigen::Index i = 0; i < n; ++i)
        if (y[i] != 0.0 && y[i] != 1.0) throw InvalidArgument("fit: response must be 0/1");
    const double ybar = y.mean();
    if (ybar <= 0.0 || ybar >= 1.0) throw InvalidArgument("fit: both response classes must be present");

    Eigen::MatrixXd design(n, q + 1);
    design.col(0).setOnes();
    design.rightCols(q) = X;
    check_rank(design);

    const LinkKind kind = link.kind();
    GlmFit result;
    result.link = kind;

    if (q == 1) {
        // Same solver as the marginal screening statistic; separated or
        // stalled fits fall through to scoring below.
        NewtonOptions newton;
        newton.tolerance = options.tolerance;
        newton.max_iterations = options.max_iterations;
        newton.separation_cap = options.separation_cap;
        MarginalFit m = fit_marginal({X.data(), static_cast<std::size_t>(n)}, {y.data(), static_cast<std::size_t>(n)},
                                     link, newton);
        if (m.flag == PredictorFlag::Ok) {
            result.coefficients = Eigen::Vector2d(m.intercept, m.slope);
            result.converged = true;
            result.log_likelihood = m.log_likelihood;
            result.iterations = m.iterations;
            result.log_likelihood_trace = std::move(m.log_likelihood_trace);
            return result;
        }
    }

    // Iterate in standardised coordinates design * T; scoring is affine
    // invariant so only the conditioning changes.
    Eigen::MatrixXd T = Eigen::MatrixXd::Identity(q + 1, q + 1);
    for (Eigen::Index j = 0; j < q; ++j) {
        const double mean = X.col(j).mean();
        const double sd = std::sqrt((X.col(j).array() - mean).square().mean());
        const double scale = sd > 0.0 ? sd : 1.0;
        T(0, j + 1) = -mean / scale;
        T(j + 1, j + 1) = 1.0 / scale;
    }
    const Eigen::MatrixXd Z = design * T;

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(q + 1);  // standardised coefficients
    theta[0] = link.quantile(ybar);
    Eigen::VectorXd eta = Z * theta;
    double ll = total_log_likelihood(kind, eta, y);
    result.log_likelihood_trace.push_back(ll);

    Eigen::VectorXd d1(n), w(n);
    int iter = 0;
    for (;; ++iter) {
        for (Eigen::Index i = 0; i < n; ++i) {
            d1[i] = point_likelihood(kind, y[i], eta[i]).d1;
            w[i] = fisher_weight(kind, eta[i]);
        }
        const Eigen::VectorXd score = design.transpose() * d1;
        if (score.cwiseAbs().maxCoeff() < options.tolerance) {
            result.converged = true;
            break;
        }
        if (iter >= options.max_iterations) break;
        const Eigen::VectorXd score_std = Z.transpose() * d1;
        const Eigen::MatrixXd info = Z.transpose() * w.asDiagonal() * Z;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
        const Eigen::VectorXd delta = ldlt.solve(score_std);
        if (!delta.allFinite()) break;

        double step = 1.0;
        Eigen::VectorXd trial = theta + delta;
        Eigen::VectorXd trial_eta = Z * trial;
        double trial_ll = total_log_likelihood(kind, trial_eta, y);
        const bool flat = score_std.dot(delta) <= 1e-12 * (1.0 + std::abs(ll));
        for (int halving = 0; halving < 40 && !flat && !(trial_ll >= ll); ++halving) {
            step *= 0.5;
            trial = theta + step * delta;
            trial_eta = Z * trial;
            trial_ll = total_log_likelihood(kind, trial_eta, y);
        }
        if (!(trial_ll >= ll)) {
            // No ascent is representable: converged if the predicted gain is at rounding level.
            result.converged = flat;
            break;
        }
        const double moved = (step * delta).cwiseAbs().maxCoeff();
        theta = trial;
        eta = trial_eta;
        ll = trial_ll;
        result.log_likelihood_trace.push_back(ll);
        if (theta.cwiseAbs().maxCoeff() > options.separation_cap || ll > -1e-8) {
            result.separation_detected = true;
            ++iter;
            break;
        }
        if (moved <= 1e-15 * (1.0 + theta.cwiseAbs().maxCoeff())) {
            result.converged = true;
            ++iter;
            break;
        }
    }
    result.coefficients = T * theta;
    result.log_likelihood = ll;
    result.iterations = iter;
    return result;
}

Eigen::VectorXd predict_probability(const GlmFit& model, const Eigen::MatrixXd& X) {
    if (X.cols() + 1 != model.coefficients.size())
        throw InvalidArgument("predict: X has " + std::to_string(X.cols()) + " columns, fit expects " +
                              std::to_string(model.coefficients.size() - 1));
    const LinkFamily link(model.link, 1);
    const Eigen::VectorXd eta = (X * model.coefficients.tail(X.cols())).array() + model.coefficients[0];
    return eta.unaryExpr([&link](double t) { return link.cdf(t); });
}

double misclassification_rate(const GlmFit& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw InvalidArgument("misclassification_rate: X and y row counts differ");
    const Eigen::VectorXd prob = predict_probability(model, X);
    int errors = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double predicted = prob[i] >= 0.5 ? 1.0 : 0.0;
        if (predicted != y[i]) ++errors;
    }
    return static_cast<double>(errors) / static_cast<double>(y.size());
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, const std::vector<int>& columns) {
    Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t k = 0; k < columns.size(); ++k) {
        const int c = columns[k];
        if (c < 0 || c >= X.cols()) throw InvalidArgument("select_columns: column " + std::to_string(c) + " out of range");
        out.col(static_cast<Eigen::Index>(k)) = X.col(c);
    }
    return out;
}

}  // namespace binscreen
