#include "binscreen/datagen.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

#include "binscreen/error.hpp"
#include "binscreen/rng.hpp"

namespace binscreen {

CovarianceSpec::CovarianceSpec(Kind kind, double rho, Eigen::MatrixXd matrix)
    : kind_(kind), rho_(rho), matrix_(std::move(matrix)) {}

CovarianceSpec CovarianceSpec::ar1(double rho) {
    if (!(rho > -1.0 && rho < 1.0)) throw InvalidArgument("AR1 covariance needs rho in (-1, 1)");
    return CovarianceSpec(Kind::AR1, rho, {});
}

CovarianceSpec CovarianceSpec::cs(double rho) {
    if (!(rho >= 0.0 && rho < 1.0)) throw InvalidArgument("CS covariance needs rho in [0, 1)");
    return CovarianceSpec(Kind::CS, rho, {});
}

CovarianceSpec CovarianceSpec::dense(Eigen::MatrixXd matrix) {
    if (matrix.rows() == 0 || matrix.rows() != matrix.cols())
        throw InvalidArgument("dense covariance must be a non-empty square matrix");
    if (!matrix.allFinite()) throw InvalidArgument("dense covariance has non-finite entries");
    if (!matrix.isApprox(matrix.transpose(), 1e-12))
        throw InvalidArgument("dense covariance is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(matrix);
    if (llt.info() != Eigen::Success) throw InvalidArgument("dense covariance is not positive definite");
    return CovarianceSpec(Kind::Dense, 0.0, std::move(matrix));
}

int CovarianceSpec::fixed_dimension() const noexcept {
    return kind_ == Kind::Dense ? static_cast<int>(matrix_.rows()) : -1;
}

double CovarianceSpec::entry(int i, int j) const {
    switch (kind_) {
        case Kind::AR1: return std::pow(rho_, std::abs(i - j));
        case Kind::CS: return i == j ? 1.0 : rho_;
        case Kind::Dense: return matrix_(i, j);
    }
    return 0.0;
}

std::string CovarianceSpec::name() const {
    std::ostringstream out;
    switch (kind_) {
        case Kind::AR1: out << "AR1(" << rho_ << ")"; break;
        case Kind::CS: out << "CS(" << rho_ << ")"; break;
        case Kind::Dense: out << "Dense(" << matrix_.rows() << ")"; break;
    }
    return out.str();
}

Eigen::MatrixXd build_sigma(const CovarianceSpec& spec, int p) {
    if (p < 1) throw InvalidArgument("build_sigma: p must be positive");
    if (spec.kind() == CovarianceSpec::Kind::Dense) {
        if (spec.fixed_dimension() != p) throw InvalidArgument("build_sigma: dense covariance dimension mismatch");
        return spec.matrix();
    }
    Eigen::MatrixXd sigma(p, p);
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < p; ++i) sigma(i, j) = spec.entry(i, j);
    return sigma;
}

Eigen::MatrixXd sample_mvn(const CovarianceSpec& spec, int p, int n, std::uint64_t seed) {
    if (n < 1 || p < 1) throw InvalidArgument("sample_mvn: n and p must be positive");
    Philox rng(seed);
    Eigen::MatrixXd X(n, p);
    switch (spec.kind()) {
        case CovarianceSpec::Kind::AR1: {
            const double rho = spec.rho();
            const double innovation = std::sqrt(1.0 - rho * rho);
            for (int i = 0; i < n; ++i) X(i, 0) = rng.normal();
            for (int j = 1; j < p; ++j)
                for (int i = 0; i < n; ++i) X(i, j) = rho * X(i, j - 1) + innovation * rng.normal();
            break;
        }
        case CovarianceSpec::Kind::CS: {
            const double shared = std::sqrt(spec.rho());
            const double own = std::sqrt(1.0 - spec.rho());
            Eigen::VectorXd factor(n);
            for (int i = 0; i < n; ++i) factor[i] = rng.normal();
            for (int j = 0; j < p; ++j)
                for (int i = 0; i < n; ++i) X(i, j) = shared * factor[i] + own * rng.normal();
            break;
        }
        case CovarianceSpec::Kind::Dense: {
            if (spec.fixed_dimension() != p) throw InvalidArgument("sample_mvn: dense covariance dimension mismatch");
            const Eigen::MatrixXd L = spec.matrix().llt().matrixL();
            Eigen::MatrixXd Z(n, p);
            for (int j = 0; j < p; ++j)
                for (int i = 0; i < n; ++i) Z(i, j) = rng.normal();
            X.noalias() = Z * L.transpose();
            break;
        }
    }
    return X;
}

TrueModel::TrueModel(double gamma0_, Eigen::VectorXd gamma_, LinkFamily link_, CovarianceSpec cov_)
    : gamma0(gamma0_), gamma(std::move(gamma_)), link(link_), cov(std::move(cov_)) {
    if (gamma.size() == 0) throw InvalidArgument("TrueModel: gamma must be non-empty");
    if (!std::isfinite(gamma0) || !gamma.allFinite()) throw InvalidArgument("TrueModel: non-finite coefficients");
    if ((gamma.array() == 0.0).all()) throw InvalidArgument("TrueModel: gamma must have a nonzero entry");
    if (cov.fixed_dimension() >= 0 && cov.fixed_dimension() != p())
        throw InvalidArgument("TrueModel: gamma length does not match covariance dimension");
}

double TrueModel::signal_variance() const { return gamma.dot(sigma() * gamma); }

void Dataset::validate() const {
    if (X.rows() != y.size()) throw InvalidArgument("dataset: X has " + std::to_string(X.rows()) +
                                                    " rows but y has " + std::to_string(y.size()) + " entries");
    if (X.rows() < 2) throw InvalidArgument("dataset: need at least two observations");
    if (X.cols() < 1) throw InvalidArgument("dataset: need at least one predictor");
    if (!names.empty() && static_cast<Eigen::Index>(names.size()) != X.cols())
        throw InvalidArgument("dataset: predictor name count does not match columns");
    if (!X.allFinite()) throw InvalidArgument("dataset: predictors contain non-finite values");
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y[i] != 0.0 && y[i] != 1.0)
            throw InvalidArgument("dataset: response entry " + std::to_string(i) + " is not 0 or 1");
}

Eigen::VectorXd gen_response(const Eigen::MatrixXd& X, const TrueModel& model, std::uint64_t seed) {
    if (X.cols() != model.p())
        throw InvalidArgument("gen_response: X has " + std::to_string(X.cols()) + " columns, model expects " +
                              std::to_string(model.p()));
    const Eigen::VectorXd eta = (X * model.gamma).array() + model.gamma0;
    Philox rng(seed);
    Eigen::VectorXd y(X.rows());
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = rng.uniform() < model.link.cdf(eta[i]) ? 1.0 : 0.0;
    return y;
}

Dataset generate_dataset(const TrueModel& model, int n, std::uint64_t seed) {
    Dataset data;
    data.X = sample_mvn(model.cov, model.p(), n, seed);
    data.y = gen_response(data.X, model, mix64(seed));
    return data;
}

double pair_correlation(double p1, double p2, double alpha) {
    if (!(p1 > 0.0 && p1 < 1.0) || !(p2 > 0.0 && p2 < 1.0))
        throw DomainError("pair_correlation: probabilities must lie in (0,1)");
    if (!(alpha >= 0.0)) throw DomainError("pair_correlation: alpha must be >= 0");
    return alpha / (1.0 + alpha) * std::sqrt(p1 * (1.0 - p1) / (p2 * (1.0 - p2)));
}

bool binomial_pair_admissible(double p1, double p2, double alpha) {
    const double lower = alpha / (1.0 + alpha) * p1;
    return lower <= p2 && p2 <= lower + 1.0 / (1.0 + alpha);
}

std::array<std::array<double, 3>, 3> conditional_pmf(double p1, double p2, double alpha) {
    const double t1 = (p2 + alpha * (p2 - p1)) / (1.0 + alpha);
    const double t2 = t1 + alpha / (1.0 + alpha);
    std::array<std::array<double, 3>, 3> pmf{{
        {(1 - t1) * (1 - t1), 2 * t1 * (1 - t1), t1 * t1},
        {(1 - t1) * (1 - t2), (1 - t1) * t2 + t1 * (1 - t2), t1 * t2},
        {(1 - t2) * (1 - t2), 2 * t2 * (1 - t2), t2 * t2},
    }};
    for (int row = 0; row < 3; ++row) {
        const auto& r = pmf[row];
        if (r[0] < -1e-15 || r[1] < -1e-15 || r[2] < -1e-15 || std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-12) {
            std::ostringstream msg;
            msg << "conditional pmf row x1=" << row << " invalid for p1=" << p1 << " p2=" << p2 << " alpha=" << alpha;
            throw InvariantViolation(msg.str());
        }
    }
    return pmf;
}

namespace {

inline int draw_three_point(const std::array<double, 3>& pmf, double u) noexcept {
    if (u < pmf[0]) return 0;
    if (u < pmf[0] + pmf[1]) return 1;
    return 2;
}

}  // namespace

CorrelatedBinomialSample sample_correlated_binomial(int p, int n, std::uint64_t seed) {
    if (p < 1 || n < 1) throw InvalidArgument("sample_correlated_binomial: n and p must be positive");
    Philox rng(seed);
    CorrelatedBinomialSample out;
    out.X.resize(n, p);
    out.q.resize(p);
    out.alpha.assign(p, 0.0);

    out.q[0] = 0.1 + 0.4 * rng.uniform();
    {
        const double q = out.q[0];
        const std::array<double, 3> margin{(1 - q) * (1 - q), 2 * q * (1 - q), q * q};
        for (int i = 0; i < n; ++i) out.X(i, 0) = draw_three_point(margin, rng.uniform());
    }
    for (int j = 1; j < p; ++j) {
        const double q = 0.1 + 0.4 * rng.uniform();
        double alpha = 0.5 + 0.5 * rng.uniform();
        if (!binomial_pair_admissible(out.q[j - 1], q, alpha)) alpha = 0.0;
        out.q[j] = q;
        out.alpha[j] = alpha;
        const auto pmf = conditional_pmf(out.q[j - 1], q, alpha);
        for (int i = 0; i < n; ++i) {
            const int prev = static_cast<int>(out.X(i, j - 1));
            out.X(i, j) = draw_three_point(pmf[prev], rng.uniform());
        }
    }
    return out;
}

}  // namespace binscreen
