#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "binscreen/links.hpp"

namespace binscreen {

/// Predictor covariance: AR1 (rho^|i-j|), compound symmetry, or an
/// explicit symmetric positive definite matrix.
class CovarianceSpec {
public:
    enum class Kind { AR1, CS, Dense };

    /// rho in (-1, 1).
    static CovarianceSpec ar1(double rho);
    /// rho in [0, 1); negative correlations need a dense matrix.
    static CovarianceSpec cs(double rho);
    /// Throws InvalidArgument unless the matrix is square, symmetric and SPD.
    static CovarianceSpec dense(Eigen::MatrixXd matrix);

    Kind kind() const noexcept { return kind_; }
    double rho() const noexcept { return rho_; }
    const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
    /// Dimension fixed by a dense matrix; -1 for the structured kinds.
    int fixed_dimension() const noexcept;

    double entry(int i, int j) const;
    std::string name() const;

private:
    CovarianceSpec(Kind kind, double rho, Eigen::MatrixXd matrix);

    Kind kind_;
    double rho_;
    Eigen::MatrixXd matrix_;
};

Eigen::MatrixXd build_sigma(const CovarianceSpec& spec, int p);

/// n iid rows from Normal(0, Sigma). AR1 columns are built recursively, CS
/// from one shared factor, dense via Cholesky. Deterministic in `seed`.
Eigen::MatrixXd sample_mvn(const CovarianceSpec& spec, int p, int n, std::uint64_t seed);

/// Y | X ~ Bernoulli(H(gamma0 + X gamma)).
struct TrueModel {
    TrueModel(double gamma0, Eigen::VectorXd gamma, LinkFamily link, CovarianceSpec cov);

    int p() const noexcept { return static_cast<int>(gamma.size()); }
    Eigen::MatrixXd sigma() const { return build_sigma(cov, p()); }
    /// gamma' Sigma gamma, the variance of the linear predictor.
    double signal_variance() const;

    double gamma0;
    Eigen::VectorXd gamma;
    LinkFamily link;
    CovarianceSpec cov;
};

/// n x p predictors plus a 0/1 response.
struct Dataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> names;  // predictor names, may be empty

    int n() const noexcept { return static_cast<int>(X.rows()); }
    int p() const noexcept { return static_cast<int>(X.cols()); }

    /// Throws InvalidArgument on shape mismatch, n < 2, non-finite or non-binary values.
    void validate() const;
};

Eigen::VectorXd gen_response(const Eigen::MatrixXd& X, const TrueModel& model, std::uint64_t seed);

/// Normal predictors from the model's covariance plus responses.
Dataset generate_dataset(const TrueModel& model, int n, std::uint64_t seed);

// Correlated Binomial(2, q) predictors, generated column by column.

/// Correlation of consecutive binomial columns for margins p1, p2 and
/// association alpha: alpha/(1+alpha) * sqrt(p1(1-p1) / (p2(1-p2))).
double pair_correlation(double p1, double p2, double alpha);

/// alpha/(1+alpha) p1 <= p2 <= alpha/(1+alpha) p1 + 1/(1+alpha).
bool binomial_pair_admissible(double p1, double p2, double alpha);

/// Row x1 holds P(X2 = 0,1,2 | X1 = x1). Throws InvariantViolation if a row
/// is negative or does not sum to one within 1e-12.
std::array<std::array<double, 3>, 3> conditional_pmf(double p1, double p2, double alpha);

struct CorrelatedBinomialSample {
    Eigen::MatrixXd X;          // n x p, entries in {0, 1, 2}
    std::vector<double> q;      // column success probabilities
    std::vector<double> alpha;  // association with previous column; alpha[0] = 0
};

CorrelatedBinomialSample sample_correlated_binomial(int p, int n, std::uint64_t seed);

}  // namespace binscreen
