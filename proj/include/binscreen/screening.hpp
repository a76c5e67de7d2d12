#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "binscreen/datagen.hpp"
#include "binscreen/links.hpp"

namespace binscreen {

enum class ScreeningMethod { LeSS, SISL, SISP };

ScreeningMethod parse_method(std::string_view name);
std::string_view method_name(ScreeningMethod method) noexcept;

enum class PredictorFlag { Ok, ZeroVariance, Separation, NonConvergence };

std::string_view flag_name(PredictorFlag flag) noexcept;

/// Magnitude reported for a separating predictor, and the coefficient bound
/// past which a likelihood fit is declared separated.
inline constexpr double kSeparationCap = 30.0;

struct StatResult {
    double value = 0.0;
    PredictorFlag flag = PredictorFlag::Ok;
};

/// Simple-regression slope sum((x - xbar)(y - ybar)) / sum((x - xbar)^2).
/// A constant x gives {0, ZeroVariance}.
StatResult less_stat(std::span<const double> x, std::span<const double> y);

struct NewtonOptions {
    double tolerance = 1e-8;  // on max |score|
    int max_iterations = 50;
    double separation_cap = kSeparationCap;
};

/// Two-parameter maximum likelihood fit of y on (1, x).
struct MarginalFit {
    double intercept = 0.0;
    double slope = 0.0;
    double log_likelihood = 0.0;
    int iterations = 0;
    PredictorFlag flag = PredictorFlag::Ok;
    std::vector<double> log_likelihood_trace;  // one entry per accepted iterate
};

/// Newton-Raphson with step halving from (H^{-1}(ybar), 0).
/// Throws InvalidArgument unless both response classes are present.
MarginalFit fit_marginal(std::span<const double> x, std::span<const double> y, const LinkFamily& link,
                         const NewtonOptions& options = {});

/// Slope of fit_marginal. A separating predictor reports
/// sign(less_stat) * separation_cap with the Separation flag.
StatResult sis_stat(std::span<const double> x, std::span<const double> y, const LinkFamily& link,
                    const NewtonOptions& options = {});

/// floor(n / ln n); throws DomainError for n < 3.
int selection_size(int n);

struct ScreeningOptions {
    int d = 0;  // 0: selection_size(n)
    bool standardize = false;
    int threads = 0;  // 0: hardware concurrency
    int quadrature_nodes = 128;
    NewtonOptions newton{};
};

struct ScreeningReport {
    ScreeningMethod method = ScreeningMethod::LeSS;
    std::vector<double> stats;
    std::vector<int> abs_rank;   // 0-based predictor indices, largest |stat| first
    std::vector<int> selected;   // in rank order
    std::vector<PredictorFlag> flags;
    int d = 0;
    double timing_seconds = 0.0;
};

/// Per-column statistic, ranking by |stat| (ties by ascending index) and
/// selection of the top d. Zero-variance columns are never selected; if
/// fewer than d columns remain, all of them are. Throws InvalidArgument
/// when no column can be screened.
ScreeningReport screen(const Dataset& data, ScreeningMethod method, const ScreeningOptions& options = {});

}  // namespace binscreen
