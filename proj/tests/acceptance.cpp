// Acceptance checks: one PASS/FAIL line per criterion, exit status = number
// of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "binscreen/asymptotics.hpp"
#include "binscreen/datagen.hpp"
#include "binscreen/experiments.hpp"
#include "binscreen/glm.hpp"
#include "binscreen/links.hpp"
#include "binscreen/screening.hpp"
#include "oracles.hpp"

using namespace binscreen;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            if (detail.tellp() > 0) detail << (pass ? " | " : "; ");
            detail << what;
            pass = false;
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

// ----------------------------------------------------------------- 1

void constants(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    Eigen::VectorXd g(5);
    g << 1.0, 1.0, -2.0, 0.0, 0.0;
    struct Row {
        bool ar1;
        LinkKind link;
        double target;
        double tol;
    };
    const Row rows[] = {{true, LinkKind::Probit, 0.178, 0.001},
                        {false, LinkKind::Probit, 0.199, 0.001},
                        {true, LinkKind::Logit, 0.151, 0.005},
                        {false, LinkKind::Logit, 0.164, 0.005}};
    for (const Row& r : rows) {
        const TrueModel m(0.0, g, LinkFamily(r.link), r.ar1 ? CovarianceSpec::ar1(0.5) : CovarianceSpec::cs(0.5));
        const double c1 = mixture_integral(m.link, 0.0, m.signal_variance());
        o.detail << (r.ar1 ? "AR1/" : "CS/") << (r.link == LinkKind::Probit ? "probit=" : "logit=") << fmt(c1, 6)
                 << ' ';
        o.require(std::abs(c1 - r.target) <= r.tol, "c1 off target");
        if (r.link == LinkKind::Probit) {
            const double analytic = 1.0 / std::sqrt(2.0 * oracle::kPi * (r.ar1 ? 5.0 : 4.0));
            o.require(std::abs(c1 - analytic) < 1e-12, "probit c1 differs from closed form");
        }
    }
    const double t = seconds_since(t0);
    o.detail << "time=" << fmt(t, 3) << "s";
    o.require(t < 1.0, "slower than 1 s");
}

// ----------------------------------------------------------------- 2

void table1(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    cfg.scenario = Scenario::Table1;
    cfg.replicates = 100;
    cfg.n_values = {200};
    const Table1Result r = run_table1(cfg);
    double worst_z = 0.0, se_lo = 1e9, se_hi = 0.0;
    for (const BiasCell& c : r.cells)
        for (int k = 0; k < 5; ++k) {
            worst_z = std::max(worst_z, std::abs(c.mean_bias[k]) / c.se[k]);
            se_lo = std::min(se_lo, c.se[k]);
            se_hi = std::max(se_hi, c.se[k]);
        }
    const double t = seconds_since(t0);
    o.detail << "max|bias|/se=" << fmt(worst_z, 3) << " se in [" << fmt(se_lo, 3) << ", " << fmt(se_hi, 3)
             << "] time=" << fmt(t, 3) << "s";
    o.require(worst_z < 3.0, "a bias exceeds 3 s.e.");
    o.require(se_hi <= 0.06, "s.e. above 0.06");
    o.require(t < 60.0, "slower than 1 min");
}

// ----------------------------------------------------------------- 3

void table2(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    cfg.scenario = Scenario::Table2;
    cfg.replicates = 100;
    cfg.p = 1000;
    const Table2Result r = run_table2(cfg);
    const int ns[] = {100, 200, 500};
    const double ar1[] = {0.63, 0.97, 1.00};
    // Rows SISL, SISP, LeSS.
    const double binomial[3][3] = {{0.16, 0.76, 1.00}, {0.16, 0.73, 1.00}, {0.08, 0.64, 1.00}};
    const char* names[] = {"SISL", "SISP", "LeSS"};
    const double eps = 1e-9;  // rates are k/100
    for (int i = 0; i < 3; ++i) {
        const RateCell& a = r.cell("Normal-AR1", ns[i]);
        const RateCell& c = r.cell("Normal-CS", ns[i]);
        const RateCell& b = r.cell("Correlated-Binomial", ns[i]);
        for (int m = 0; m < 3; ++m) {
            const std::string tag = std::string(names[m]) + "@" + std::to_string(ns[i]);
            if (std::abs(a.rate[m] - ar1[i]) > 0.08 + eps)
                o.require(false, "AR1 " + tag + "=" + fmt(a.rate[m], 3) + " vs " + fmt(ar1[i], 3));
            if (c.rate[m] > (ns[i] == 500 ? 0.05 : 0.03) + eps)
                o.require(false, "CS " + tag + "=" + fmt(c.rate[m], 3));
            if (std::abs(b.rate[m] - binomial[m][i]) > 0.10 + eps)
                o.require(false, "Binomial " + tag + "=" + fmt(b.rate[m], 3) + " vs " + fmt(binomial[m][i], 3));
            if (ns[i] == 500 && b.rate[m] < 0.97 - eps) o.require(false, "Binomial " + tag + " below 0.97");
        }
    }
    const double t = seconds_since(t0);
    if (o.pass) o.detail << "all cells within tolerance";
    o.detail << " time=" << fmt(t, 4) << "s";
    o.require(t < 600.0, "slower than 10 min");
}

// ----------------------------------------------------------------- 4

void cancellation(Outcome& o) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(30);
    g[0] = g[1] = g[9] = 1.0;
    g[14] = -3.0 * 0.5;
    const TrueModel m(0.0, g, LinkFamily(LinkKind::Probit), CovarianceSpec::cs(0.5));
    const double ls = beta_ls_population(m, {14}).beta[0];
    const double e = contamination(m, 14);
    o.detail << "beta_ls[15]=" << fmt(ls, 3) << " contamination=" << fmt(e, 3);
    o.require(std::abs(ls) <= 1e-12, "beta_ls at j=15 not zero");
}

// ----------------------------------------------------------------- 5

void ml_fixed_point(Outcome& o) {
    std::mt19937_64 rng(5005);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_rel = 0.0, worst_mle = 0.0, worst_cos = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const int p = 5;
        Eigen::VectorXd g(p);
        for (int j = 0; j < p; ++j) g[j] = -1.0 + 2.0 * u(rng);
        const double rho = 0.1 + 0.6 * u(rng);
        const bool ar1 = trial % 2 == 0;
        const LinkKind truth = u(rng) < 0.5 ? LinkKind::Probit : LinkKind::Logit;
        const LinkKind working = trial % 3 == 0 ? LinkKind::Probit : LinkKind::Logit;
        const TrueModel m(-0.5 + u(rng), g, LinkFamily(truth), ar1 ? CovarianceSpec::ar1(rho) : CovarianceSpec::cs(rho));
        std::vector<int> all(p);
        for (int j = 0; j < p; ++j) all[j] = j;
        std::shuffle(all.begin(), all.end(), rng);
        std::vector<int> subset(all.begin(), all.begin() + 2 + trial % 3);
        std::sort(subset.begin(), subset.end());

        const PopulationCoefficients pc = population_coefficients(m, LinkFamily(working), subset);
        const Eigen::VectorXd diff = pc.beta_ml * pc.c2 - pc.beta_ls;
        worst_rel = std::max(worst_rel, diff.cwiseAbs().maxCoeff() / std::max(1.0, pc.beta_ls.cwiseAbs().maxCoeff()));
        const double cosine = pc.beta_ml.dot(pc.beta_ls) / (pc.beta_ml.norm() * pc.beta_ls.norm());
        worst_cos = std::max(worst_cos, 1.0 - cosine);

        const Dataset data = generate_dataset(m, 100000, 77000 + static_cast<std::uint64_t>(trial));
        const GlmFit f = fit(select_columns(data.X, subset), data.y, LinkFamily(working));
        o.require(f.converged, "large-sample fit did not converge");
        worst_mle = std::max(worst_mle, std::abs(f.coefficients[0] - pc.beta0_ml));
        for (std::size_t k = 0; k < subset.size(); ++k)
            worst_mle = std::max(worst_mle, std::abs(f.coefficients[static_cast<Eigen::Index>(k) + 1] -
                                                     pc.beta_ml[static_cast<Eigen::Index>(k)]));
    }
    o.detail << "max|beta_ml c2 - beta_ls|=" << fmt(worst_rel, 3) << " max|mle - beta_ml|=" << fmt(worst_mle, 3)
             << " max(1 - cos)=" << fmt(worst_cos, 3);
    o.require(worst_rel <= 1e-8, "fixed point relation off");
    o.require(worst_mle <= 0.05, "large-sample MLE too far");
    o.require(worst_cos <= 1e-8, "not parallel");
}

// ----------------------------------------------------------------- 6

void probit_cross(Outcome& o) {
    std::mt19937_64 rng(6006);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_z = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const int p = 4;
        Eigen::VectorXd g(p);
        for (int j = 0; j < p; ++j) g[j] = -1.0 + 2.0 * u(rng);
        const double rho = 0.1 + 0.6 * u(rng);
        const TrueModel m(-0.5 + u(rng), g, LinkFamily(LinkKind::Probit),
                          trial % 2 ? CovarianceSpec::cs(rho) : CovarianceSpec::ar1(rho));
        const double closed = probit_cross_moment(m, {0})[0];

        const int n = 1000000;
        const Eigen::MatrixXd X = oracle::mvn(m.sigma(), n, rng);
        const Eigen::VectorXd eta = (X * g).array() + m.gamma0;
        const Eigen::VectorXd y = oracle::bernoulli(eta, oracle::Link::Probit, rng);
        const Eigen::ArrayXd zy = X.col(0).array() * y.array();
        const double mean = zy.mean();
        const double se = std::sqrt((zy - mean).square().sum() / (n - 1.0) / n);
        worst_z = std::max(worst_z, std::abs(mean - closed) / se);
    }
    o.detail << "max |MC - closed|/se=" << fmt(worst_z, 3);
    o.require(worst_z < 3.0, "outside 3 MC standard errors");
}

// ----------------------------------------------------------------- 7

void selection_rule(Outcome& o) {
    const int ns[] = {100, 200, 500, 72};
    const int want[] = {21, 37, 80, 16};
    for (int i = 0; i < 4; ++i) {
        const int d = selection_size(ns[i]);
        o.detail << ns[i] << "->" << d << ' ';
        o.require(d == want[i], "wrong size for n=" + std::to_string(ns[i]));
    }
}

// ----------------------------------------------------------------- 8

void oracle_equivalence(Outcome& o) {
    std::mt19937_64 rng(8008);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int datasets = 0, redraws = 0;
    double worst_sis = 0.0, worst_glm = 0.0;
    bool monotone = true;
    while (datasets < 100) {
        const int n = 50, p = 3;
        const bool logit = datasets % 2 == 1;
        const oracle::Link ol = logit ? oracle::Link::Logit : oracle::Link::Probit;
        const LinkFamily link(logit ? LinkKind::Logit : LinkKind::Probit);
        const Eigen::MatrixXd X = oracle::mvn(oracle::structured_sigma(datasets % 4 < 2, 0.3, p), n, rng);
        Eigen::VectorXd g(p);
        for (int j = 0; j < p; ++j) g[j] = u(rng);
        const Eigen::VectorXd eta = (X * g).array() + 0.3 * u(rng);
        const Eigen::VectorXd y = oracle::bernoulli(eta, ol, rng);

        const GlmFit f = fit(X, y, link);
        bool usable = f.converged && !f.separation_detected;
        std::vector<StatResult> stats;
        for (int j = 0; j < p && usable; ++j) {
            stats.push_back(sis_stat({X.col(j).data(), static_cast<std::size_t>(n)}, {y.data(), static_cast<std::size_t>(n)}, link));
            usable = stats.back().flag == PredictorFlag::Ok;
        }
        if (!usable) {
            ++redraws;
            continue;
        }
        ++datasets;
        for (std::size_t k = 1; k < f.log_likelihood_trace.size(); ++k)
            if (f.log_likelihood_trace[k] < f.log_likelihood_trace[k - 1]) monotone = false;
        const std::vector<double> yv(y.data(), y.data() + n);
        const std::vector<long double> ref = oracle::glm_mle(ol, X, yv);
        for (int k = 0; k <= p; ++k)
            worst_glm = std::max(worst_glm, std::abs(f.coefficients[k] - static_cast<double>(ref[static_cast<std::size_t>(k)])));
        for (int j = 0; j < p; ++j) {
            const std::vector<double> xj(X.col(j).data(), X.col(j).data() + n);
            const double slope = static_cast<double>(oracle::marginal_slope(ol, xj, yv, 30.0L));
            worst_sis = std::max(worst_sis, std::abs(stats[static_cast<std::size_t>(j)].value - slope));
        }
    }
    o.detail << "datasets=" << datasets << " (redrawn " << redraws << " separated) max sis err=" << fmt(worst_sis, 3)
             << " max glm err=" << fmt(worst_glm, 3) << " monotone=" << (monotone ? "yes" : "no");
    o.require(worst_sis <= 1e-6, "sis_stat off oracle");
    o.require(worst_glm <= 1e-6, "glm fit off oracle");
    o.require(monotone, "IRLS log-likelihood decreased");
}

// ----------------------------------------------------------------- 9

void performance(Outcome& o) {
    const int n = 72, p = 7128;
    std::mt19937_64 rng(9009);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u;
    Dataset data;
    data.X.resize(n, p);
    data.y.resize(n);
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < n; ++i) data.X(i, j) = z(rng);
    for (int i = 0; i < n; ++i)
        data.y[i] = u(rng) < oracle::Phi(data.X(i, 0) - data.X(i, 1) + 0.8 * data.X(i, 2)) ? 1.0 : 0.0;

    ScreeningOptions options;
    options.threads = 1;
    double t[3];
    const ScreeningMethod methods[] = {ScreeningMethod::LeSS, ScreeningMethod::SISL, ScreeningMethod::SISP};
    for (int m = 0; m < 3; ++m) {
        const ScreeningReport r = screen(data, methods[m], options);
        t[m] = r.timing_seconds;
        o.require(r.d == 16, "unexpected d");
    }
    o.detail << "LeSS=" << fmt(t[0], 3) << "s SISL=" << fmt(t[1], 3) << "s SISP=" << fmt(t[2], 3) << "s";
    o.require(t[0] < 1.0, "LeSS slower than 1 s");
    o.require(t[1] < 60.0 && t[2] < 60.0, "SIS slower than 60 s");
}

// ----------------------------------------------------------------- 10

void binomial_properties(Outcome& o) {
    int points = 0, admissible = 0;
    double worst = 0.0;
    bool nonnegative = true;
    for (int a = 0; a < 100; ++a)
        for (int b = 0; b < 100; ++b) {
            ++points;
            const double p1 = 0.1 + 0.4 * a / 99.0;
            const double p2 = 0.1 + 0.4 * b / 99.0;
            const double alpha = 0.5 + 0.5 * ((a * 37 + b * 11) % 100) / 99.0;
            for (double al : {alpha, 0.0}) {
                if (!binomial_pair_admissible(p1, p2, al)) continue;
                ++admissible;
                for (const auto& row : conditional_pmf(p1, p2, al)) {
                    worst = std::max(worst, std::abs(row[0] + row[1] + row[2] - 1.0));
                    nonnegative = nonnegative && row[0] >= 0.0 && row[1] >= 0.0 && row[2] >= 0.0;
                }
            }
        }
    o.require(worst <= 1e-12 && nonnegative, "a conditional pmf is invalid");

    const CorrelatedBinomialSample s = sample_correlated_binomial(100000, 2, 1010);
    std::vector<double> corr;
    int independent = 0;
    for (std::size_t j = 1; j < s.q.size(); ++j) {
        corr.push_back(pair_correlation(s.q[j - 1], s.q[j], s.alpha[j]));
        independent += s.alpha[j] == 0.0 ? 1 : 0;
    }
    std::nth_element(corr.begin(), corr.begin() + static_cast<std::ptrdiff_t>(corr.size() / 2), corr.end());
    const double median = corr[corr.size() / 2];
    const double fraction = static_cast<double>(independent) / static_cast<double>(s.q.size() - 1);
    o.detail << "grid=" << points << " (" << admissible << " admissible pmfs) max|sum-1|=" << fmt(worst, 3)
             << " median corr=" << fmt(median, 4) << " independent=" << fmt(fraction, 4);
    o.require(std::abs(median - 0.4) <= 0.05, "median correlation off 0.4");
    o.require(std::abs(fraction - 0.10) <= 0.03, "independence fraction off 0.10");
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<void(Outcome&)> run;
    };
    const Criterion criteria[] = {
        {"mixture constants", constants},
        {"bias table", table1},
        {"selection-rate table", table2},
        {"exact cancellation", cancellation},
        {"ML fixed point", ml_fixed_point},
        {"probit cross moment", probit_cross},
        {"selection rule", selection_rule},
        {"oracle equivalence", oracle_equivalence},
        {"performance", performance},
        {"correlated binomial", binomial_properties},
    };
    int failed = 0;
    int index = 0;
    for (const Criterion& c : criteria) {
        ++index;
        Outcome o;
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.str().c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d of %d criteria passed\n", index - failed, index);
    return failed;
}
