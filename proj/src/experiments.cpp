#include "binscreen/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/QR>

#include "binscreen/asymptotics.hpp"
#include "binscreen/datagen.hpp"
#include "binscreen/error.hpp"
#include "binscreen/format.hpp"
#include "binscreen/parallel.hpp"
#include "binscreen/rng.hpp"

namespace binscreen {

namespace {

std::vector<int> n_grid(const ExperimentConfig& cfg, std::vector<int> fallback) {
    return cfg.n_values.empty() ? fallback : cfg.n_values;
}

struct MeanSe {
    double mean;
    double se;
};

MeanSe mean_se(const std::vector<double>& values) {
    const double r = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= r;
    if (values.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (r - 1.0) / r)};
}

const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Table1: return "table1";
        case Scenario::Table2: return "table2";
        case Scenario::Figure1: return "figure1";
    }
    return "?";
}

// X1 + X2 + X10 - 3 rho X15 on p predictors.
Eigen::VectorXd table2_gamma(int p, double rho) {
    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(p);
    gamma[0] = gamma[1] = gamma[9] = 1.0;
    gamma[14] = -3.0 * rho;
    return gamma;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (replicates < 1) throw InvalidArgument("experiment: replicates must be >= 1");
    for (int n : n_values)
        if (n < 10) throw InvalidArgument("experiment: every n must be >= 10");
    if (!(rho >= 0.0 && rho < 1.0)) throw InvalidArgument("experiment: rho must lie in [0, 1)");
    if (scenario == Scenario::Table2 && p < 15) throw InvalidArgument("experiment: Table 2 needs p >= 15");
}

nlohmann::json ExperimentConfig::to_json() const {
    return {{"scenario", scenario_name(scenario)},
            {"replicates", replicates},
            {"n_values", n_values},
            {"seed", seed},
            {"rho", rho},
            {"p", p},
            {"quadrature_nodes", quadrature_nodes},
            {"binomial_link", binomial_link == LinkKind::Probit ? "probit" : "logit"}};
}

// ---------------------------------------------------------------- Table 1

Table1Result run_table1(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::vector<int> ns = n_grid(cfg, {200});
    const int n = ns.front();
    Eigen::VectorXd gamma(5);
    gamma << 1.0, 1.0, -2.0, 0.0, 0.0;

    struct CellSpec {
        const char* cov;
        LinkKind link;
    };
    const std::array<CellSpec, 4> specs{{{"AR1", LinkKind::Probit},
                                         {"AR1", LinkKind::Logit},
                                         {"CS", LinkKind::Probit},
                                         {"CS", LinkKind::Logit}}};

    Table1Result result;
    result.n = n;
    result.replicates = cfg.replicates;
    result.cells.resize(specs.size());
    std::vector<TrueModel> models;
    for (std::size_t c = 0; c < specs.size(); ++c) {
        const CovarianceSpec cov =
            std::string(specs[c].cov) == "AR1" ? CovarianceSpec::ar1(cfg.rho) : CovarianceSpec::cs(cfg.rho);
        models.emplace_back(0.0, gamma, LinkFamily(specs[c].link, cfg.quadrature_nodes), cov);
        BiasCell& cell = result.cells[c];
        cell.covariance = specs[c].cov;
        cell.link = std::string(models.back().link.name());
        cell.c1 = beta_ls_population(models.back(), {0, 1, 2, 3, 4}).c1;
        cell.adjusted.resize(cfg.replicates);
    }

    const std::size_t jobs = specs.size() * static_cast<std::size_t>(cfg.replicates);
    parallel_for(jobs, cfg.threads, [&](std::size_t job) {
        const std::size_t c = job / cfg.replicates;
        const std::size_t r = job % cfg.replicates;
        const Dataset data = generate_dataset(models[c], n, substream_seed(cfg.seed, 100 + c, r));
        Eigen::MatrixXd design(n, 6);
        design.col(0).setOnes();
        design.rightCols(5) = data.X;
        const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(data.y);
        for (int k = 0; k < 5; ++k) result.cells[c].adjusted[r][k] = coef[k + 1] / result.cells[c].c1;
    });

    for (BiasCell& cell : result.cells) {
        for (int k = 0; k < 5; ++k) {
            std::vector<double> values(cfg.replicates);
            for (int r = 0; r < cfg.replicates; ++r) values[r] = cell.adjusted[r][k];
            const MeanSe ms = mean_se(values);
            cell.mean_bias[k] = ms.mean - gamma[k];
            cell.se[k] = ms.se;
        }
    }
    return result;
}

// ---------------------------------------------------------------- Table 2

const RateCell& Table2Result::cell(const std::string& scenario, int n) const {
    for (const RateCell& c : cells)
        if (c.scenario == scenario && c.n == n) return c;
    throw InvalidArgument("no Table 2 cell " + scenario + " n=" + std::to_string(n));
}

Table2Result run_table2(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::vector<int> ns = n_grid(cfg, {100, 200, 500});
    const std::array<std::string, 3> scenarios{"Normal-AR1", "Normal-CS", "Correlated-Binomial"};
    const Eigen::VectorXd gamma = table2_gamma(cfg.p, cfg.rho);
    const TrueModel ar1(0.0, gamma, LinkFamily(LinkKind::Probit, cfg.quadrature_nodes), CovarianceSpec::ar1(cfg.rho));
    const TrueModel cs(0.0, gamma, LinkFamily(LinkKind::Probit, cfg.quadrature_nodes), CovarianceSpec::cs(cfg.rho));
    // The binomial design only borrows the linear predictor; its covariance is
    // set by the sequential sampler.
    const TrueModel binomial(0.0, gamma, LinkFamily(cfg.binomial_link, cfg.quadrature_nodes),
                             CovarianceSpec::ar1(0.0));

    Table2Result result;
    result.p = cfg.p;
    result.replicates = cfg.replicates;
    for (const std::string& s : scenarios)
        for (int n : ns) {
            RateCell cell;
            cell.scenario = s;
            cell.n = n;
            cell.d = selection_size(n);
            cell.hits.resize(cfg.replicates);
            result.cells.push_back(std::move(cell));
        }

    const std::size_t jobs = result.cells.size() * static_cast<std::size_t>(cfg.replicates);
    parallel_for(jobs, cfg.threads, [&](std::size_t job) {
        const std::size_t c = job / cfg.replicates;
        const std::size_t r = job % cfg.replicates;
        RateCell& cell = result.cells[c];
        const std::uint64_t seed = substream_seed(cfg.seed, 200 + c, r);
        Dataset data;
        if (cell.scenario == "Correlated-Binomial") {
            data.X = sample_correlated_binomial(cfg.p, cell.n, seed).X;
            data.y = gen_response(data.X, binomial, mix64(seed));
        } else {
            data = generate_dataset(cell.scenario == "Normal-AR1" ? ar1 : cs, cell.n, seed);
        }
        ScreeningOptions options;
        options.threads = 1;
        options.quadrature_nodes = cfg.quadrature_nodes;
        const bool one_class = data.y.sum() == 0.0 || data.y.sum() == data.y.size();
        for (std::size_t m = 0; m < kTable2Methods.size(); ++m) {
            if (one_class && kTable2Methods[m] != ScreeningMethod::LeSS) {
                cell.hits[r][m] = false;
                continue;
            }
            const ScreeningReport report = screen(data, kTable2Methods[m], options);
            cell.hits[r][m] = std::all_of(kTable2Active.begin(), kTable2Active.end(), [&](int a) {
                return std::find(report.selected.begin(), report.selected.end(), a) != report.selected.end();
            });
        }
    });

    for (RateCell& cell : result.cells)
        for (std::size_t m = 0; m < 3; ++m) {
            int count = 0;
            for (const auto& h : cell.hits) count += h[m] ? 1 : 0;
            cell.rate[m] = static_cast<double>(count) / cfg.replicates;
        }
    return result;
}

// ---------------------------------------------------------------- Figure 1

Figure1Result run_figure1(const ExperimentConfig& cfg) {
    cfg.validate();
    const int p = 30;
    const int n = n_grid(cfg, {200}).front();
    const Eigen::VectorXd gamma = table2_gamma(p, cfg.rho);

    Figure1Result result;
    result.n = n;
    result.replicates = cfg.replicates;
    result.active = {0, 1, 9, 14};

    const std::array<std::string, 2> covs{"AR1", "CS"};
    std::vector<TrueModel> models;
    for (const std::string& name : covs)
        models.emplace_back(0.0, gamma, LinkFamily(LinkKind::Probit, cfg.quadrature_nodes),
                            name == "AR1" ? CovarianceSpec::ar1(cfg.rho) : CovarianceSpec::cs(cfg.rho));

    // stats[panel][replicate][method][j]
    std::vector<std::vector<std::array<std::vector<double>, 3>>> stats(
        covs.size(), std::vector<std::array<std::vector<double>, 3>>(cfg.replicates));
    const std::size_t jobs = covs.size() * static_cast<std::size_t>(cfg.replicates);
    parallel_for(jobs, cfg.threads, [&](std::size_t job) {
        const std::size_t panel = job / cfg.replicates;
        const std::size_t r = job % cfg.replicates;
        const Dataset data = generate_dataset(models[panel], n, substream_seed(cfg.seed, 300 + panel, r));
        ScreeningOptions options;
        options.threads = 1;
        options.quadrature_nodes = cfg.quadrature_nodes;
        for (std::size_t m = 0; m < kFigure1Methods.size(); ++m)
            stats[panel][r][m] = screen(data, kFigure1Methods[m], options).stats;
    });

    for (std::size_t panel = 0; panel < covs.size(); ++panel) {
        CurvePanel out;
        out.covariance = covs[panel];
        const PopulationCurve probit_curve =
            population_curve(models[panel], LinkFamily(LinkKind::Probit, cfg.quadrature_nodes), cfg.threads);
        const PopulationCurve logit_curve =
            population_curve(models[panel], LinkFamily(LinkKind::Logit, cfg.quadrature_nodes), cfg.threads);
        out.ls_population = probit_curve.beta_ls;
        out.ml_probit_population = probit_curve.beta_ml;
        out.ml_logit_population = logit_curve.beta_ml;
        for (std::size_t m = 0; m < 3; ++m) {
            out.mean[m].resize(p);
            out.se[m].resize(p);
            for (int j = 0; j < p; ++j) {
                std::vector<double> values(cfg.replicates);
                for (int r = 0; r < cfg.replicates; ++r) values[r] = stats[panel][r][m][j];
                const MeanSe ms = mean_se(values);
                out.mean[m][j] = ms.mean;
                out.se[m][j] = ms.se;
            }
        }
        result.panels.push_back(std::move(out));
    }
    return result;
}

// ---------------------------------------------------------------- output

std::string to_csv(const Table1Result& result) {
    std::ostringstream out;
    out << "cov,link,stat,beta1,beta2,beta3,beta4,beta5,c1\n";
    for (const BiasCell& cell : result.cells) {
        out << cell.covariance << ',' << cell.link << ",mean";
        for (double b : cell.mean_bias) out << ',' << format_double(b);
        out << ',' << format_double(cell.c1) << '\n';
        out << cell.covariance << ',' << cell.link << ",s.e.";
        for (double s : cell.se) out << ',' << format_double(s);
        out << ",\n";
    }
    return out.str();
}

std::string to_csv(const Table2Result& result) {
    std::ostringstream out;
    out << "method";
    for (const RateCell& cell : result.cells) out << ',' << cell.scenario << ":n=" << cell.n;
    out << '\n';
    for (std::size_t m = 0; m < kTable2Methods.size(); ++m) {
        out << method_name(kTable2Methods[m]);
        for (const RateCell& cell : result.cells) out << ',' << format_double(cell.rate[m]);
        out << '\n';
    }
    return out.str();
}

std::string to_csv(const Figure1Result& result) {
    std::ostringstream out;
    out << "panel,index,active,ls_population,ml_probit_population,ml_logit_population,"
           "less_mean,less_se,sisp_mean,sisp_se,sisl_mean,sisl_se\n";
    for (const CurvePanel& panel : result.panels) {
        for (std::size_t j = 0; j < panel.ls_population.size(); ++j) {
            const bool active = std::find(result.active.begin(), result.active.end(), static_cast<int>(j)) !=
                                result.active.end();
            out << panel.covariance << ',' << j + 1 << ',' << (active ? 1 : 0) << ','
                << format_double(panel.ls_population[j]) << ',' << format_double(panel.ml_probit_population[j])
                << ',' << format_double(panel.ml_logit_population[j]);
            for (std::size_t m = 0; m < 3; ++m)
                out << ',' << format_double(panel.mean[m][j]) << ',' << format_double(panel.se[m][j]);
            out << '\n';
        }
    }
    return out.str();
}

nlohmann::json to_json(const Table1Result& result) {
    nlohmann::json cells = nlohmann::json::array();
    for (const BiasCell& cell : result.cells) {
        cells.push_back({{"cov", cell.covariance},
                         {"link", cell.link},
                         {"c1", cell.c1},
                         {"mean_bias", cell.mean_bias},
                         {"se", cell.se},
                         {"adjusted", cell.adjusted}});
    }
    return {{"n", result.n}, {"replicates", result.replicates}, {"cells", cells}};
}

nlohmann::json to_json(const Table2Result& result) {
    nlohmann::json cells = nlohmann::json::array();
    for (const RateCell& cell : result.cells) {
        nlohmann::json hits = nlohmann::json::array();
        for (const auto& h : cell.hits) hits.push_back({{"SISL", h[0]}, {"SISP", h[1]}, {"LeSS", h[2]}});
        cells.push_back({{"scenario", cell.scenario},
                         {"n", cell.n},
                         {"d", cell.d},
                         {"rate", {{"SISL", cell.rate[0]}, {"SISP", cell.rate[1]}, {"LeSS", cell.rate[2]}}},
                         {"replicates", hits}});
    }
    return {{"p", result.p}, {"replicates", result.replicates}, {"active", {1, 2, 10, 15}}, {"cells", cells}};
}

nlohmann::json to_json(const Figure1Result& result) {
    nlohmann::json panels = nlohmann::json::array();
    for (const CurvePanel& panel : result.panels) {
        panels.push_back({{"cov", panel.covariance},
                          {"ls_population", panel.ls_population},
                          {"ml_probit_population", panel.ml_probit_population},
                          {"ml_logit_population", panel.ml_logit_population},
                          {"less", {{"mean", panel.mean[0]}, {"se", panel.se[0]}}},
                          {"sisp", {{"mean", panel.mean[1]}, {"se", panel.se[1]}}},
                          {"sisl", {{"mean", panel.mean[2]}, {"se", panel.se[2]}}}});
    }
    std::vector<int> active_one_based;
    for (int a : result.active) active_one_based.push_back(a + 1);
    return {{"n", result.n}, {"replicates", result.replicates}, {"active", active_one_based}, {"panels", panels}};
}

}  // namespace binscreen
