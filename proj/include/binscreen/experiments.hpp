#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "binscreen/links.hpp"
#include "binscreen/screening.hpp"

namespace binscreen {

enum class Scenario { Table1, Table2, Figure1 };

struct ExperimentConfig {
    Scenario scenario = Scenario::Table1;
    int replicates = 100;
    std::vector<int> n_values;  // empty: the scenario's default grid
    std::uint64_t seed = 20100101;
    double rho = 0.5;
    int p = 1000;               // Table 2 predictor count
    int threads = 0;
    int quadrature_nodes = 128;
    /// Link of the true model behind the correlated-binomial column of Table 2.
    LinkKind binomial_link = LinkKind::Probit;

    /// Throws InvalidArgument when replicates < 1 or any n < 10.
    void validate() const;
    nlohmann::json to_json() const;
};

// ---------------------------------------------------------------- Table 1

/// Least-squares fit of y on all five predictors of H(X1 + X2 - 2 X3),
/// adjusted by 1/c1 and compared with gamma.
struct BiasCell {
    std::string covariance;  // "AR1" or "CS"
    std::string link;        // "probit" or "logit"
    double c1 = 0.0;
    std::array<double, 5> mean_bias{};
    std::array<double, 5> se{};
    std::vector<std::array<double, 5>> adjusted;  // per replicate
};

struct Table1Result {
    int n = 0;
    int replicates = 0;
    std::vector<BiasCell> cells;  // AR1/probit, AR1/logit, CS/probit, CS/logit
};

Table1Result run_table1(const ExperimentConfig& cfg);

// ---------------------------------------------------------------- Table 2

inline constexpr std::array<int, 4> kTable2Active{0, 1, 9, 14};

struct RateCell {
    std::string scenario;  // "Normal-AR1", "Normal-CS", "Correlated-Binomial"
    int n = 0;
    int d = 0;
    std::array<double, 3> rate{};           // SISL, SISP, LeSS
    std::vector<std::array<bool, 3>> hits;  // per replicate
};

struct Table2Result {
    int p = 0;
    int replicates = 0;
    std::vector<RateCell> cells;  // scenario-major, then n

    const RateCell& cell(const std::string& scenario, int n) const;
};

/// Methods in Table 2 row order.
inline constexpr std::array<ScreeningMethod, 3> kTable2Methods{ScreeningMethod::SISL, ScreeningMethod::SISP,
                                                               ScreeningMethod::LeSS};

Table2Result run_table2(const ExperimentConfig& cfg);

// ---------------------------------------------------------------- Figure 1

struct CurvePanel {
    std::string covariance;
    std::vector<double> ls_population;
    std::vector<double> ml_probit_population;
    std::vector<double> ml_logit_population;
    std::array<std::vector<double>, 3> mean;  // LeSS, SISP, SISL averages
    std::array<std::vector<double>, 3> se;
};

inline constexpr std::array<ScreeningMethod, 3> kFigure1Methods{ScreeningMethod::LeSS, ScreeningMethod::SISP,
                                                                ScreeningMethod::SISL};

struct Figure1Result {
    int n = 0;
    int replicates = 0;
    std::vector<int> active;  // 0-based
    std::vector<CurvePanel> panels;  // AR1, CS
};

Figure1Result run_figure1(const ExperimentConfig& cfg);

// ---------------------------------------------------------------- output

std::string to_csv(const Table1Result& result);
std::string to_csv(const Table2Result& result);
std::string to_csv(const Figure1Result& result);

nlohmann::json to_json(const Table1Result& result);
nlohmann::json to_json(const Table2Result& result);
nlohmann::json to_json(const Figure1Result& result);

}  // namespace binscreen
