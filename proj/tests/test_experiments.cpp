#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "binscreen/error.hpp"
#include "binscreen/experiments.hpp"

using namespace binscreen;

namespace {

ExperimentConfig small(Scenario s, int replicates) {
    ExperimentConfig cfg;
    cfg.scenario = s;
    cfg.replicates = replicates;
    cfg.threads = 1;
    return cfg;
}

}  // namespace

TEST_CASE("config validation") {
    ExperimentConfig cfg;
    cfg.replicates = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg.replicates = 5;
    cfg.n_values = {100, 9};
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg.n_values = {100};
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.to_json()["replicates"] == 5);
}

TEST_CASE("table1 cells and constants") {
    const Table1Result r = run_table1(small(Scenario::Table1, 20));
    REQUIRE(r.cells.size() == 4);
    CHECK(r.n == 200);
    CHECK(r.cells[0].covariance == "AR1");
    CHECK(r.cells[0].link == "probit");
    CHECK(std::abs(r.cells[0].c1 - 0.178) < 0.001);
    CHECK(std::abs(r.cells[1].c1 - 0.151) < 0.005);
    CHECK(std::abs(r.cells[2].c1 - 0.199) < 0.001);
    CHECK(std::abs(r.cells[3].c1 - 0.164) < 0.005);
    for (const BiasCell& cell : r.cells) {
        CHECK(cell.adjusted.size() == 20);
        for (double se : cell.se) CHECK(se > 0.0);
    }
    const std::string csv = to_csv(r);
    CHECK(csv.rfind("cov,link,stat,beta1,beta2,beta3,beta4,beta5,c1\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
}

TEST_CASE("table1 is reproducible and thread independent") {
    ExperimentConfig a = small(Scenario::Table1, 12), b = a;
    b.threads = 3;
    CHECK(to_csv(run_table1(a)) == to_csv(run_table1(a)));
    CHECK(to_csv(run_table1(a)) == to_csv(run_table1(b)));
    ExperimentConfig c = a;
    c.seed = a.seed + 1;
    CHECK(to_csv(run_table1(a)) != to_csv(run_table1(c)));
}

TEST_CASE("table2 structure, determinism and monotone rates") {
    ExperimentConfig cfg = small(Scenario::Table2, 20);
    cfg.p = 200;
    cfg.n_values = {60, 150, 400};
    const Table2Result r = run_table2(cfg);
    REQUIRE(r.cells.size() == 9);
    CHECK(r.cell("Normal-CS", 150).d == selection_size(150));
    CHECK_THROWS_AS(r.cell("Normal-CS", 151), InvalidArgument);
    for (const RateCell& c : r.cells)
        for (double rate : c.rate) {
            CHECK(rate >= 0.0);
            CHECK(rate <= 1.0);
        }
    for (const char* s : {"Normal-AR1", "Normal-CS", "Correlated-Binomial"})
        for (int m = 0; m < 3; ++m) {
            CHECK(r.cell(s, 150).rate[m] >= r.cell(s, 60).rate[m] - 0.02);
            CHECK(r.cell(s, 400).rate[m] >= r.cell(s, 150).rate[m] - 0.02);
        }
    ExperimentConfig threaded = cfg;
    threaded.threads = 4;
    CHECK(to_csv(run_table2(threaded)) == to_csv(r));
    const nlohmann::json j = to_json(r);
    CHECK(j["cells"].size() == 9);
    CHECK(j["cells"][0]["replicates"].size() == 20);
}

TEST_CASE("figure1 panels against the population curves") {
    const Figure1Result r = run_figure1(small(Scenario::Figure1, 100));
    REQUIRE(r.panels.size() == 2);
    const CurvePanel& ar1 = r.panels[0];
    const CurvePanel& cs = r.panels[1];
    CHECK(ar1.covariance == "AR1");
    REQUIRE(ar1.ls_population.size() == 30);

    // CS index 15: the marginal signal cancels exactly.
    for (int m = 0; m < 3; ++m) CHECK(std::abs(cs.mean[m][14]) < 3.0 * cs.se[m][14]);

    // AR1: the four active predictors carry the largest averaged statistics.
    for (int m = 0; m < 3; ++m) {
        std::vector<int> order(30);
        for (int j = 0; j < 30; ++j) order[j] = j;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return std::abs(ar1.mean[m][a]) > std::abs(ar1.mean[m][b]); });
        std::vector<int> top(order.begin(), order.begin() + 4);
        std::sort(top.begin(), top.end());
        CHECK(top == std::vector<int>{0, 1, 9, 14});
    }

    // LeSS averages track the least-squares limit.
    int outside = 0;
    for (const CurvePanel* panel : {&ar1, &cs})
        for (int j = 0; j < 30; ++j)
            outside += std::abs(panel->mean[0][j] - panel->ls_population[j]) < 3.0 * panel->se[0][j] ? 0 : 1;
    CHECK(outside == 0);

    const std::string csv = to_csv(r);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 61);
    CHECK(to_json(r)["active"] == nlohmann::json({1, 2, 10, 15}));
}
