#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "binscreen/binscreen.h"
#include "cli.hpp"

namespace fs = std::filesystem;
using binscreen::cli::parse_and_dispatch;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "binscreen");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = parse_and_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "binscreen_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("read_csv: toy file") {
    const fs::path path = scratch("toy.csv");
    write_file(path, "a,y\n0.5,1\n-1,0\n2e-3,1\n");
    const auto data = binscreen::cli::read_csv(path.string(), "y");
    CHECK(data.n == 3);
    CHECK(data.p == 1);
    CHECK(data.names == std::vector<std::string>{"a"});
    CHECK(data.x == std::vector<double>{0.5, -1.0, 0.002});
    CHECK(data.y == std::vector<double>{1.0, 0.0, 1.0});
}

TEST_CASE("read_csv: response column may sit anywhere; order is kept") {
    const fs::path path = scratch("order.csv");
    write_file(path, "g2,label,g1\r\n1,0,2\r\n3,1,4\r\n");
    const auto data = binscreen::cli::read_csv(path.string(), "label");
    CHECK(data.names == std::vector<std::string>{"g2", "g1"});
    CHECK(data.x == std::vector<double>{1, 2, 3, 4});
    CHECK(data.y == std::vector<double>{0, 1});
}

TEST_CASE("read_csv: errors name the offending cell") {
    auto message = [](const std::string& text, const std::string& response = "y") {
        const fs::path path = scratch("bad.csv");
        write_file(path, text);
        try {
            binscreen::cli::read_csv(path.string(), response);
        } catch (const std::runtime_error& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    const std::string two = message("x1,y\n0.1,0\n0.2,2\n0.3,1\n");
    CHECK(two.find(":3") != std::string::npos);
    CHECK(two.find("'y'") != std::string::npos);
    CHECK(two.find("0 or 1") != std::string::npos);

    const std::string text = message("x1,x2,y\n0.1,abc,0\n0.2,1,1\n");
    CHECK(text.find(":2") != std::string::npos);
    CHECK(text.find("'x2'") != std::string::npos);
    CHECK(text.find("abc") != std::string::npos);

    const std::string missing = message("x1,y\n0.1,0\n,1\n");
    CHECK(missing.find(":3") != std::string::npos);
    CHECK(missing.find("missing") != std::string::npos);

    CHECK(message("x1,y\n1.5x,0\n2,1\n").find("not a finite number") != std::string::npos);
    CHECK(message("x1,y\n1,0\n2\n").find("expected 2 fields") != std::string::npos);
    CHECK(message("x1,z\n1,0\n2,1\n").find("no response column") != std::string::npos);
    CHECK(message("").find("header") != std::string::npos);
}

TEST_CASE("shortest decimals round trip") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    for (int i = 0; i < 10000; ++i) {
        const double v = z(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        CHECK(std::stod(binscreen::cli::shortest(v)) == v);
    }
    CHECK(binscreen::cli::shortest(1.0) == "1");
    CHECK(binscreen::cli::shortest(0.1) == "0.1");
}

TEST_CASE("fnv1a reference values") {
    CHECK(binscreen::cli::fnv1a_hex("") == "cbf29ce484222325");
    CHECK(binscreen::cli::fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(binscreen::cli::fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("gen then read_csv reproduces the dataset exactly") {
    const fs::path spec = scratch("model.json");
    write_file(spec, R"({"gamma0": 0.25, "gamma": [1, -0.5, 0, 2], "link": "logit", "cov": {"kind": "cs", "rho": 0.3}})");
    const fs::path csv = scratch("gen.csv");
    const Run r = run({"gen", "--model", spec.string(), "--n", "250", "--seed", "99", "--out", csv.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    const auto manifest = nlohmann::json::parse(r.err);
    CHECK(manifest["command"] == "gen");
    CHECK(manifest["seed"] == 99);

    const auto data = binscreen::cli::read_csv(csv.string(), "y");
    CHECK(data.names == std::vector<std::string>{"x1", "x2", "x3", "x4"});

    const double gamma[] = {1, -0.5, 0, 2};
    bs_model* model = nullptr;
    REQUIRE(bs_model_create(0.25, gamma, 4, BS_LINK_LOGIT, BS_COV_CS, 0.3, nullptr, &model) == BS_OK);
    bs_dataset* ref = nullptr;
    REQUIRE(bs_dataset_generate(model, 250, 99, &ref) == BS_OK);
    std::vector<double> x(250 * 4), y(250);
    bs_dataset_copy_x(ref, x.data());
    bs_dataset_copy_y(ref, y.data());
    CHECK(data.x == x);
    CHECK(data.y == y);
    bs_dataset_destroy(ref);
    bs_model_destroy(model);
}

TEST_CASE("gen presets and binomial predictors") {
    const Run r = run({"gen", "--preset", "sparse-binomial", "--p", "20", "--n", "30", "--seed", "5"});
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    CHECK(line.rfind("x1,x2,", 0) == 0);
    int rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) CHECK((cell == "0" || cell == "1" || cell == "2"));
    }
    CHECK(rows == 30);

    CHECK(run({"gen", "--preset", "sparse-ar1", "--p", "10"}).code == 1);
    CHECK(run({"gen"}).code == 1);
    CHECK(run({"gen", "--preset", "nope"}).code == 1);
}

TEST_CASE("screen: happy path, missing input, unknown flag") {
    const fs::path csv = scratch("screen.csv");
    REQUIRE(run({"gen", "--preset", "sparse-ar1", "--p", "40", "--n", "120", "--seed", "8", "--out", csv.string()}).code == 0);

    const Run ok = run({"screen", "--method", "less", "--input", csv.string(), "--response", "y"});
    REQUIRE(ok.code == 0);
    const auto report = nlohmann::ordered_json::parse(ok.out);
    std::vector<std::string> keys;
    for (auto it = report.begin(); it != report.end(); ++it) keys.push_back(it.key());
    CHECK(keys.front() == "method");
    CHECK(report["method"] == "LeSS");
    CHECK(report["n"] == 120);
    CHECK(report["p"] == 40);
    CHECK(report["d"] == 25);
    CHECK(report["stats"].size() == 40);
    CHECK(report["selected"].size() == 25);
    CHECK(report["manifest"]["command"] == "screen");
    CHECK(report["manifest"]["wall_time"] == report["timing_seconds"]);

    const Run no_input = run({"screen", "--method", "sisp"});
    CHECK(no_input.code == 1);
    CHECK(no_input.err.find("--input") != std::string::npos);
    CHECK(no_input.err.find("Usage") != std::string::npos);

    const Run unknown = run({"screen", "--method", "less", "--input", csv.string(), "--frobnicate"});
    CHECK(unknown.code == 1);
    CHECK(unknown.err.find("Usage") != std::string::npos);

    CHECK(run({"screen", "--method", "lasso", "--input", csv.string()}).code == 1);
    CHECK(run({"screen", "--method", "less", "--input", scratch("absent.csv").string()}).code == 1);
    CHECK(run({}).code == 1);
}

TEST_CASE("config hash ignores field order and tracks content") {
    const fs::path a = scratch("a.json"), b = scratch("b.json"), c = scratch("c.json");
    write_file(a, R"({"gamma": [1, 0.5], "gamma0": 0, "link": "probit", "cov": {"kind": "ar1", "rho": 0.4}})");
    write_file(b, R"({"cov": {"rho": 0.4, "kind": "ar1"}, "link": "probit", "gamma0": 0, "gamma": [1, 0.5]})");
    write_file(c, R"({"cov": {"rho": 0.5, "kind": "ar1"}, "link": "probit", "gamma0": 0, "gamma": [1, 0.5]})");
    auto hash = [](const fs::path& spec) {
        const Run r = run({"asymptotics", "--model", spec.string()});
        REQUIRE(r.code == 0);
        return nlohmann::json::parse(r.out)["manifest"]["config_hash"].get<std::string>();
    };
    CHECK(hash(a) == hash(b));
    CHECK(hash(a) != hash(c));
}

TEST_CASE("fit: selected set, holdout and misclassification") {
    const fs::path csv = scratch("fit.csv"), report = scratch("fit_report.json");
    REQUIRE(run({"gen", "--preset", "sparse-ar1", "--p", "30", "--n", "400", "--seed", "12", "--out", csv.string()}).code == 0);
    REQUIRE(run({"screen", "--method", "sisl", "--input", csv.string(), "--d", "4", "--out", report.string()}).code == 0);

    const Run r = run({"fit", "--input", csv.string(), "--select", report.string(), "--link", "logit"});
    REQUIRE(r.code == 0);
    const auto fit = nlohmann::json::parse(r.out);
    CHECK(fit["columns"].size() == 4);
    CHECK(fit["coefficients"].size() == 5);
    CHECK(fit["converged"] == true);
    CHECK(fit["misclassification_rate"].get<double>() < 0.35);
    CHECK(fit["misclassified"].get<long>() ==
          std::lround(fit["misclassification_rate"].get<double>() * fit["n"].get<double>()));

    const Run h1 = run({"fit", "--input", csv.string(), "--columns", "1,2,10,15", "--holdout", "0.25", "--seed", "4"});
    const Run h2 = run({"fit", "--input", csv.string(), "--columns", "1,2,10,15", "--holdout", "0.25", "--seed", "4"});
    REQUIRE(h1.code == 0);
    const auto j1 = nlohmann::json::parse(h1.out), j2 = nlohmann::json::parse(h2.out);
    CHECK(j1["n"] == 300);
    CHECK(j1["holdout"]["n"] == 100);
    CHECK(j1["coefficients"] == j2["coefficients"]);

    CHECK(run({"fit", "--input", csv.string(), "--columns", "0"}).code == 1);
    CHECK(run({"fit", "--input", csv.string(), "--holdout", "1.5"}).code == 1);
    CHECK(run({"fit", "--input", csv.string(), "--link", "cauchit"}).code == 1);
}

TEST_CASE("asymptotics: JSON and CSV outputs agree") {
    const Run j = run({"asymptotics", "--preset", "sparse-cs", "--p", "20", "--working-link", "probit"});
    REQUIRE(j.code == 0);
    const auto doc = nlohmann::json::parse(j.out);
    CHECK(doc["beta_ls"].size() == 20);
    CHECK(std::abs(doc["curve"]["beta_ls"][14].get<double>()) < 1e-12);

    const Run c = run({"asymptotics", "--preset", "sparse-cs", "--p", "20", "--working-link", "probit", "--format", "csv"});
    REQUIRE(c.code == 0);
    std::istringstream lines(c.out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "index,gamma,contamination,beta_ls,beta_ml");
    int rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == 20);
    CHECK(nlohmann::json::parse(c.err)["c1"] == doc["c1"]);

    const Run sub = run({"asymptotics", "--preset", "bias-ar1", "--subset", "1,3"});
    REQUIRE(sub.code == 0);
    CHECK(nlohmann::json::parse(sub.out)["beta_ml"].size() == 2);
    CHECK(run({"asymptotics", "--preset", "bias-ar1", "--subset", "6"}).code == 1);
    CHECK(run({"asymptotics", "--preset", "sparse-binomial"}).code == 1);
}

TEST_CASE("table2 with the same seed gives identical CSV bytes") {
    const std::vector<std::string> args{"table2", "--seed", "7", "--replicates", "2", "--p", "40", "--n", "60,80"};
    const Run a = run(args), b = run(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.size() > 0);
    CHECK(nlohmann::json::parse(a.err)["seed"] == 7);
}

TEST_CASE("table1 and figure1 write a JSON sidecar") {
    const fs::path side = scratch("t1.json"), out = scratch("t1.csv");
    const Run r = run({"table1", "--replicates", "2", "--n", "80", "--out", out.string(), "--json", side.string()});
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(read_file(side));
    CHECK(doc["manifest"]["command"] == "table1");
    CHECK(doc.contains("config"));
    CHECK(read_file(out).size() > 0);

    const Run f = run({"figure1", "--replicates", "2", "--n", "60"});
    REQUIRE(f.code == 0);
    CHECK(f.out.find('\n') != std::string::npos);
}

TEST_CASE("BINSCREEN_THREADS is validated") {
    const fs::path csv = scratch("threads.csv");
    REQUIRE(run({"gen", "--preset", "bias-cs", "--n", "50", "--out", csv.string()}).code == 0);
    setenv("BINSCREEN_THREADS", "zero", 1);
    CHECK(run({"screen", "--method", "less", "--input", csv.string()}).code == 1);
    setenv("BINSCREEN_THREADS", "1", 1);
    CHECK(run({"screen", "--method", "less", "--input", csv.string()}).code == 0);
    unsetenv("BINSCREEN_THREADS");
}

TEST_CASE("72 x 7129 file parses and screens with timing reported") {
    const fs::path csv = scratch("wide.csv");
    {
        std::mt19937_64 rng(72);
        std::normal_distribution<double> z;
        std::ofstream file(csv);
        for (int j = 1; j <= 7128; ++j) file << "g" << j << ',';
        file << "y\n";
        for (int i = 0; i < 72; ++i) {
            for (int j = 0; j < 7128; ++j) file << binscreen::cli::shortest(z(rng)) << ',';
            file << (i % 3 == 0 ? 1 : 0) << '\n';
        }
    }
    const auto data = binscreen::cli::read_csv(csv.string(), "y");
    CHECK(data.n == 72);
    CHECK(data.p == 7128);
    const Run r = run({"screen", "--method", "less", "--input", csv.string()});
    REQUIRE(r.code == 0);
    const auto report = nlohmann::json::parse(r.out);
    CHECK(report["d"] == 16);
    CHECK(report["timing_seconds"].get<double>() > 0.0);
    CHECK(report["timing_seconds"].get<double>() < 1.0);
    CHECK(report["selected_names"][0].get<std::string>().front() == 'g');
}
