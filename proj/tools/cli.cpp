#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "binscreen/binscreen.h"

namespace binscreen::cli {

namespace {

using ordered = nlohmann::ordered_json;

/// Failure reported by the library, carrying its status.
class ApiError : public std::runtime_error {
public:
    ApiError(bs_status status, const std::string& what) : std::runtime_error(what), status_(status) {}
    bs_status status() const noexcept { return status_; }

private:
    bs_status status_;
};

void check(bs_status status) {
    if (status != BS_OK) throw ApiError(status, bs_last_error());
}

template <class T, void (*Destroy)(T*)>
struct Deleter {
    void operator()(T* p) const noexcept { Destroy(p); }
};
using Model = std::unique_ptr<bs_model, Deleter<bs_model, bs_model_destroy>>;
using Data = std::unique_ptr<bs_dataset, Deleter<bs_dataset, bs_dataset_destroy>>;
using Report = std::unique_ptr<bs_report, Deleter<bs_report, bs_report_destroy>>;
using Fit = std::unique_ptr<bs_glm_fit, Deleter<bs_glm_fit, bs_glm_fit_destroy>>;
using Population = std::unique_ptr<bs_population, Deleter<bs_population, bs_population_destroy>>;
using Experiment = std::unique_ptr<bs_experiment, Deleter<bs_experiment, bs_experiment_destroy>>;

class Stopwatch {
public:
    void start() { begin_ = std::chrono::steady_clock::now(); }
    void stop() { total_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - begin_).count(); }
    void add(double seconds) { total_ += seconds; }
    double seconds() const { return total_; }

private:
    std::chrono::steady_clock::time_point begin_;
    double total_ = 0.0;
};

int env_threads() {
    const char* raw = std::getenv("BINSCREEN_THREADS");
    if (raw == nullptr || *raw == '\0') return 0;
    int value = 0;
    const char* end = raw + std::strlen(raw);
    const auto [ptr, ec] = std::from_chars(raw, end, value);
    if (ec != std::errc() || ptr != end || value < 1)
        throw std::runtime_error(std::string("BINSCREEN_THREADS must be a positive integer, got '") + raw + "'");
    return value;
}

bs_link to_link(const std::string& name) {
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "probit") return BS_LINK_PROBIT;
    if (lower == "logit") return BS_LINK_LOGIT;
    throw std::runtime_error("unknown link '" + name + "' (expected probit or logit)");
}

const char* link_name(bs_link link) { return link == BS_LINK_PROBIT ? "probit" : "logit"; }

const char* method_label(bs_method m) {
    switch (m) {
        case BS_METHOD_LESS: return "LeSS";
        case BS_METHOD_SISL: return "SISL";
        case BS_METHOD_SISP: return "SISP";
    }
    return "?";
}

const char* flag_label(int flag) {
    switch (flag) {
        case BS_FLAG_OK: return "ok";
        case BS_FLAG_ZERO_VARIANCE: return "zero_variance";
        case BS_FLAG_SEPARATION: return "separation";
        case BS_FLAG_NONCONVERGENCE: return "nonconvergence";
    }
    return "?";
}

// ------------------------------------------------------------------ output

/// Writes to --out when given, else to the command's stdout stream.
void emit(const std::string& path, std::ostream& out, const std::string& text) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
    file << text;
    if (!file) throw std::runtime_error("failed writing '" + path + "'");
}

ordered manifest(const std::string& command, const nlohmann::json& config, std::uint64_t seed, double wall) {
    ordered m;
    m["command"] = command;
    m["config_hash"] = fnv1a_hex(config.dump());  // std::map keys: sorted, so order-free
    m["seed"] = seed;
    m["wall_time"] = wall;
    m["tool_version"] = bs_version();
    return m;
}

std::string parse_indices(const std::string& list, std::size_t limit, std::vector<int>& out) {
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        int v = 0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc() || ptr != item.data() + item.size() || v < 1 || static_cast<std::size_t>(v) > limit)
            return "index '" + item + "' is not in 1.." + std::to_string(limit);
        out.push_back(v - 1);
    }
    if (out.empty()) return "empty index list";
    return {};
}

// ------------------------------------------------------------------ models

struct ModelSpec {
    double gamma0 = 0.0;
    std::vector<double> gamma;
    bs_link link = BS_LINK_PROBIT;
    bs_cov_kind kind = BS_COV_AR1;
    double rho = 0.5;
    std::vector<double> dense;  // row-major
    nlohmann::json source;      // canonical form for hashing and echoing
};

ModelSpec model_from_json(const nlohmann::json& j) {
    ModelSpec s;
    try {
        s.gamma0 = j.value("gamma0", 0.0);
        s.gamma = j.at("gamma").get<std::vector<double>>();
        s.link = to_link(j.value("link", std::string("probit")));
        const nlohmann::json& cov = j.at("cov");
        const std::string kind = cov.at("kind").get<std::string>();
        if (kind == "ar1" || kind == "AR1") {
            s.kind = BS_COV_AR1;
            s.rho = cov.at("rho").get<double>();
        } else if (kind == "cs" || kind == "CS") {
            s.kind = BS_COV_CS;
            s.rho = cov.at("rho").get<double>();
        } else if (kind == "dense") {
            s.kind = BS_COV_DENSE;
            const auto rows = cov.at("matrix").get<std::vector<std::vector<double>>>();
            if (rows.size() != s.gamma.size()) throw std::runtime_error("cov.matrix must be p x p");
            for (const auto& row : rows) {
                if (row.size() != s.gamma.size()) throw std::runtime_error("cov.matrix must be p x p");
                s.dense.insert(s.dense.end(), row.begin(), row.end());
            }
        } else {
            throw std::runtime_error("cov.kind must be ar1, cs or dense");
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("model spec: ") + e.what());
    }
    s.source = j;
    return s;
}

ModelSpec load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model spec '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("model spec '" + path + "': " + e.what());
    }
    return model_from_json(j);
}

/// Named models: the sparse screening model X1 + X2 + X10 - 3 rho X15 and
/// the five-predictor bias model X1 + X2 - 2 X3.
ModelSpec preset_model(const std::string& name, int p, double rho, bs_link link, bool& binomial) {
    nlohmann::json j;
    binomial = false;
    if (name.rfind("sparse-", 0) == 0) {
        if (p < 15) throw std::runtime_error("preset " + name + " needs --p >= 15");
        std::vector<double> g(static_cast<std::size_t>(p), 0.0);
        g[0] = g[1] = g[9] = 1.0;
        g[14] = -3.0 * rho;
        j["gamma"] = g;
        const std::string kind = name.substr(7);
        if (kind == "binomial") {
            binomial = true;
            j["cov"] = {{"kind", "ar1"}, {"rho", 0.0}};
        } else if (kind == "ar1" || kind == "cs") {
            j["cov"] = {{"kind", kind}, {"rho", rho}};
        } else {
            throw std::runtime_error("unknown preset '" + name + "'");
        }
    } else if (name == "bias-ar1" || name == "bias-cs") {
        j["gamma"] = {1.0, 1.0, -2.0, 0.0, 0.0};
        j["cov"] = {{"kind", name.substr(5)}, {"rho", rho}};
    } else {
        throw std::runtime_error("unknown preset '" + name + "'");
    }
    j["gamma0"] = 0.0;
    j["link"] = link_name(link);
    j["predictors"] = binomial ? "binomial" : "normal";
    return model_from_json(j);
}

Model make_model(const ModelSpec& s) {
    bs_model* raw = nullptr;
    check(bs_model_create(s.gamma0, s.gamma.data(), s.gamma.size(), s.link, s.kind, s.rho,
                          s.dense.empty() ? nullptr : s.dense.data(), &raw));
    return Model(raw);
}

// ------------------------------------------------------------------ datasets

Data make_dataset(const CsvData& csv) {
    bs_dataset* raw = nullptr;
    check(bs_dataset_create(csv.x.data(), csv.y.data(), csv.n, csv.p, &raw));
    return Data(raw);
}

std::string dataset_csv(const bs_dataset* data, const std::vector<std::string>& names) {
    const std::size_t n = bs_dataset_n(data), p = bs_dataset_p(data);
    std::vector<double> x(n * p), y(n);
    check(bs_dataset_copy_x(data, x.data()));
    check(bs_dataset_copy_y(data, y.data()));
    std::string text;
    text.reserve(n * p * 8);
    for (std::size_t j = 0; j < p; ++j) text += (j ? "," : "") + names[j];
    text += ",y\n";
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            if (j) text += ',';
            text += shortest(x[i * p + j]);
        }
        text += ',';
        text += shortest(y[i]);
        text += '\n';
    }
    return text;
}

std::vector<std::string> default_names(std::size_t p) {
    std::vector<std::string> names(p);
    for (std::size_t j = 0; j < p; ++j) names[j] = "x" + std::to_string(j + 1);
    return names;
}

// ------------------------------------------------------------------ commands

struct Common {
    std::string out;
    std::uint64_t seed = 20100101;
};

int run_gen(const std::string& model_path, const std::string& preset, int p, double rho, const std::string& link,
            int n, bool binomial_flag, const Common& c, std::ostream& out, std::ostream& err) {
    if (model_path.empty() == preset.empty()) throw std::runtime_error("gen needs exactly one of --model or --preset");
    bool binomial = binomial_flag;
    ModelSpec spec;
    if (!model_path.empty()) {
        spec = load_model(model_path);
    } else {
        bool preset_binomial = false;
        spec = preset_model(preset, p, rho, to_link(link), preset_binomial);
        binomial = binomial || preset_binomial;
    }
    if (n < 2) throw std::runtime_error("--n must be at least 2");
    const Model model = make_model(spec);
    Stopwatch clock;
    clock.start();
    bs_dataset* raw = nullptr;
    check(binomial ? bs_dataset_generate_binomial(model.get(), static_cast<std::size_t>(n), c.seed, &raw)
                   : bs_dataset_generate(model.get(), static_cast<std::size_t>(n), c.seed, &raw));
    const Data data(raw);
    clock.stop();
    emit(c.out, out, dataset_csv(data.get(), default_names(spec.gamma.size())));
    const nlohmann::json config{{"model", spec.source}, {"n", n}, {"seed", c.seed}, {"binomial", binomial}};
    err << manifest("gen", config, c.seed, clock.seconds()).dump() << '\n';
    return kSuccess;
}

int run_screen(const std::string& method_text, const std::string& input, const std::string& response, int d,
               bool standardize, const Common& c, std::ostream& out) {
    std::string lower = method_text;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
    bs_method method;
    if (lower == "less")
        method = BS_METHOD_LESS;
    else if (lower == "sisl")
        method = BS_METHOD_SISL;
    else if (lower == "sisp")
        method = BS_METHOD_SISP;
    else
        throw std::runtime_error("unknown method '" + method_text + "' (expected less, sisl or sisp)");
    if (d < 0) throw std::runtime_error("--d must be positive");

    const CsvData csv = read_csv(input, response);
    const Data data = make_dataset(csv);
    bs_screen_options options;
    bs_screen_options_default(&options);
    options.d = d;
    options.standardize = standardize ? 1 : 0;
    options.threads = env_threads();
    bs_report* raw = nullptr;
    check(bs_screen(data.get(), method, &options, &raw));
    const Report report(raw);

    const std::size_t p = bs_report_p(report.get()), k = bs_report_d(report.get());
    std::vector<double> stats(p);
    std::vector<int> rank(p), selected(k), flags(p);
    check(bs_report_stats(report.get(), stats.data()));
    check(bs_report_rank(report.get(), rank.data()));
    check(bs_report_selected(report.get(), selected.data()));
    check(bs_report_flags(report.get(), flags.data()));

    auto one_based = [](std::vector<int> v) {
        for (int& i : v) ++i;
        return v;
    };
    std::vector<std::string> selected_names, flag_names;
    for (int s : selected) selected_names.push_back(csv.names[static_cast<std::size_t>(s)]);
    for (int f : flags) flag_names.push_back(flag_label(f));

    const nlohmann::json config{{"command", "screen"}, {"method", method_label(method)}, {"input", input},
                                {"response", response},  {"d", d},                       {"standardize", standardize}};
    ordered j;
    j["method"] = method_label(method);
    j["n"] = csv.n;
    j["p"] = p;
    j["d"] = k;
    j["standardize"] = standardize;
    j["timing_seconds"] = bs_report_timing(report.get());
    j["names"] = csv.names;
    j["stats"] = stats;
    j["flags"] = flag_names;
    j["abs_rank"] = one_based(rank);
    j["selected"] = one_based(selected);
    j["selected_names"] = selected_names;
    j["manifest"] = manifest("screen", config, 0, bs_report_timing(report.get()));
    emit(c.out, out, j.dump(2) + "\n");
    return kSuccess;
}

std::vector<int> columns_from_report(const std::string& path, const CsvData& csv) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open screening report '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
        std::vector<int> cols;
        for (int index : j.at("selected").get<std::vector<int>>()) {
            if (index < 1 || static_cast<std::size_t>(index) > csv.p)
                throw std::runtime_error("report selects predictor " + std::to_string(index) + " but the input has " +
                                         std::to_string(csv.p));
            cols.push_back(index - 1);
        }
        if (j.contains("selected_names")) {
            const auto names = j["selected_names"].get<std::vector<std::string>>();
            for (std::size_t k = 0; k < cols.size() && k < names.size(); ++k)
                if (csv.names[static_cast<std::size_t>(cols[k])] != names[k])
                    throw std::runtime_error("report column " + std::to_string(cols[k] + 1) + " is '" + names[k] +
                                             "' but the input calls it '" +
                                             csv.names[static_cast<std::size_t>(cols[k])] + "'");
        }
        return cols;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("screening report '" + path + "': " + e.what());
    }
}

CsvData subset_rows(const CsvData& csv, const std::vector<std::size_t>& rows) {
    CsvData out;
    out.names = csv.names;
    out.p = csv.p;
    out.n = rows.size();
    for (std::size_t r : rows) {
        out.x.insert(out.x.end(), csv.x.begin() + static_cast<std::ptrdiff_t>(r * csv.p),
                     csv.x.begin() + static_cast<std::ptrdiff_t>((r + 1) * csv.p));
        out.y.push_back(csv.y[r]);
    }
    return out;
}

int run_fit(const std::string& input, const std::string& response, const std::string& link_text,
            const std::string& select, const std::string& columns, double holdout, const Common& c, std::ostream& out) {
    const bs_link link = to_link(link_text);
    const CsvData csv = read_csv(input, response);
    if (!select.empty() && !columns.empty()) throw std::runtime_error("use either --select or --columns, not both");
    std::vector<int> cols;
    if (!select.empty()) {
        cols = columns_from_report(select, csv);
    } else if (!columns.empty()) {
        if (const std::string msg = parse_indices(columns, csv.p, cols); !msg.empty())
            throw std::runtime_error("--columns: " + msg);
    } else {
        cols.resize(csv.p);
        std::iota(cols.begin(), cols.end(), 0);
    }
    if (!(holdout >= 0.0 && holdout < 1.0)) throw std::runtime_error("--holdout must lie in [0, 1)");

    std::vector<std::size_t> order(csv.n);
    std::iota(order.begin(), order.end(), 0);
    std::size_t n_test = 0;
    if (holdout > 0.0) {
        std::mt19937_64 rng(c.seed);
        std::shuffle(order.begin(), order.end(), rng);
        n_test = static_cast<std::size_t>(std::llround(holdout * static_cast<double>(csv.n)));
        if (n_test == 0 || n_test + 2 > csv.n) throw std::runtime_error("--holdout leaves an empty train or test set");
    }
    std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());

    const CsvData train_csv = holdout > 0.0 ? subset_rows(csv, train) : csv;
    const Data train_data = make_dataset(train_csv);
    Stopwatch clock;
    clock.start();
    bs_glm_fit* raw = nullptr;
    check(bs_glm_fit_create(train_data.get(), cols.data(), cols.size(), link, &raw));
    const Fit fit(raw);
    clock.stop();

    std::vector<double> coef(bs_glm_fit_size(fit.get()));
    check(bs_glm_fit_coefficients(fit.get(), coef.data()));
    double train_rate = 0.0;
    check(bs_glm_misclassification(fit.get(), train_data.get(), cols.data(), cols.size(), nullptr, 0, &train_rate));

    ordered j;
    j["link"] = link_name(link);
    j["n"] = train_csv.n;
    std::vector<int> one_based = cols;
    for (int& v : one_based) ++v;
    std::vector<std::string> names;
    for (int col : cols) names.push_back(csv.names[static_cast<std::size_t>(col)]);
    j["columns"] = one_based;
    j["names"] = names;
    j["coefficients"] = coef;
    j["converged"] = bs_glm_fit_converged(fit.get()) != 0;
    j["separation_detected"] = bs_glm_fit_separation(fit.get()) != 0;
    j["log_likelihood"] = bs_glm_fit_log_likelihood(fit.get());
    j["iterations"] = bs_glm_fit_iterations(fit.get());
    j["misclassification_rate"] = train_rate;
    j["misclassified"] = static_cast<long>(std::llround(train_rate * static_cast<double>(train_csv.n)));
    if (holdout > 0.0) {
        const Data test_data = make_dataset(subset_rows(csv, test));
        double test_rate = 0.0;
        check(bs_glm_misclassification(fit.get(), test_data.get(), cols.data(), cols.size(), nullptr, 0, &test_rate));
        j["holdout"] = {{"fraction", holdout}, {"n", test.size()}, {"misclassification_rate", test_rate}};
    }
    const nlohmann::json config{{"command", "fit"},   {"input", input},     {"response", response},
                                {"link", link_name(link)}, {"columns", one_based}, {"holdout", holdout},
                                {"seed", holdout > 0.0 ? c.seed : 0}};
    j["manifest"] = manifest("fit", config, holdout > 0.0 ? c.seed : 0, clock.seconds());
    emit(c.out, out, j.dump(2) + "\n");
    return kSuccess;
}

int run_asymptotics(const std::string& model_path, const std::string& preset, int p, double rho,
                    const std::string& link, const std::string& working_text, const std::string& subset_text,
                    const std::string& format, const Common& c, std::ostream& out, std::ostream& err) {
    if (model_path.empty() == preset.empty())
        throw std::runtime_error("asymptotics needs exactly one of --model or --preset");
    bool binomial = false;
    const ModelSpec spec = model_path.empty() ? preset_model(preset, p, rho, to_link(link), binomial) : load_model(model_path);
    if (binomial) throw std::runtime_error("population limits need normal predictors");
    const bs_link working = to_link(working_text);
    if (format != "json" && format != "csv") throw std::runtime_error("--format must be json or csv");
    const Model model = make_model(spec);
    const std::size_t np = spec.gamma.size();

    std::vector<int> subset;
    if (subset_text.empty()) {
        subset.resize(np);
        std::iota(subset.begin(), subset.end(), 0);
    } else if (const std::string msg = parse_indices(subset_text, np, subset); !msg.empty()) {
        throw std::runtime_error("--subset: " + msg);
    }

    Stopwatch clock;
    clock.start();
    bs_population* raw = nullptr;
    check(bs_population_compute(model.get(), working, subset.data(), subset.size(), &raw));
    const Population pop(raw);
    std::vector<double> beta_ls(subset.size()), beta_ml(subset.size());
    check(bs_population_beta_ls(pop.get(), beta_ls.data()));
    check(bs_population_beta_ml(pop.get(), beta_ml.data()));
    std::vector<double> curve_ls(np), curve_ml(np), contamination(np);
    check(bs_population_curve(model.get(), working, env_threads(), curve_ls.data(), curve_ml.data(),
                              contamination.data()));
    clock.stop();

    if (format == "csv") {
        std::string text = "index,gamma,contamination,beta_ls,beta_ml\n";
        for (std::size_t j = 0; j < np; ++j)
            text += std::to_string(j + 1) + ',' + shortest(spec.gamma[j]) + ',' + shortest(contamination[j]) + ',' +
                    shortest(curve_ls[j]) + ',' + shortest(curve_ml[j]) + '\n';
        emit(c.out, out, text);
    }
    std::vector<int> one_based = subset;
    for (int& v : one_based) ++v;
    const nlohmann::json config{{"command", "asymptotics"}, {"model", spec.source}, {"working_link", link_name(working)},
                                {"subset", one_based}};
    if (format == "json") {
        ordered j;
        j["model"] = spec.source;
        j["working_link"] = link_name(working);
        j["subset"] = one_based;
        j["c1"] = bs_population_c1(pop.get());
        j["c2"] = bs_population_c2(pop.get());
        j["beta_ls"] = beta_ls;
        j["beta0_ml"] = bs_population_beta0_ml(pop.get());
        j["beta_ml"] = beta_ml;
        j["curve"] = {{"contamination", contamination}, {"beta_ls", curve_ls}, {"beta_ml", curve_ml}};
        j["manifest"] = manifest("asymptotics", config, 0, clock.seconds());
        emit(c.out, out, j.dump(2) + "\n");
    } else {
        // CSV carries only the curve; the subset limits follow the manifest.
        ordered extra = manifest("asymptotics", config, 0, clock.seconds());
        extra["c1"] = bs_population_c1(pop.get());
        extra["c2"] = bs_population_c2(pop.get());
        extra["beta_ls"] = beta_ls;
        extra["beta0_ml"] = bs_population_beta0_ml(pop.get());
        extra["beta_ml"] = beta_ml;
        err << extra.dump() << '\n';
    }
    return kSuccess;
}

struct TableOptions {
    int replicates = 0;
    bool full_scale = false;
    std::vector<int> n_values;
    int p = 1000;
    double rho = 0.5;
    std::string binomial_link = "probit";
    std::string json;
};

int run_table(const std::string& command, const TableOptions& t, const Common& c, std::ostream& out,
              std::ostream& err) {
    bs_experiment_config cfg;
    bs_experiment_config_default(&cfg);
    cfg.replicates = t.replicates > 0 ? t.replicates : (t.full_scale ? 100 : 50);
    cfg.seed = c.seed;
    cfg.rho = t.rho;
    cfg.p = t.p;
    cfg.threads = env_threads();
    cfg.binomial_link = to_link(t.binomial_link);
    cfg.n_values = t.n_values.empty() ? nullptr : t.n_values.data();
    cfg.n_count = t.n_values.size();

    Stopwatch clock;
    clock.start();
    bs_experiment* raw = nullptr;
    if (command == "table1")
        check(bs_run_table1(&cfg, &raw));
    else if (command == "table2")
        check(bs_run_table2(&cfg, &raw));
    else
        check(bs_run_figure1(&cfg, &raw));
    const Experiment result(raw);
    clock.stop();

    emit(c.out, out, bs_experiment_csv(result.get()));
    nlohmann::json sidecar = nlohmann::json::parse(bs_experiment_json(result.get()));
    const ordered m = manifest(command, sidecar["config"], c.seed, clock.seconds());
    if (!t.json.empty()) {
        ordered j;
        j["manifest"] = m;
        for (auto it = sidecar.begin(); it != sidecar.end(); ++it) j[it.key()] = it.value();
        emit(t.json, out, j.dump(2) + "\n");
    } else {
        err << m.dump() << '\n';
    }
    return kSuccess;
}

}  // namespace

// ------------------------------------------------------------------ helpers

std::string shortest(double value) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc()) throw std::runtime_error("number formatting failed");
    return std::string(buf, ptr);
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (ch != '\r') {
            cell += ch;
        }
    }
    cells.push_back(cell);
    for (std::string& s : cells) {
        const auto first = s.find_first_not_of(" \t");
        const auto last = s.find_last_not_of(" \t");
        s = first == std::string::npos ? std::string() : s.substr(first, last - first + 1);
        if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    }
    return cells;
}

}  // namespace

CsvData read_csv(const std::string& path, const std::string& response) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file (a header row is required)");
    const std::vector<std::string> header = split_line(line);
    const auto it = std::find(header.begin(), header.end(), response);
    if (it == header.end()) throw std::runtime_error(path + ": no response column named '" + response + "' in header");
    const std::size_t ycol = static_cast<std::size_t>(it - header.begin());

    CsvData data;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (j != ycol) data.names.push_back(header[j].empty() ? "x" + std::to_string(data.names.size() + 1) : header[j]);
    data.p = data.names.size();

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()));
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const std::string& cell = cells[j];
            const std::string where = path + ":" + std::to_string(line_no) + ", column '" + header[j] + "'";
            if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan")
                throw std::runtime_error(where + ": missing value");
            double v = 0.0;
            const char* begin = cell.data();
            if (*begin == '+') ++begin;
            const auto [ptr, ec] = std::from_chars(begin, cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
                throw std::runtime_error(where + ": '" + cell + "' is not a finite number");
            if (j == ycol) {
                if (v != 0.0 && v != 1.0)
                    throw std::runtime_error(where + ": response must be 0 or 1, found '" + cell + "'");
                data.y.push_back(v);
            } else {
                data.x.push_back(v);
            }
        }
        ++data.n;
    }
    if (data.n < 2) throw std::runtime_error(path + ": need at least two data rows");
    if (data.p == 0) throw std::runtime_error(path + ": no predictor columns");
    return data;
}

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Variable screening for binary-response regression", "binscreen"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(bs_version()));

    Common common;
    auto add_out = [&](CLI::App* sub) { sub->add_option("--out", common.out, "Output file (default: stdout)"); };
    auto add_seed = [&](CLI::App* sub) {
        sub->add_option("--seed", common.seed, "Random seed")->capture_default_str();
    };

    // gen
    std::string model_path, preset, link = "probit";
    int p = 1000, n = 200;
    double rho = 0.5;
    bool binomial = false;
    CLI::App* gen = app.add_subcommand("gen", "Simulate a dataset and write it as CSV");
    gen->add_option("--model", model_path, "Model spec JSON {gamma0, gamma, link, cov{kind, rho|matrix}}");
    gen->add_option("--preset", preset, "sparse-ar1 | sparse-cs | sparse-binomial | bias-ar1 | bias-cs");
    gen->add_option("--p", p, "Predictors for sparse-* presets")->capture_default_str();
    gen->add_option("--rho", rho, "Correlation for presets")->capture_default_str();
    gen->add_option("--link", link, "True link for presets")->capture_default_str();
    gen->add_option("--n", n, "Rows")->capture_default_str();
    gen->add_flag("--binomial", binomial, "Correlated Binomial(2, q) predictors instead of normal");
    add_seed(gen);
    add_out(gen);

    // screen
    std::string method, input, response = "y";
    int d = 0;
    bool standardize = false;
    CLI::App* scr = app.add_subcommand("screen", "Rank predictors by a marginal screening statistic");
    scr->add_option("--method", method, "less | sisl | sisp")->required();
    scr->add_option("--input", input, "CSV with a header row")->required();
    scr->add_option("--response", response, "Response column")->capture_default_str();
    scr->add_option("--d", d, "Number to select (default floor(n / ln n))");
    scr->add_flag("--standardize", standardize, "Centre and scale columns first");
    add_out(scr);

    // fit
    std::string fit_link = "logit", select, columns;
    double holdout = 0.0;
    CLI::App* fit = app.add_subcommand("fit", "Fit a binary GLM and report its misclassification rate");
    fit->add_option("--input", input, "CSV with a header row")->required();
    fit->add_option("--response", response, "Response column")->capture_default_str();
    fit->add_option("--link", fit_link, "logit | probit")->capture_default_str();
    fit->add_option("--select", select, "Screening report JSON; fit its selected predictors");
    fit->add_option("--columns", columns, "Comma-separated 1-based predictor indices");
    fit->add_option("--holdout", holdout, "Fraction of rows held out for testing (default 0: training error)");
    add_seed(fit);
    add_out(fit);

    // asymptotics
    std::string working = "logit", subset, format = "json";
    CLI::App* asy = app.add_subcommand("asymptotics", "Population limits of the screening statistics");
    asy->add_option("--model", model_path, "Model spec JSON");
    asy->add_option("--preset", preset, "sparse-ar1 | sparse-cs | bias-ar1 | bias-cs");
    asy->add_option("--p", p, "Predictors for sparse-* presets")->capture_default_str();
    asy->add_option("--rho", rho, "Correlation for presets")->capture_default_str();
    asy->add_option("--link", link, "True link for presets")->capture_default_str();
    asy->add_option("--working-link", working, "Working link of the ML limit")->capture_default_str();
    asy->add_option("--subset", subset, "Comma-separated 1-based working-model predictors (default all)");
    asy->add_option("--format", format, "json | csv")->capture_default_str();
    add_out(asy);

    // experiments
    TableOptions table;
    auto add_table = [&](CLI::App* sub, bool with_p, bool with_binomial) {
        add_seed(sub);
        add_out(sub);
        sub->add_option("--replicates", table.replicates, "Replicates (default 50, or 100 with --full-scale)");
        sub->add_flag("--full-scale", table.full_scale, "Use 100 replicates");
        sub->add_option("--n", table.n_values, "Sample sizes")->delimiter(',');
        sub->add_option("--rho", table.rho, "Correlation")->capture_default_str();
        sub->add_option("--json", table.json, "Per-replicate JSON sidecar");
        if (with_p) sub->add_option("--p", table.p, "Predictors")->capture_default_str();
        if (with_binomial)
            sub->add_option("--binomial-link", table.binomial_link, "True link of the binomial scenario")
                ->capture_default_str();
    };
    CLI::App* t1 = app.add_subcommand("table1", "Bias of the adjusted least-squares estimates");
    add_table(t1, false, false);
    CLI::App* t2 = app.add_subcommand("table2", "Rates of selecting every active predictor");
    add_table(t2, true, true);
    CLI::App* f1 = app.add_subcommand("figure1", "Averaged screening statistics and population curves");
    add_table(f1, false, false);

    std::vector<std::string> args;
    for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForVersion&) {
        out << bs_version() << '\n';
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kUserError;
    }

    try {
        if (gen->parsed()) return run_gen(model_path, preset, p, rho, link, n, binomial, common, out, err);
        if (scr->parsed()) return run_screen(method, input, response, d, standardize, common, out);
        if (fit->parsed()) return run_fit(input, response, fit_link, select, columns, holdout, common, out);
        if (asy->parsed())
            return run_asymptotics(model_path, preset, p, rho, link, working, subset, format, common, out, err);
        if (t1->parsed()) return run_table("table1", table, common, out, err);
        if (t2->parsed()) return run_table("table2", table, common, out, err);
        if (f1->parsed()) return run_table("figure1", table, common, out, err);
    } catch (const ApiError& e) {
        err << "error: " << e.what() << '\n';
        return e.status() == BS_ERR_INVARIANT || e.status() == BS_ERR_INTERNAL ? kInternalError : kUserError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUserError;
    }
    return kUserError;
}

}  // namespace binscreen::cli
