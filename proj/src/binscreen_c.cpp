#include "binscreen/binscreen.h"

#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "binscreen/asymptotics.hpp"
#include "binscreen/datagen.hpp"
#include "binscreen/error.hpp"
#include "binscreen/experiments.hpp"
#include "binscreen/glm.hpp"
#include "binscreen/links.hpp"
#include "binscreen/rng.hpp"
#include "binscreen/screening.hpp"

#ifndef BINSCREEN_VERSION
#define BINSCREEN_VERSION "0.0.0"
#endif

using namespace binscreen;

struct bs_model {
    TrueModel model;
};
struct bs_dataset {
    Dataset data;
};
struct bs_report {
    ScreeningReport report;
};
struct bs_glm_fit {
    GlmFit fit;
};
struct bs_population {
    PopulationCoefficients coef;
};
struct bs_experiment {
    std::string csv;
    std::string json;
};

namespace {

thread_local std::string last_error;

template <class F>
bs_status guarded(F&& body) noexcept {
    try {
        body();
        last_error.clear();
        return BS_OK;
    } catch (const InvariantViolation& e) {
        last_error = e.what();
        return BS_ERR_INVARIANT;
    } catch (const DomainError& e) {
        last_error = e.what();
        return BS_ERR_DOMAIN;
    } catch (const SingularMatrix& e) {
        last_error = e.what();
        return BS_ERR_SINGULAR;
    } catch (const ConvergenceError& e) {
        last_error = e.what();
        return BS_ERR_NO_CONVERGENCE;
    } catch (const InvalidArgument& e) {
        last_error = e.what();
        return BS_ERR_INVALID_ARGUMENT;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return BS_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return BS_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return BS_ERR_INTERNAL;
    }
}

void require(bool condition, const char* what) {
    if (!condition) throw InvalidArgument(what);
}

LinkKind to_kind(bs_link link) {
    switch (link) {
        case BS_LINK_PROBIT: return LinkKind::Probit;
        case BS_LINK_LOGIT: return LinkKind::Logit;
    }
    throw InvalidArgument("unknown link code");
}

ScreeningMethod to_method(bs_method method) {
    switch (method) {
        case BS_METHOD_LESS: return ScreeningMethod::LeSS;
        case BS_METHOD_SISL: return ScreeningMethod::SISL;
        case BS_METHOD_SISP: return ScreeningMethod::SISP;
    }
    throw InvalidArgument("unknown screening method code");
}

int nodes_or_default(int nodes) { return nodes > 0 ? nodes : 128; }

std::vector<int> index_list(const int* indices, size_t count, size_t p) {
    std::vector<int> out;
    if (indices == nullptr) {
        out.resize(p);
        for (size_t j = 0; j < p; ++j) out[j] = static_cast<int>(j);
        return out;
    }
    out.assign(indices, indices + count);
    for (int j : out)
        if (j < 0 || static_cast<size_t>(j) >= p) throw InvalidArgument("predictor index " + std::to_string(j) + " out of range");
    return out;
}

ExperimentConfig to_config(const bs_experiment_config* c, Scenario scenario) {
    bs_experiment_config defaults;
    bs_experiment_config_default(&defaults);
    if (c == nullptr) c = &defaults;
    ExperimentConfig cfg;
    cfg.scenario = scenario;
    cfg.replicates = c->replicates;
    if (c->n_values != nullptr) cfg.n_values.assign(c->n_values, c->n_values + c->n_count);
    cfg.seed = c->seed;
    cfg.rho = c->rho;
    cfg.p = c->p;
    cfg.threads = c->threads;
    cfg.quadrature_nodes = nodes_or_default(c->quadrature_nodes);
    cfg.binomial_link = to_kind(c->binomial_link);
    return cfg;
}

}  // namespace

extern "C" {

const char* bs_version(void) { return BINSCREEN_VERSION; }

const char* bs_last_error(void) { return last_error.c_str(); }

const char* bs_status_string(bs_status status) {
    switch (status) {
        case BS_OK: return "ok";
        case BS_ERR_INVALID_ARGUMENT: return "invalid argument";
        case BS_ERR_DOMAIN: return "domain error";
        case BS_ERR_SINGULAR: return "singular matrix";
        case BS_ERR_NO_CONVERGENCE: return "no convergence";
        case BS_ERR_INVARIANT: return "invariant violation";
        case BS_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

bs_status bs_link_cdf(bs_link link, double t, double* out) {
    return guarded([&] {
        require(out != nullptr, "null output pointer");
        *out = link_cdf(LinkFamily(to_kind(link), 1), t);
    });
}

bs_status bs_mixture_integral(bs_link link, int nodes, double beta0, double v, double* out) {
    return guarded([&] {
        require(out != nullptr, "null output pointer");
        *out = mixture_integral(LinkFamily(to_kind(link), nodes_or_default(nodes)), beta0, v);
    });
}

bs_status bs_population_mean(bs_link link, int nodes, double beta0, double v, double* out) {
    return guarded([&] {
        require(out != nullptr, "null output pointer");
        *out = population_mean(LinkFamily(to_kind(link), nodes_or_default(nodes)), beta0, v);
    });
}

bs_status bs_selection_size(int n, int* out) {
    return guarded([&] {
        require(out != nullptr, "null output pointer");
        *out = selection_size(n);
    });
}

bs_status bs_model_create(double gamma0, const double* gamma, size_t p, bs_link link, bs_cov_kind kind, double rho,
                          const double* dense, bs_model** out) {
    return guarded([&] {
        require(out != nullptr && gamma != nullptr && p > 0, "bs_model_create: bad arguments");
        *out = nullptr;
        Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(gamma, static_cast<Eigen::Index>(p));
        std::optional<CovarianceSpec> cov;
        switch (kind) {
            case BS_COV_AR1: cov = CovarianceSpec::ar1(rho); break;
            case BS_COV_CS: cov = CovarianceSpec::cs(rho); break;
            case BS_COV_DENSE: {
                require(dense != nullptr, "bs_model_create: dense covariance requires a matrix");
                using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
                Eigen::MatrixXd m = Eigen::Map<const RowMajor>(dense, static_cast<Eigen::Index>(p),
                                                               static_cast<Eigen::Index>(p));
                cov = CovarianceSpec::dense(std::move(m));
                break;
            }
            default: throw InvalidArgument("unknown covariance kind");
        }
        *out = new bs_model{TrueModel(gamma0, std::move(g), LinkFamily(to_kind(link)), *cov)};
    });
}

void bs_model_destroy(bs_model* model) { delete model; }

size_t bs_model_p(const bs_model* model) { return model ? static_cast<size_t>(model->model.p()) : 0; }

bs_status bs_dataset_create(const double* x, const double* y, size_t n, size_t p, bs_dataset** out) {
    return guarded([&] {
        require(out != nullptr && x != nullptr && y != nullptr, "bs_dataset_create: null pointer");
        *out = nullptr;
        using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        Dataset data;
        data.X = Eigen::Map<const RowMajor>(x, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
        data.y = Eigen::Map<const Eigen::VectorXd>(y, static_cast<Eigen::Index>(n));
        data.validate();
        *out = new bs_dataset{std::move(data)};
    });
}

bs_status bs_dataset_generate(const bs_model* model, size_t n, uint64_t seed, bs_dataset** out) {
    return guarded([&] {
        require(out != nullptr && model != nullptr, "bs_dataset_generate: null pointer");
        *out = nullptr;
        *out = new bs_dataset{generate_dataset(model->model, static_cast<int>(n), seed)};
    });
}

bs_status bs_dataset_generate_binomial(const bs_model* model, size_t n, uint64_t seed, bs_dataset** out) {
    return guarded([&] {
        require(out != nullptr && model != nullptr, "bs_dataset_generate_binomial: null pointer");
        *out = nullptr;
        Dataset data;
        data.X = sample_correlated_binomial(model->model.p(), static_cast<int>(n), seed).X;
        data.y = gen_response(data.X, model->model, mix64(seed));
        *out = new bs_dataset{std::move(data)};
    });
}

void bs_dataset_destroy(bs_dataset* data) { delete data; }

size_t bs_dataset_n(const bs_dataset* data) { return data ? static_cast<size_t>(data->data.n()) : 0; }

size_t bs_dataset_p(const bs_dataset* data) { return data ? static_cast<size_t>(data->data.p()) : 0; }

bs_status bs_dataset_copy_x(const bs_dataset* data, double* out) {
    return guarded([&] {
        require(data != nullptr && out != nullptr, "null pointer");
        using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        Eigen::Map<RowMajor>(out, data->data.X.rows(), data->data.X.cols()) = data->data.X;
    });
}

bs_status bs_dataset_copy_y(const bs_dataset* data, double* out) {
    return guarded([&] {
        require(data != nullptr && out != nullptr, "null pointer");
        Eigen::Map<Eigen::VectorXd>(out, data->data.y.size()) = data->data.y;
    });
}

void bs_screen_options_default(bs_screen_options* options) {
    if (options == nullptr) return;
    options->d = 0;
    options->standardize = 0;
    options->threads = 0;
    options->quadrature_nodes = 128;
}

bs_status bs_screen(const bs_dataset* data, bs_method method, const bs_screen_options* options, bs_report** out) {
    return guarded([&] {
        require(data != nullptr && out != nullptr, "bs_screen: null pointer");
        *out = nullptr;
        ScreeningOptions opts;
        if (options != nullptr) {
            require(options->d >= 0, "bs_screen: d must be >= 0");
            opts.d = options->d;
            opts.standardize = options->standardize != 0;
            opts.threads = options->threads;
            opts.quadrature_nodes = nodes_or_default(options->quadrature_nodes);
        }
        *out = new bs_report{screen(data->data, to_method(method), opts)};
    });
}

void bs_report_destroy(bs_report* report) { delete report; }

bs_method bs_report_method(const bs_report* report) {
    switch (report->report.method) {
        case ScreeningMethod::LeSS: return BS_METHOD_LESS;
        case ScreeningMethod::SISL: return BS_METHOD_SISL;
        case ScreeningMethod::SISP: return BS_METHOD_SISP;
    }
    return BS_METHOD_LESS;
}

size_t bs_report_p(const bs_report* report) { return report ? report->report.stats.size() : 0; }

size_t bs_report_d(const bs_report* report) { return report ? report->report.selected.size() : 0; }

double bs_report_timing(const bs_report* report) { return report ? report->report.timing_seconds : 0.0; }

bs_status bs_report_stats(const bs_report* report, double* out) {
    return guarded([&] {
        require(report != nullptr && out != nullptr, "null pointer");
        std::copy(report->report.stats.begin(), report->report.stats.end(), out);
    });
}

bs_status bs_report_rank(const bs_report* report, int* out) {
    return guarded([&] {
        require(report != nullptr && out != nullptr, "null pointer");
        std::copy(report->report.abs_rank.begin(), report->report.abs_rank.end(), out);
    });
}

bs_status bs_report_selected(const bs_report* report, int* out) {
    return guarded([&] {
        require(report != nullptr && out != nullptr, "null pointer");
        std::copy(report->report.selected.begin(), report->report.selected.end(), out);
    });
}

bs_status bs_report_flags(const bs_report* report, int* out) {
    return guarded([&] {
        require(report != nullptr && out != nullptr, "null pointer");
        for (size_t j = 0; j < report->report.flags.size(); ++j) out[j] = static_cast<int>(report->report.flags[j]);
    });
}

bs_status bs_glm_fit_create(const bs_dataset* data, const int* columns, size_t ncolumns, bs_link link,
                            bs_glm_fit** out) {
    return guarded([&] {
        require(data != nullptr && out != nullptr, "bs_glm_fit_create: null pointer");
        *out = nullptr;
        const std::vector<int> cols = index_list(columns, ncolumns, static_cast<size_t>(data->data.p()));
        const Eigen::MatrixXd X = select_columns(data->data.X, cols);
        *out = new bs_glm_fit{fit(X, data->data.y, LinkFamily(to_kind(link)))};
    });
}

void bs_glm_fit_destroy(bs_glm_fit* f) { delete f; }

size_t bs_glm_fit_size(const bs_glm_fit* f) { return f ? static_cast<size_t>(f->fit.coefficients.size()) : 0; }

bs_status bs_glm_fit_coefficients(const bs_glm_fit* f, double* out) {
    return guarded([&] {
        require(f != nullptr && out != nullptr, "null pointer");
        Eigen::Map<Eigen::VectorXd>(out, f->fit.coefficients.size()) = f->fit.coefficients;
    });
}

int bs_glm_fit_converged(const bs_glm_fit* f) { return f && f->fit.converged ? 1 : 0; }

int bs_glm_fit_separation(const bs_glm_fit* f) { return f && f->fit.separation_detected ? 1 : 0; }

double bs_glm_fit_log_likelihood(const bs_glm_fit* f) { return f ? f->fit.log_likelihood : 0.0; }

int bs_glm_fit_iterations(const bs_glm_fit* f) { return f ? f->fit.iterations : 0; }

bs_status bs_glm_misclassification(const bs_glm_fit* f, const bs_dataset* data, const int* columns, size_t ncolumns,
                                   const size_t* rows, size_t nrows, double* out) {
    return guarded([&] {
        require(f != nullptr && data != nullptr && out != nullptr, "bs_glm_misclassification: null pointer");
        const std::vector<int> cols = index_list(columns, ncolumns, static_cast<size_t>(data->data.p()));
        Eigen::MatrixXd X = select_columns(data->data.X, cols);
        Eigen::VectorXd y = data->data.y;
        if (rows != nullptr) {
            require(nrows > 0, "bs_glm_misclassification: empty row set");
            Eigen::MatrixXd Xr(static_cast<Eigen::Index>(nrows), X.cols());
            Eigen::VectorXd yr(static_cast<Eigen::Index>(nrows));
            for (size_t k = 0; k < nrows; ++k) {
                require(rows[k] < static_cast<size_t>(X.rows()), "bs_glm_misclassification: row out of range");
                Xr.row(static_cast<Eigen::Index>(k)) = X.row(static_cast<Eigen::Index>(rows[k]));
                yr[static_cast<Eigen::Index>(k)] = y[static_cast<Eigen::Index>(rows[k])];
            }
            X = std::move(Xr);
            y = std::move(yr);
        }
        *out = misclassification_rate(f->fit, X, y);
    });
}

bs_status bs_contamination(const bs_model* model, size_t j, double* out) {
    return guarded([&] {
        require(model != nullptr && out != nullptr, "null pointer");
        *out = contamination(model->model, static_cast<int>(j));
    });
}

bs_status bs_population_compute(const bs_model* model, bs_link working_link, const int* subset, size_t k,
                                bs_population** out) {
    return guarded([&] {
        require(model != nullptr && out != nullptr, "bs_population_compute: null pointer");
        *out = nullptr;
        const std::vector<int> s = index_list(subset, k, static_cast<size_t>(model->model.p()));
        *out = new bs_population{population_coefficients(model->model, LinkFamily(to_kind(working_link)), s)};
    });
}

void bs_population_destroy(bs_population* pop) { delete pop; }

size_t bs_population_size(const bs_population* pop) { return pop ? pop->coef.subset.size() : 0; }

double bs_population_c1(const bs_population* pop) { return pop ? pop->coef.c1 : 0.0; }

double bs_population_c2(const bs_population* pop) { return pop ? pop->coef.c2 : 0.0; }

double bs_population_beta0_ml(const bs_population* pop) { return pop ? pop->coef.beta0_ml : 0.0; }

bs_status bs_population_beta_ls(const bs_population* pop, double* out) {
    return guarded([&] {
        require(pop != nullptr && out != nullptr, "null pointer");
        Eigen::Map<Eigen::VectorXd>(out, pop->coef.beta_ls.size()) = pop->coef.beta_ls;
    });
}

bs_status bs_population_beta_ml(const bs_population* pop, double* out) {
    return guarded([&] {
        require(pop != nullptr && out != nullptr, "null pointer");
        Eigen::Map<Eigen::VectorXd>(out, pop->coef.beta_ml.size()) = pop->coef.beta_ml;
    });
}

bs_status bs_population_curve(const bs_model* model, bs_link working_link, int threads, double* beta_ls,
                              double* beta_ml, double* contamination_out) {
    return guarded([&] {
        require(model != nullptr, "bs_population_curve: null model");
        const PopulationCurve curve = population_curve(model->model, LinkFamily(to_kind(working_link)), threads);
        if (beta_ls) std::copy(curve.beta_ls.begin(), curve.beta_ls.end(), beta_ls);
        if (beta_ml) std::copy(curve.beta_ml.begin(), curve.beta_ml.end(), beta_ml);
        if (contamination_out) std::copy(curve.contamination.begin(), curve.contamination.end(), contamination_out);
    });
}

void bs_experiment_config_default(bs_experiment_config* config) {
    if (config == nullptr) return;
    const ExperimentConfig cfg;
    config->replicates = cfg.replicates;
    config->n_values = nullptr;
    config->n_count = 0;
    config->seed = cfg.seed;
    config->rho = cfg.rho;
    config->p = cfg.p;
    config->threads = cfg.threads;
    config->quadrature_nodes = cfg.quadrature_nodes;
    config->binomial_link = BS_LINK_PROBIT;
}

bs_status bs_run_table1(const bs_experiment_config* config, bs_experiment** out) {
    return guarded([&] {
        require(out != nullptr, "null output pointer");
        *out = nullptr;
        const ExperimentConfig cfg = to_config(config, Scenario::Table1);
        const Table1Result result = run_table1(cfg);
        nlohmann::json sidecar = to_json(result);
        sidecar["config"] = cfg.to_json();
        *out = new bs_experiment{to_csv(result), sidecar.dump(2)};
    });
}

bs_status bs_run_table2(const bs_experiment_config* config, bs_experiment** out) {
    return guarded([&] {
        require(out != nullptr, "null output pointer");
        *out = nullptr;
        const ExperimentConfig cfg = to_config(config, Scenario::Table2);
        const Table2Result result = run_table2(cfg);
        nlohmann::json sidecar = to_json(result);
        sidecar["config"] = cfg.to_json();
        *out = new bs_experiment{to_csv(result), sidecar.dump(2)};
    });
}

bs_status bs_run_figure1(const bs_experiment_config* config, bs_experiment** out) {
    return guarded([&] {
        require(out != nullptr, "null output pointer");
        *out = nullptr;
        const ExperimentConfig cfg = to_config(config, Scenario::Figure1);
        const Figure1Result result = run_figure1(cfg);
        nlohmann::json sidecar = to_json(result);
        sidecar["config"] = cfg.to_json();
        *out = new bs_experiment{to_csv(result), sidecar.dump(2)};
    });
}

void bs_experiment_destroy(bs_experiment* experiment) { delete experiment; }

const char* bs_experiment_csv(const bs_experiment* experiment) { return experiment ? experiment->csv.c_str() : ""; }

const char* bs_experiment_json(const bs_experiment* experiment) {
    return experiment ? experiment->json.c_str() : "";
}

}  // extern "C"
