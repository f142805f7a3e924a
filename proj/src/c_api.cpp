#include "precis/precis.h"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "precis/bench.hpp"
#include "precis/error.hpp"
#include "precis/estimator.hpp"
#include "precis/io.hpp"
#include "precis/model.hpp"
#include "precis/selection.hpp"

using namespace precis;

struct precis_plant {
    PlantWithSensors pw;
};

struct precis_options {
    Framework framework = Framework::Hinf;
    EstimatorKind kind = EstimatorKind::Observer;
    std::optional<double> gamma;
    Vector rho;
    std::map<std::string, double> admm;  // explicit overrides only
    std::optional<admm::XUpdateMode> mode;
    int jobs = 1;
    selection::RlmOptions rlm;
    std::size_t budget = selection::kDefaultBudget;
};

struct precis_result {
    io::ResultFile file;
};

struct precis_selection {
    selection::SelectionResult result;
    PlantWithSensors pw;
};

namespace {

thread_local std::string last_error;

precis_status code_of(ErrorCode c) {
    switch (c) {
        case ErrorCode::InvalidArgument: return PRECIS_E_INVALID_ARGUMENT;
        case ErrorCode::Dimension: return PRECIS_E_DIMENSION;
        case ErrorCode::EmptySubset: return PRECIS_E_EMPTY_SUBSET;
        case ErrorCode::InvalidSensor: return PRECIS_E_INVALID_SENSOR;
        case ErrorCode::Symmetry: return PRECIS_E_SYMMETRY;
        case ErrorCode::Unstable: return PRECIS_E_UNSTABLE;
        case ErrorCode::Assignment: return PRECIS_E_ASSIGNMENT;
        case ErrorCode::Program: return PRECIS_E_PROGRAM;
        case ErrorCode::InfeasibleDesign: return PRECIS_E_INFEASIBLE;
        case ErrorCode::Recovery: return PRECIS_E_RECOVERY;
        case ErrorCode::Budget: return PRECIS_E_BUDGET;
        case ErrorCode::Parse: return PRECIS_E_PARSE;
        case ErrorCode::Io: return PRECIS_E_IO;
    }
    return PRECIS_E_INTERNAL;
}

// Runs fn, translating exceptions into status codes and the thread's message.
template <class Fn>
precis_status guard(Fn&& fn) {
    try {
        last_error.clear();
        fn();
        return PRECIS_OK;
    } catch (const Error& e) {
        last_error = e.what();
        return code_of(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return PRECIS_E_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return PRECIS_E_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return PRECIS_E_INTERNAL;
    }
}

template <class T>
void require(const T* p, const char* what) {
    if (p == nullptr) {
        fail(ErrorCode::InvalidArgument, std::string(what) + " is NULL");
    }
}

admm::AdmmConfig apply(admm::AdmmConfig cfg, const precis_options* o) {
    if (o == nullptr) {
        return cfg;
    }
    for (const auto& [key, v] : o->admm) {
        if (key == "mu") {
            cfg.mu = v;
        } else if (key == "eps_abs") {
            cfg.eps_abs = v;
        } else if (key == "eps_rel") {
            cfg.eps_rel = v;
        } else if (key == "max_iter") {
            cfg.max_iter = static_cast<int>(v);
        } else if (key == "eps_p") {
            cfg.eps_p = v;
        } else if (key == "eps_h") {
            cfg.eps_h = v;
        } else if (key == "margin_factor") {
            cfg.margin_factor = v;
        } else if (key == "inner_mu") {
            cfg.inner_mu = v;
        } else if (key == "inner_max_iter") {
            cfg.inner_max_iter = static_cast<int>(v);
        } else if (key == "inner_tol") {
            cfg.inner_tol = v;
        }
    }
    if (o->mode) {
        cfg.mode = *o->mode;
    }
    cfg.validate();
    return cfg;
}

SensorSubset subset_of(const int* ids, int n, Index catalog_size) {
    if (n < 0 || (n > 0 && ids == nullptr)) {
        fail(ErrorCode::InvalidArgument, "subset: bad buffer");
    }
    if (n == 0) {
        return SensorSubset::all(catalog_size);
    }
    std::vector<int> v(ids, ids + n);
    for (int id : v) {
        if (id < 0 || id >= catalog_size) {
            fail(ErrorCode::InvalidSensor, "subset: sensor id " + std::to_string(id) + " is outside the catalog");
        }
    }
    return SensorSubset(std::move(v));
}

template <class T, class Src>
precis_status copy_out(const Src& src, T* buf, int capacity, int* n) {
    return guard([&] {
        require(n, "n");
        *n = static_cast<int>(src.size());
        if (capacity < *n) {
            fail(ErrorCode::InvalidArgument, "buffer holds " + std::to_string(capacity) + " entries, " +
                                                 std::to_string(*n) + " needed");
        }
        if (*n > 0) {
            require(buf, "buffer");
        }
        for (int i = 0; i < *n; ++i) {
            buf[i] = static_cast<T>(src[static_cast<std::size_t>(i)]);
        }
    });
}

precis_status buffer_status(precis_status s, int capacity, const int* n) {
    if (s == PRECIS_E_INVALID_ARGUMENT && n != nullptr && capacity < *n) {
        return PRECIS_E_BUFFER_TOO_SMALL;
    }
    return s;
}

precis_status new_plant(PlantWithSensors pw, precis_plant** out) {
    *out = new precis_plant{std::move(pw)};
    return PRECIS_OK;
}

estimator::ErrorSystem error_system_of(const io::ResultFile& f) {
    const auto& r = f.result;
    const MeasurementModel meas = assemble_measurement(f.plant.plant, f.plant.catalog, r.spec.subset);
    return estimator::error_system(f.plant.plant, meas, r.matrices, r.p);
}

std::ofstream open_out(const char* path) {
    std::ofstream os(path);
    if (!os) {
        fail(ErrorCode::Io, std::string("cannot write ") + path);
    }
    return os;
}

void fill(precis_algorithm_summary& dst, const bench::AlgorithmSummary& s) {
    dst.exact = s.exact;
    dst.infeasible = s.infeasible;
    dst.feasible_with_reference = s.feasible_with_reference;
    dst.mean_pct_error = s.mean_pct_error;
    dst.sd_pct_error = s.sd_pct_error;
    dst.mean_evaluations = s.mean_evaluations;
}

}  // namespace

extern "C" {

const char* precis_version(void) { return "1.0.0"; }

const char* precis_status_string(precis_status status) {
    switch (status) {
        case PRECIS_OK: return "ok";
        case PRECIS_E_BUFFER_TOO_SMALL: return "buffer too small";
        case PRECIS_E_INTERNAL: return "internal error";
        default: break;
    }
    if (status >= PRECIS_E_INVALID_ARGUMENT && status <= PRECIS_E_IO) {
        return to_string(static_cast<ErrorCode>(status));
    }
    return "unknown status";
}

const char* precis_last_error(void) { return last_error.c_str(); }

// ---- plants

precis_status precis_plant_example1(precis_plant** out) {
    return guard([&] {
        require(out, "out");
        *out = nullptr;
        new_plant(example1_plant(), out);
    });
}

precis_status precis_plant_spring_mass(int masses, precis_plant** out) {
    return guard([&] {
        require(out, "out");
        *out = nullptr;
        new_plant(spring_mass_plant(masses), out);
    });
}

precis_status precis_plant_random(uint64_t seed, int nx, int nd, int ns, precis_plant** out) {
    return guard([&] {
        require(out, "out");
        *out = nullptr;
        new_plant(random_plant(seed, nx, nd, ns), out);
    });
}

precis_status precis_plant_load(const char* path, precis_plant** out) {
    return guard([&] {
        require(out, "out");
        require(path, "path");
        *out = nullptr;
        new_plant(io::load_plant(path), out);
    });
}

precis_status precis_plant_parse(const char* text, precis_plant** out) {
    return guard([&] {
        require(out, "out");
        require(text, "text");
        *out = nullptr;
        std::istringstream is(text);
        new_plant(io::read_plant(is), out);
    });
}

precis_status precis_plant_save(const precis_plant* plant, const char* path) {
    return guard([&] {
        require(plant, "plant");
        require(path, "path");
        auto os = open_out(path);
        io::write_plant(os, plant->pw);
    });
}

void precis_plant_free(precis_plant* plant) { delete plant; }

precis_status precis_plant_dims(const precis_plant* plant, int* nx, int* nd, int* nz, int* ns) {
    return guard([&] {
        require(plant, "plant");
        const auto& p = plant->pw.plant;
        if (nx) *nx = static_cast<int>(p.nx());
        if (nd) *nd = static_cast<int>(p.nd());
        if (nz) *nz = static_cast<int>(p.nz());
        if (ns) *ns = static_cast<int>(plant->pw.catalog.size());
    });
}

precis_status precis_plant_set_weights(precis_plant* plant, const double* weights, int n) {
    return guard([&] {
        require(plant, "plant");
        require(weights, "weights");
        if (n != plant->pw.catalog.size()) {
            fail(ErrorCode::Dimension, "weights: expected " + std::to_string(plant->pw.catalog.size()) + " values");
        }
        plant->pw.catalog.set_weights(Eigen::Map<const Vector>(weights, n));
    });
}

// ---- options

precis_status precis_options_create(precis_options** out) {
    return guard([&] {
        require(out, "out");
        *out = new precis_options;
    });
}

void precis_options_free(precis_options* options) { delete options; }

precis_status precis_options_set_framework(precis_options* options, const char* name) {
    return guard([&] {
        require(options, "options");
        require(name, "name");
        options->framework = parse_framework(name);
    });
}

precis_status precis_options_set_estimator(precis_options* options, const char* name) {
    return guard([&] {
        require(options, "options");
        require(name, "name");
        options->kind = parse_estimator(name);
    });
}

precis_status precis_options_set_gamma(precis_options* options, double gamma) {
    return guard([&] {
        require(options, "options");
        if (!(gamma > 0.0) || !std::isfinite(gamma)) {
            fail(ErrorCode::InvalidArgument, "gamma must be positive and finite");
        }
        options->gamma = gamma;
    });
}

precis_status precis_options_set_rho(precis_options* options, const double* rho, int n) {
    return guard([&] {
        require(options, "options");
        if (n < 0 || (n > 0 && rho == nullptr)) {
            fail(ErrorCode::InvalidArgument, "rho: bad buffer");
        }
        options->rho = Eigen::Map<const Vector>(rho, n);
        if ((options->rho.array() <= 0.0).any()) {
            options->rho.resize(0);
            fail(ErrorCode::InvalidArgument, "rho: weights must be positive");
        }
    });
}

precis_status precis_options_set_admm(precis_options* options, const char* key, double value) {
    return guard([&] {
        require(options, "options");
        require(key, "key");
        static const char* known[] = {"mu",    "eps_abs",       "eps_rel",  "max_iter",       "eps_p",
                                      "eps_h", "margin_factor", "inner_mu", "inner_max_iter", "inner_tol"};
        bool ok = false;
        for (const char* k : known) {
            ok = ok || std::string(k) == key;
        }
        if (!ok) {
            fail(ErrorCode::InvalidArgument, std::string("unknown solver setting '") + key + "'");
        }
        auto trial = options->admm;
        trial[key] = value;
        precis_options probe = *options;
        probe.admm = trial;
        apply({}, &probe);
        options->admm = std::move(trial);
    });
}

precis_status precis_options_set_admm_mode(precis_options* options, const char* mode) {
    return guard([&] {
        require(options, "options");
        require(mode, "mode");
        options->mode = admm::parse_mode(mode);
    });
}

precis_status precis_options_set_jobs(precis_options* options, int jobs) {
    return guard([&] {
        require(options, "options");
        if (jobs < 1) {
            fail(ErrorCode::InvalidArgument, "jobs must be at least 1");
        }
        options->jobs = jobs;
    });
}

precis_status precis_options_set_rlm(precis_options* options, int i_max, double eps) {
    return guard([&] {
        require(options, "options");
        if (i_max < 1) {
            fail(ErrorCode::InvalidArgument, "rlm: i_max must be at least 1");
        }
        options->rlm.i_max = i_max;
        options->rlm.eps = eps;
    });
}

precis_status precis_options_set_budget(precis_options* options, uint64_t budget) {
    return guard([&] {
        require(options, "options");
        options->budget = static_cast<std::size_t>(budget);
    });
}

// ---- design

precis_status precis_design(const precis_plant* plant, const precis_options* options, const int* subset, int n,
                            const char* trace_csv, precis_result** out) {
    return guard([&] {
        require(out, "out");
        *out = nullptr;
        require(plant, "plant");
        require(options, "options");
        if (!options->gamma) {
            fail(ErrorCode::InvalidArgument, "gamma is not set");
        }
        estimator::DesignSpec spec;
        spec.framework = options->framework;
        spec.kind = options->kind;
        spec.gamma = *options->gamma;
        spec.rho = options->rho;
        spec.subset = subset_of(subset, n, plant->pw.catalog.size());
        const auto cfg = apply({}, options);
        std::vector<admm::TraceRow> trace;
        std::optional<estimator::EstimatorResult> r;
        try {
            r = estimator::design(plant->pw.plant, plant->pw.catalog, spec, cfg, trace_csv ? &trace : nullptr);
        } catch (...) {
            if (trace_csv) {
                auto os = open_out(trace_csv);
                admm::write_trace_csv(os, trace);
            }
            throw;
        }
        if (trace_csv) {
            auto os = open_out(trace_csv);
            admm::write_trace_csv(os, trace);
        }
        *out = new precis_result{io::ResultFile{plant->pw, std::move(*r)}};
    });
}

precis_status precis_result_load(const char* path, precis_result** out) {
    return guard([&] {
        require(out, "out");
        require(path, "path");
        *out = nullptr;
        *out = new precis_result{io::load_result(path)};
    });
}

precis_status precis_result_save(const precis_result* result, const char* path) {
    return guard([&] {
        require(result, "result");
        require(path, "path");
        auto os = open_out(path);
        io::write_result(os, result->file.plant, result->file.result);
    });
}

void precis_result_free(precis_result* result) { delete result; }

double precis_result_objective(const precis_result* result) {
    return result ? result->file.result.objective : std::numeric_limits<double>::quiet_NaN();
}

double precis_result_norm(const precis_result* result) {
    return result ? result->file.result.norm : std::numeric_limits<double>::quiet_NaN();
}

double precis_result_gamma(const precis_result* result) {
    return result ? result->file.result.spec.gamma : std::numeric_limits<double>::quiet_NaN();
}

int precis_result_certified(const precis_result* result) { return result && result->file.result.certified ? 1 : 0; }

int precis_result_iterations(const precis_result* result) {
    return result ? result->file.result.diagnostics.iterations : 0;
}

const char* precis_result_status(const precis_result* result) {
    return result ? admm::to_string(result->file.result.diagnostics.status) : "";
}

precis_status precis_result_subset(const precis_result* result, int* ids, int capacity, int* n) {
    if (result == nullptr) {
        return guard([] { fail(ErrorCode::InvalidArgument, "result is NULL"); });
    }
    return buffer_status(copy_out<int>(result->file.result.spec.subset.ids(), ids, capacity, n), capacity, n);
}

precis_status precis_result_precisions(const precis_result* result, double* p, int capacity, int* n) {
    if (result == nullptr) {
        return guard([] { fail(ErrorCode::InvalidArgument, "result is NULL"); });
    }
    const Vector& v = result->file.result.p;
    const std::vector<double> copy(v.data(), v.data() + v.size());
    return buffer_status(copy_out<double>(copy, p, capacity, n), capacity, n);
}

precis_status precis_result_scale_precisions(precis_result* result, double factor) {
    return guard([&] {
        require(result, "result");
        if (!(factor > 0.0) || !std::isfinite(factor)) {
            fail(ErrorCode::InvalidArgument, "factor must be positive and finite");
        }
        result->file.result.p *= factor;
    });
}

precis_status precis_verify(const precis_result* result, double gamma, precis_verification* out) {
    return guard([&] {
        require(result, "result");
        require(out, "out");
        const auto& r = result->file.result;
        const auto sys = error_system_of(result->file);
        const Eigen::VectorXcd eig = sys.A.eigenvalues();
        out->gamma = gamma > 0.0 ? gamma : r.spec.gamma;
        out->spectrum_size = static_cast<int>(eig.size());
        out->stable = (eig.real().array() < 0.0).all() ? 1 : 0;
        out->norm = out->stable ? estimator::system_norm(r.spec.framework, sys)
                                : std::numeric_limits<double>::infinity();
        out->within_bound = out->stable && out->norm <= out->gamma * (1.0 + 1e-6) ? 1 : 0;
    });
}

precis_status precis_result_spectrum(const precis_result* result, double* re, double* im, int capacity, int* n) {
    const precis_status s = guard([&] {
        require(result, "result");
        require(n, "n");
        const Eigen::VectorXcd eig = error_system_of(result->file).A.eigenvalues();
        *n = static_cast<int>(eig.size());
        if (capacity < *n) {
            return;
        }
        require(re, "re");
        require(im, "im");
        for (int i = 0; i < *n; ++i) {
            re[i] = eig[i].real();
            im[i] = eig[i].imag();
        }
    });
    if (s == PRECIS_OK && capacity < *n) {
        last_error = "buffer too small";
        return PRECIS_E_BUFFER_TOO_SMALL;
    }
    return s;
}

// ---- selection

precis_status precis_select(const precis_plant* plant, const precis_options* options, const char* algorithm, int k,
                            precis_selection** out) {
    return guard([&] {
        require(out, "out");
        *out = nullptr;
        require(plant, "plant");
        require(options, "options");
        require(algorithm, "algorithm");
        if (!options->gamma) {
            fail(ErrorCode::InvalidArgument, "gamma is not set");
        }
        selection::SelectionProblem problem;
        problem.plant = plant->pw.plant;
        problem.catalog = plant->pw.catalog;
        problem.framework = options->framework;
        problem.kind = options->kind;
        problem.gamma = *options->gamma;
        problem.rho = options->rho;
        problem.k = k;
        problem.admm = apply({}, options);
        problem.jobs = options->jobs;
        selection::SelectionResult res;
        switch (selection::parse_algorithm(algorithm)) {
            case selection::Algorithm::Gse: res = selection::gse(problem); break;
            case selection::Algorithm::Lpe: res = selection::lpe(problem); break;
            case selection::Algorithm::Rlm: res = selection::rlm(problem, options->rlm); break;
            case selection::Algorithm::Exhaustive: res = selection::exhaustive(problem, options->budget); break;
        }
        *out = new precis_selection{std::move(res), plant->pw};
    });
}

void precis_selection_free(precis_selection* selection) { delete selection; }

int precis_selection_feasible(const precis_selection* s) { return s && s->result.feasible ? 1 : 0; }

double precis_selection_cost(const precis_selection* s) {
    return s ? s->result.cost.value() : std::numeric_limits<double>::quiet_NaN();
}

int precis_selection_evaluations(const precis_selection* s) { return s ? s->result.evaluations : 0; }
int precis_selection_solves(const precis_selection* s) { return s ? s->result.solves : 0; }
int precis_selection_rounds(const precis_selection* s) { return s ? s->result.rounds : 0; }

precis_status precis_selection_subset(const precis_selection* s, int* ids, int capacity, int* n) {
    if (s == nullptr) {
        return guard([] { fail(ErrorCode::InvalidArgument, "selection is NULL"); });
    }
    return buffer_status(copy_out<int>(s->result.subset.ids(), ids, capacity, n), capacity, n);
}

precis_status precis_selection_write_trace(const precis_selection* s, const char* path) {
    return guard([&] {
        require(s, "selection");
        require(path, "path");
        auto os = open_out(path);
        selection::write_trace_csv(os, s->result.trace);
    });
}

precis_status precis_selection_design(const precis_selection* s, precis_result** out) {
    return guard([&] {
        require(s, "selection");
        require(out, "out");
        *out = nullptr;
        if (s->result.design) {
            *out = new precis_result{io::ResultFile{s->pw, *s->result.design}};
        }
    });
}

// ---- benchmarks

precis_status precis_bench_example1(const precis_options* options, const char* csv_path,
                                    precis_example1_summary* out) {
    return guard([&] {
        const auto report = bench::run_example1_regression(apply({}, options));
        if (csv_path) {
            auto os = open_out(csv_path);
            bench::write_example1_csv(os, report);
        }
        if (out) {
            out->rows = static_cast<int>(report.rows.size());
            out->rows_passed = 0;
            for (const auto& row : report.rows) {
                out->rows_passed += row.pass ? 1 : 0;
            }
            out->submodularity_violated = report.submodularity_violated ? 1 : 0;
            out->supermodularity_violated = report.supermodularity_violated ? 1 : 0;
            out->pass = report.pass() ? 1 : 0;
            out->seconds = report.seconds;
        }
    });
}

precis_status precis_bench_scaling(const int* masses, int n, double gamma, int repetitions, const char* csv_path,
                                   double* slope) {
    return guard([&] {
        require(masses, "masses");
        if (n < 2) {
            fail(ErrorCode::InvalidArgument, "scaling: at least two sizes are needed for a slope");
        }
        if (repetitions < 1) {
            fail(ErrorCode::InvalidArgument, "scaling: repetitions must be at least 1");
        }
        const auto report = bench::run_scaling(std::vector<int>(masses, masses + n), gamma, repetitions);
        if (csv_path) {
            auto os = open_out(csv_path);
            bench::write_scaling_csv(os, report);
        }
        if (slope) {
            *slope = report.slope;
        }
    });
}

precis_status precis_bench_compare(const precis_options* options, int count, uint64_t seed, int nx, int nd, int ns,
                                   int k, const char* csv_path, const char* timing_path,
                                   precis_compare_summary* out) {
    return guard([&] {
        bench::EnsembleSpec spec;
        spec.count = count;
        spec.seed = seed;
        spec.nx = nx;
        spec.nd = nd;
        spec.ns = ns;
        spec.k = k;
        if (options) {
            spec.framework = options->framework;
            spec.kind = options->kind;
            spec.gamma = options->gamma.value_or(spec.gamma);
            spec.jobs = options->jobs;
            spec.rlm_i_max = options->rlm.i_max;
            spec.budget = options->budget;
        }
        spec.admm = apply(bench::EnsembleSpec::comparison_config(), options);
        const auto report = bench::run_comparison(spec);
        if (csv_path) {
            auto os = open_out(csv_path);
            bench::write_comparison_csv(os, report, false);
        }
        if (timing_path) {
            auto os = open_out(timing_path);
            bench::write_comparison_csv(os, report, true);
        }
        if (out) {
            out->systems = static_cast<int>(report.rows.size());
            fill(out->gse, report.gse);
            fill(out->lpe, report.lpe);
            fill(out->rlm, report.rlm);
        }
    });
}

}  // extern "C"
