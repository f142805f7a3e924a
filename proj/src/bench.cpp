#include "precis/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

#include "parallel.hpp"
#include "precis/error.hpp"
#include "precis/lmi.hpp"

namespace precis::bench {

namespace {

using selection::Cost;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string subset_field(const SensorSubset& s) {
    std::string out;
    for (int id : s.ids()) {
        if (!out.empty()) {
            out += ' ';
        }
        out += std::to_string(id + 1);
    }
    return out;
}

Outcome outcome_of(const selection::SelectionResult& r) {
    Outcome o;
    o.feasible = r.feasible;
    o.subset = r.subset;
    o.cost = r.cost;
    o.evaluations = r.evaluations;
    return o;
}

void score(Outcome& o, const Outcome& reference) {
    o.exact = o.feasible && reference.feasible && o.subset == reference.subset;
    if (o.feasible && reference.feasible) {
        o.pct_error = std::abs(1.0 - o.cost.value() / reference.cost.value()) * 100.0;
    }
}

AlgorithmSummary summarize(const std::string& name, const std::vector<SystemRow>& rows,
                           Outcome SystemRow::*member) {
    AlgorithmSummary s;
    s.name = name;
    std::vector<double> errors;
    double evals = 0.0;
    for (const auto& row : rows) {
        const Outcome& o = row.*member;
        evals += o.evaluations;
        if (!o.feasible) {
            ++s.infeasible;
            continue;
        }
        if (o.exact) {
            ++s.exact;
        }
        if (row.exhaustive.feasible) {
            errors.push_back(o.pct_error);
        }
    }
    s.feasible_with_reference = static_cast<int>(errors.size());
    s.mean_evaluations = rows.empty() ? 0.0 : evals / static_cast<double>(rows.size());
    if (!errors.empty()) {
        double sum = 0.0;
        for (double e : errors) {
            sum += e;
        }
        s.mean_pct_error = sum / static_cast<double>(errors.size());
        if (errors.size() > 1) {
            double ss = 0.0;
            for (double e : errors) {
                ss += (e - s.mean_pct_error) * (e - s.mean_pct_error);
            }
            s.sd_pct_error = std::sqrt(ss / static_cast<double>(errors.size() - 1));
        }
    }
    return s;
}

}  // namespace

// ---- Example 1 ---------------------------------------------------------------

bool Example1Report::pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const Example1Row& r) { return r.pass; }) &&
           submodularity_violated && supermodularity_violated;
}

Example1Report run_example1_regression(const admm::AdmmConfig& config, double tolerance) {
    const auto t0 = Clock::now();
    const auto pw = example1_plant();
    selection::SelectionProblem problem;
    problem.plant = pw.plant;
    problem.catalog = pw.catalog;
    problem.framework = Framework::Hinf;
    problem.kind = EstimatorKind::Observer;
    problem.gamma = 0.5;
    problem.rho = Vector::Ones(4);
    problem.k = 4;
    problem.admm = config;

    Example1Report report;
    report.tolerance = tolerance;
    const std::vector<std::pair<SensorSubset, double>> cases = {
        {SensorSubset{0, 3}, 22.52},    {SensorSubset{1, 2}, 22.52}, {SensorSubset{1, 2, 3}, 22.52},
        {SensorSubset{0, 1, 2}, 18.84}, {SensorSubset::all(4), 14.0},
    };
    for (const auto& [subset, expected] : cases) {
        Example1Row row;
        row.name = "{" + subset.to_string() + "}";
        row.subset = subset;
        row.expected = expected;
        row.value = selection::eval_f(problem, subset);
        row.rel_error = row.value.is_finite() ? std::abs(row.value.value() / expected - 1.0)
                                              : std::numeric_limits<double>::infinity();
        row.pass = row.rel_error <= tolerance;
        report.rows.push_back(row);
    }
    const Cost f14 = report.rows[0].value;
    const Cost f23 = report.rows[1].value;
    const Cost f234 = report.rows[2].value;
    const Cost f123 = report.rows[3].value;
    const Cost fall = report.rows[4].value;
    const Cost fempty = selection::eval_f(problem, SensorSubset());
    // union {s1..s4}, intersection empty
    report.submodularity_violated = f14.is_finite() && f23.is_finite() && !fempty.is_finite();
    // union {s1..s4}, intersection {s2,s3}
    if (f234.is_finite() && f123.is_finite() && fall.is_finite() && f23.is_finite()) {
        const double lhs = fall.value() + f23.value();
        const double rhs = f234.value() + f123.value();
        report.supermodularity_violated = lhs < (1.0 - tolerance) * rhs;
    }
    report.seconds = seconds_since(t0);
    return report;
}

void write_example1_csv(std::ostream& os, const Example1Report& report) {
    os << "subset,expected,value,rel_error,status\n";
    for (const auto& r : report.rows) {
        os << '"' << r.subset.to_string() << "\"," << format_double(r.expected) << ','
           << r.value.to_string() << ',' << format_double(r.rel_error) << ','
           << (r.pass ? "PASS" : "FAIL") << '\n';
    }
}

// ---- scaling sweep -------------------------------------------------------------

admm::AdmmConfig scaling_config() {
    admm::AdmmConfig cfg;
    cfg.eps_abs = 1e-5;
    cfg.eps_rel = 1e-4;
    return cfg;
}

double median(std::vector<double> v) {
    if (v.empty()) {
        fail(ErrorCode::InvalidArgument, "median: empty sample");
    }
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        fail(ErrorCode::InvalidArgument, "loglog_slope: need at least two paired points");
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
            fail(ErrorCode::InvalidArgument, "loglog_slope: values must be positive");
        }
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) {
        fail(ErrorCode::InvalidArgument, "loglog_slope: x values are all equal");
    }
    return sxy / sxx;
}

ScalingReport run_scaling(const std::vector<int>& masses, double gamma, int repetitions,
                          const admm::AdmmConfig& config) {
    if (masses.empty() || repetitions < 1 || !(gamma > 0.0)) {
        fail(ErrorCode::InvalidArgument, "run_scaling: need masses, repetitions >= 1 and gamma > 0");
    }
    if (!std::is_sorted(masses.begin(), masses.end()) ||
        std::adjacent_find(masses.begin(), masses.end()) != masses.end()) {
        fail(ErrorCode::InvalidArgument, "run_scaling: masses must be strictly ascending");
    }
    ScalingReport report;
    std::vector<double> xs, ys;
    for (int m : masses) {
        const auto pw = spring_mass_plant(m);
        const Index n = pw.catalog.size();
        const auto meas = assemble_measurement(pw.plant, pw.catalog, SensorSubset::all(n));
        const auto program = lmi::build_program(Framework::Hinf, EstimatorKind::Observer, pw.plant, meas,
                                                Vector::Ones(n), gamma);
        ScalingRow row;
        row.masses = m;
        row.nx = pw.plant.nx();
        for (int r = 0; r < repetitions; ++r) {
            const auto t0 = Clock::now();
            const auto sol = admm::solve(program, config);
            row.seconds.push_back(seconds_since(t0));
            row.iterations = sol.iterations;
            row.objective = sol.objective;
            row.status = sol.status;
        }
        row.median_seconds = median(row.seconds);
        xs.push_back(static_cast<double>(row.nx));
        ys.push_back(row.median_seconds);
        report.rows.push_back(row);
    }
    report.slope = xs.size() >= 2 ? loglog_slope(xs, ys) : 0.0;
    return report;
}

void write_scaling_csv(std::ostream& os, const ScalingReport& report) {
    os << "M,N_x,median_time,iterations,objective,status,slope\n";
    for (const auto& r : report.rows) {
        os << r.masses << ',' << r.nx << ',' << format_double(r.median_seconds) << ',' << r.iterations << ','
           << format_double(r.objective) << ',' << admm::to_string(r.status) << ','
           << format_double(report.slope) << '\n';
    }
}

// ---- algorithm comparison ----------------------------------------------------

admm::AdmmConfig EnsembleSpec::comparison_config() {
    admm::AdmmConfig cfg;
    cfg.mu = 100.0;
    cfg.max_iter = 3000;
    return cfg;
}

void EnsembleSpec::validate() const {
    if (count < 1) {
        fail(ErrorCode::InvalidArgument, "ensemble: count must be at least 1");
    }
    if (nx < 1 || nd < 1 || ns < 1 || k < 1 || k > ns || !(gamma > 0.0) || jobs < 1 || rlm_i_max < 1) {
        fail(ErrorCode::InvalidArgument, "ensemble: invalid dimensions, k, gamma, jobs or i_max");
    }
    admm.validate();
    const std::size_t c = selection::binomial(static_cast<std::size_t>(ns), static_cast<std::size_t>(k));
    if (c > budget) {
        fail(ErrorCode::Budget, "ensemble: C(" + std::to_string(ns) + "," + std::to_string(k) + ") = " +
                                    std::to_string(c) + " exceeds the exhaustive budget " + std::to_string(budget));
    }
}

ComparisonReport run_comparison(const EnsembleSpec& spec) {
    spec.validate();
    ComparisonReport report;
    report.spec = spec;
    report.rows.resize(static_cast<std::size_t>(spec.count));
    detail::parallel_for(report.rows.size(), spec.jobs, [&](std::size_t i) {
        const auto t0 = Clock::now();
        SystemRow& row = report.rows[i];
        row.index = static_cast<int>(i) + 1;
        row.seed = spec.seed + i;
        const auto pw = random_plant(row.seed, spec.nx, spec.nd, spec.ns);
        selection::SelectionProblem problem;
        problem.plant = pw.plant;
        problem.catalog = pw.catalog;
        problem.framework = spec.framework;
        problem.kind = spec.kind;
        problem.gamma = spec.gamma;
        problem.rho = Vector::Ones(spec.ns);
        problem.k = spec.k;
        problem.admm = spec.admm;
        problem.jobs = 1;
        row.exhaustive = outcome_of(selection::exhaustive(problem, spec.budget));
        row.exhaustive.exact = row.exhaustive.feasible;
        row.gse = outcome_of(selection::gse(problem));
        row.lpe = outcome_of(selection::lpe(problem));
        selection::RlmOptions ro;
        ro.i_max = spec.rlm_i_max;
        row.rlm = outcome_of(selection::rlm(problem, ro));
        score(row.gse, row.exhaustive);
        score(row.lpe, row.exhaustive);
        score(row.rlm, row.exhaustive);
        row.seconds = seconds_since(t0);
    });
    report.gse = summarize("gse", report.rows, &SystemRow::gse);
    report.lpe = summarize("lpe", report.rows, &SystemRow::lpe);
    report.rlm = summarize("rlm", report.rows, &SystemRow::rlm);
    return report;
}

void write_comparison_csv(std::ostream& os, const ComparisonReport& report, bool with_timing) {
    os << "record,system,seed,algorithm,feasible,subset,cost,exact,pct_error,evaluations,"
          "exact_count,infeasible_count,mean_pct_error,sd_pct_error";
    os << (with_timing ? ",seconds\n" : "\n");
    auto line = [&](const SystemRow& row, const char* name, const Outcome& o) {
        os << "system," << row.index << ',' << row.seed << ',' << name << ',' << (o.feasible ? 1 : 0) << ','
           << subset_field(o.subset) << ',' << o.cost.to_string() << ',' << (o.exact ? 1 : 0) << ','
           << (o.feasible && row.exhaustive.feasible ? format_double(o.pct_error) : "") << ','
           << o.evaluations << ",,,,";
        if (with_timing) {
            os << ',' << format_double(row.seconds);
        }
        os << '\n';
    };
    for (const auto& row : report.rows) {
        line(row, "exhaustive", row.exhaustive);
        line(row, "gse", row.gse);
        line(row, "lpe", row.lpe);
        line(row, "rlm", row.rlm);
    }
    for (const auto* s : {&report.gse, &report.lpe, &report.rlm}) {
        os << "summary,,," << s->name << ",,,,,," << format_double(s->mean_evaluations) << ',' << s->exact << ','
           << s->infeasible << ',' << format_double(s->mean_pct_error) << ',' << format_double(s->sd_pct_error);
        if (with_timing) {
            os << ',';
        }
        os << '\n';
    }
}

}  // namespace precis::bench
