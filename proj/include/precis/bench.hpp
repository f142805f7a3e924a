#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "precis/admm.hpp"
#include "precis/selection.hpp"

namespace precis::bench {

// ---- Example 1 -------------------------------------------------------------

struct Example1Row {
    std::string name;
    SensorSubset subset;
    double expected = 0.0;
    selection::Cost value;
    double rel_error = 0.0;  // |value / expected - 1|
    bool pass = false;
};

struct Example1Report {
    std::vector<Example1Row> rows;
    double tolerance = 0.03;
    // f({s1,s4}) + f({s2,s3}) < f(union) + f(empty) = inf
    bool submodularity_violated = false;
    // f({s2,s3,s4} u {s1,s2,s3}) + f(intersection) < f({s2,s3,s4}) + f({s1,s2,s3})
    // by more than the tolerance
    bool supermodularity_violated = false;
    double seconds = 0.0;

    [[nodiscard]] bool pass() const;
};

Example1Report run_example1_regression(const admm::AdmmConfig& config = {}, double tolerance = 0.03);
void write_example1_csv(std::ostream& os, const Example1Report& report);

// ---- scaling sweep -----------------------------------------------------------

struct ScalingRow {
    int masses = 0;
    Index nx = 0;
    std::vector<double> seconds;  // one per repetition
    double median_seconds = 0.0;
    int iterations = 0;
    double objective = 0.0;
    admm::AdmmStatus status = admm::AdmmStatus::MaxIter;
};

struct ScalingReport {
    std::vector<ScalingRow> rows;
    double slope = 0.0;  // least-squares slope of log(time) against log(N_x)
};

// Moderate-accuracy tolerances used for the timing sweep.
admm::AdmmConfig scaling_config();

ScalingReport run_scaling(const std::vector<int>& masses, double gamma = 0.5, int repetitions = 3,
                          const admm::AdmmConfig& config = scaling_config());
void write_scaling_csv(std::ostream& os, const ScalingReport& report);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);
double median(std::vector<double> v);

// ---- algorithm comparison ---------------------------------------------------

struct EnsembleSpec {
    int count = 20;
    std::uint64_t seed = 0;  // system i uses seed + i
    Index nx = 5;
    Index nd = 3;
    Index ns = 12;
    double gamma = 0.1;
    int k = 4;
    Framework framework = Framework::Hinf;
    EstimatorKind kind = EstimatorKind::Observer;
    admm::AdmmConfig admm = comparison_config();
    int rlm_i_max = 50;
    std::size_t budget = selection::kDefaultBudget;
    int jobs = 1;

    // mu = 100 and a 3000-iteration cap per solve
    static admm::AdmmConfig comparison_config();
    void validate() const;
};

struct Outcome {
    bool feasible = false;
    SensorSubset subset;
    selection::Cost cost;
    bool exact = false;       // same subset as the exhaustive optimum
    double pct_error = 0.0;   // |1 - f / f*| * 100, feasible outcomes only
    int evaluations = 0;
};

struct SystemRow {
    int index = 0;
    std::uint64_t seed = 0;
    Outcome exhaustive;
    Outcome gse;
    Outcome lpe;
    Outcome rlm;
    double seconds = 0.0;
};

struct AlgorithmSummary {
    std::string name;
    int exact = 0;
    int infeasible = 0;
    int feasible_with_reference = 0;  // population of the error statistics
    double mean_pct_error = 0.0;
    double sd_pct_error = 0.0;
    double mean_evaluations = 0.0;
};

struct ComparisonReport {
    EnsembleSpec spec;
    std::vector<SystemRow> rows;
    AlgorithmSummary gse;
    AlgorithmSummary lpe;
    AlgorithmSummary rlm;
};

ComparisonReport run_comparison(const EnsembleSpec& spec);
// Per-system rows followed by one summary row per algorithm. `with_timing`
// adds a seconds column, the only field that varies between identical runs.
void write_comparison_csv(std::ostream& os, const ComparisonReport& report, bool with_timing = true);

}  // namespace precis::bench
