#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "precis/admm.hpp"
#include "precis/estimator.hpp"
#include "precis/model.hpp"

namespace precis::selection {

// Extended real: a finite value or the infeasibility marker, which orders
// above every finite value.
class Cost {
public:
    Cost() = default;
    static Cost finite(double v);
    static Cost infinite() noexcept { return Cost{}; }

    [[nodiscard]] bool is_finite() const noexcept { return finite_; }
    // +inf for the marker.
    [[nodiscard]] double value() const noexcept {
        return finite_ ? value_ : std::numeric_limits<double>::infinity();
    }
    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const Cost& a, const Cost& b) noexcept {
        return a.finite_ == b.finite_ && (!a.finite_ || a.value_ == b.value_);
    }
    friend std::partial_ordering operator<=>(const Cost& a, const Cost& b) noexcept {
        if (a.finite_ != b.finite_) {
            return a.finite_ ? std::partial_ordering::less : std::partial_ordering::greater;
        }
        if (!a.finite_) {
            return std::partial_ordering::equivalent;
        }
        return a.value_ <=> b.value_;
    }

private:
    bool finite_ = false;
    double value_ = 0.0;
};

struct SelectionProblem {
    LtiPlant plant;
    SensorCatalog catalog;
    Framework framework = Framework::Hinf;
    EstimatorKind kind = EstimatorKind::Observer;
    double gamma = 1.0;
    Vector rho;  // per catalog sensor; empty = catalog weights
    int k = 1;
    admm::AdmmConfig admm;
    int jobs = 1;  // worker cap for independent evaluations

    void validate() const;
    [[nodiscard]] estimator::DesignSpec spec_for(const SensorSubset& subset) const;
    [[nodiscard]] Index size() const noexcept { return catalog.size(); }
};

// f and h of one subset from a single design.
struct Evaluation {
    SensorSubset subset;
    Cost cost;
    std::vector<Cost> precisions;  // aligned with subset.ids()
    std::optional<estimator::EstimatorResult> design;
    std::string note;  // reason when infeasible
};

Evaluation evaluate(const SelectionProblem& problem, const SensorSubset& subset);
Cost eval_f(const SelectionProblem& problem, const SensorSubset& subset);
std::vector<Cost> eval_h(const SelectionProblem& problem, const SensorSubset& subset);

enum class Algorithm { Gse, Lpe, Rlm, Exhaustive };
const char* to_string(Algorithm a) noexcept;
Algorithm parse_algorithm(const std::string& text);

struct TraceRow {
    int round = 0;
    int candidate_id = -1;  // catalog id, -1 when not about one sensor
    Cost cost;
    std::string action;
};

struct SelectionResult {
    Algorithm algorithm = Algorithm::Gse;
    bool feasible = false;
    SensorSubset subset;  // empty when infeasible
    Cost cost;
    std::vector<Cost> precisions;
    // Counted evaluations: leave-one-out solves (GSE), loop solves (LPE, RLM),
    // subsets tried (exhaustive). Final design passes are excluded.
    int evaluations = 0;
    int solves = 0;  // every underlying design call
    int rounds = 0;
    std::vector<TraceRow> trace;
    std::optional<estimator::EstimatorResult> design;
};

SelectionResult gse(const SelectionProblem& problem);
SelectionResult lpe(const SelectionProblem& problem);

struct RlmOptions {
    int i_max = 50;
    double eps = 0.0;  // <= 0: 1e-3 * max finite p of the first solve, or 1
};
SelectionResult rlm(const SelectionProblem& problem, const RlmOptions& options = {});

constexpr std::size_t kDefaultBudget = 10000;
SelectionResult exhaustive(const SelectionProblem& problem, std::size_t budget = kDefaultBudget);

SelectionResult run(const SelectionProblem& problem, Algorithm algorithm);

// Number of k-subsets of n items; saturates at SIZE_MAX.
std::size_t binomial(std::size_t n, std::size_t k);

// Columns round,candidate_id,cost,action; ids 1-based.
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace);

}  // namespace precis::selection
