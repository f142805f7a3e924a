#include "precis/selection.hpp"

#include <cmath>
#include <ostream>
#include <utility>

#include "parallel.hpp"
#include "precis/error.hpp"

namespace precis::selection {

namespace {

using estimator::EstimatorResult;

SelectionResult infeasible(SelectionResult res) {
    res.feasible = false;
    res.subset = SensorSubset();
    res.cost = Cost::infinite();
    res.precisions.clear();
    res.design.reset();
    return res;
}

SelectionResult finish(SelectionResult res, Evaluation&& e) {
    if (!e.cost.is_finite()) {
        return infeasible(std::move(res));
    }
    res.feasible = true;
    res.subset = e.subset;
    res.cost = e.cost;
    res.precisions = std::move(e.precisions);
    res.design = std::move(e.design);
    return res;
}

// Lowest index among the minima; the candidates are in ascending id order.
std::size_t argmin(const std::vector<Cost>& costs) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < costs.size(); ++i) {
        if (costs[i] < costs[best]) {
            best = i;
        }
    }
    return best;
}

}  // namespace

Cost Cost::finite(double v) {
    if (!std::isfinite(v)) {
        fail(ErrorCode::InvalidArgument, "Cost::finite: value is not finite");
    }
    Cost c;
    c.finite_ = true;
    c.value_ = v;
    return c;
}

std::string Cost::to_string() const {
    return finite_ ? format_double(value_) : "inf";
}

void SelectionProblem::validate() const {
    plant.validate();
    catalog.validate(plant);
    if (catalog.size() == 0) {
        fail(ErrorCode::EmptySubset, "selection: catalog is empty");
    }
    if (k < 1 || k > catalog.size()) {
        fail(ErrorCode::InvalidArgument, "selection: k must satisfy 1 <= k <= " +
                                             std::to_string(catalog.size()) + " (got " + std::to_string(k) + ")");
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        fail(ErrorCode::InvalidArgument, "selection: gamma must be positive");
    }
    if (rho.size() != 0 && rho.size() != catalog.size()) {
        fail(ErrorCode::Dimension, "selection: weights must have one entry per catalog sensor");
    }
    if (rho.size() != 0 && (rho.array() <= 0.0).any()) {
        fail(ErrorCode::InvalidArgument, "selection: weights must be positive");
    }
    if (jobs < 1) {
        fail(ErrorCode::InvalidArgument, "selection: jobs must be at least 1");
    }
    admm.validate();
}

estimator::DesignSpec SelectionProblem::spec_for(const SensorSubset& subset) const {
    estimator::DesignSpec spec;
    spec.framework = framework;
    spec.kind = kind;
    spec.gamma = gamma;
    spec.rho = rho;
    spec.subset = subset;
    return spec;
}

Evaluation evaluate(const SelectionProblem& problem, const SensorSubset& subset) {
    Evaluation e;
    e.subset = subset;
    e.precisions.assign(static_cast<std::size_t>(subset.size()), Cost::infinite());
    if (subset.empty()) {
        e.note = "empty subset";
        return e;
    }
    try {
        EstimatorResult r = estimator::design(problem.plant, problem.catalog, problem.spec_for(subset), problem.admm);
        e.cost = Cost::finite(r.objective);
        for (Index i = 0; i < r.p.size(); ++i) {
            e.precisions[static_cast<std::size_t>(i)] = Cost::finite(r.p[i]);
        }
        e.design = std::move(r);
    } catch (const Error& err) {
        const auto c = err.code();
        if (c != ErrorCode::InfeasibleDesign && c != ErrorCode::Recovery && c != ErrorCode::Unstable) {
            throw;
        }
        e.note = err.what();
    }
    return e;
}

Cost eval_f(const SelectionProblem& problem, const SensorSubset& subset) {
    return evaluate(problem, subset).cost;
}

std::vector<Cost> eval_h(const SelectionProblem& problem, const SensorSubset& subset) {
    return evaluate(problem, subset).precisions;
}

const char* to_string(Algorithm a) noexcept {
    switch (a) {
        case Algorithm::Gse: return "gse";
        case Algorithm::Lpe: return "lpe";
        case Algorithm::Rlm: return "rlm";
        case Algorithm::Exhaustive: return "exhaustive";
    }
    return "?";
}

Algorithm parse_algorithm(const std::string& text) {
    for (auto a : {Algorithm::Gse, Algorithm::Lpe, Algorithm::Rlm, Algorithm::Exhaustive}) {
        if (text == to_string(a)) {
            return a;
        }
    }
    fail(ErrorCode::InvalidArgument, "unknown algorithm '" + text + "' (expected gse, lpe, rlm or exhaustive)");
}

SelectionResult gse(const SelectionProblem& problem) {
    problem.validate();
    SelectionResult res;
    res.algorithm = Algorithm::Gse;
    SensorSubset q = SensorSubset::all(problem.size());
    std::optional<Evaluation> current;
    while (q.size() > problem.k) {
        ++res.rounds;
        const auto ids = q.ids();
        std::vector<Evaluation> evals(ids.size());
        detail::parallel_for(ids.size(), problem.jobs,
                             [&](std::size_t i) { evals[i] = evaluate(problem, q.without(ids[i])); });
        res.evaluations += static_cast<int>(ids.size());
        res.solves += static_cast<int>(ids.size());
        std::vector<Cost> costs;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            costs.push_back(evals[i].cost);
            res.trace.push_back({res.rounds, ids[i], evals[i].cost, "evaluate"});
        }
        const std::size_t best = argmin(costs);
        if (!costs[best].is_finite()) {
            res.trace.push_back({res.rounds, -1, Cost::infinite(), "infeasible"});
            return infeasible(std::move(res));
        }
        res.trace.push_back({res.rounds, ids[best], costs[best], "eliminate"});
        q = q.without(ids[best]);
        current = std::move(evals[best]);
    }
    if (!current) {
        current = evaluate(problem, q);
        ++res.solves;
        res.trace.push_back({res.rounds, -1, current->cost, "final"});
    }
    return finish(std::move(res), std::move(*current));
}

SelectionResult lpe(const SelectionProblem& problem) {
    problem.validate();
    SelectionResult res;
    res.algorithm = Algorithm::Lpe;
    SensorSubset q = SensorSubset::all(problem.size());
    while (q.size() > problem.k) {
        ++res.rounds;
        Evaluation e = evaluate(problem, q);
        ++res.evaluations;
        ++res.solves;
        if (!e.cost.is_finite()) {
            res.trace.push_back({res.rounds, -1, Cost::infinite(), "infeasible"});
            return infeasible(std::move(res));
        }
        const auto& ids = q.ids();
        for (std::size_t i = 0; i < ids.size(); ++i) {
            res.trace.push_back({res.rounds, ids[i], e.precisions[i], "precision"});
        }
        const std::size_t best = argmin(e.precisions);
        res.trace.push_back({res.rounds, ids[best], e.precisions[best], "eliminate"});
        q = q.without(ids[best]);
    }
    Evaluation final_pass = evaluate(problem, q);
    ++res.solves;
    res.trace.push_back({res.rounds, -1, final_pass.cost, "final"});
    return finish(std::move(res), std::move(final_pass));
}

SelectionResult rlm(const SelectionProblem& problem, const RlmOptions& options) {
    problem.validate();
    if (options.i_max < 1) {
        fail(ErrorCode::InvalidArgument, "rlm: i_max must be at least 1");
    }
    SelectionResult res;
    res.algorithm = Algorithm::Rlm;
    const Index n = problem.size();
    const SensorSubset all = SensorSubset::all(n);
    SelectionProblem work = problem;
    work.rho = Vector::Ones(n);
    double eps = options.eps;
    for (int it = 1; it <= options.i_max; ++it) {
        res.rounds = it;
        Evaluation e = evaluate(work, all);
        ++res.evaluations;
        ++res.solves;
        if (!e.cost.is_finite()) {
            res.trace.push_back({it, -1, Cost::infinite(), "infeasible"});
            return infeasible(std::move(res));
        }
        if (eps <= 0.0) {
            double pmax = 0.0;
            for (const auto& c : e.precisions) {
                pmax = std::max(pmax, c.value());
            }
            eps = pmax > 0.0 ? 1e-3 * pmax : 1.0;
        }
        std::vector<int> keep;
        for (Index i = 0; i < n; ++i) {
            const double p = e.precisions[static_cast<std::size_t>(i)].value();
            const bool kept = p > eps;
            if (kept) {
                keep.push_back(static_cast<int>(i));
            }
            res.trace.push_back({it, static_cast<int>(i), e.precisions[static_cast<std::size_t>(i)],
                                 kept ? "keep" : "drop"});
        }
        if (static_cast<int>(keep.size()) <= problem.k) {
            Evaluation final_pass = evaluate(problem, SensorSubset(keep));
            ++res.solves;
            res.trace.push_back({it, -1, final_pass.cost, "final"});
            return finish(std::move(res), std::move(final_pass));
        }
        for (Index i = 0; i < n; ++i) {
            work.rho[i] = 1.0 / (eps + e.precisions[static_cast<std::size_t>(i)].value());
        }
    }
    res.trace.push_back({res.rounds, -1, Cost::infinite(), "max-iterations"});
    return infeasible(std::move(res));
}

std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    std::size_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        const std::size_t num = n - k + i;
        // r * num / i is exact at every step; guard the multiplication
        if (r > std::numeric_limits<std::size_t>::max() / num) {
            return std::numeric_limits<std::size_t>::max();
        }
        r = r * num / i;
    }
    return r;
}

SelectionResult exhaustive(const SelectionProblem& problem, std::size_t budget) {
    problem.validate();
    const auto n = static_cast<std::size_t>(problem.size());
    const auto k = static_cast<std::size_t>(problem.k);
    const std::size_t count = binomial(n, k);
    if (count > budget) {
        fail(ErrorCode::Budget, "exhaustive: C(" + std::to_string(n) + "," + std::to_string(k) + ") = " +
                                    std::to_string(count) + " subsets exceed the budget of " +
                                    std::to_string(budget));
    }
    std::vector<SensorSubset> subsets;
    subsets.reserve(count);
    std::vector<int> idx(k);
    for (std::size_t i = 0; i < k; ++i) {
        idx[i] = static_cast<int>(i);
    }
    while (true) {
        subsets.emplace_back(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == static_cast<int>(n - k + i - 1)) {
            --i;
        }
        if (i == 0) {
            break;
        }
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) {
            idx[j] = idx[j - 1] + 1;
        }
    }
    std::vector<Evaluation> evals(subsets.size());
    detail::parallel_for(subsets.size(), problem.jobs,
                         [&](std::size_t i) { evals[i] = evaluate(problem, subsets[i]); });
    SelectionResult res;
    res.algorithm = Algorithm::Exhaustive;
    res.rounds = 1;
    res.evaluations = static_cast<int>(subsets.size());
    res.solves = res.evaluations;
    std::vector<Cost> costs;
    for (const auto& e : evals) {
        costs.push_back(e.cost);
    }
    const std::size_t best = argmin(costs);
    res.trace.push_back({1, -1, costs[best], costs[best].is_finite() ? "optimum" : "infeasible"});
    return finish(std::move(res), std::move(evals[best]));
}

SelectionResult run(const SelectionProblem& problem, Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::Gse: return gse(problem);
        case Algorithm::Lpe: return lpe(problem);
        case Algorithm::Rlm: return rlm(problem);
        case Algorithm::Exhaustive: return exhaustive(problem);
    }
    fail(ErrorCode::InvalidArgument, "unknown algorithm");
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
    os << "round,candidate_id,cost,action\n";
    for (const auto& row : trace) {
        os << row.round << ',';
        if (row.candidate_id >= 0) {
            os << row.candidate_id + 1;
        }
        os << ',' << row.cost.to_string() << ',' << row.action << '\n';
    }
}

}  // namespace precis::selection
