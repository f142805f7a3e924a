#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "precis/lmi.hpp"

namespace precis::admm {

enum class XUpdateMode {
    ProjectedLeastSquares,  // least squares, then eigenvalue clamp
    InnerAdmm,              // exact constrained least squares by an inner loop
    ConeSlack,              // X - eps_p I > 0 carried as one more slacked block
};

const char* to_string(XUpdateMode mode) noexcept;
XUpdateMode parse_mode(const std::string& text);

struct AdmmConfig {
    double mu = 10.0;
    double eps_abs = 1e-6;
    double eps_rel = 1e-5;
    int max_iter = 20000;
    double eps_p = 1e-6;
    double eps_h = 1e-8;
    // Slack floor follows max(eps_h, margin_factor * eps_primal of the previous
    // iteration), so a converged point satisfies the LMIs with margin. 0 keeps
    // the floor at eps_h.
    double margin_factor = 2.0;
    XUpdateMode mode = XUpdateMode::ConeSlack;
    double inner_mu = 1.0;
    int inner_max_iter = 50;
    double inner_tol = 1e-8;
    bool record_trace = false;

    void validate() const;
};

enum class AdmmStatus { Converged, MaxIter, Infeasible };
const char* to_string(AdmmStatus status) noexcept;

struct AdmmState {
    Vector p;
    std::vector<Matrix> values;  // program variables, declaration order
    std::vector<Matrix> H;       // one slack per (internal) block
    std::vector<Matrix> U;       // scaled duals
    int iteration = 0;
    double slack_floor = 0.0;
    std::vector<double> primal_history;
    std::vector<double> dual_history;
};

struct TraceRow {
    int iter = 0;
    double objective = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
};

struct AdmmResult {
    AdmmStatus status = AdmmStatus::MaxIter;
    lmi::Assignment assignment;
    double objective = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double eps_primal = 0.0;
    double eps_dual = 0.0;
    int iterations = 0;
    std::vector<TraceRow> trace;
};

struct Residuals {
    double primal = 0.0;
    double dual = 0.0;
    double eps_primal = 0.0;
    double eps_dual = 0.0;

    [[nodiscard]] bool converged() const noexcept {
        return primal <= eps_primal && dual <= eps_dual;
    }
};

// One solve. The object owns all iterates; distinct solvers share nothing.
class AdmmSolver {
public:
    AdmmSolver(lmi::AffineLmiProgram program, AdmmConfig config);
    ~AdmmSolver();
    AdmmSolver(AdmmSolver&&) noexcept;
    AdmmSolver& operator=(AdmmSolver&&) noexcept;

    [[nodiscard]] AdmmState initial_state() const;

    // Single steps of one iteration, exposed for testing.
    [[nodiscard]] Vector p_update(const AdmmState& state) const;
    [[nodiscard]] Matrix matrix_var_update(const AdmmState& state, int var) const;
    [[nodiscard]] std::vector<Matrix> slack_update(const AdmmState& state) const;
    [[nodiscard]] std::vector<Matrix> dual_update(const AdmmState& state) const;
    [[nodiscard]] Residuals residuals(const AdmmState& prev, const AdmmState& cur) const;

    // One full sweep: p, matrix variables, H, U.
    void step(AdmmState& state) const;

    AdmmResult solve();

    // Block values at the state, internal blocks included.
    [[nodiscard]] std::vector<Matrix> block_values(const AdmmState& state) const;
    [[nodiscard]] const lmi::AffineLmiProgram& program() const noexcept;
    [[nodiscard]] const lmi::AffineLmiProgram& internal_program() const noexcept;
    [[nodiscard]] const AdmmConfig& config() const noexcept;

    // Cached pseudo-inverse of the stacked coefficient matrix of a variable.
    [[nodiscard]] const Matrix& coefficient(int var) const;
    [[nodiscard]] const Matrix& coefficient_pinv(int var) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

AdmmResult solve(const lmi::AffineLmiProgram& program, const AdmmConfig& config);

// min ||A vec_r(X) + v|| subject to X >= eps I, X of order n, by the inner
// ADMM loop (least squares with a proximal term, eigenvalue clamp, dual step).
Matrix inner_psd_lstsq(const Matrix& a, const Vector& v, Index n, const AdmmConfig& config);

// Coefficients of a variable in one block over the svec rows of the block:
// svec(block contribution of V) = result * x, with x = vec(V) or vec_r(V).
Matrix term_coefficients(const lmi::LmiBlock& block, const lmi::AffineLmiProgram& program, int var);

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace);

}  // namespace precis::admm
