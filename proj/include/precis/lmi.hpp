#pragma once

#include <optional>
#include <string>
#include <vector>

#include "precis/model.hpp"
#include "precis/types.hpp"

namespace precis::lmi {

enum class VarStructure { General, Symmetric, Spd };

struct MatrixVarSpec {
    std::string name;
    Index rows = 0;
    Index cols = 0;
    VarStructure structure = VarStructure::General;

    [[nodiscard]] bool symmetric() const noexcept { return structure != VarStructure::General; }
};

// scale * left * op(V) * right, placed at sub-block (row_part, col_part) and
// mirrored. On a diagonal sub-block the contribution is T + T^T when
// `symmetrize` is set (the sym(.) of the theorems), else (T + T^T) / 2.
// Empty left/right mean identity.
struct LmiTerm {
    int var = 0;
    int row_part = 0;
    int col_part = 0;
    Matrix left;
    Matrix right;
    bool transpose = false;
    double scale = 1.0;
    bool symmetrize = false;
};

// -coefficient * diag(p) on the diagonal starting at `offset`.
struct PrecisionTerm {
    Index offset = 0;
    double coefficient = 1.0;
};

// Constraint: value(p, vars) < 0.
struct LmiBlock {
    std::string name;
    std::vector<Index> parts;
    Matrix constant;
    std::vector<LmiTerm> terms;
    std::optional<PrecisionTerm> precision;

    [[nodiscard]] Index size() const noexcept { return constant.rows(); }
    [[nodiscard]] Index part_offset(int part) const;
};

struct ProgramMeta {
    Framework framework = Framework::Hinf;
    EstimatorKind kind = EstimatorKind::Observer;
    double gamma = 1.0;
};

struct AffineLmiProgram {
    Index num_precisions = 0;
    Vector weights;
    std::vector<MatrixVarSpec> variables;
    std::vector<LmiBlock> blocks;
    ProgramMeta meta;

    [[nodiscard]] int var_index(const std::string& name) const;  // -1 if absent
    // Throws Program when the structure is inconsistent.
    void validate() const;
};

struct Assignment {
    Vector p;
    std::vector<Matrix> values;  // one per program variable, declaration order
};

struct Certificate {
    std::vector<double> block_lambda_max;
    std::vector<double> var_lambda_min;  // NaN for non-spd variables
    double margin = 0.0;                 // -max(block lambda_max)
    bool feasible = false;
};

inline constexpr double kMarginTol = 1e-9;

Matrix evaluate_block(const LmiBlock& block, const AffineLmiProgram& program, const Assignment& a);

Certificate certify(const AffineLmiProgram& program, const Assignment& a,
                    double margin_tol = kMarginTol, double eps_p = 1e-6);

// Value of the term alone, full block size (used by the solver for its
// coefficient matrices and by evaluate_block).
void accumulate_term(Matrix& out, const LmiBlock& block, const LmiTerm& term, const Matrix& value);

AffineLmiProgram build_hinf_observer(const LtiPlant& plant, const MeasurementModel& meas,
                                     const Vector& rho, double gamma);
AffineLmiProgram build_h2_observer(const LtiPlant& plant, const MeasurementModel& meas,
                                   const Vector& rho, double gamma);
AffineLmiProgram build_hinf_filter(const LtiPlant& plant, const MeasurementModel& meas,
                                   const Vector& rho, double gamma);
AffineLmiProgram build_h2_filter(const LtiPlant& plant, const MeasurementModel& meas,
                                 const Vector& rho, double gamma);

AffineLmiProgram build_program(Framework framework, EstimatorKind kind, const LtiPlant& plant,
                               const MeasurementModel& meas, const Vector& rho, double gamma);

}  // namespace precis::lmi
