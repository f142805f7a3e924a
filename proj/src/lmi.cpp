#include "precis/lmi.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "precis/error.hpp"
#include "precis/linalg.hpp"

namespace precis::lmi {

namespace {

// Small helper to lay out one block from its partition.
class BlockBuilder {
public:
    BlockBuilder(std::string name, std::vector<Index> parts) {
        block_.name = std::move(name);
        block_.parts = std::move(parts);
        const Index n = std::accumulate(block_.parts.begin(), block_.parts.end(), Index{0});
        block_.constant = Matrix::Zero(n, n);
    }

    BlockBuilder& constant(int rp, int cp, const Matrix& value) {
        const Index r0 = block_.part_offset(rp);
        const Index c0 = block_.part_offset(cp);
        if (value.rows() != block_.parts[rp] || value.cols() != block_.parts[cp]) {
            fail(ErrorCode::Dimension, "lmi: constant does not fit sub-block of " + block_.name);
        }
        block_.constant.block(r0, c0, value.rows(), value.cols()) = value;
        if (rp != cp) {
            block_.constant.block(c0, r0, value.cols(), value.rows()) = value.transpose();
        }
        return *this;
    }

    BlockBuilder& term(int var, int rp, int cp, Matrix left = {}, Matrix right = {},
                       bool transpose = false, double scale = 1.0, bool symmetrize = false) {
        block_.terms.push_back({var, rp, cp, std::move(left), std::move(right), transpose, scale,
                                symmetrize});
        return *this;
    }

    BlockBuilder& precision(int part, double coefficient) {
        block_.precision = PrecisionTerm{block_.part_offset(part), coefficient};
        return *this;
    }

    LmiBlock build() { return std::move(block_); }

private:
    LmiBlock block_;
};

Matrix eye(Index n) {
    return Matrix::Identity(n, n);
}

LmiBlock trace_block(int var, Index nz, double gamma) {
    BlockBuilder b("trace", {1});
    b.constant(0, 0, Matrix::Constant(1, 1, -gamma * gamma));
    for (Index i = 0; i < nz; ++i) {
        Matrix e = Matrix::Zero(nz, 1);
        e(i, 0) = 1.0;
        b.term(var, 0, 0, e.transpose(), e);
    }
    return b.build();
}

void check_inputs(const LtiPlant& plant, const MeasurementModel& meas, const Vector& rho,
                  double gamma) {
    plant.validate();
    if (meas.ny() < 1) {
        fail(ErrorCode::EmptySubset, "lmi: measurement model has no sensors");
    }
    if (meas.Cy.cols() != plant.nx() || meas.Dd.cols() != plant.nd() || meas.Dd.rows() != meas.ny()) {
        fail(ErrorCode::Dimension, "lmi: measurement model does not match the plant");
    }
    if (rho.size() != meas.ny()) {
        fail(ErrorCode::Dimension, "lmi: one weight per selected sensor required");
    }
    if ((rho.array() <= 0.0).any()) {
        fail(ErrorCode::InvalidArgument, "lmi: weights must be positive");
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        fail(ErrorCode::InvalidArgument, "lmi: gamma must be positive");
    }
}

AffineLmiProgram base_program(const MeasurementModel& meas, const Vector& rho, Framework f,
                              EstimatorKind k, double gamma) {
    AffineLmiProgram prog;
    prog.num_precisions = meas.ny();
    prog.weights = rho;
    prog.meta = {f, k, gamma};
    return prog;
}

}  // namespace

Index LmiBlock::part_offset(int part) const {
    if (part < 0 || part >= static_cast<int>(parts.size())) {
        fail(ErrorCode::Program, "lmi: part index out of range in block " + name);
    }
    return std::accumulate(parts.begin(), parts.begin() + part, Index{0});
}

int AffineLmiProgram::var_index(const std::string& name) const {
    for (std::size_t i = 0; i < variables.size(); ++i) {
        if (variables[i].name == name) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

void AffineLmiProgram::validate() const {
    if (variables.empty() || blocks.empty()) {
        fail(ErrorCode::Program, "program has no variables or no blocks");
    }
    if (weights.size() != num_precisions || (weights.array() <= 0.0).any()) {
        fail(ErrorCode::Program, "program weights must be positive, one per precision");
    }
    if (!(meta.gamma > 0.0)) {
        fail(ErrorCode::Program, "program gamma must be positive");
    }
    int precision_blocks = 0;
    for (const auto& v : variables) {
        if (v.symmetric() && v.rows != v.cols) {
            fail(ErrorCode::Program, "symmetric variable " + v.name + " must be square");
        }
    }
    for (const auto& b : blocks) {
        const Index n = std::accumulate(b.parts.begin(), b.parts.end(), Index{0});
        if (b.constant.rows() != n || b.constant.cols() != n) {
            fail(ErrorCode::Program, "block " + b.name + " constant does not match its partition");
        }
        for (const auto& t : b.terms) {
            if (t.var < 0 || t.var >= static_cast<int>(variables.size())) {
                fail(ErrorCode::Program, "block " + b.name + " references an unknown variable");
            }
        }
        if (b.precision) {
            ++precision_blocks;
            if (b.precision->offset + num_precisions > n) {
                fail(ErrorCode::Program, "block " + b.name + " precision term out of range");
            }
        }
    }
    if (precision_blocks != 1) {
        fail(ErrorCode::Program, "program needs exactly one block carrying the precisions");
    }
}

void accumulate_term(Matrix& out, const LmiBlock& block, const LmiTerm& term, const Matrix& value) {
    Matrix t = term.transpose ? Matrix(value.transpose()) : value;
    if (term.left.size() > 0) {
        t = term.left * t;
    }
    if (term.right.size() > 0) {
        t = t * term.right;
    }
    t *= term.scale;
    const Index r0 = block.part_offset(term.row_part);
    const Index c0 = block.part_offset(term.col_part);
    if (t.rows() != block.parts[term.row_part] || t.cols() != block.parts[term.col_part]) {
        fail(ErrorCode::Assignment, "lmi: term does not fit sub-block of " + block.name);
    }
    if (term.row_part == term.col_part) {
        const double w = term.symmetrize ? 1.0 : 0.5;
        out.block(r0, c0, t.rows(), t.cols()) += w * (t + t.transpose());
    } else {
        out.block(r0, c0, t.rows(), t.cols()) += t;
        out.block(c0, r0, t.cols(), t.rows()) += t.transpose();
    }
}

Matrix evaluate_block(const LmiBlock& block, const AffineLmiProgram& program, const Assignment& a) {
    if (a.values.size() != program.variables.size()) {
        fail(ErrorCode::Assignment, "assignment does not cover all variables");
    }
    Matrix out = block.constant;
    for (const auto& term : block.terms) {
        const auto& spec = program.variables[static_cast<std::size_t>(term.var)];
        const Matrix& v = a.values[static_cast<std::size_t>(term.var)];
        if (v.rows() != spec.rows || v.cols() != spec.cols) {
            fail(ErrorCode::Assignment, "assignment for " + spec.name + " has the wrong shape");
        }
        accumulate_term(out, block, term, v);
    }
    if (block.precision) {
        if (a.p.size() != program.num_precisions) {
            fail(ErrorCode::Assignment, "assignment precision vector has the wrong length");
        }
        const Index o = block.precision->offset;
        for (Index i = 0; i < a.p.size(); ++i) {
            out(o + i, o + i) -= block.precision->coefficient * a.p[i];
        }
    }
    return out;
}

Certificate certify(const AffineLmiProgram& program, const Assignment& a, double margin_tol,
                    double eps_p) {
    Certificate cert;
    bool ok = true;
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& b : program.blocks) {
        const Matrix v = evaluate_block(b, program, a);
        const double lmax = linalg::sym_eig(0.5 * (v + v.transpose())).values.maxCoeff();
        cert.block_lambda_max.push_back(lmax);
        worst = std::max(worst, lmax);
        ok = ok && lmax < -margin_tol;
    }
    for (std::size_t i = 0; i < program.variables.size(); ++i) {
        if (program.variables[i].structure == VarStructure::Spd) {
            const Matrix& x = a.values[i];
            const double lmin = linalg::sym_eig(0.5 * (x + x.transpose())).values.minCoeff();
            cert.var_lambda_min.push_back(lmin);
            ok = ok && lmin >= eps_p;
        } else {
            cert.var_lambda_min.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
    ok = ok && (a.p.array() >= eps_p).all();
    cert.margin = -worst;
    cert.feasible = ok;
    return cert;
}

AffineLmiProgram build_hinf_observer(const LtiPlant& plant, const MeasurementModel& meas,
                                     const Vector& rho, double gamma) {
    check_inputs(plant, meas, rho, gamma);
    const Index nx = plant.nx(), nd = plant.nd(), nz = plant.nz(), ny = meas.ny();
    auto prog = base_program(meas, rho, Framework::Hinf, EstimatorKind::Observer, gamma);
    prog.variables = {{"X", nx, nx, VarStructure::Spd}, {"Y", nx, ny, VarStructure::General}};
    constexpr int X = 0, Y = 1;

    BlockBuilder m("M", {nx, nd, nz, ny});
    m.term(X, 0, 0, {}, plant.A, false, 1.0, true)
        .term(Y, 0, 0, {}, meas.Cy, false, 1.0, true)
        .term(X, 0, 1, {}, plant.Bd)
        .term(Y, 0, 1, {}, meas.Dd)
        .constant(0, 2, plant.Cz.transpose())
        .term(Y, 0, 3)
        .constant(1, 1, -gamma * eye(nd))
        .constant(2, 2, -gamma * eye(nz))
        .precision(3, gamma);
    prog.blocks.push_back(m.build());
    prog.validate();
    return prog;
}

AffineLmiProgram build_h2_observer(const LtiPlant& plant, const MeasurementModel& meas,
                                   const Vector& rho, double gamma) {
    check_inputs(plant, meas, rho, gamma);
    const Index nx = plant.nx(), nd = plant.nd(), nz = plant.nz(), ny = meas.ny();
    auto prog = base_program(meas, rho, Framework::H2, EstimatorKind::Observer, gamma);
    prog.variables = {{"X", nx, nx, VarStructure::Spd},
                      {"Y", nx, ny, VarStructure::General},
                      {"trace_Q", nz, nz, VarStructure::Symmetric}};
    constexpr int X = 0, Y = 1, Q = 2;

    BlockBuilder m("M", {nx, nd, ny});
    m.term(X, 0, 0, {}, plant.A, false, 1.0, true)
        .term(Y, 0, 0, {}, meas.Cy, false, 1.0, true)
        .term(X, 0, 1, {}, plant.Bd)
        .term(Y, 0, 1, {}, meas.Dd)
        .term(Y, 0, 2)
        .constant(1, 1, -eye(nd))
        .precision(2, 1.0);
    prog.blocks.push_back(m.build());

    BlockBuilder qx("QX", {nz, nx});
    qx.term(Q, 0, 0, {}, {}, false, -1.0).constant(0, 1, plant.Cz).term(X, 1, 1, {}, {}, false, -1.0);
    prog.blocks.push_back(qx.build());

    prog.blocks.push_back(trace_block(Q, nz, gamma));
    prog.validate();
    return prog;
}

AffineLmiProgram build_hinf_filter(const LtiPlant& plant, const MeasurementModel& meas,
                                   const Vector& rho, double gamma) {
    check_inputs(plant, meas, rho, gamma);
    const Index nx = plant.nx(), nd = plant.nd(), nz = plant.nz(), ny = meas.ny();
    auto prog = base_program(meas, rho, Framework::Hinf, EstimatorKind::Filter, gamma);
    prog.variables = {{"X", nx, nx, VarStructure::Spd},
                      {"R", nx, nx, VarStructure::Symmetric},
                      {"Y", nx, ny, VarStructure::General},
                      {"P", nx, nx, VarStructure::General},
                      {"filter_Q", nz, nx, VarStructure::General}};
    constexpr int X = 0, R = 1, Y = 2, P = 3, Q = 4;
    const Matrix at = plant.A.transpose();
    const Matrix cyt = meas.Cy.transpose();

    BlockBuilder m("M", {nx, nx, nz, nd, ny});
    m.term(R, 0, 0, {}, plant.A, false, 1.0, true)
        .term(Y, 0, 0, {}, meas.Cy, false, 1.0, true)
        .term(P, 0, 1)
        .term(X, 0, 1, at, {}, true)
        .term(Y, 0, 1, cyt, {}, true)
        .constant(0, 2, plant.Cz.transpose())
        .term(R, 0, 3, {}, plant.Bd)
        .term(Y, 0, 3, {}, meas.Dd)
        .term(Y, 0, 4)
        .term(P, 1, 1, {}, {}, false, 1.0, true)
        .term(Q, 1, 2, {}, {}, true, -1.0)
        .term(X, 1, 3, {}, plant.Bd)
        .term(Y, 1, 3, {}, meas.Dd)
        .term(Y, 1, 4)
        .constant(2, 2, -gamma * eye(nz))
        .constant(3, 3, -gamma * eye(nd))
        .precision(4, gamma);
    prog.blocks.push_back(m.build());

    BlockBuilder xr("XR", {nx});
    xr.term(X, 0, 0).term(R, 0, 0, {}, {}, false, -1.0);
    prog.blocks.push_back(xr.build());
    prog.validate();
    return prog;
}

AffineLmiProgram build_h2_filter(const LtiPlant& plant, const MeasurementModel& meas,
                                 const Vector& rho, double gamma) {
    check_inputs(plant, meas, rho, gamma);
    const Index nx = plant.nx(), nd = plant.nd(), nz = plant.nz(), ny = meas.ny();
    auto prog = base_program(meas, rho, Framework::H2, EstimatorKind::Filter, gamma);
    prog.variables = {{"X", nx, nx, VarStructure::Symmetric},
                      {"R", nx, nx, VarStructure::Symmetric},
                      {"Y", nx, ny, VarStructure::General},
                      {"P", nx, nx, VarStructure::General},
                      {"trace_Q", nz, nz, VarStructure::Symmetric},
                      {"N", nz, nx, VarStructure::General}};
    constexpr int X = 0, R = 1, Y = 2, P = 3, Q = 4, N = 5;
    const Matrix at = plant.A.transpose();
    const Matrix cyt = meas.Cy.transpose();

    BlockBuilder m("M", {nx, nx, nd, ny});
    m.term(R, 0, 0, {}, plant.A, false, 1.0, true)
        .term(Y, 0, 0, {}, meas.Cy, false, 1.0, true)
        .term(P, 0, 1)
        .term(X, 0, 1, at, {}, true)
        .term(Y, 0, 1, cyt, {}, true)
        .term(R, 0, 2, {}, plant.Bd)
        .term(Y, 0, 2, {}, meas.Dd)
        .term(Y, 0, 3)
        .term(P, 1, 1, {}, {}, false, 1.0, true)
        .term(X, 1, 2, {}, plant.Bd)
        .term(Y, 1, 2, {}, meas.Dd)
        .term(Y, 1, 3)
        .constant(2, 2, -eye(nd))
        .precision(3, 1.0);
    prog.blocks.push_back(m.build());

    BlockBuilder xr("XR", {nx});
    xr.term(X, 0, 0).term(R, 0, 0, {}, {}, false, -1.0);
    prog.blocks.push_back(xr.build());

    prog.blocks.push_back(trace_block(Q, nz, gamma));

    BlockBuilder qn("QN", {nz, nx, nx});
    qn.term(Q, 0, 0, {}, {}, false, -1.0)
        .constant(0, 1, plant.Cz)
        .term(N, 0, 2)
        .term(R, 1, 1, {}, {}, false, -1.0)
        .term(X, 1, 2, {}, {}, false, -1.0)
        .term(X, 2, 2, {}, {}, false, -1.0);
    prog.blocks.push_back(qn.build());
    prog.validate();
    return prog;
}

AffineLmiProgram build_program(Framework framework, EstimatorKind kind, const LtiPlant& plant,
                               const MeasurementModel& meas, const Vector& rho, double gamma) {
    if (kind == EstimatorKind::Observer) {
        return framework == Framework::Hinf ? build_hinf_observer(plant, meas, rho, gamma)
                                            : build_h2_observer(plant, meas, rho, gamma);
    }
    return framework == Framework::Hinf ? build_hinf_filter(plant, meas, rho, gamma)
                                        : build_h2_filter(plant, meas, rho, gamma);
}

}  // namespace precis::lmi
