#include "precis/admm.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <utility>

#include <Eigen/Eigenvalues>

#include "precis/error.hpp"
#include "precis/linalg.hpp"

namespace precis::admm {

namespace {

using lmi::AffineLmiProgram;
using lmi::LmiBlock;
using lmi::VarStructure;

double sq_norm(const std::vector<Matrix>& ms) {
    double s = 0.0;
    for (const auto& m : ms) {
        s += m.squaredNorm();
    }
    return s;
}

// svec weights in vec_r order (the two orders coincide).
Vector svec_weights(Index n) {
    Vector w(n * (n + 1) / 2);
    Index k = 0;
    for (Index j = 0; j < n; ++j) {
        for (Index i = j; i < n; ++i) {
            w[k++] = i == j ? 1.0 : std::sqrt(2.0);
        }
    }
    return w;
}

Vector to_coords(const lmi::MatrixVarSpec& spec, const Matrix& v) {
    if (spec.symmetric()) {
        return linalg::ReducedVecMap(spec.rows).vec_r(0.5 * (v + v.transpose()));
    }
    return linalg::vec(v);
}

Matrix from_coords(const lmi::MatrixVarSpec& spec, const Vector& x) {
    if (spec.symmetric()) {
        return linalg::ReducedVecMap(spec.rows).unvec_r(x);
    }
    return linalg::unvec(x, spec.rows, spec.cols);
}

// Adds "X - eps_p I > 0" blocks for spd variables (cone-slack mode).
AffineLmiProgram with_cone_blocks(const AffineLmiProgram& program, double eps_p) {
    AffineLmiProgram out = program;
    for (std::size_t i = 0; i < program.variables.size(); ++i) {
        const auto& v = program.variables[i];
        if (v.structure != VarStructure::Spd) {
            continue;
        }
        LmiBlock b;
        b.name = "cone:" + v.name;
        b.parts = {v.rows};
        b.constant = eps_p * Matrix::Identity(v.rows, v.rows);
        b.terms.push_back({static_cast<int>(i), 0, 0, {}, {}, false, -1.0, false});
        out.blocks.push_back(std::move(b));
    }
    return out;
}

struct VarCache {
    std::vector<int> blocks;  // internal block indices containing the variable
    std::vector<Index> offsets;  // first coefficient row of each of those blocks
    Matrix coef;              // stacked svec rows of those blocks
    Matrix coef_pinv;
    Matrix inner_pinv;        // [coef; sqrt(mu_hat/2) W]^+ for the inner loop
    Vector weights;           // W diagonal (symmetric variables)
    // Rows of coef that are not identically zero, as (block, svec row).
    std::vector<std::pair<int, Index>> rows;
    Matrix coef_c;            // coef restricted to `rows`
    Matrix coef_c_pinv;
    Matrix inner_c_pinv;
    bool full_rank = false;   // coef_c_pinv * coef_c == I
};

struct InnerResult {
    Matrix z;
    int iterations = 0;
};

InnerResult run_inner(const Matrix& coef, const Matrix& coef_pinv, const Matrix& stacked_pinv,
                      const Vector& w, const Vector& r0, Index n, const AdmmConfig& cfg) {
    const linalg::ReducedVecMap map(n);
    const double c = std::sqrt(cfg.inner_mu / 2.0);
    const Vector x_ls = -(coef_pinv * r0);
    Matrix z = linalg::psd_project(map.unvec_r(x_ls), cfg.eps_p);
    Matrix u = Matrix::Zero(n, n);
    Vector rhs(coef.rows() + w.size());
    rhs.head(coef.rows()) = -r0;
    int it = 0;
    for (it = 1; it <= cfg.inner_max_iter; ++it) {
        rhs.tail(w.size()) = c * w.cwiseProduct(map.vec_r(z - u));
        const Matrix xh = map.unvec_r(stacked_pinv * rhs);
        const Matrix z_prev = z;
        z = linalg::psd_project(0.5 * ((xh + u) + (xh + u).transpose()), cfg.eps_p);
        u += xh - z;
        const double scale = std::max(1.0, z.norm());
        if ((xh - z).norm() <= cfg.inner_tol * scale && (z - z_prev).norm() <= cfg.inner_tol * scale) {
            break;
        }
    }
    return {z, std::min(it, cfg.inner_max_iter)};
}

}  // namespace

const char* to_string(XUpdateMode mode) noexcept {
    switch (mode) {
        case XUpdateMode::ProjectedLeastSquares: return "projected-least-squares";
        case XUpdateMode::InnerAdmm: return "inner-admm";
        case XUpdateMode::ConeSlack: return "cone-slack";
    }
    return "?";
}

XUpdateMode parse_mode(const std::string& text) {
    if (text == "projected-least-squares" || text == "projected") {
        return XUpdateMode::ProjectedLeastSquares;
    }
    if (text == "inner-admm" || text == "inner") {
        return XUpdateMode::InnerAdmm;
    }
    if (text == "cone-slack" || text == "cone") {
        return XUpdateMode::ConeSlack;
    }
    fail(ErrorCode::InvalidArgument, "unknown x-update mode '" + text + "'");
}

const char* to_string(AdmmStatus status) noexcept {
    switch (status) {
        case AdmmStatus::Converged: return "converged";
        case AdmmStatus::MaxIter: return "max-iter";
        case AdmmStatus::Infeasible: return "infeasible";
    }
    return "?";
}

void AdmmConfig::validate() const {
    const bool ok = mu > 0 && eps_abs > 0 && eps_rel > 0 && max_iter >= 1 && eps_p > 0 &&
                    eps_h > 0 && margin_factor >= 0 && inner_mu > 0 && inner_max_iter >= 1 && inner_tol > 0;
    if (!ok) {
        fail(ErrorCode::InvalidArgument, "admm config: all parameters must be positive");
    }
}

Matrix term_coefficients(const LmiBlock& block, const AffineLmiProgram& program, int var) {
    const auto& spec = program.variables.at(static_cast<std::size_t>(var));
    const Index n = block.size();
    const Index nv = spec.rows * spec.cols;
    Matrix full = Matrix::Zero(n * n, nv);
    for (const auto& t : block.terms) {
        if (t.var != var) {
            continue;
        }
        const Index opr = t.transpose ? spec.cols : spec.rows;
        const Index opc = t.transpose ? spec.rows : spec.cols;
        const Matrix left = t.left.size() > 0 ? t.left : Matrix::Identity(opr, opr);
        const Matrix right = t.right.size() > 0 ? t.right : Matrix::Identity(opc, opc);
        // vec(L op(V) R) = (R^T kron L) vec(op(V)), vec(V^T) = T vec(V)
        Matrix k = t.scale * linalg::kron(right.transpose(), left);
        if (t.transpose) {
            k = k * linalg::commutation_matrix(spec.rows, spec.cols);
        }
        const Index tr = left.rows();
        const Index tc = right.cols();
        const Index r0 = block.part_offset(t.row_part);
        const Index c0 = block.part_offset(t.col_part);
        for (Index c = 0; c < tc; ++c) {
            for (Index a = 0; a < tr; ++a) {
                const auto row = k.row(a + c * tr);
                if (t.row_part == t.col_part) {
                    const double w = t.symmetrize ? 1.0 : 0.5;
                    full.row((r0 + a) + (r0 + c) * n) += w * row;
                    full.row((r0 + c) + (r0 + a) * n) += w * row;
                } else {
                    full.row((r0 + a) + (c0 + c) * n) += row;
                    full.row((c0 + c) + (r0 + a) * n) += row;
                }
            }
        }
    }
    Matrix rows(n * (n + 1) / 2, nv);
    Index k = 0;
    for (Index j = 0; j < n; ++j) {
        for (Index i = j; i < n; ++i) {
            rows.row(k++) = (i == j ? 1.0 : std::sqrt(2.0)) * full.row(i + j * n);
        }
    }
    if (spec.symmetric()) {
        return linalg::reduced_columns(rows, linalg::ReducedVecMap(spec.rows));
    }
    return rows;
}

Matrix inner_psd_lstsq(const Matrix& a, const Vector& v, Index n, const AdmmConfig& config) {
    const linalg::ReducedVecMap map(n);
    if (a.cols() != map.size() || a.rows() != v.size()) {
        fail(ErrorCode::Dimension, "inner_psd_lstsq: coefficient shape mismatch");
    }
    const Vector w = svec_weights(n);
    Matrix stacked(a.rows() + w.size(), a.cols());
    stacked.topRows(a.rows()) = a;
    stacked.bottomRows(w.size()) = std::sqrt(config.inner_mu / 2.0) * Matrix(w.asDiagonal());
    return run_inner(a, linalg::pinv(a), linalg::pinv(stacked), w, v, n, config).z;
}

struct AdmmSolver::Impl {
    AffineLmiProgram program;   // as given
    AffineLmiProgram internal;  // plus cone blocks in cone-slack mode
    AdmmConfig config;
    std::vector<VarCache> vars;
    int precision_block = -1;
    double dim_sqrt = 0.0;  // sqrt(sum n_b^2)

    Impl(AffineLmiProgram prog, AdmmConfig cfg) : program(std::move(prog)), config(cfg) {
        config.validate();
        program.validate();
        internal = config.mode == XUpdateMode::ConeSlack ? with_cone_blocks(program, config.eps_p)
                                                         : program;
        double dim = 0.0;
        for (std::size_t b = 0; b < internal.blocks.size(); ++b) {
            const auto n = static_cast<double>(internal.blocks[b].size());
            dim += n * n;
            if (internal.blocks[b].precision) {
                precision_block = static_cast<int>(b);
            }
        }
        dim_sqrt = std::sqrt(dim);

        vars.resize(internal.variables.size());
        for (std::size_t v = 0; v < internal.variables.size(); ++v) {
            const auto& spec = internal.variables[v];
            std::vector<Matrix> parts;
            Index rows = 0;
            for (std::size_t b = 0; b < internal.blocks.size(); ++b) {
                const auto& blk = internal.blocks[b];
                const bool uses = std::any_of(blk.terms.begin(), blk.terms.end(),
                                              [&](const lmi::LmiTerm& t) { return t.var == static_cast<int>(v); });
                if (!uses) {
                    continue;
                }
                vars[v].blocks.push_back(static_cast<int>(b));
                vars[v].offsets.push_back(rows);
                parts.push_back(term_coefficients(blk, internal, static_cast<int>(v)));
                rows += parts.back().rows();
            }
            if (parts.empty()) {
                fail(ErrorCode::Program, "variable " + spec.name + " appears in no block");
            }
            Matrix coef(rows, parts.front().cols());
            Index r = 0;
            for (const auto& part : parts) {
                coef.middleRows(r, part.rows()) = part;
                r += part.rows();
            }
            vars[v].coef = std::move(coef);
            vars[v].coef_pinv = linalg::pinv(vars[v].coef);
            if (spec.structure == VarStructure::Spd && config.mode == XUpdateMode::InnerAdmm) {
                vars[v].weights = svec_weights(spec.rows);
                const auto& w = vars[v].weights;
                Matrix stacked(vars[v].coef.rows() + w.size(), vars[v].coef.cols());
                stacked.topRows(vars[v].coef.rows()) = vars[v].coef;
                stacked.bottomRows(w.size()) = std::sqrt(config.inner_mu / 2.0) * Matrix(w.asDiagonal());
                vars[v].inner_pinv = linalg::pinv(stacked);
            }
            compress(vars[v], spec);
        }

        lmi::Assignment zero;
        zero.p = Vector::Zero(internal.num_precisions);
        for (const auto& v : internal.variables) {
            zero.values.push_back(Matrix::Zero(v.rows, v.cols));
        }
        for (const auto& b : internal.blocks) {
            constants.push_back(linalg::svec(lmi::evaluate_block(b, internal, zero)));
        }
        const auto& pblk = internal.blocks[static_cast<std::size_t>(precision_block)];
        for (Index i = 0; i < internal.num_precisions; ++i) {
            const Index d = pblk.precision->offset + i;
            // svec position of diagonal entry d: columns before d hold n - j rows each
            prec_rows.push_back(d * pblk.size() - d * (d - 1) / 2);
        }
    }

    void compress(VarCache& c, const lmi::MatrixVarSpec& spec) const {
        std::vector<Index> keep;
        for (std::size_t k = 0; k < c.blocks.size(); ++k) {
            const Index n = internal.blocks[static_cast<std::size_t>(c.blocks[k])].size();
            const Index len = n * (n + 1) / 2;
            for (Index i = 0; i < len; ++i) {
                if (c.coef.row(c.offsets[k] + i).cwiseAbs().maxCoeff() > 0.0) {
                    c.rows.emplace_back(c.blocks[k], i);
                    keep.push_back(c.offsets[k] + i);
                }
            }
        }
        c.coef_c.resize(static_cast<Index>(keep.size()), c.coef.cols());
        for (std::size_t j = 0; j < keep.size(); ++j) {
            c.coef_c.row(static_cast<Index>(j)) = c.coef.row(keep[j]);
        }
        c.coef_c_pinv = linalg::pinv(c.coef_c);
        const Matrix id = c.coef_c_pinv * c.coef_c;
        c.full_rank = (id - Matrix::Identity(id.rows(), id.cols())).cwiseAbs().maxCoeff() < 1e-10;
        if (c.inner_pinv.size() > 0) {
            Matrix stacked(c.coef_c.rows() + c.weights.size(), c.coef_c.cols());
            stacked.topRows(c.coef_c.rows()) = c.coef_c;
            stacked.bottomRows(c.weights.size()) = std::sqrt(config.inner_mu / 2.0) * Matrix(c.weights.asDiagonal());
            c.inner_c_pinv = linalg::pinv(stacked);
        }
        (void)spec;
    }

    Matrix eval(std::size_t b, const AdmmState& s) const {
        lmi::Assignment a{s.p, s.values};
        return lmi::evaluate_block(internal.blocks[b], internal, a);
    }

    std::vector<Matrix> eval_all(const AdmmState& s) const {
        std::vector<Matrix> out;
        out.reserve(internal.blocks.size());
        lmi::Assignment a{s.p, s.values};
        for (const auto& b : internal.blocks) {
            out.push_back(lmi::evaluate_block(b, internal, a));
        }
        return out;
    }

    Vector p_update(const AdmmState& s, const Matrix& m_prec) const {
        const auto& blk = internal.blocks[static_cast<std::size_t>(precision_block)];
        const auto pb = static_cast<std::size_t>(precision_block);
        const double cp = blk.precision->coefficient;
        const Index o = blk.precision->offset;
        const Index np = internal.num_precisions;
        // c = diagonal of (M without the p term) + H + U on the precision sub-block
        Vector c(np);
        for (Index i = 0; i < np; ++i) {
            c[i] = m_prec(o + i, o + i) + cp * s.p[i] + s.H[pb](o + i, o + i) + s.U[pb](o + i, o + i);
        }
        const Vector a = c / cp;
        const Vector thr = internal.weights / (config.mu * cp * cp);
        return linalg::soft_threshold(a, thr).cwiseMax(config.eps_p);
    }

    Matrix var_update(const AdmmState& s, int v, const std::vector<Matrix>& m) const {
        const auto& spec = internal.variables[static_cast<std::size_t>(v)];
        const auto& cache = vars[static_cast<std::size_t>(v)];
        Vector r(cache.coef.rows());
        Index row = 0;
        for (int b : cache.blocks) {
            const auto bi = static_cast<std::size_t>(b);
            const Vector sv = linalg::svec(m[bi] + s.H[bi] + s.U[bi]);
            r.segment(row, sv.size()) = sv;
            row += sv.size();
        }
        const Vector x_cur = to_coords(spec, s.values[static_cast<std::size_t>(v)]);
        const Vector r0 = r - cache.coef * x_cur;
        if (spec.structure == VarStructure::Spd) {
            if (config.mode == XUpdateMode::InnerAdmm) {
                return run_inner(cache.coef, cache.coef_pinv, cache.inner_pinv, cache.weights, r0,
                                 spec.rows, config)
                    .z;
            }
            if (config.mode == XUpdateMode::ProjectedLeastSquares) {
                return linalg::psd_project(from_coords(spec, -(cache.coef_pinv * r0)), config.eps_p);
            }
        }
        return from_coords(spec, -(cache.coef_pinv * r0));
    }

    std::vector<Matrix> slack(const AdmmState& s, const std::vector<Matrix>& m) const {
        std::vector<Matrix> h(m.size());
        for (std::size_t b = 0; b < m.size(); ++b) {
            const Matrix t = -m[b] - s.U[b];
            h[b] = linalg::psd_project(0.5 * (t + t.transpose()), std::max(config.eps_h, s.slack_floor));
        }
        return h;
    }

    Residuals residuals(const std::vector<Matrix>& m, const std::vector<Matrix>& h,
                        const std::vector<Matrix>& h_prev, const std::vector<Matrix>& u) const {
        Residuals r;
        double pr = 0.0, du = 0.0;
        for (std::size_t b = 0; b < m.size(); ++b) {
            pr += (m[b] + h[b]).squaredNorm();
            du += (h[b] - h_prev[b]).squaredNorm();
        }
        r.primal = std::sqrt(pr);
        r.dual = config.mu * std::sqrt(du);
        r.eps_primal = dim_sqrt * config.eps_abs +
                       config.eps_rel * std::sqrt(std::max(sq_norm(m), sq_norm(h)));
        r.eps_dual = dim_sqrt * config.eps_abs + config.eps_rel * config.mu * std::sqrt(sq_norm(u));
        return r;
    }

    // One iteration with block values kept current in `m`.
    void iterate(AdmmState& s, std::vector<Matrix>& m) const {
        const auto pb = static_cast<std::size_t>(precision_block);
        s.p = p_update(s, m[pb]);
        m[pb] = eval(pb, s);
        for (std::size_t v = 0; v < internal.variables.size(); ++v) {
            s.values[v] = var_update(s, static_cast<int>(v), m);
            for (int b : vars[v].blocks) {
                m[static_cast<std::size_t>(b)] = eval(static_cast<std::size_t>(b), s);
            }
        }
        s.H = slack(s, m);
        for (std::size_t b = 0; b < m.size(); ++b) {
            s.U[b] += m[b] + s.H[b];
        }
        ++s.iteration;
    }

    // Iterates of the vectorized loop: coordinates and svec block values.
    struct Flat {
        Vector p;
        std::vector<Vector> x, m, h, u;
    };

    Flat flatten(const AdmmState& s) const {
        Flat f;
        f.p = s.p;
        for (std::size_t v = 0; v < internal.variables.size(); ++v) {
            f.x.push_back(to_coords(internal.variables[v], s.values[v]));
        }
        const auto m = eval_all(s);
        for (std::size_t b = 0; b < m.size(); ++b) {
            f.m.push_back(linalg::svec(m[b]));
            f.h.push_back(linalg::svec(s.H[b]));
            f.u.push_back(linalg::svec(s.U[b]));
        }
        return f;
    }

    // Block values recomputed from the coordinates (limits drift of the
    // incremental updates).
    void refresh(Flat& f) const {
        for (std::size_t b = 0; b < f.m.size(); ++b) {
            f.m[b] = constants[b];
        }
        for (std::size_t v = 0; v < vars.size(); ++v) {
            const auto& c = vars[v];
            for (std::size_t k = 0; k < c.blocks.size(); ++k) {
                auto& mb = f.m[static_cast<std::size_t>(c.blocks[k])];
                mb += c.coef.middleRows(c.offsets[k], mb.size()) * f.x[v];
            }
        }
        const auto pb = static_cast<std::size_t>(precision_block);
        const double cp = internal.blocks[pb].precision->coefficient;
        for (Index i = 0; i < f.p.size(); ++i) {
            f.m[pb][prec_rows[static_cast<std::size_t>(i)]] -= cp * f.p[i];
        }
    }

    void iterate_flat(Flat& f, std::vector<Eigen::SelfAdjointEigenSolver<Matrix>>& eig,
                      double floor) const {
        const auto pb = static_cast<std::size_t>(precision_block);
        const double cp = internal.blocks[pb].precision->coefficient;
        const Index np = internal.num_precisions;
        Vector c(np);
        for (Index i = 0; i < np; ++i) {
            const Index k = prec_rows[static_cast<std::size_t>(i)];
            c[i] = f.m[pb][k] + cp * f.p[i] + f.h[pb][k] + f.u[pb][k];
        }
        const Vector p = linalg::soft_threshold(c / cp, internal.weights / (config.mu * cp * cp))
                             .cwiseMax(config.eps_p);
        for (Index i = 0; i < np; ++i) {
            f.m[pb][prec_rows[static_cast<std::size_t>(i)]] -= cp * (p[i] - f.p[i]);
        }
        f.p = p;

        for (std::size_t v = 0; v < vars.size(); ++v) {
            const auto& spec = internal.variables[v];
            const auto& cache = vars[v];
            Vector r(cache.coef_c.rows());
            for (std::size_t k = 0; k < cache.rows.size(); ++k) {
                const auto [b, row] = cache.rows[k];
                const auto bi = static_cast<std::size_t>(b);
                r[static_cast<Index>(k)] = f.m[bi][row] + f.h[bi][row] + f.u[bi][row];
            }
            Vector x;
            if (spec.structure == VarStructure::Spd && config.mode == XUpdateMode::InnerAdmm) {
                const Vector r0 = r - cache.coef_c * f.x[v];
                x = to_coords(spec, run_inner(cache.coef_c, cache.coef_c_pinv, cache.inner_c_pinv,
                                              cache.weights, r0, spec.rows, config)
                                        .z);
            } else if (cache.full_rank) {
                x = f.x[v] - cache.coef_c_pinv * r;
            } else {
                x = -(cache.coef_c_pinv * (r - cache.coef_c * f.x[v]));
            }
            if (spec.structure == VarStructure::Spd && config.mode == XUpdateMode::ProjectedLeastSquares) {
                x = to_coords(spec, linalg::psd_project(from_coords(spec, x), config.eps_p));
            }
            const Vector dm = cache.coef_c * (x - f.x[v]);
            for (std::size_t k = 0; k < cache.rows.size(); ++k) {
                const auto [b, row] = cache.rows[k];
                f.m[static_cast<std::size_t>(b)][row] += dm[static_cast<Index>(k)];
            }
            f.x[v] = x;
        }

        for (std::size_t b = 0; b < f.m.size(); ++b) {
            const Vector t = -(f.m[b] + f.u[b]);
            const Index n = internal.blocks[b].size();
            const Matrix tm = linalg::unsvec(t, n);
            eig[b].compute(tm);
            const auto& lam = eig[b].eigenvalues();  // ascending
            Index k = 0;
            while (k < n && lam[k] < floor) {
                ++k;
            }
            if (k == 0) {
                f.h[b] = t;
            } else {
                const auto& q = eig[b].eigenvectors();
                Matrix hm;
                if (2 * k <= n) {
                    // raise the k low eigenvalues to the floor
                    const Matrix qk = q.leftCols(k);
                    hm = tm + qk * (floor - lam.head(k).array()).matrix().asDiagonal() * qk.transpose();
                } else {
                    const Matrix qr = q.rightCols(n - k);
                    const Matrix qk = q.leftCols(k);
                    hm = qr * lam.tail(n - k).asDiagonal() * qr.transpose() + floor * (qk * qk.transpose());
                }
                f.h[b] = linalg::svec(hm);
            }
            f.u[b] += f.m[b] + f.h[b];
        }
    }

    std::vector<Vector> constants;  // svec of each block at zero variables
    std::vector<Index> prec_rows;    // svec rows of the precision diagonal
};

AdmmSolver::AdmmSolver(lmi::AffineLmiProgram program, AdmmConfig config)
    : impl_(std::make_unique<Impl>(std::move(program), config)) {}

AdmmSolver::~AdmmSolver() = default;
AdmmSolver::AdmmSolver(AdmmSolver&&) noexcept = default;
AdmmSolver& AdmmSolver::operator=(AdmmSolver&&) noexcept = default;

const lmi::AffineLmiProgram& AdmmSolver::program() const noexcept { return impl_->program; }
const lmi::AffineLmiProgram& AdmmSolver::internal_program() const noexcept { return impl_->internal; }
const AdmmConfig& AdmmSolver::config() const noexcept { return impl_->config; }

const Matrix& AdmmSolver::coefficient(int var) const {
    return impl_->vars.at(static_cast<std::size_t>(var)).coef;
}

const Matrix& AdmmSolver::coefficient_pinv(int var) const {
    return impl_->vars.at(static_cast<std::size_t>(var)).coef_pinv;
}

AdmmState AdmmSolver::initial_state() const {
    const auto& prog = impl_->internal;
    AdmmState s;
    s.p = Vector::Ones(prog.num_precisions);
    for (const auto& v : prog.variables) {
        s.values.push_back(v.structure == VarStructure::Spd ? Matrix(Matrix::Identity(v.rows, v.cols))
                                                            : Matrix(Matrix::Zero(v.rows, v.cols)));
    }
    s.slack_floor = impl_->config.eps_h;
    s.U.resize(prog.blocks.size());
    for (std::size_t b = 0; b < prog.blocks.size(); ++b) {
        s.U[b] = Matrix::Zero(prog.blocks[b].size(), prog.blocks[b].size());
    }
    s.H = impl_->slack(s, impl_->eval_all(s));
    return s;
}

std::vector<Matrix> AdmmSolver::block_values(const AdmmState& state) const {
    return impl_->eval_all(state);
}

Vector AdmmSolver::p_update(const AdmmState& state) const {
    return impl_->p_update(state, impl_->eval(static_cast<std::size_t>(impl_->precision_block), state));
}

Matrix AdmmSolver::matrix_var_update(const AdmmState& state, int var) const {
    if (var < 0 || var >= static_cast<int>(impl_->internal.variables.size())) {
        fail(ErrorCode::Program, "matrix_var_update: unknown variable");
    }
    return impl_->var_update(state, var, impl_->eval_all(state));
}

std::vector<Matrix> AdmmSolver::slack_update(const AdmmState& state) const {
    return impl_->slack(state, impl_->eval_all(state));
}

std::vector<Matrix> AdmmSolver::dual_update(const AdmmState& state) const {
    const auto m = impl_->eval_all(state);
    std::vector<Matrix> u = state.U;
    for (std::size_t b = 0; b < u.size(); ++b) {
        u[b] += m[b] + state.H[b];
    }
    return u;
}

Residuals AdmmSolver::residuals(const AdmmState& prev, const AdmmState& cur) const {
    return impl_->residuals(impl_->eval_all(cur), cur.H, prev.H, cur.U);
}

void AdmmSolver::step(AdmmState& state) const {
    auto m = impl_->eval_all(state);
    impl_->iterate(state, m);
}

AdmmResult AdmmSolver::solve() {
    const auto& im = *impl_;
    const auto& cfg = im.config;
    AdmmState s = initial_state();
    auto f = im.flatten(s);
    std::vector<Eigen::SelfAdjointEigenSolver<Matrix>> eig(f.m.size());
    AdmmResult result;
    Residuals r;
    bool converged = false;
    std::vector<double> hist;
    double floor = std::max(cfg.eps_h, s.slack_floor);
    for (int it = 1; it <= cfg.max_iter; ++it) {
        const std::vector<Vector> h_prev = f.h;
        im.iterate_flat(f, eig, floor);
        if (it % 200 == 0) {
            im.refresh(f);
        }
        double pr = 0.0, du = 0.0, mm = 0.0, hh = 0.0, uu = 0.0;
        for (std::size_t b = 0; b < f.m.size(); ++b) {
            pr += (f.m[b] + f.h[b]).squaredNorm();
            du += (f.h[b] - h_prev[b]).squaredNorm();
            mm += f.m[b].squaredNorm();
            hh += f.h[b].squaredNorm();
            uu += f.u[b].squaredNorm();
        }
        r.primal = std::sqrt(pr);
        r.dual = cfg.mu * std::sqrt(du);
        r.eps_primal = im.dim_sqrt * cfg.eps_abs + cfg.eps_rel * std::sqrt(std::max(mm, hh));
        r.eps_dual = im.dim_sqrt * cfg.eps_abs + cfg.eps_rel * cfg.mu * std::sqrt(uu);
        floor = std::max(cfg.eps_h, cfg.margin_factor * r.eps_primal);
        hist.push_back(r.primal);
        s.iteration = it;
        if (cfg.record_trace) {
            result.trace.push_back({it, im.program.weights.dot(f.p), r.primal, r.dual});
        }
        if (r.converged()) {
            converged = true;
            break;
        }
    }

    if (converged) {
        result.status = AdmmStatus::Converged;
    } else {
        const auto mark = static_cast<std::size_t>(0.8 * static_cast<double>(hist.size()));
        const bool stuck = hist.back() >= hist[std::min(mark, hist.size() - 1)];
        result.status = (r.primal > 1e3 * r.eps_primal && stuck) ? AdmmStatus::Infeasible
                                                                  : AdmmStatus::MaxIter;
    }

    const auto& prog = im.program;
    result.assignment.p = f.p;
    for (std::size_t v = 0; v < prog.variables.size(); ++v) {
        Matrix x = from_coords(prog.variables[v], f.x[v]);
        if (prog.variables[v].structure == VarStructure::Spd) {
            x = linalg::psd_project(0.5 * (x + x.transpose()), cfg.eps_p);
        }
        result.assignment.values.push_back(std::move(x));
    }
    result.objective = prog.weights.dot(f.p);
    result.primal_residual = r.primal;
    result.dual_residual = r.dual;
    result.eps_primal = r.eps_primal;
    result.eps_dual = r.eps_dual;
    result.iterations = s.iteration;
    return result;
}

AdmmResult solve(const lmi::AffineLmiProgram& program, const AdmmConfig& config) {
    AdmmSolver solver(program, config);
    return solver.solve();
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
    os << "iter,objective,primal_residual,dual_residual\n";
    const auto old = os.precision(12);
    for (const auto& row : trace) {
        os << row.iter << ',' << row.objective << ',' << row.primal_residual << ','
           << row.dual_residual << '\n';
    }
    os.precision(old);
}

}  // namespace precis::admm
