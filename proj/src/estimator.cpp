#include "precis/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "precis/error.hpp"
#include "precis/linalg.hpp"

namespace precis::estimator {

namespace {

constexpr double kMaxCondition = 1e12;
constexpr double kDeltaStart = 1e-3;
constexpr double kDeltaCap = 0.2;

const Matrix& value_of(const lmi::AffineLmiProgram& program, const lmi::Assignment& a,
                       const std::string& name) {
    const int i = program.var_index(name);
    if (i < 0 || static_cast<std::size_t>(i) >= a.values.size()) {
        fail(ErrorCode::Assignment, "assignment has no variable " + name);
    }
    return a.values[static_cast<std::size_t>(i)];
}

// Imaginary parts of the Hamiltonian eigenvalues that lie on (or numerically
// near) the imaginary axis, at level gamma.
std::vector<double> axis_crossings(const ErrorSystem& sys, double gamma) {
    const Index n = sys.A.rows();
    Matrix h(2 * n, 2 * n);
    h.topLeftCorner(n, n) = sys.A;
    h.topRightCorner(n, n) = sys.B * sys.B.transpose() / gamma;
    h.bottomLeftCorner(n, n) = -sys.C.transpose() * sys.C / gamma;
    h.bottomRightCorner(n, n) = -sys.A.transpose();
    Eigen::EigenSolver<Matrix> es(h, false);
    const double scale = std::max(1.0, h.cwiseAbs().rowwise().sum().maxCoeff());
    std::vector<double> w;
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
        const auto lambda = es.eigenvalues()[i];
        if (std::abs(lambda.real()) <= 1e-6 * scale && lambda.imag() >= 0.0) {
            w.push_back(lambda.imag());
        }
    }
    std::sort(w.begin(), w.end());
    return w;
}

// Largest sigma_max over the candidate frequencies and the midpoints between
// consecutive candidates.
double probe(const ErrorSystem& sys, const std::vector<double>& w) {
    double best = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        best = std::max(best, sigma_max_at(sys, w[i]));
        if (i + 1 < w.size()) {
            best = std::max(best, sigma_max_at(sys, 0.5 * (w[i] + w[i + 1])));
        }
    }
    return best;
}

}  // namespace

void DesignSpec::validate(const SensorCatalog& catalog) const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        fail(ErrorCode::InvalidArgument, "design: gamma must be positive");
    }
    if (subset.empty()) {
        fail(ErrorCode::EmptySubset, "design: empty sensor subset");
    }
    for (int id : subset.ids()) {
        if (id < 0 || id >= static_cast<int>(catalog.size())) {
            fail(ErrorCode::InvalidSensor, "design: sensor id " + std::to_string(id) + " out of range");
        }
    }
    if (rho.size() != 0 && rho.size() != catalog.size() && rho.size() != subset.size()) {
        fail(ErrorCode::Dimension, "design: weights must have one entry per catalog or subset sensor");
    }
    if (rho.size() != 0 && (rho.array() <= 0.0).any()) {
        fail(ErrorCode::InvalidArgument, "design: weights must be positive");
    }
}

Vector DesignSpec::subset_weights(const SensorCatalog& catalog) const {
    if (rho.size() == subset.size() && rho.size() != catalog.size()) {
        return rho;
    }
    const Vector& all = rho.size() == 0 ? catalog.weights() : rho;
    Vector out(subset.size());
    Index k = 0;
    for (int id : subset.ids()) {
        out[k++] = all[id];
    }
    return out;
}

EstimatorMatrices recover(const lmi::Assignment& assignment, const lmi::AffineLmiProgram& program) {
    const Matrix& x = value_of(program, assignment, "X");
    Eigen::JacobiSVD<Matrix> svd(x);
    const auto& s = svd.singularValues();
    const double cond = s[s.size() - 1] > 0.0 ? s[0] / s[s.size() - 1]
                                              : std::numeric_limits<double>::infinity();
    if (!(cond <= kMaxCondition)) {
        std::ostringstream os;
        os << "recover: X is numerically singular (condition " << cond << ")";
        fail(ErrorCode::Recovery, os.str());
    }
    const Eigen::PartialPivLU<Matrix> lu(x);
    EstimatorMatrices out;
    out.kind = program.meta.kind;
    const Matrix& y = value_of(program, assignment, "Y");
    if (out.kind == EstimatorKind::Observer) {
        out.L = lu.solve(y);
        return out;
    }
    out.AF = lu.solve(value_of(program, assignment, "P"));
    out.BF = lu.solve(y);
    out.CF = program.meta.framework == Framework::Hinf ? value_of(program, assignment, "filter_Q")
                                                       : Matrix(-value_of(program, assignment, "N"));
    return out;
}

ErrorSystem error_system(const LtiPlant& plant, const MeasurementModel& meas,
                         const EstimatorMatrices& est, const Vector& p) {
    const auto w = augment_disturbance(plant, meas, sigma_from_precision(p));
    ErrorSystem sys;
    if (est.kind == EstimatorKind::Observer) {
        if (est.L.rows() != plant.nx() || est.L.cols() != meas.ny()) {
            fail(ErrorCode::Dimension, "error_system: observer gain has the wrong shape");
        }
        sys.A = plant.A + est.L * meas.Cy;
        sys.B = w.Bw + est.L * w.Dw;
        sys.C = plant.Cz;
        return sys;
    }
    const Index nx = plant.nx();
    const Index nf = est.AF.rows();
    if (est.AF.cols() != nf || est.BF.rows() != nf || est.BF.cols() != meas.ny() ||
        est.CF.rows() != plant.nz() || est.CF.cols() != nf) {
        fail(ErrorCode::Dimension, "error_system: filter matrices have inconsistent shapes");
    }
    sys.A = Matrix::Zero(nx + nf, nx + nf);
    sys.A.topLeftCorner(nx, nx) = plant.A;
    sys.A.bottomLeftCorner(nf, nx) = est.BF * meas.Cy;
    sys.A.bottomRightCorner(nf, nf) = est.AF;
    sys.B.resize(nx + nf, w.Bw.cols());
    sys.B.topRows(nx) = w.Bw;
    sys.B.bottomRows(nf) = est.BF * w.Dw;
    sys.C.resize(plant.nz(), nx + nf);
    sys.C.leftCols(nx) = plant.Cz;
    sys.C.rightCols(nf) = -est.CF;
    return sys;
}

double sigma_max_at(const ErrorSystem& sys, double omega) {
    using Complex = std::complex<double>;
    const Index n = sys.A.rows();
    Eigen::MatrixXcd m = -sys.A.cast<Complex>();
    m.diagonal().array() += Complex(0.0, omega);
    const Eigen::MatrixXcd x = m.partialPivLu().solve(sys.B.cast<Complex>());
    const Eigen::MatrixXcd g = sys.C.cast<Complex>() * x;
    if (g.size() == 0 || n == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g);
    return svd.singularValues()[0];
}

double hinf_norm(const ErrorSystem& sys, double tol) {
    if (!linalg::is_hurwitz(sys.A)) {
        fail(ErrorCode::Unstable, "hinf_norm: system matrix is not Hurwitz");
    }
    if (sys.B.cwiseAbs().maxCoeff() == 0.0 || sys.C.cwiseAbs().maxCoeff() == 0.0) {
        return 0.0;
    }
    // Lower bound from frequency zero and the modal frequencies.
    Eigen::EigenSolver<Matrix> es(sys.A, false);
    double lb = sigma_max_at(sys, 0.0);
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
        lb = std::max(lb, sigma_max_at(sys, std::abs(es.eigenvalues()[i].imag())));
    }
    if (lb == 0.0) {
        lb = std::numeric_limits<double>::min();
    }
    double ub = 2.0 * lb;
    for (int guard = 0; guard < 200; ++guard) {
        const double s = probe(sys, axis_crossings(sys, ub));
        if (s < ub) {
            break;
        }
        lb = s;
        ub = 2.0 * s;
    }
    for (int guard = 0; guard < 200 && ub - lb > tol * lb; ++guard) {
        const double mid = 0.5 * (lb + ub);
        const double s = probe(sys, axis_crossings(sys, mid));
        if (s >= mid) {
            lb = s;
            ub = std::max(ub, s);
        } else {
            ub = mid;
        }
    }
    return 0.5 * (lb + ub);
}

double h2_norm(const ErrorSystem& sys) {
    const Matrix p = linalg::lyap_solve(sys.A, sys.B * sys.B.transpose());
    return std::sqrt(std::max(0.0, (sys.C * p * sys.C.transpose()).trace()));
}

double system_norm(Framework framework, const ErrorSystem& sys) {
    return framework == Framework::Hinf ? hinf_norm(sys) : h2_norm(sys);
}

EstimatorResult tighten(EstimatorResult result, const LtiPlant& plant, const MeasurementModel& meas,
                        const lmi::AffineLmiProgram& program, double eps_p) {
    const double gamma = result.spec.gamma;
    const Vector p0 = result.p;
    auto attempt = [&](double delta) {
        const Vector p = (1.0 + delta) * p0;
        double norm = std::numeric_limits<double>::infinity();
        try {
            norm = system_norm(result.spec.framework, error_system(plant, meas, result.matrices, p));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Unstable) {
                throw;
            }
        }
        const auto cert = lmi::certify(program, {p, result.assignment.values}, lmi::kMarginTol, eps_p);
        result.p = p;
        result.assignment.p = p;
        result.norm = norm;
        result.objective = result.weights.dot(p);
        result.diagnostics.delta = delta;
        result.diagnostics.lmi_margin = cert.margin;
        result.diagnostics.lmi_certified = cert.feasible;
        return norm <= gamma && cert.feasible;
    };
    if (attempt(0.0)) {
        result.certified = true;
        return result;
    }
    // Norm and certificate are monotone in a uniform scaling of p, so the
    // largest step decides whether any step can succeed.
    double last = kDeltaStart;
    while (2.0 * last <= kDeltaCap) {
        last *= 2.0;
    }
    if (!attempt(last)) {
        std::ostringstream os;
        os << "design could not be certified: norm " << result.norm << " vs gamma " << gamma
           << ", LMI margin " << result.diagnostics.lmi_margin;
        fail(ErrorCode::InfeasibleDesign, os.str());
    }
    for (double delta = kDeltaStart; delta <= kDeltaCap; delta *= 2.0) {
        if (attempt(delta)) {
            result.certified = true;
            return result;
        }
    }
    std::ostringstream os;
    os << "design could not be certified: norm " << result.norm << " vs gamma " << gamma
       << ", LMI margin " << result.diagnostics.lmi_margin;
    fail(ErrorCode::InfeasibleDesign, os.str());
}

EstimatorResult design(const LtiPlant& plant, const SensorCatalog& catalog, const DesignSpec& spec,
                       const admm::AdmmConfig& config, std::vector<admm::TraceRow>* trace) {
    plant.validate();
    catalog.validate(plant);
    spec.validate(catalog);
    const MeasurementModel meas = assemble_measurement(plant, catalog, spec.subset);
    if (spec.kind == EstimatorKind::Observer && !hautus_detectable(plant.A, meas.Cy)) {
        fail(ErrorCode::InfeasibleDesign, "design: (A, C_y) is not detectable for subset {" +
                                              spec.subset.to_string() + "}");
    }
    EstimatorResult result;
    result.spec = spec;
    result.weights = spec.subset_weights(catalog);
    const auto program = lmi::build_program(spec.framework, spec.kind, plant, meas, result.weights, spec.gamma);

    admm::AdmmConfig cfg = config;
    cfg.record_trace = trace != nullptr;
    admm::AdmmSolver solver(program, cfg);
    auto sol = solver.solve();
    if (trace) {
        *trace = std::move(sol.trace);
    }
    auto& d = result.diagnostics;
    d.status = sol.status;
    d.iterations = sol.iterations;
    d.primal_residual = sol.primal_residual;
    d.dual_residual = sol.dual_residual;
    d.solver_objective = sol.objective;
    if (sol.status == admm::AdmmStatus::Infeasible) {
        fail(ErrorCode::InfeasibleDesign, "design: solver declared the program infeasible for subset {" +
                                              spec.subset.to_string() + "}");
    }
    result.assignment = sol.assignment;
    result.p = sol.assignment.p;
    result.matrices = recover(sol.assignment, program);
    return tighten(std::move(result), plant, meas, program, cfg.eps_p);
}

}  // namespace precis::estimator
