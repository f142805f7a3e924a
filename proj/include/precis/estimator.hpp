#pragma once

#include <string>
#include <vector>

#include "precis/admm.hpp"
#include "precis/lmi.hpp"
#include "precis/model.hpp"

namespace precis::estimator {

struct DesignSpec {
    Framework framework = Framework::Hinf;
    EstimatorKind kind = EstimatorKind::Observer;
    double gamma = 1.0;
    // Empty: catalog weights. Otherwise one weight per catalog sensor or one
    // per selected sensor.
    Vector rho;
    SensorSubset subset;

    void validate(const SensorCatalog& catalog) const;
    [[nodiscard]] Vector subset_weights(const SensorCatalog& catalog) const;
};

// Observer: L. Filter: A_F, B_F, C_F.
struct EstimatorMatrices {
    EstimatorKind kind = EstimatorKind::Observer;
    Matrix L;
    Matrix AF;
    Matrix BF;
    Matrix CF;
};

struct ErrorSystem {
    Matrix A;
    Matrix B;
    Matrix C;
};

struct Diagnostics {
    admm::AdmmStatus status = admm::AdmmStatus::MaxIter;
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double solver_objective = 0.0;  // before tightening
    double delta = 0.0;             // p scaled by (1 + delta)
    double lmi_margin = 0.0;
    bool lmi_certified = false;
};

struct EstimatorResult {
    DesignSpec spec;
    Vector weights;  // per selected sensor
    Vector p;
    EstimatorMatrices matrices;
    double objective = 0.0;
    double norm = 0.0;
    bool certified = false;
    Diagnostics diagnostics;
    lmi::Assignment assignment;
};

EstimatorResult design(const LtiPlant& plant, const SensorCatalog& catalog, const DesignSpec& spec,
                       const admm::AdmmConfig& config = {},
                       std::vector<admm::TraceRow>* trace = nullptr);

// Inversion formulas of the theorems; C_F = -N for the H2 filter.
EstimatorMatrices recover(const lmi::Assignment& assignment, const lmi::AffineLmiProgram& program);

ErrorSystem error_system(const LtiPlant& plant, const MeasurementModel& meas,
                         const EstimatorMatrices& est, const Vector& p);

// Bisection on the Hamiltonian imaginary-axis test; candidate crossings are
// confirmed by evaluating sigma_max(G(i w)). Relative accuracy `tol`.
double hinf_norm(const ErrorSystem& sys, double tol = 1e-9);
double h2_norm(const ErrorSystem& sys);
double system_norm(Framework framework, const ErrorSystem& sys);

// sigma_max(C (i w I - A)^-1 B)
double sigma_max_at(const ErrorSystem& sys, double omega);

// Scales p by (1 + delta), delta = 0 then 1e-3 doubling up to 0.128, until the norm
// bound and the LMI certificate hold. Throws InfeasibleDesign otherwise.
EstimatorResult tighten(EstimatorResult result, const LtiPlant& plant, const MeasurementModel& meas,
                        const lmi::AffineLmiProgram& program, double eps_p = 1e-6);

}  // namespace precis::estimator
