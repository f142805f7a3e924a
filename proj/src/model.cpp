#include "precis/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "precis/error.hpp"

namespace precis {

namespace {

bool all_finite(const Matrix& m) {
    return m.allFinite();
}

// mt19937_64 is fully specified by the standard; the distributions are not,
// so uniform and normal draws are derived here to keep plants identical
// across standard libraries.
class PlantRng {
public:
    explicit PlantRng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    Matrix normal(Index rows, Index cols) {
        Matrix m(rows, cols);
        for (Index j = 0; j < cols; ++j) {
            for (Index i = 0; i < rows; ++i) {
                m(i, j) = normal();
            }
        }
        return m;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

Matrix random_orthogonal(PlantRng& rng, Index n) {
    Eigen::HouseholderQR<Matrix> qr(rng.normal(n, n));
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < n; ++j) {
        if (r(j, j) < 0.0) {
            q.col(j) *= -1.0;
        }
    }
    return q;
}

SensorCatalog per_state_catalog(Index nx, Index nd) {
    std::vector<SensorDef> sensors;
    for (Index i = 0; i < nx; ++i) {
        SensorDef s;
        s.id = static_cast<int>(i);
        s.C = RowVector::Zero(nx);
        s.C[i] = 1.0;
        s.D = RowVector::Zero(nd);
        s.label = "s" + std::to_string(i + 1);
        sensors.push_back(std::move(s));
    }
    return SensorCatalog(std::move(sensors), Vector::Ones(nx));
}

}  // namespace

void LtiPlant::validate() const {
    if (A.rows() < 1 || A.rows() != A.cols()) {
        fail(ErrorCode::Dimension, "plant: A must be square with N_x >= 1");
    }
    if (Bd.rows() != A.rows() || Bd.cols() < 1) {
        fail(ErrorCode::Dimension, "plant: B_d must be N_x x N_d with N_d >= 1");
    }
    if (Cz.cols() != A.rows() || Cz.rows() < 1) {
        fail(ErrorCode::Dimension, "plant: C_z must be N_z x N_x with N_z >= 1");
    }
    if (!all_finite(A) || !all_finite(Bd) || !all_finite(Cz)) {
        fail(ErrorCode::InvalidArgument, "plant: matrices must be finite");
    }
}

SensorCatalog::SensorCatalog(std::vector<SensorDef> sensors, Vector weights)
    : sensors_(std::move(sensors)), weights_(std::move(weights)) {
    if (weights_.size() != size()) {
        fail(ErrorCode::Dimension, "catalog: one weight per sensor required");
    }
    for (Index i = 0; i < size(); ++i) {
        if (sensors_[i].id != static_cast<int>(i)) {
            fail(ErrorCode::InvalidSensor, "catalog: sensor ids must be 0..N_S-1 in order");
        }
        if (!(weights_[i] > 0.0)) {
            fail(ErrorCode::InvalidArgument, "catalog: weights must be positive");
        }
    }
}

const SensorDef& SensorCatalog::sensor(int id) const {
    if (id < 0 || id >= static_cast<int>(sensors_.size())) {
        fail(ErrorCode::InvalidSensor, "catalog: sensor id " + std::to_string(id) + " out of range");
    }
    return sensors_[static_cast<std::size_t>(id)];
}

void SensorCatalog::set_weights(const Vector& w) {
    if (w.size() != size()) {
        fail(ErrorCode::Dimension, "catalog: one weight per sensor required");
    }
    if ((w.array() <= 0.0).any() || !w.allFinite()) {
        fail(ErrorCode::InvalidArgument, "catalog: weights must be positive");
    }
    weights_ = w;
}

void SensorCatalog::validate(const LtiPlant& plant) const {
    for (const auto& s : sensors_) {
        if (s.C.size() != plant.nx() || s.D.size() != plant.nd()) {
            fail(ErrorCode::Dimension, "catalog: sensor " + s.label + " rows do not match the plant");
        }
    }
}

SensorSubset::SensorSubset(std::initializer_list<int> ids) : SensorSubset(std::vector<int>(ids)) {}

SensorSubset::SensorSubset(std::vector<int> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    if (std::adjacent_find(ids_.begin(), ids_.end()) != ids_.end()) {
        fail(ErrorCode::InvalidSensor, "subset: duplicate sensor id");
    }
    if (!ids_.empty() && ids_.front() < 0) {
        fail(ErrorCode::InvalidSensor, "subset: negative sensor id");
    }
}

SensorSubset SensorSubset::all(Index n) {
    std::vector<int> ids(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        ids[static_cast<std::size_t>(i)] = static_cast<int>(i);
    }
    return SensorSubset(std::move(ids));
}

bool SensorSubset::contains(int id) const {
    return std::binary_search(ids_.begin(), ids_.end(), id);
}

SensorSubset SensorSubset::without(int id) const {
    std::vector<int> out;
    out.reserve(ids_.size());
    std::copy_if(ids_.begin(), ids_.end(), std::back_inserter(out), [id](int x) { return x != id; });
    return SensorSubset(std::move(out));
}

SensorSubset SensorSubset::unite(const SensorSubset& other) const {
    std::vector<int> out;
    std::set_union(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(),
                   std::back_inserter(out));
    return SensorSubset(std::move(out));
}

SensorSubset SensorSubset::intersect(const SensorSubset& other) const {
    std::vector<int> out;
    std::set_intersection(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(),
                          std::back_inserter(out));
    return SensorSubset(std::move(out));
}

bool SensorSubset::is_subset_of(const SensorSubset& other) const {
    return std::includes(other.ids_.begin(), other.ids_.end(), ids_.begin(), ids_.end());
}

std::string SensorSubset::to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        os << (i ? "," : "") << ids_[i] + 1;
    }
    return os.str();
}

MeasurementModel assemble_measurement(const LtiPlant& plant, const SensorCatalog& catalog,
                                      const SensorSubset& subset) {
    if (subset.empty()) {
        fail(ErrorCode::EmptySubset, "assemble_measurement: empty sensor subset");
    }
    MeasurementModel meas;
    meas.subset = subset;
    meas.Cy.resize(subset.size(), plant.nx());
    meas.Dd.resize(subset.size(), plant.nd());
    Index row = 0;
    for (int id : subset.ids()) {
        const SensorDef& s = catalog.sensor(id);
        if (s.C.size() != plant.nx() || s.D.size() != plant.nd()) {
            fail(ErrorCode::Dimension, "assemble_measurement: sensor rows do not match the plant");
        }
        meas.Cy.row(row) = s.C;
        meas.Dd.row(row) = s.D;
        ++row;
    }
    return meas;
}

AugmentedDisturbance augment_disturbance(const LtiPlant& plant, const MeasurementModel& meas,
                                         const Vector& sigma) {
    const Index ny = meas.ny();
    if (sigma.size() != ny) {
        fail(ErrorCode::Dimension, "augment_disturbance: sigma length must equal N_y");
    }
    if ((sigma.array() <= 0.0).any()) {
        fail(ErrorCode::InvalidArgument, "augment_disturbance: sigma must be positive");
    }
    AugmentedDisturbance out;
    out.Bw = Matrix::Zero(plant.nx(), plant.nd() + ny);
    out.Bw.leftCols(plant.nd()) = plant.Bd;
    out.Dw = Matrix::Zero(ny, plant.nd() + ny);
    out.Dw.leftCols(plant.nd()) = meas.Dd;
    out.Dw.rightCols(ny) = sigma.asDiagonal();
    return out;
}

Vector sigma_from_precision(const Vector& p) {
    if ((p.array() <= 0.0).any()) {
        fail(ErrorCode::InvalidArgument, "precisions must be positive");
    }
    return p.array().rsqrt();
}

PlantWithSensors spring_mass_plant(int masses) {
    if (masses < 1) {
        fail(ErrorCode::InvalidArgument, "spring_mass_plant: need at least one mass");
    }
    const Index m = masses;
    Matrix h = Matrix::Zero(m, m);
    for (Index i = 0; i < m; ++i) {
        h(i, i) = -2.0;
        if (i + 1 < m) {
            h(i, i + 1) = 1.0;
            h(i + 1, i) = 1.0;
        }
    }
    LtiPlant plant;
    plant.A = Matrix::Zero(2 * m, 2 * m);
    plant.A.topRightCorner(m, m) = Matrix::Identity(m, m);
    plant.A.bottomLeftCorner(m, m) = h;
    plant.A.bottomRightCorner(m, m) = h;
    plant.Bd = Matrix::Zero(2 * m, m);
    plant.Bd.bottomRows(m) = Matrix::Identity(m, m);
    plant.Cz = Matrix::Identity(2 * m, 2 * m);
    return {plant, per_state_catalog(2 * m, m)};
}

PlantWithSensors example1_plant() {
    LtiPlant plant;
    plant.A.resize(4, 4);
    plant.A << 0, 0, 1, 0,
               0, 0, 0, 1,
              -2, 1, -1, 0,
               1, -2, 0, -1;
    plant.Bd.resize(4, 2);
    plant.Bd << 0, 0,
                0, 0,
                1, 0,
                0, 1;
    plant.Cz = Matrix::Identity(4, 4);
    return {plant, per_state_catalog(4, 2)};
}

PlantWithSensors random_plant(std::uint64_t seed, Index nx, Index nd, Index ns) {
    if (nx < 1 || nd < 1 || ns < 1) {
        fail(ErrorCode::InvalidArgument, "random_plant: dimensions must be >= 1");
    }
    PlantRng rng(seed);
    Matrix d = Matrix::Zero(nx, nx);
    for (Index i = 0; i < nx;) {
        const bool pair = i + 1 < nx && rng.uniform() < 0.5;
        const double re = rng.uniform(-2.0, -0.1);
        if (pair) {
            const double im = rng.uniform(-1.0, 1.0);
            d(i, i) = re;
            d(i + 1, i + 1) = re;
            d(i, i + 1) = im;
            d(i + 1, i) = -im;
            i += 2;
        } else {
            d(i, i) = re;
            i += 1;
        }
    }
    const Matrix q = random_orthogonal(rng, nx);

    LtiPlant plant;
    plant.A = q * d * q.transpose();
    plant.Bd = rng.normal(nx, nd);
    plant.Cz = Matrix::Identity(nx, nx);

    std::vector<SensorDef> sensors;
    for (Index i = 0; i < ns; ++i) {
        SensorDef s;
        s.id = static_cast<int>(i);
        s.C = rng.normal(1, nx);
        s.D = RowVector::Zero(nd);
        s.label = "s" + std::to_string(i + 1);
        sensors.push_back(std::move(s));
    }
    return {plant, SensorCatalog(std::move(sensors), Vector::Ones(ns))};
}

bool hautus_detectable(const Matrix& A, const Matrix& Cy) {
    const Index n = A.rows();
    if (A.cols() != n || Cy.cols() != n) {
        fail(ErrorCode::Dimension, "hautus_detectable: dimension mismatch");
    }
    Eigen::EigenSolver<Matrix> es(A, false);
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    for (Index k = 0; k < n; ++k) {
        const std::complex<double> lambda = es.eigenvalues()[k];
        if (lambda.real() < 0.0) {
            continue;
        }
        Eigen::MatrixXcd pencil(n + Cy.rows(), n);
        pencil.topRows(n) = lambda * Eigen::MatrixXcd::Identity(n, n) - A.cast<std::complex<double>>();
        pencil.bottomRows(Cy.rows()) = Cy.cast<std::complex<double>>();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pencil);
        const auto& s = svd.singularValues();
        if (s.size() < n || s[n - 1] <= 1e-10 * scale) {
            return false;
        }
    }
    return true;
}

}  // namespace precis
