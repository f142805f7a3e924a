#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "precis/types.hpp"

namespace precis {

// x' = A x + B_d d,  z = C_z x.
struct LtiPlant {
    Matrix A;
    Matrix Bd;
    Matrix Cz;

    [[nodiscard]] Index nx() const noexcept { return A.rows(); }
    [[nodiscard]] Index nd() const noexcept { return Bd.cols(); }
    [[nodiscard]] Index nz() const noexcept { return Cz.rows(); }

    // Throws Dimension / InvalidArgument when the invariants do not hold.
    void validate() const;
};

// y_i = C_i x + D_i d + sigma_i n_i
struct SensorDef {
    int id = 0;
    RowVector C;
    RowVector D;
    std::string label;
};

class SensorCatalog {
public:
    SensorCatalog() = default;
    SensorCatalog(std::vector<SensorDef> sensors, Vector weights);

    [[nodiscard]] Index size() const noexcept { return static_cast<Index>(sensors_.size()); }
    [[nodiscard]] const SensorDef& sensor(int id) const;
    [[nodiscard]] const std::vector<SensorDef>& sensors() const noexcept { return sensors_; }
    [[nodiscard]] const Vector& weights() const noexcept { return weights_; }

    void set_weights(const Vector& w);
    void validate(const LtiPlant& plant) const;

private:
    std::vector<SensorDef> sensors_;
    Vector weights_;
};

// Sorted, duplicate-free set of catalog ids.
class SensorSubset {
public:
    SensorSubset() = default;
    SensorSubset(std::initializer_list<int> ids);
    explicit SensorSubset(std::vector<int> ids);

    static SensorSubset all(Index n);

    [[nodiscard]] const std::vector<int>& ids() const noexcept { return ids_; }
    [[nodiscard]] Index size() const noexcept { return static_cast<Index>(ids_.size()); }
    [[nodiscard]] bool empty() const noexcept { return ids_.empty(); }
    [[nodiscard]] bool contains(int id) const;
    [[nodiscard]] SensorSubset without(int id) const;
    [[nodiscard]] SensorSubset unite(const SensorSubset& other) const;
    [[nodiscard]] SensorSubset intersect(const SensorSubset& other) const;
    [[nodiscard]] bool is_subset_of(const SensorSubset& other) const;

    // 1-based, comma separated ("1,4"); matches the s1..sN labels.
    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const SensorSubset&, const SensorSubset&) = default;
    friend auto operator<=>(const SensorSubset& a, const SensorSubset& b) {
        return a.ids_ <=> b.ids_;
    }

private:
    std::vector<int> ids_;
};

struct MeasurementModel {
    Matrix Cy;
    Matrix Dd;
    SensorSubset subset;

    [[nodiscard]] Index ny() const noexcept { return Cy.rows(); }
};

struct AugmentedDisturbance {
    Matrix Bw;  // [B_d 0]
    Matrix Dw;  // [D_d diag(sigma)]
};

struct PlantWithSensors {
    LtiPlant plant;
    SensorCatalog catalog;
};

MeasurementModel assemble_measurement(const LtiPlant& plant, const SensorCatalog& catalog,
                                      const SensorSubset& subset);

AugmentedDisturbance augment_disturbance(const LtiPlant& plant, const MeasurementModel& meas,
                                         const Vector& sigma);

// sigma_i = 1 / sqrt(p_i)
Vector sigma_from_precision(const Vector& p);

// Chain of M unit masses between two walls, unit springs and dampers; one
// sensor per state.
PlantWithSensors spring_mass_plant(int masses);

// Four-state, two-disturbance plant with one sensor per state.
PlantWithSensors example1_plant();

// Reproducible random plant. A = Q diag-block(eigs) Q^T with real parts in
// [-2, -0.1] and complex pairs with imaginary parts in [-1, 1], Q random
// orthogonal. B_d and C_i standard normal, D_i = 0, C_z = I.
PlantWithSensors random_plant(std::uint64_t seed, Index nx, Index nd, Index ns);

// Hautus test on the modes with Re(lambda) >= 0.
bool hautus_detectable(const Matrix& A, const Matrix& Cy);

}  // namespace precis
