#pragma once

#include <string>

#include <Eigen/Dense>

namespace precis {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

enum class Framework { H2, Hinf };
enum class EstimatorKind { Observer, Filter };

const char* to_string(Framework f) noexcept;
const char* to_string(EstimatorKind k) noexcept;
Framework parse_framework(const std::string& text);
EstimatorKind parse_estimator(const std::string& text);

// Shortest round-trip decimal, independent of the global locale. Infinite
// values print as "inf" / "-inf", NaN as "nan".
std::string format_double(double x);

}  // namespace precis
