#pragma once

#include <iosfwd>
#include <string>

#include "precis/estimator.hpp"
#include "precis/model.hpp"

namespace precis::io {

// Matrix text format: a "rows cols" line, then one line of space-separated
// values per row. '#' starts a comment; blank lines are ignored.
void write_matrix(std::ostream& os, const Matrix& m);
Matrix read_matrix(std::istream& is, const std::string& source = "<input>");
Matrix parse_matrix(const std::string& text, const std::string& source = "<input>");

// Plant file: named sections, each a section name on its own line followed by
// a matrix in the text format.
//   A        N_x x N_x
//   B_d      N_x x N_d
//   C_z      N_z x N_x
//   C_y      N_S x N_x   (row i is sensor s_{i+1})
//   D_d      N_S x N_d   optional, zero when absent
//   weights  N_S x 1     optional, ones when absent
void write_plant(std::ostream& os, const PlantWithSensors& pw);
PlantWithSensors read_plant(std::istream& is, const std::string& source = "<input>");
PlantWithSensors load_plant(const std::string& path);

// Result file: header, key/value lines, the plant sections, then the
// precisions and estimator matrices as named matrix sections.
struct ResultFile {
    PlantWithSensors plant;
    estimator::EstimatorResult result;
};

void write_result(std::ostream& os, const PlantWithSensors& pw, const estimator::EstimatorResult& r);
ResultFile read_result(std::istream& is, const std::string& source = "<input>");
ResultFile load_result(const std::string& path);

// 1-based "1,4" list to a 0-based subset; errors name the offending token.
SensorSubset parse_subset(const std::string& text, Index catalog_size);

// Comma-separated doubles ("1,2.5").
Vector parse_vector(const std::string& text, const std::string& what);

}  // namespace precis::io
