#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "kryrank/observation_matrix.hpp"

namespace kryrank {

/// Reads a Matrix Market file. Coordinate files become sparse storage, array
/// files dense. `pattern` entries are 1.0 and symmetric / skew-symmetric
/// structure is expanded to full storage.
ObservationMatrixd load_matrix_market(const std::filesystem::path& path);
ObservationMatrixd read_matrix_market(std::istream& in);

/// Array format, column-major, 17 significant digits.
void write_matrix_market_array(std::ostream& out, const Matrix<double>& m);
void save_matrix_market_array(const std::filesystem::path& path, const Matrix<double>& m);

/// Array format for dense storage, coordinate format for sparse.
void write_matrix_market(std::ostream& out, const ObservationMatrixd& x);
void save_matrix_market(const std::filesystem::path& path, const ObservationMatrixd& x);

/// Shortest round-trip decimal form when `digits` is 0, else `digits`
/// significant digits. Locale independent.
std::string format_double(double value, int digits = 0);

}  // namespace kryrank
