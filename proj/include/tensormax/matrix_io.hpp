#pragma once

#include <filesystem>
#include <istream>

#include "tensormax/populations.hpp"

namespace tmax {

/// Headerless CSV, one observation per line, '.' decimal separator.
/// Blank lines are skipped. Throws IoError naming the line on malformed input.
DataMatrix read_matrix_csv(std::istream& in, const std::string& source = "<stream>");
DataMatrix read_matrix_csv(const std::filesystem::path& path);

void write_matrix_csv(std::ostream& out, const DataMatrix& x);

/// Shortest round-trip decimal for v, locale independent.
std::string format_double(double v);
/// Exactly `digits` significant digits, locale independent.
std::string format_double(double v, int digits);

}  // namespace tmax
