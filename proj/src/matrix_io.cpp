#include "tensormax/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "tensormax/error.hpp"

namespace tmax {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

DataMatrix read_matrix_csv(std::istream& in, const std::string& source) {
  std::vector<double> values;
  std::size_t p = 0;
  std::size_t n = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = trim(line);
    if (rest.empty()) continue;
    std::size_t cols = 0;
    while (true) {
      const auto comma = rest.find(',');
      std::string_view field = trim(rest.substr(0, comma));
      if (field.size() > 1 && field.front() == '+') field.remove_prefix(1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
        throw IoError(source + ":" + std::to_string(line_no) + ": cannot parse '" + std::string(field) +
                      "' as a number");
      }
      values.push_back(v);
      ++cols;
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (n == 0) {
      p = cols;
    } else if (cols != p) {
      throw IoError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(p) +
                    " columns, found " + std::to_string(cols));
    }
    ++n;
  }
  if (n == 0) throw IoError(source + ": no data rows");
  return DataMatrix::from_rows(n, p, values);
}

DataMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return read_matrix_csv(in, path.string());
}

void write_matrix_csv(std::ostream& out, const DataMatrix& x) {
  for (std::size_t k = 0; k < x.n(); ++k) {
    for (std::size_t i = 0; i < x.p(); ++i) {
      if (i) out << ',';
      out << format_double(x(k, i));
    }
    out << '\n';
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_double(double v, int digits) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
  return std::string(buf, res.ptr);
}

}  // namespace tmax
