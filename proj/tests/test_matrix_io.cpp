#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "tensormax/matrix_io.hpp"

using namespace tmax;

TEST_CASE("reads a headerless csv") {
  std::istringstream in("1,2,3\n-4.5,+5e-1, 6\n\n7,8,9\n");
  const auto x = read_matrix_csv(in);
  CHECK(x.n() == 3);
  CHECK(x.p() == 3);
  CHECK(x(1, 0) == -4.5);
  CHECK(x(1, 1) == 0.5);
  CHECK(x(1, 2) == 6.0);
  CHECK(x(2, 2) == 9.0);
}

TEST_CASE("accepts crlf line endings") {
  std::istringstream in("1,2\r\n3,4\r\n");
  const auto x = read_matrix_csv(in);
  CHECK(x(1, 1) == 4.0);
}

TEST_CASE("malformed input names the line") {
  std::istringstream ragged("1,2,3\n4,5\n");
  CHECK_THROWS_WITH_AS(read_matrix_csv(ragged, "m.csv"), doctest::Contains("m.csv:2"), IoError);
  std::istringstream bad("1,2\n3,abc\n");
  CHECK_THROWS_WITH_AS(read_matrix_csv(bad, "m.csv"), doctest::Contains("m.csv:2"), IoError);
  std::istringstream inf("1,inf\n");
  CHECK_THROWS_AS(read_matrix_csv(inf), IoError);
  std::istringstream empty("\n\n");
  CHECK_THROWS_AS(read_matrix_csv(empty), IoError);
  CHECK_THROWS_AS(read_matrix_csv(std::filesystem::path("/nonexistent/x.csv")), IoError);
}

TEST_CASE("write then read is lossless") {
  DataMatrix x(3, 4);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 4; ++i) x(k, i) = std::sqrt(2.0 + k) * (i % 2 ? -1.0 : 1.0) / (i + 3.0);
  std::stringstream s;
  write_matrix_csv(s, x);
  CHECK(read_matrix_csv(s) == x);
}

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(-7.893501118144466) == "-7.893501118144466");
  CHECK(format_double(2.7162190705550917, 12) == "2.71621907056");
  CHECK(format_double(1e-30, 3) == "1e-30");
  CHECK(format_double(0.1, 17) == "0.10000000000000001");
  const double v = 1.0 / 3.0;
  CHECK(std::stod(format_double(v, 17)) == v);
}
