#include <doctest.h>

#include <sstream>

#include "kryrank/matrix_market.hpp"

using namespace kryrank;

namespace {
ObservationMatrixd parse(const std::string& text) {
  std::istringstream in(text);
  return read_matrix_market(in);
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}
}  // namespace

TEST_CASE("array format is column-major") {
  const auto x = parse("%%MatrixMarket matrix array real general\n% comment\n2 2\n1\n2\n3\n4\n");
  REQUIRE_FALSE(x.is_sparse());
  Matrix<double> expect(2, 2);
  expect << 1, 3, 2, 4;
  CHECK(x.dense() == expect);
}

TEST_CASE("coordinate formats") {
  SUBCASE("empty") {
    const auto x = parse("%%MatrixMarket matrix coordinate real general\n3 3 0\n");
    CHECK(x.is_sparse());
    CHECK(x.rows() == 3);
    CHECK(x.stored_entries() == 0);
  }
  SUBCASE("pattern symmetric is expanded") {
    const auto x = parse("%%MatrixMarket matrix coordinate pattern symmetric\n3 3 3\n1 1\n2 1\n3 2\n");
    CHECK(x.stored_entries() == 5);
    const Matrix<double> d = x.to_dense();
    CHECK(d(0, 1) == 1.0);
    CHECK(d(1, 0) == 1.0);
    CHECK(d(1, 2) == 1.0);
    CHECK(d(0, 0) == 1.0);
  }
  SUBCASE("integer general") {
    const auto x = parse("%%MatrixMarket matrix coordinate integer general\n2 3 2\n1 3 -4\n2 1 7\n");
    CHECK(x.to_dense()(0, 2) == -4.0);
    CHECK(x.to_dense()(1, 0) == 7.0);
  }
  SUBCASE("skew-symmetric") {
    const auto x = parse("%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 1.5\n");
    CHECK(x.to_dense()(0, 1) == -1.5);
  }
  SUBCASE("symmetric array") {
    const auto x = parse("%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n");
    CHECK(x.dense()(0, 1) == 2.0);
    CHECK(x.dense()(1, 1) == 3.0);
  }
  SUBCASE("case-insensitive header and CRLF") {
    const auto x = parse("%%MatrixMarket MATRIX Coordinate Real General\r\n1 1 1\r\n1 1 2.5e0\r\n");
    CHECK(x.to_dense()(0, 0) == 2.5);
  }
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(parse("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n"), UnsupportedFormat);
  CHECK(error_line("%%MatrixMarket matrix blob real general\n1 1\n") == 1);
  CHECK(error_line("garbage\n") == 1);
  CHECK(error_line("%%MatrixMarket matrix coordinate real general\n%c\n2 2 2\n1 1 1\n1 1 2\n") == 5);
  CHECK(error_line("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n") == 3);
  CHECK(error_line("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n") == 4);
  CHECK(error_line("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 x\n") == 3);
  CHECK(error_line("%%MatrixMarket matrix array real general\n2 x\n") == 2);
  CHECK(error_line("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n2 1 1\n1 2 1\n") == 4);
  CHECK_THROWS_AS(load_matrix_market("/nonexistent/file.mtx"), Error);
}

TEST_CASE("array round trip keeps every bit") {
  Matrix<double> m(3, 2);
  m << 1.0 / 3.0, -2e-300, 1e300, 0.1, -7.25, 3.0;
  std::stringstream s;
  write_matrix_market_array(s, m);
  const auto x = read_matrix_market(s);
  CHECK(x.dense() == m);
}

TEST_CASE("coordinate round trip") {
  const auto x = ObservationMatrixd::from_triplets(3, 4, {{0, 1, 0.5}, {2, 3, -1.0 / 7.0}});
  std::stringstream s;
  write_matrix_market(s, x);
  const auto y = read_matrix_market(s);
  CHECK(y.is_sparse());
  CHECK(y.to_dense() == x.to_dense());
}

TEST_CASE("format_double") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0 / 3.0, 17) == "0.33333333333333331");
  CHECK(format_double(2.0) == "2");
}
