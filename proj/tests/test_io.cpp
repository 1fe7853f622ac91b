#include <doctest.h>

#include "helpers.hpp"
#include "l2div/error.hpp"
#include "l2div/io.hpp"

using namespace l2div;

namespace {

ErrorCode parse_code(const std::string& text) {
  try {
    io::parse_csv(text, "input.csv");
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("csv parsing") {
  const auto t = io::parse_csv("x,y\n0.1,2\n 0.2 , -3e-1\n\n0.3,+4\n");
  CHECK(t.header == std::vector<std::string>{"x", "y"});
  REQUIRE(t.rows.rows() == 3);
  CHECK(t.rows(1, 1) == -0.3);
  CHECK(t.rows(2, 1) == 4.0);
  CHECK(io::column(t.header, "y", "t") == 1);
  CHECK(parse_code("x,y\n0.1,nan\n") == ErrorCode::ParseError);
  CHECK(parse_code("x,y\n0.1,inf\n") == ErrorCode::ParseError);
  CHECK(parse_code("x,y\n0.1\n") == ErrorCode::ParseError);
  CHECK(parse_code("x,y\n0.1,abc\n") == ErrorCode::ParseError);
  CHECK(parse_code("") == ErrorCode::ParseError);
}

TEST_CASE("parse errors carry the line number") {
  try {
    io::parse_csv("x,y\n0.1,1\n0.2,1\n0.3,oops\n", "data.csv");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("data.csv:4") != std::string::npos);
  }
}

TEST_CASE("numeric header for functional grids") {
  const auto t = io::parse_csv("0,0.5,1\n1,2,3\n");
  const auto grid = io::numeric_header(t, "curves.csv");
  CHECK(grid.size() == 3);
  CHECK(grid(1) == 0.5);
  CHECK_THROWS_AS(io::numeric_header(io::parse_csv("a,b\n1,2\n"), "c"), Error);
}

TEST_CASE("number formatting round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) CHECK(std::stod(io::format_double(v)) == v);
  CHECK(io::format_double(0.5) == "0.5");
}

TEST_CASE("text files") {
  const auto dir = testing::scratch("io");
  io::write_text(dir / "a.txt", "hello\n");
  CHECK(io::read_text(dir / "a.txt") == "hello\n");
  try {
    io::read_text(dir / "missing.txt");
    FAIL("expected MissingReport");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingReport);
  }
}
