#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sharpbounds/io.hpp"

using namespace sharpbounds;

namespace {

CsvTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    return e.what();
  }
  FAIL("expected a parse error");
  return {};
}

}  // namespace

TEST_CASE("parse_csv") {
  const CsvTable t = parse("x1, x2 ,z,y\n1,2,0,3.5\n-1e-3,inf,1,-inf\n\n");
  CHECK(t.rows() == 2);
  CHECK(t.header == std::vector<std::string>{"x1", "x2", "z", "y"});
  CHECK(t.column("x2")(1) == kInf);
  CHECK(t.column("y")(1) == -kInf);
  CHECK(t.column("x1")(1) == -1e-3);
  CHECK(t.columns_with_prefix("x") == std::vector<std::string>{"x1", "x2"});
  CHECK(t.has_column("z"));
  CHECK_FALSE(t.has_column("w"));
  try {
    t.column("w");
    FAIL("expected a column error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kColumn);
    CHECK(std::string(e.what()).find("'w'") != std::string::npos);
  }
}

TEST_CASE("parse errors name the row") {
  CHECK(parse_error("a,b\n1,2\n3,oops\n").find("row 2") != std::string::npos);
  CHECK(parse_error("a,b\n1,2\n3\n").find("row 2") != std::string::npos);
  CHECK(parse_error("a,b\n1,2,3\n").find("row 1") != std::string::npos);
  CHECK(parse_error("a,b\n1,\n").find("row 1") != std::string::npos);
  parse_error("");
  CHECK_THROWS_AS(read_csv("/nonexistent/file.csv"), Error);
}

TEST_CASE("format_number") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(kInf) == "inf");
  CHECK(format_number(-kInf) == "-inf");
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("write_csv round trip") {
  std::ostringstream out;
  write_csv(out, {"a", "b"}, {{1.0 / 3.0, kInf}, {-2.5, -kInf}});
  CHECK(out.str() == "a,b\n0.33333333333333331,inf\n-2.5,-inf\n");
  const CsvTable t = parse(out.str());
  CHECK(t.column("a")(0) == 1.0 / 3.0);
  CHECK(t.column("b")(1) == -kInf);
}
