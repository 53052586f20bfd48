#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "hypobridge/model_io.hpp"
#include "hypobridge/presets.hpp"
#include "test_util.hpp"

using namespace hypobridge;
using hbtest::max_abs;

TEST_CASE("JSON model files round-trip bit-exactly") {
  const Preset p = preset("sec43");
  ModelFile mf;
  mf.A = p.spec.A;
  mf.B = p.spec.B;
  mf.rank_tol = 1e-10;
  mf.label = "triangular";

  // Perturb entries to exercise non-representable decimals.
  mf.A(0, 0) = -1.0 / 3.0;
  mf.A(1, 1) = 0.1;

  const std::string text = model_to_json(mf);
  const ModelFile back = parse_model_json(text);
  CHECK(back.A == mf.A);  // bit exact
  CHECK(back.B == mf.B);
  CHECK(back.rank_tol == mf.rank_tol);
  CHECK(back.label == mf.label);
  CHECK_NOTHROW(back.to_spec());
}

TEST_CASE("TOML model files express the same schema") {
  const std::string text = R"(# planar ladder
A = [[0.0, 0.0],
     [1.0, 0.0]]  # drift
B = [[1.0], [0.0]]
rank_tol = 1e-9
label = "kolmogorov"
)";
  const ModelFile mf = parse_model_toml(text);
  CHECK(mf.A.rows() == 2);
  CHECK(mf.A(1, 0) == 1.0);
  CHECK(mf.B(0, 0) == 1.0);
  CHECK(mf.rank_tol == 1e-9);
  CHECK(*mf.label == "kolmogorov");
  const ModelSpec spec = mf.to_spec();
  CHECK(spec.d() == 2);
}

TEST_CASE("parse errors carry the offending location") {
  CHECK_THROWS_WITH_AS(
      parse_model_json(R"({"A": [[0, 0], [1]], "B": [[1], [0]]})"),
      doctest::Contains("A[1]"), ParseError);
  CHECK_THROWS_WITH_AS(
      parse_model_json(R"({"A": [[0, "x"], [1, 0]], "B": [[1], [0]]})"),
      doctest::Contains("A[0][1]"), ParseError);
  CHECK_THROWS_AS(parse_model_json(R"({"B": [[1], [0]]})"), ParseError);
  CHECK_THROWS_AS(parse_model_json("not json"), ParseError);
  CHECK_THROWS_AS(parse_model_toml("A = [[0, 0], [1, 0]]\n"), ParseError);
  CHECK_THROWS_WITH_AS(parse_model_toml("A = [[0, 0], [1, 0, 2]]\nB=[[1]]\n"),
                       doctest::Contains("row 1"), ParseError);
}

TEST_CASE("rank-deficient model files surface as NotControllable") {
  const std::string text = R"({"A": [[0, 0], [0, 0]], "B": [[1], [0]]})";
  const ModelFile mf = parse_model_json(text);
  CHECK_THROWS_AS(mf.to_spec(), NotControllableError);
}

TEST_CASE("file round trip through the filesystem") {
  const Preset p = preset("kolmogorov");
  ModelFile mf;
  mf.A = p.spec.A;
  mf.B = p.spec.B;
  const std::string path = "test_model_roundtrip.json";
  write_model_file(path, mf);
  const ModelFile back = read_model_file(path);
  CHECK(back.A == mf.A);
  CHECK(back.B == mf.B);
  CHECK(!back.rank_tol.has_value());
  std::remove(path.c_str());
}
