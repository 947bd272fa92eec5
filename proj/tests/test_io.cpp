#include <doctest.h>

#include "qstar/errors.hpp"
#include "qstar/io.hpp"
#include "qstar/rng.hpp"

using namespace qstar;

TEST_CASE("algebra documents round-trip") {
  const StarAlgebra m2 = makeFullMatrixAlgebra(2);
  const PositiveFunctional trace =
      stateFromDensityMatrix(m2, 0.5 * Matrix::Identity(2, 2));
  const std::string text = writeAlgebraDocument(m2, &trace);

  const AlgebraDocument doc = parseAlgebraDocument(text);
  CHECK(doc.algebra.ambientDim() == 2);
  CHECK(doc.algebra.dim() == 4);
  REQUIRE(doc.functional.has_value());
  CHECK((doc.functional->values() - trace.values()).norm() < 1e-14);
  CHECK(doc.functional->isState());
  for (int i = 0; i < 4; ++i)
    CHECK((doc.algebra.basisMatrix(i) - m2.basisMatrix(i)).norm() < 1e-14);
}

TEST_CASE("malformed documents are rejected") {
  CHECK_THROWS_AS(parseAlgebraDocument("not json at all"), ConfigError);
  CHECK_THROWS_AS(parseAlgebraDocument("{}"), ConfigError);
  CHECK_THROWS_AS(parseAlgebraDocument(R"({"ambient_dim": 2, "basis": []})"), ConfigError);
  // entry count mismatch
  CHECK_THROWS_AS(parseAlgebraDocument(R"({"ambient_dim": 2, "basis": [[[1,0]]]})"),
                  ConfigError);
  CHECK_THROWS_AS(gnsFromJson("{}"), ConfigError);
}

TEST_CASE("gns triples round-trip") {
  const StarAlgebra m2 = makeFullMatrixAlgebra(2);
  Rng rng(5);
  const PositiveFunctional omega = stateFromDensityMatrix(m2, rng.densityMatrix(2));
  const GnsTriple g = gnsConstruct(m2, omega);

  const GnsTriple back = gnsFromJson(gnsToJson(g));
  CHECK(back.hilbert_dim == g.hilbert_dim);
  CHECK((back.lambda - g.lambda).norm() < 1e-14);
  CHECK((back.cyclic_vector - g.cyclic_vector).norm() < 1e-14);
  REQUIRE(back.rep.size() == g.rep.size());
  for (size_t i = 0; i < g.rep.size(); ++i) CHECK((back.rep[i] - g.rep[i]).norm() < 1e-14);

  // a deserialized triple still evaluates
  const AlgebraElement x = m2.element(rng.gaussianVector(4));
  CHECK((lambdaOf(back, x) - lambdaOf(g, x)).norm() < 1e-14);
  CHECK((representOperator(back, x) - representOperator(g, x)).norm() < 1e-14);
}
