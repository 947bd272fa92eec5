#include "qstar/io.hpp"

#include <json.hpp>

#include "qstar/errors.hpp"

namespace qstar {

using nlohmann::json;

namespace io_detail {

json complexToJson(const Complex& z) { return json::array({std::real(z), std::imag(z)}); }

Complex complexFromJson(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError("expected a [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

json matrixToJson(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(complexToJson(m(r, c)));
  return out;
}

Matrix matrixFromJson(const json& j, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows * cols)
    throw ConfigError("matrix entry count does not match its dimensions");
  Matrix m(rows, cols);
  int k = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = complexFromJson(j[k++]);
  return m;
}

json vectorToJson(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complexToJson(v(i)));
  return out;
}

Vector vectorFromJson(const json& j) {
  if (!j.is_array()) throw ConfigError("expected an array of [re, im] pairs");
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complexFromJson(j[i]);
  return v;
}

json parseText(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("malformed JSON");
  return j;
}

}  // namespace io_detail

using namespace io_detail;

AlgebraDocument parseAlgebraDocument(const std::string& text) {
  const json j = parseText(text);
  if (!j.is_object() || !j.contains("ambient_dim") || !j.contains("basis"))
    throw ConfigError("algebra document needs ambient_dim and basis");
  const int n = j["ambient_dim"].get<int>();
  if (n < 1) throw ConfigError("ambient_dim must be positive");
  if (!j["basis"].is_array() || j["basis"].empty())
    throw ConfigError("basis must be a nonempty array of matrices");
  std::vector<Matrix> basis;
  basis.reserve(j["basis"].size());
  for (const json& entry : j["basis"]) basis.push_back(matrixFromJson(entry, n, n));

  AlgebraDocument out{StarAlgebra::fromBasis(std::move(basis)), std::nullopt};
  if (j.contains("functional")) {
    const json& f = j["functional"];
    if (!f.is_object() || !f.contains("values"))
      throw ConfigError("functional needs a values array");
    Vector values = vectorFromJson(f["values"]);
    if (values.size() != out.algebra.dim())
      throw ConfigError("functional values length does not match the basis size");
    out.functional = PositiveFunctional::fromValues(out.algebra, std::move(values));
  }
  return out;
}

std::string writeAlgebraDocument(const StarAlgebra& a, const PositiveFunctional* functional) {
  json j;
  j["ambient_dim"] = a.ambientDim();
  json basis = json::array();
  for (int i = 0; i < a.dim(); ++i) basis.push_back(matrixToJson(a.basisMatrix(i)));
  j["basis"] = std::move(basis);
  if (functional) j["functional"] = {{"values", vectorToJson(functional->values())}};
  return j.dump();
}

std::string gnsToJson(const GnsTriple& g) {
  json j;
  j["hilbert_dim"] = g.hilbert_dim;
  j["lambda"] = matrixToJson(g.lambda);
  json rep = json::array();
  for (const Matrix& pi : g.rep) rep.push_back(matrixToJson(pi));
  j["rep"] = std::move(rep);
  j["cyclic_vector"] = vectorToJson(g.cyclic_vector);
  return j.dump();
}

GnsTriple gnsFromJson(const std::string& text) {
  const json j = parseText(text);
  if (!j.is_object() || !j.contains("hilbert_dim") || !j.contains("lambda") ||
      !j.contains("rep") || !j.contains("cyclic_vector"))
    throw ConfigError("GNS document needs hilbert_dim, lambda, rep and cyclic_vector");
  GnsTriple g;
  g.hilbert_dim = j["hilbert_dim"].get<int>();
  const int d = static_cast<int>(j["rep"].size());
  if (d < 1) throw ConfigError("GNS document carries an empty representation");
  g.lambda = matrixFromJson(j["lambda"], g.hilbert_dim, d);
  g.rep.reserve(d);
  for (const json& entry : j["rep"])
    g.rep.push_back(matrixFromJson(entry, g.hilbert_dim, g.hilbert_dim));
  g.cyclic_vector = vectorFromJson(j["cyclic_vector"]);
  if (g.cyclic_vector.size() != g.hilbert_dim)
    throw ConfigError("GNS cyclic vector has the wrong dimension");
  g.rank_tolerance = 1e-10;
  return g;
}

}  // namespace qstar
