#ifndef QSTAR_IO_HPP
#define QSTAR_IO_HPP

#include <optional>
#include <string>

#include "qstar/gns.hpp"

namespace qstar {

/// The shared JSON document for algebras and functionals:
///   {"ambient_dim": n, "basis": [[[re,im], ...], ...],
///    "functional": {"values": [[re,im], ...]}}
/// Matrices are row-major flat lists of [re,im] pairs. Throws ConfigError
/// on malformed input.
struct AlgebraDocument {
  StarAlgebra algebra;
  std::optional<PositiveFunctional> functional;
};

AlgebraDocument parseAlgebraDocument(const std::string& text);
std::string writeAlgebraDocument(const StarAlgebra& a,
                                 const PositiveFunctional* functional = nullptr);

/// GNS triples round-trip as
///   {"hilbert_dim": m, "lambda": ..., "rep": [...], "cyclic_vector": ...}.
/// The source functional is not part of the format; a deserialized triple
/// carries an empty one.
std::string gnsToJson(const GnsTriple& g);
GnsTriple gnsFromJson(const std::string& text);

}  // namespace qstar

#endif
