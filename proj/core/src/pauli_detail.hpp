#ifndef QSTAR_SRC_PAULI_DETAIL_HPP
#define QSTAR_SRC_PAULI_DETAIL_HPP

#include "qstar/linalg.hpp"

namespace qstar::detail {

// Single-site Pauli product rules, digits 0=e, 1=sigma1, 2=sigma2, 3=sigma3:
// sigma_a sigma_b = pauliPhase[a][b] * sigma_{pauliProd[a][b]}.
inline constexpr int pauliProd[4][4] = {
    {0, 1, 2, 3},
    {1, 0, 3, 2},
    {2, 3, 0, 1},
    {3, 2, 1, 0},
};

inline const Complex pauliI(0.0, 1.0);
inline const Complex pauliPhase[4][4] = {
    {1, 1, 1, 1},
    {1, 1, pauliI, -pauliI},
    {1, -pauliI, 1, pauliI},
    {1, pauliI, -pauliI, 1},
};

inline Matrix pauliMatrix(int digit) {
  Matrix m(2, 2);
  switch (digit) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, -pauliI, pauliI, 0; break;
    default: m << 1, 0, 0, -1; break;
  }
  return m;
}

/// Dense matrix of a Pauli word over n_sites sites; site 0 is the leftmost
/// (most significant) Kronecker factor.
inline Matrix pauliWordMatrix(int word, int n_sites) {
  Matrix m = Matrix::Identity(1, 1);
  for (int p = 0; p < n_sites; ++p) {
    const int digit = (word >> (2 * p)) & 3;
    const Matrix site = pauliMatrix(digit);
    Matrix next(m.rows() * 2, m.cols() * 2);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        next.block(2 * i, 2 * j, 2, 2) = m(i, j) * site;
    m = std::move(next);
  }
  return m;
}

}  // namespace qstar::detail

#endif
