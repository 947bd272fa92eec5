#ifndef QSTAR_LINALG_HPP
#define QSTAR_LINALG_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace qstar {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Sesquilinear inner product, linear in the first argument.
inline Complex inner(const Vector& u, const Vector& v) { return v.dot(u); }

/// Largest singular value.
double operatorNorm(const Matrix& m);

bool isHermitian(const Matrix& m, double tol = 1e-10);

/// Eigenvalues of a Hermitian matrix, ascending.
Eigen::VectorXd hermitianEigenvalues(const Matrix& m);

/// Principal square root of a Hermitian PSD matrix (negative eigenvalues
/// below -rel_tol * max raise PositivityError, small ones are clamped to 0).
Matrix hermitianSqrt(const Matrix& m, double rel_tol = 1e-10);

/// Pseudo-inverse square root of a Hermitian PSD matrix; eigenvalues below
/// rel_cutoff * max are treated as zero.
Matrix hermitianInvSqrt(const Matrix& m, double rel_cutoff = 1e-12);

/// Moore-Penrose pseudo-inverse at a relative singular value cutoff.
Matrix pseudoInverse(const Matrix& m, double rel_tol = 1e-12);

/// Rank at a relative singular-value tolerance.
int numericalRank(const Matrix& m, double rel_tol = 1e-10);

/// Orthonormal basis of the column space, rank-revealing at rel_tol.
/// Columns carry the deterministic phase convention of fixColumnPhases.
Matrix orthonormalRange(const Matrix& m, double rel_tol = 1e-10, int* rank_out = nullptr);

/// Orthonormal basis of the null space at rel_tol (columns).
Matrix nullSpaceBasis(const Matrix& m, double rel_tol = 1e-10);

/// Nearest unitary in Frobenius norm (polar factor).
Matrix nearestUnitary(const Matrix& m);

/// Rotate each column so its first component of magnitude > 1e-8 * max
/// becomes real positive. Makes eigenvector/orthonormalization output
/// deterministic across runs.
void fixColumnPhases(Matrix& m);

/// max(||U^dagger U - I||_F, ||U U^dagger - I||_F) for square U, or the
/// one-sided defect for rectangular isometries.
double unitarityDefect(const Matrix& u);

/// e^{i h t} X e^{-i h t} for Hermitian h, by eigendecomposition.
Matrix conjugateByExponential(const Matrix& h, const Matrix& x, double t);

/// Stack matrix columns into one vector (column-major vec).
Vector vectorize(const Matrix& m);
Matrix unvectorize(const Vector& v, int rows, int cols);

}  // namespace qstar

#endif
