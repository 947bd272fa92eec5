#ifndef QSTAR_RNG_HPP
#define QSTAR_RNG_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>

namespace qstar {

/// Seeded generator used by every randomized routine in the library.
///
/// All distributions are implemented on top of raw mt19937_64 output so
/// that streams are reproducible independently of the standard library's
/// distribution implementations. Derived seeds (derive) give independent
/// streams for parallel trials.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [lo, hi] inclusive.
  int uniformInt(int lo, int hi) {
    return lo + static_cast<int>(uniform() * static_cast<double>(hi - lo + 1));
  }

  /// Standard normal via Box-Muller.
  double gaussian() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  std::complex<double> complexGaussian() {
    const double re = gaussian();
    const double im = gaussian();
    return {re, im};
  }

  Eigen::VectorXcd gaussianVector(int d) {
    Eigen::VectorXcd v(d);
    for (int i = 0; i < d; ++i) v(i) = complexGaussian();
    return v;
  }

  Eigen::MatrixXcd gaussianMatrix(int rows, int cols) {
    Eigen::MatrixXcd m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = complexGaussian();
    return m;
  }

  /// Random density matrix of the given rank (full rank by default):
  /// rho = A A^dagger / tr, with A an n x rank Gaussian matrix.
  Eigen::MatrixXcd densityMatrix(int n, int rank = -1) {
    if (rank < 0 || rank > n) rank = n;
    const Eigen::MatrixXcd a = gaussianMatrix(n, rank);
    Eigen::MatrixXcd rho = a * a.adjoint();
    rho /= rho.trace().real();
    return rho;
  }

  /// Haar-ish random unitary from the QR of a Gaussian matrix.
  Eigen::MatrixXcd unitary(int n) {
    const Eigen::MatrixXcd a = gaussianMatrix(n, n);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
    Eigen::MatrixXcd q = qr.householderQ();
    const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n; ++i) {
      const std::complex<double> rii = r(i, i);
      const double mag = std::abs(rii);
      if (mag > 0) q.col(i) *= rii / mag;
    }
    return q;
  }

  /// Uniform unit vector on S^2.
  Eigen::Vector3d unitVector3() {
    while (true) {
      Eigen::Vector3d v(gaussian(), gaussian(), gaussian());
      const double n = v.norm();
      if (n > 1e-12) return v / n;
    }
  }

  /// Child seed for an independent stream (order-stable under parallelism).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 step on seed ^ golden-ratio-scrambled stream index
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

private:
  std::mt19937_64 gen_;
};

}  // namespace qstar

#endif
