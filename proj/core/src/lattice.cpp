#include "qstar/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pauli_detail.hpp"
#include "qstar/errors.hpp"
#include "qstar/rng.hpp"

namespace qstar {

// ---------------------------------------------------------------- Region

Region Region::of(std::vector<int> sites) {
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  return Region{std::move(sites)};
}

Region Region::range(int first, int last) {
  std::vector<int> sites;
  for (int p = first; p < last; ++p) sites.push_back(p);
  return Region{std::move(sites)};
}

bool Region::contains(int site) const {
  return std::binary_search(sites.begin(), sites.end(), site);
}

bool Region::containsRegion(const Region& other) const {
  return std::includes(sites.begin(), sites.end(), other.sites.begin(), other.sites.end());
}

bool Region::disjoint(const Region& other) const {
  for (int s : other.sites)
    if (contains(s)) return false;
  return true;
}

Region Region::unionWith(const Region& other) const {
  std::vector<int> merged = sites;
  merged.insert(merged.end(), other.sites.begin(), other.sites.end());
  return Region::of(std::move(merged));
}

Region Region::complementIn(int n_sites) const {
  std::vector<int> out;
  for (int p = 0; p < n_sites; ++p)
    if (!contains(p)) out.push_back(p);
  return Region{std::move(out)};
}

std::string Region::str() const {
  std::ostringstream os;
  os << '{';
  for (size_t i = 0; i < sites.size(); ++i) {
    if (i) os << ',';
    os << sites[i];
  }
  os << '}';
  return os.str();
}

// ----------------------------------------------------- single-site pieces

Eigen::Matrix2cd sigmaDotN(const Eigen::Vector3d& n) {
  if (std::abs(n.norm() - 1.0) > 1e-10)
    throw Error("sigmaDotN: direction must be a unit vector");
  Eigen::Matrix2cd m;
  m << Complex(n(2), 0), Complex(n(0), -n(1)), Complex(n(0), n(1)), Complex(-n(2), 0);
  return m;
}

Frame Frame::complete(const Eigen::Vector3d& direction) {
  if (std::abs(direction.norm() - 1.0) > 1e-10)
    throw Error("Frame::complete: direction must be a unit vector");
  // Seed with the coordinate axis least aligned with n, then Gram-Schmidt.
  int least = 0;
  for (int k = 1; k < 3; ++k)
    if (std::abs(direction(k)) < std::abs(direction(least))) least = k;
  Eigen::Vector3d seed = Eigen::Vector3d::Zero();
  seed(least) = 1.0;
  Eigen::Vector3d n1 = seed - seed.dot(direction) * direction;
  n1.normalize();
  const Eigen::Vector3d n2 = direction.cross(n1);
  return Frame{direction, n1, n2};
}

bool Frame::orthonormal(double tol) const {
  const bool unit = std::abs(n.norm() - 1.0) <= tol && std::abs(n1.norm() - 1.0) <= tol &&
                    std::abs(n2.norm() - 1.0) <= tol;
  const bool ortho = std::abs(n.dot(n1)) <= tol && std::abs(n.dot(n2)) <= tol &&
                     std::abs(n1.dot(n2)) <= tol;
  const bool right_handed = (n1.cross(n2) - n).norm() <= 10 * tol;
  return unit && ortho && right_handed;
}

Eigen::Vector2cd flippedVector(int m, const Frame& frame) {
  if (m != 0 && m != 1) throw SizeError("flippedVector: m must be 0 or 1");
  if (!frame.orthonormal())
    throw Error("flippedVector: frame is not an orthonormal right-handed triad");
  const Eigen::Vector3d& n = frame.n;
  Eigen::Vector2cd up;
  if (1.0 + n(2) > 1e-12) {
    up << Complex(1.0 + n(2), 0.0), Complex(n(0), n(1));
    up /= std::sqrt(2.0 * (1.0 + n(2)));
  } else {
    up << Complex(0, 0), Complex(1, 0);
  }
  if (m == 0) return up;
  // sigma . n_- with n_- = (n1 - i n2)/2 lowers |0,n> to |1,n>.
  const Eigen::Matrix2cd lower =
      0.5 * (sigmaDotN(frame.n1) * Complex(1, 0) + sigmaDotN(frame.n2) * Complex(0, -1));
  return lower * up;
}

// ----------------------------------------------------------- LatticeSystem

LatticeSystem::LatticeSystem(int n_sites) : n_sites_(n_sites) {
  if (n_sites < 1 || n_sites > 6)
    throw SizeError("LatticeSystem: n_sites must lie in [1, 6]");
}

const StarAlgebra& LatticeSystem::algebra() const {
  std::call_once(algebra_once_, [this] {
    algebra_ = std::make_unique<StarAlgebra>(StarAlgebra::pauliChain(n_sites_));
  });
  return *algebra_;
}

StarAlgebra LatticeSystem::localAlgebra(const Region& v) const {
  if (!v.sites.empty() && (v.sites.front() < 0 || v.sites.back() >= n_sites_))
    throw SizeError("localAlgebra: region out of bounds");
  return StarAlgebra::pauliChain(v.size());
}

Region LatticeSystem::wordSupport(int word) const {
  std::vector<int> sites;
  for (int p = 0; p < n_sites_; ++p)
    if (wordDigit(word, p) != 0) sites.push_back(p);
  return Region{std::move(sites)};
}

std::pair<Complex, int> LatticeSystem::wordProduct(int v, int w) const {
  Complex phase = 1.0;
  int out = 0;
  for (int p = 0; p < n_sites_; ++p) {
    const int da = wordDigit(v, p);
    const int db = wordDigit(w, p);
    phase *= detail::pauliPhase[da][db];
    out |= detail::pauliProd[da][db] << (2 * p);
  }
  return {phase, out};
}

AlgebraElement LatticeSystem::pauliOperator(int axis, int p) const {
  if (axis < 1 || axis > 3) throw SizeError("pauliOperator: axis must be 1, 2 or 3");
  if (p < 0 || p >= n_sites_) throw SizeError("pauliOperator: site out of range");
  Vector coeffs = Vector::Zero(wordCount());
  const int word = axis << (2 * p);
  coeffs(word) = 1.0;
  return {coeffs, detail::pauliWordMatrix(word, n_sites_)};
}

Vector LatticeSystem::embedCoeffs(const Vector& local, const Region& v_source,
                                  const Region& v_target) const {
  if (!v_target.containsRegion(v_source))
    throw DimensionMismatch("embedCoeffs: source region is not contained in the target");
  if (local.size() != (1 << (2 * v_source.size())))
    throw DimensionMismatch("embedCoeffs: coefficient length does not match the region");
  // Position of each source site inside the target's site list.
  std::vector<int> position(v_source.size());
  for (int k = 0; k < v_source.size(); ++k) {
    const auto it =
        std::lower_bound(v_target.sites.begin(), v_target.sites.end(), v_source.sites[k]);
    position[k] = static_cast<int>(it - v_target.sites.begin());
  }
  Vector out = Vector::Zero(1 << (2 * v_target.size()));
  for (int w = 0; w < local.size(); ++w) {
    if (local(w) == 0.0) continue;
    int target_word = 0;
    for (int k = 0; k < v_source.size(); ++k)
      target_word |= ((w >> (2 * k)) & 3) << (2 * position[k]);
    out(target_word) += local(w);
  }
  return out;
}

AlgebraElement LatticeSystem::embed(const AlgebraElement& x, const Region& v_source,
                                    const Region& v_target) const {
  const Vector coeffs = embedCoeffs(x.coeffs, v_source, v_target);
  return {coeffs, denseLocalMatrix(coeffs, v_target)};
}

Region LatticeSystem::supportOf(const Vector& coeffs, double tol) const {
  if (coeffs.size() != wordCount())
    throw DimensionMismatch("supportOf: coefficients are not over the full chain");
  std::vector<bool> active(n_sites_, false);
  for (int w = 0; w < coeffs.size(); ++w) {
    if (std::abs(coeffs(w)) <= tol) continue;
    for (int p = 0; p < n_sites_; ++p)
      if (wordDigit(w, p) != 0) active[p] = true;
  }
  std::vector<int> sites;
  for (int p = 0; p < n_sites_; ++p)
    if (active[p]) sites.push_back(p);
  return Region{std::move(sites)};
}

Matrix LatticeSystem::denseLocalMatrix(const Vector& local_coeffs, const Region& on) const {
  const int sites = on.size();
  if (local_coeffs.size() != (1 << (2 * sites)))
    throw DimensionMismatch("denseLocalMatrix: coefficient length does not match the region");
  const int dim = 1 << sites;
  Matrix out = Matrix::Zero(dim, dim);
  for (int w = 0; w < local_coeffs.size(); ++w)
    if (local_coeffs(w) != 0.0) out += local_coeffs(w) * detail::pauliWordMatrix(w, sites);
  return out;
}

Vector LatticeSystem::productStateValues(
    const std::vector<Eigen::Matrix2cd>& site_density) const {
  if (static_cast<int>(site_density.size()) != n_sites_)
    throw DimensionMismatch("productStateValues: one density matrix per site required");
  // Per-site expectations of the four single-site letters.
  std::vector<std::array<Complex, 4>> table(n_sites_);
  for (int p = 0; p < n_sites_; ++p)
    for (int digit = 0; digit < 4; ++digit)
      table[p][digit] = (site_density[p] * detail::pauliMatrix(digit)).trace();
  Vector values(wordCount());
  for (int w = 0; w < wordCount(); ++w) {
    Complex v = 1.0;
    for (int p = 0; p < n_sites_; ++p) v *= table[p][wordDigit(w, p)];
    values(w) = v;
  }
  return values;
}

Vector LatticeSystem::stateVectorValues(const Vector& psi) const {
  const int dim = hilbertDim();
  if (psi.size() != dim)
    throw DimensionMismatch("stateVectorValues: state vector has wrong dimension");
  Vector values(wordCount());
  Vector image(dim);
  for (int w = 0; w < wordCount(); ++w) {
    image.setZero();
    for (int idx = 0; idx < dim; ++idx) {
      if (psi(idx) == 0.0) continue;
      // Site p occupies bit N-1-p: site 0 is the most significant factor.
      int target = idx;
      Complex coeff = psi(idx);
      for (int p = 0; p < n_sites_; ++p) {
        const int bitpos = n_sites_ - 1 - p;
        const int bit = (idx >> bitpos) & 1;
        switch (wordDigit(w, p)) {
          case 0: break;
          case 1: target ^= 1 << bitpos; break;
          case 2:
            target ^= 1 << bitpos;
            coeff *= bit ? -detail::pauliI : detail::pauliI;
            break;
          default: coeff *= bit ? -1.0 : 1.0; break;
        }
      }
      image(target) += coeff;
    }
    values(w) = psi.dot(image);  // <psi, W psi>
  }
  return values;
}

// ------------------------------------------------------------------ states

PositiveFunctional productState(const std::vector<Eigen::Vector3d>& directions,
                                const LatticeSystem& sys) {
  if (static_cast<int>(directions.size()) != sys.nSites())
    throw DimensionMismatch("productState: one direction per site required");
  std::vector<Eigen::Matrix2cd> densities;
  densities.reserve(directions.size());
  for (const Eigen::Vector3d& n : directions) {
    if (std::abs(n.norm() - 1.0) > 1e-10)
      throw Error("productState: directions must be unit vectors");
    densities.push_back(0.5 * (Eigen::Matrix2cd::Identity() + sigmaDotN(n)));
  }
  Vector values = sys.productStateValues(densities);
  return PositiveFunctional(std::move(values), true);
}

PositiveFunctional mixedProductState(const std::vector<Eigen::Matrix2cd>& site_density,
                                     const LatticeSystem& sys) {
  for (const Eigen::Matrix2cd& rho : site_density) {
    if ((rho - rho.adjoint()).norm() > 1e-10)
      throw PositivityError("mixedProductState: site density is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(rho);
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw PositivityError("mixedProductState: site density is not PSD");
    if (std::abs(rho.trace().real() - 1.0) > 1e-10)
      throw PositivityError("mixedProductState: site density must have unit trace");
  }
  Vector values = sys.productStateValues(site_density);
  return PositiveFunctional(std::move(values), true);
}

PositiveFunctional stateVectorFunctional(const Vector& psi, const LatticeSystem& sys) {
  if (std::abs(psi.norm() - 1.0) > 1e-10)
    throw Error("stateVectorFunctional: state vector must be normalized");
  return PositiveFunctional(sys.stateVectorValues(psi), true);
}

Vector flippedBasisVector(const std::vector<int>& occupation, const std::vector<Frame>& frames,
                          const LatticeSystem& sys) {
  if (static_cast<int>(occupation.size()) != sys.nSites() ||
      static_cast<int>(frames.size()) != sys.nSites())
    throw DimensionMismatch("flippedBasisVector: need one occupation and frame per site");
  Vector out = Vector::Ones(1);
  for (int p = 0; p < sys.nSites(); ++p) {
    const Eigen::Vector2cd site = flippedVector(occupation[p], frames[p]);
    Vector next(out.size() * 2);
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      next(2 * i) = out(i) * site(0);
      next(2 * i + 1) = out(i) * site(1);
    }
    out = std::move(next);
  }
  return out;
}

// ------------------------------------------------------- region sweeps

namespace {

/// Candidate regions ordered by cardinality then lexicographic site list;
/// only regions leaving at least one free site are admissible.
std::vector<Region> candidateRegions(int n_sites, const Region& must_contain) {
  std::vector<Region> out;
  for (int mask = 0; mask < (1 << n_sites); ++mask) {
    std::vector<int> sites;
    for (int p = 0; p < n_sites; ++p)
      if (mask & (1 << p)) sites.push_back(p);
    Region r{std::move(sites)};
    if (r.size() >= n_sites) continue;
    if (!r.containsRegion(must_contain)) continue;
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const Region& a, const Region& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a.sites < b.sites;
  });
  return out;
}

/// Unit-norm sample elements of the local algebra of `gamma`: every Pauli
/// word (operator norm one) plus seeded random elements normalized in
/// operator norm. The seed mixes only the region and the sample index, so
/// the same samples are drawn regardless of which functionals are compared.
std::vector<Vector> unitSamples(const LatticeSystem& sys, const Region& gamma,
                                const SweepOptions& opts) {
  const int local_words = 1 << (2 * gamma.size());
  std::vector<Vector> out;
  out.reserve(local_words + opts.random_samples);
  for (int w = 0; w < local_words; ++w) {
    Vector c = Vector::Zero(local_words);
    c(w) = 1.0;
    out.push_back(std::move(c));
  }
  int region_mask = 0;
  for (int s : gamma.sites) region_mask |= 1 << s;
  Rng rng(Rng::derive(opts.seed, static_cast<std::uint64_t>(region_mask)));
  for (int s = 0; s < opts.random_samples; ++s) {
    Vector c = rng.gaussianVector(local_words);
    const double norm = operatorNorm(sys.denseLocalMatrix(c, gamma));
    if (norm > 1e-12) out.push_back(c / norm);
  }
  return out;
}

}  // namespace

ClusteringReport checkAlmostClustering(const LatticeSystem& sys, const PositiveFunctional& omega,
                                       const AlgebraElement& b, double eps,
                                       const SweepOptions& opts) {
  if (eps <= 0) throw SizeError("checkAlmostClustering: eps must be positive");
  if (omega.dim() != sys.wordCount() || b.coeffs.size() != sys.wordCount())
    throw DimensionMismatch("checkAlmostClustering: inputs are not over the full chain");
  const Region support = sys.supportOf(b.coeffs);
  if (support.size() == 0)
    throw DegenerateGeneratorError("checkAlmostClustering: b has empty support", 0.0);

  const Vector& values = omega.values();
  const Complex omega_b = (values.array() * b.coeffs.array()).sum();

  // Nonzero coefficients of b, once.
  std::vector<std::pair<int, Complex>> b_terms;
  for (int w = 0; w < b.coeffs.size(); ++w)
    if (b.coeffs(w) != 0.0) b_terms.push_back({w, b.coeffs(w)});

  ClusteringReport report;
  for (const Region& alpha : candidateRegions(sys.nSites(), support)) {
    const Region gamma = alpha.complementIn(sys.nSites());
    double estimate = 0.0;
    for (const Vector& local : unitSamples(sys, gamma, opts)) {
      // omega(a b) - omega(a) omega(b) with a supported in gamma.
      const Vector a_full = sys.embedCoeffs(local, gamma, sys.fullRegion());
      Complex cross = 0.0;
      Complex omega_a = 0.0;
      for (int v = 0; v < a_full.size(); ++v) {
        if (a_full(v) == 0.0) continue;
        omega_a += a_full(v) * values(v);
        for (const auto& [w, bw] : b_terms) {
          const auto [phase, prod] = sys.wordProduct(v, w);
          cross += a_full(v) * bw * phase * values(prod);
        }
      }
      estimate = std::max(estimate, std::abs(cross - omega_a * omega_b));
    }
    const bool pass = estimate <= eps;
    report.table.push_back({alpha, estimate, pass});
    if (report.table.size() == 1 || estimate < report.best_estimate)
      report.best_estimate = estimate;
    if (pass) {
      report.success = true;
      report.region = alpha;
      report.estimate = estimate;
      return report;
    }
  }
  report.success = false;
  return report;
}

ClusteringReport check2LM(const LatticeSystem& sys, const PositiveFunctional& omega,
                          const PositiveFunctional& omega_prime, double eps,
                          const SweepOptions& opts) {
  if (eps <= 0) throw SizeError("check2LM: eps must be positive");
  if (omega.dim() != sys.wordCount() || omega_prime.dim() != sys.wordCount())
    throw DimensionMismatch("check2LM: states are not over the full chain");
  const Vector diff = omega_prime.values() - omega.values();

  ClusteringReport report;
  for (const Region& alpha : candidateRegions(sys.nSites(), Region::empty())) {
    const Region gamma = alpha.complementIn(sys.nSites());
    double estimate = 0.0;
    for (const Vector& local : unitSamples(sys, gamma, opts)) {
      const Vector x_full = sys.embedCoeffs(local, gamma, sys.fullRegion());
      Complex deviation = 0.0;
      for (int v = 0; v < x_full.size(); ++v)
        if (x_full(v) != 0.0) deviation += x_full(v) * diff(v);
      estimate = std::max(estimate, std::abs(deviation));
    }
    const bool pass = estimate <= eps;
    report.table.push_back({alpha, estimate, pass});
    if (report.table.size() == 1 || estimate < report.best_estimate)
      report.best_estimate = estimate;
    if (pass) {
      report.success = true;
      report.region = alpha;
      report.estimate = estimate;
      return report;
    }
  }
  report.success = false;
  return report;
}

OneLMReport check1LM(const LatticeSystem& sys, const PositiveFunctional& omega,
                     const PositiveFunctional& omega_prime) {
  const StarAlgebra& a = sys.algebra();
  OneLMReport out;

  AlgebraElement witness;
  bool have_witness = false;
  try {
    witness = solveModifier(a, omega, omega_prime);
    out.path = "closed-form";
    have_witness = true;
  } catch (const SingularStateError&) {
    const ModifierSearchResult search = searchModifier(a, omega, omega_prime);
    if (search.reached_target) {
      witness = search.b;
      out.path = "search";
      have_witness = true;
    }
  }

  if (have_witness) {
    const PositiveFunctional modified = localModify(a, omega, witness);
    out.functional_residual =
        (modified.values() - omega_prime.values()).cwiseAbs().maxCoeff();
    try {
      const IntertwinerBuild build = buildIntertwiner(a, omega, witness);
      out.intertwiner_residual = build.intertwiner.residual;
      out.established = out.functional_residual < 1e-8;
      out.witness = witness;
      if (out.established) return out;
    } catch (const Error&) {
      // fall through to the diagnostics path
    }
  }

  out.path = "not-established";
  out.established = false;
  out.diagnostics = approximateModifierSequence(a, omega, omega_prime, 25);
  return out;
}

DemoReport demoSection3(const LatticeSystem& sys, const Region& lambda, const Region& gamma,
                        std::uint64_t seed, int equality_samples, double eps) {
  if (!lambda.disjoint(gamma))
    throw ConfigError("demoSection3: lambda and gamma must be disjoint");
  const StarAlgebra& a = sys.algebra();
  Rng rng(seed);

  std::vector<Eigen::Vector3d> directions;
  for (int p = 0; p < sys.nSites(); ++p) directions.push_back(rng.unitVector3());
  const PositiveFunctional omega = productState(directions, sys);
  std::vector<Eigen::Matrix2cd> site_density;
  for (int p = 0; p < sys.nSites(); ++p)
    site_density.push_back(0.5 * (Eigen::Matrix2cd::Identity() + sigmaDotN(directions[p])));

  // b = tensor of per-site factors over gamma, normalized site by site so
  // that omega(b^dagger b) = 1 exactly.
  AlgebraElement b;
  if (gamma.size() == 0) {
    b = a.identity();
  } else {
    Vector local = Vector::Ones(1);
    for (int k = 0; k < gamma.size(); ++k) {
      const int site = gamma.sites[k];
      Eigen::Matrix2cd factor;
      double weight = 0.0;
      do {
        factor = Eigen::Matrix2cd::Zero();
        for (int r = 0; r < 2; ++r)
          for (int c = 0; c < 2; ++c) factor(r, c) = rng.complexGaussian();
        weight = std::real((site_density[site] * (factor.adjoint() * factor)).trace());
      } while (weight < 1e-6);
      factor /= std::sqrt(weight);
      // single-site coefficients: c_digit = tr(sigma_digit m) / 2
      Eigen::Vector4cd site_coeffs;
      for (int digit = 0; digit < 4; ++digit)
        site_coeffs(digit) = 0.5 * (detail::pauliMatrix(digit) * factor).trace();
      Vector next(local.size() * 4);
      for (Eigen::Index i = 0; i < local.size(); ++i)
        for (int digit = 0; digit < 4; ++digit)
          next(i + (static_cast<Eigen::Index>(digit) << (2 * k))) = local(i) * site_coeffs(digit);
      local = std::move(next);
    }
    const Vector full = sys.embedCoeffs(local, gamma, sys.fullRegion());
    b = a.element(full);
  }

  const PositiveFunctional omega_b = localModify(a, omega, b);

  DemoReport report;
  report.gamma = gamma;
  report.equality_samples = equality_samples;
  const int lambda_words = 1 << (2 * lambda.size());
  for (int s = 0; s < equality_samples; ++s) {
    Vector local = rng.gaussianVector(lambda_words);
    local /= local.norm();
    const Vector x = sys.embedCoeffs(local, lambda, sys.fullRegion());
    const Complex before = (omega.values().array() * x.array()).sum();
    const Complex after = (omega_b.values().array() * x.array()).sum();
    report.max_equality_deviation =
        std::max(report.max_equality_deviation, std::abs(after - before));
  }

  SweepOptions opts;
  opts.seed = Rng::derive(seed, 1);
  report.two_lm = check2LM(sys, omega, omega_b, eps, opts);
  report.strict_lm = check2LM(sys, omega, omega_b, 1e-12, opts);
  report.one_lm = check1LM(sys, omega, omega_b);
  const bool region_ok =
      report.two_lm.success && gamma.containsRegion(report.two_lm.region);
  report.pass = report.max_equality_deviation <= 1e-12 && region_ok;
  return report;
}

}  // namespace qstar
