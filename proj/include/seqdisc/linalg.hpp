#pragma once

#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

namespace seqdisc {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Shared numerical tolerances. PSD checks use 1e-10 so that exact boundary
// ensembles (Gram matrices with a zero eigenvalue) classify as valid.
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kCompletenessTol = 1e-10;
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kZeroErrorCertTol = 1e-12;
inline constexpr double kClassifyTol = 1e-12;

inline bool is_hermitian(const Matrix& m, double tol = kHermitianTol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline double min_eigenvalue(const Matrix& m) {
  if (!is_hermitian(m, 1e-8))
    throw std::invalid_argument("min_eigenvalue: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline bool is_psd(const Matrix& m, double tol = kPsdTol) {
  return min_eigenvalue(m) >= -tol;
}

// |v><v|
inline Matrix projector(const Vector& v) { return v * v.adjoint(); }

// Orthogonal complement of a 2d vector, <perp|v> = 0, unit norm.
inline Vector perp2(const Vector& v) {
  if (v.size() != 2) throw std::invalid_argument("perp2: need dimension 2");
  Vector p(2);
  p << -std::conj(v(1)), std::conj(v(0));
  double n = p.norm();
  if (n == 0.0) throw std::invalid_argument("perp2: zero vector");
  return p / n;
}

inline double born_probability(const Matrix& effect, const Vector& state) {
  Complex val = state.adjoint() * effect * state;
  double p = val.real();
  if (p > 1e-4) return p;
  // The quadratic form cancels almost completely for small probabilities,
  // leaving an absolute error near machine epsilon. Recompute through the
  // spectral factorization: sums of squared amplitudes cannot cancel, so
  // tiny probabilities keep their relative accuracy.
  Eigen::SelfAdjointEigenSolver<Matrix> es(effect);
  double refined = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    double lambda = es.eigenvalues()(k);
    if (lambda <= 0.0) continue;
    refined += lambda * std::norm(es.eigenvectors().col(k).dot(state));
  }
  return refined;
}

}  // namespace seqdisc
