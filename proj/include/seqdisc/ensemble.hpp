#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "seqdisc/linalg.hpp"

namespace seqdisc {

/// Pairwise overlap c = s e^{i theta} of a symmetric ensemble, |c| <= 1.
struct Overlap {
  Complex value{0.0, 0.0};

  Overlap() = default;
  explicit Overlap(Complex v) : value(v) {
    if (std::abs(v) > 1.0 + 1e-9)
      throw std::invalid_argument("Overlap: |c| > 1");
  }
  explicit Overlap(double v) : Overlap(Complex(v, 0.0)) {}
  static Overlap polar(double s, double theta) {
    return Overlap(std::polar(s, theta));
  }

  double magnitude() const { return std::abs(value); }
  double phase() const { return std::arg(value); }
  bool is_real(double tol = kClassifyTol) const {
    return std::abs(value.imag()) <= tol;
  }
};

/// r symmetric pure states |psi_j> = U^j |psi_0> with equal pairwise overlap.
struct SymmetricEnsemble {
  int r = 2;
  Overlap c;
  std::vector<double> priors;  // one prior per hypothesis, sums to 1

  SymmetricEnsemble(int r_, Overlap c_, std::vector<double> priors_)
      : r(r_), c(c_), priors(std::move(priors_)) {
    validate();
  }
  static SymmetricEnsemble uniform(int r_, Overlap c_) {
    return SymmetricEnsemble(r_, c_, std::vector<double>(r_, 1.0 / r_));
  }

  void validate() const {
    if (r != 2 && r != 3)
      throw std::invalid_argument("SymmetricEnsemble: r must be 2 or 3");
    if (static_cast<int>(priors.size()) != r)
      throw std::invalid_argument("SymmetricEnsemble: priors size != r");
    double sum = 0.0;
    for (double p : priors) {
      if (p < -1e-15) throw std::invalid_argument("SymmetricEnsemble: negative prior");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("SymmetricEnsemble: priors do not sum to 1");
  }
};

/// Spectrum of the Gram matrix, in the fixed index convention
///   r = 2:  lambda_k = 1 + (-1)^k s
///   r = 3:  lambda_k = 1 + 2 s cos(theta + 2 pi k / 3)
/// The k index is never sorted; downstream constructions rely on it.
inline std::vector<double> symmetric_eigenvalues(Overlap c, int r) {
  double s = c.magnitude();
  if (r == 2) return {1.0 + s, 1.0 - s};
  if (r == 3) {
    double theta = c.phase();
    std::vector<double> lam(3);
    for (int k = 0; k < 3; ++k)
      lam[k] = 1.0 + 2.0 * s * std::cos(theta + 2.0 * std::numbers::pi * k / 3.0);
    return lam;
  }
  throw std::invalid_argument("symmetric_eigenvalues: r must be 2 or 3");
}

struct GramMatrix {
  Matrix entries;
  const Matrix& matrix() const { return entries; }
};

/// Gram matrix g_ij = <psi_i|psi_j>. For r = 2 a complex phase is not
/// observable (it can be absorbed into the states), so the magnitude is used.
/// For r = 3 the symmetric family is cyclic: g_{01} = g_{12} = g_{20} = c and
/// the remaining entries are fixed by Hermiticity, so g_{02} = conj(c).
inline GramMatrix build_gram(const SymmetricEnsemble& ens) {
  Matrix g(ens.r, ens.r);
  if (ens.r == 2) {
    double s = ens.c.magnitude();
    g << 1.0, s, s, 1.0;
  } else {
    Complex c = ens.c.value;
    g << Complex(1.0), c, std::conj(c),
         std::conj(c), Complex(1.0), c,
         c, std::conj(c), Complex(1.0);
  }
  return GramMatrix{g};
}

/// True iff the overlap corresponds to an actual state family, i.e. the Gram
/// matrix is PSD: min_k lambda_k >= -1e-10.
inline bool is_physical(Overlap c, int r) {
  for (double lam : symmetric_eigenvalues(c, r))
    if (lam < -kPsdTol) return false;
  return true;
}

/// Canonical representatives of the ensemble in the eigenbasis of the cyclic
/// unitary: |psi_0> = sum_k xi_k |k> with xi_k = sqrt(lambda_k / r), and
/// |psi_j> = U^j |psi_0| with U = diag(e^{-2 pi i k / r}).  The negative phase
/// sign is what makes this indexing reproduce <psi_0|psi_1> = c for complex c;
/// with the opposite sign one gets conj(c).  For real c both agree.
struct CanonicalStates {
  int r = 2;
  Overlap c;
  std::vector<double> eigenvalues;      // lambda_k, natural index
  Eigen::VectorXd amplitudes;           // xi_k = sqrt(lambda_k / r)
  Matrix unitary;                       // U
  std::vector<Vector> states;           // |psi_j>, j = 0..r-1

  const Vector& state(int j) const { return states.at(j); }

  /// Indices k with xi_k above tolerance; the states span exactly these slots.
  std::vector<int> span_slots(double tol = 1e-9) const {
    std::vector<int> slots;
    for (int k = 0; k < r; ++k)
      if (amplitudes(k) > tol) slots.push_back(k);
    return slots;
  }
  int span_dimension(double tol = 1e-9) const {
    return static_cast<int>(span_slots(tol).size());
  }

  /// States restricted to their span (used when a zero eigenvalue collapses
  /// the family into a lower-dimensional subspace, e.g. the c = -1/2 trine).
  std::vector<Vector> span_states(double tol = 1e-9) const {
    auto slots = span_slots(tol);
    std::vector<Vector> out;
    out.reserve(states.size());
    for (const auto& psi : states) {
      Vector v(slots.size());
      for (size_t a = 0; a < slots.size(); ++a) v(a) = psi(slots[a]);
      out.push_back(v);
    }
    return out;
  }
};

inline CanonicalStates canonical_states(Overlap c, int r) {
  if (!is_physical(c, r))
    throw std::invalid_argument("canonical_states: non-physical overlap");
  CanonicalStates cs;
  cs.r = r;
  // r = 2: phases are unobservable, work with the magnitude (see build_gram)
  cs.c = (r == 2) ? Overlap(c.magnitude()) : c;
  cs.eigenvalues = symmetric_eigenvalues(cs.c, r);
  cs.amplitudes = Eigen::VectorXd(r);
  for (int k = 0; k < r; ++k)
    cs.amplitudes(k) = std::sqrt(std::max(cs.eigenvalues[k], 0.0) / r);
  cs.unitary = Matrix::Zero(r, r);
  for (int k = 0; k < r; ++k)
    cs.unitary(k, k) = std::polar(1.0, -2.0 * std::numbers::pi * k / r);
  cs.states.reserve(r);
  Vector psi = cs.amplitudes.cast<Complex>();
  for (int j = 0; j < r; ++j) {
    cs.states.push_back(psi);
    psi = cs.unitary * psi;
  }
  return cs;
}

/// Effective overlap of n-copy sequences with per-copy overlaps c_k: the Gram
/// matrix of the product states has pairwise overlap prod_k c_k.
inline Overlap effective_overlap_product(std::span<const Overlap> overlaps) {
  if (overlaps.empty())
    throw std::invalid_argument("effective_overlap_product: empty list");
  Complex prod(1.0, 0.0);
  for (const auto& c : overlaps) prod *= c.value;
  return Overlap(prod);
}

}  // namespace seqdisc
