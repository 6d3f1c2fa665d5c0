#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "seqdisc/ensemble.hpp"
#include "seqdisc/linalg.hpp"

namespace seqdisc {

enum class Regime {
  ThreeOutcome,     // binary zero-error, both states detectable
  TwoOutcomeDrop0,  // binary zero-error, detection of state 0 dropped
  TwoOutcomeDrop1,  // binary zero-error, detection of state 1 dropped
  OddParity,        // symmetric negative overlap, odd copy number
  EvenParity,       // symmetric negative overlap, even copy number
  NA,
};

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::ThreeOutcome: return "three-outcome";
    case Regime::TwoOutcomeDrop0: return "two-outcome-drop0";
    case Regime::TwoOutcomeDrop1: return "two-outcome-drop1";
    case Regime::OddParity: return "odd-parity";
    case Regime::EvenParity: return "even-parity";
    default: return "na";
  }
}

struct DiscriminationBound {
  double success = 0.0;
  double inconclusive = 0.0;  // zero for minimum-error bounds
  Regime regime = Regime::NA;
  bool priors_swapped = false;
};

/// Optimal n-copy minimum-error success probability for two pure states:
/// (1 + sqrt(1 - 4 eta0 eta1 c^{2n})) / 2.
inline DiscriminationBound helstrom_success_n(double eta0, double eta1, Overlap c, int n) {
  if (n < 1) throw std::invalid_argument("helstrom_success_n: n must be >= 1");
  double s = c.magnitude();
  double arg = 1.0 - 4.0 * eta0 * eta1 * std::pow(s, 2 * n);
  DiscriminationBound b;
  b.success = 0.5 * (1.0 + std::sqrt(std::max(arg, 0.0)));
  return b;
}

/// Optimal n-copy zero-error failure probability for two pure states.  With
/// eta0 <= eta1 (swapped internally if needed):
///   Q = 2 sqrt(eta0 eta1) c^n        if  sqrt(eta0/eta1) >= c^n
///   Q = eta0 + eta1 c^{2n}           otherwise (low-prior state dropped)
/// The boundary case belongs to the first branch, where the two expressions
/// coincide.
inline DiscriminationBound binary_zero_error_Q(double eta0, double eta1, Overlap c, int n) {
  if (n < 1) throw std::invalid_argument("binary_zero_error_Q: n must be >= 1");
  double s = c.magnitude();
  DiscriminationBound b;
  double lo = eta0, hi = eta1;
  if (lo > hi) {
    std::swap(lo, hi);
    b.priors_swapped = true;
  }
  double cn = std::pow(s, n);
  auto ge = [](double x, double y) {
    return x >= y - kClassifyTol * std::max({1.0, std::abs(x), std::abs(y)});
  };
  double q;
  if (ge(lo, cn * cn * hi)) {  // sqrt(lo/hi) >= c^n
    q = 2.0 * std::sqrt(lo * hi) * cn;
    b.regime = Regime::ThreeOutcome;
  } else {
    q = lo + hi * cn * cn;
    b.regime = b.priors_swapped ? Regime::TwoOutcomeDrop1 : Regime::TwoOutcomeDrop0;
  }
  b.inconclusive = q;
  b.success = 1.0 - q;
  return b;
}

/// Optimal n-copy zero-error bound for r equiprobable symmetric states: the
/// per-state success probability is the minimum Gram eigenvalue at the n-copy
/// effective overlap c^n (the Gram matrix of n-fold product states).  Real
/// negative overlaps split by parity: Q = 2|c|^n for odd n, |c|^n for even n.
inline DiscriminationBound symmetric_zero_error_Q(Overlap c, int r, int n) {
  if (n < 1) throw std::invalid_argument("symmetric_zero_error_Q: n must be >= 1");
  if (!is_physical(c, r))
    throw std::invalid_argument("symmetric_zero_error_Q: non-physical overlap");
  Complex cn = std::pow(c.value, n);
  auto lam = symmetric_eigenvalues(Overlap(cn), r);
  double p = *std::min_element(lam.begin(), lam.end());
  p = std::clamp(p, 0.0, 1.0);
  DiscriminationBound b;
  b.success = p;
  b.inconclusive = 1.0 - p;
  if (r == 3 && c.is_real() && c.value.real() < -kClassifyTol)
    b.regime = (n % 2 == 1) ? Regime::OddParity : Regime::EvenParity;
  return b;
}

/// Feasibility of conditional success probabilities p for the zero-error
/// semidefinite program: G - diag(p) must be PSD (tolerance 1e-10).
inline bool verify_sdp_feasibility(const GramMatrix& gram, std::span<const double> p) {
  const Matrix& g = gram.matrix();
  if (static_cast<int>(p.size()) != g.rows())
    throw std::invalid_argument("verify_sdp_feasibility: dimension mismatch");
  Matrix m = g;
  for (int i = 0; i < g.rows(); ++i) m(i, i) -= p[i];
  return is_psd(m);
}

}  // namespace seqdisc
