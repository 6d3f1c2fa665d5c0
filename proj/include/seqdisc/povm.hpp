#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqdisc/ensemble.hpp"
#include "seqdisc/linalg.hpp"

namespace seqdisc {

enum class OutcomeKind { Identify, Exclude, Inconclusive };

struct EffectLabel {
  OutcomeKind kind = OutcomeKind::Inconclusive;
  int index = -1;  // hypothesis index for Identify/Exclude, -1 otherwise

  static EffectLabel identify(int i) { return {OutcomeKind::Identify, i}; }
  static EffectLabel exclude(int i) { return {OutcomeKind::Exclude, i}; }
  static EffectLabel inconclusive() { return {OutcomeKind::Inconclusive, -1}; }

  bool operator==(const EffectLabel&) const = default;

  std::string str() const {
    switch (kind) {
      case OutcomeKind::Identify: return "identify:" + std::to_string(index);
      case OutcomeKind::Exclude: return "exclude:" + std::to_string(index);
      default: return "inconclusive";
    }
  }
};

struct Effect {
  EffectLabel label;
  Matrix matrix;
};

/// A finite POVM on the ensemble span: PSD effects summing to the identity.
struct Povm {
  std::vector<Effect> effects;
  int dim = 0;
  std::string id;  // short descriptor, used in protocol traces

  void validate() const {
    Matrix sum = Matrix::Zero(dim, dim);
    for (const auto& e : effects) {
      if (e.matrix.rows() != dim || e.matrix.cols() != dim)
        throw std::invalid_argument("Povm: effect dimension mismatch");
      if (!is_hermitian(e.matrix))
        throw std::invalid_argument("Povm: effect not Hermitian");
      if (!is_psd(e.matrix))
        throw std::invalid_argument("Povm: effect not PSD");
      sum += e.matrix;
    }
    if ((sum - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff() > kCompletenessTol)
      throw std::invalid_argument("Povm: effects do not sum to identity");
  }
};

/// Minimum-error measurement for two pure states: project onto the positive
/// and negative parts of eta0 |psi_0><psi_0| - eta1 |psi_1><psi_1|.  A null
/// direction is assigned to the larger-prior outcome.
inline Povm helstrom_binary(double eta0, double eta1, const CanonicalStates& states) {
  if (states.r != 2)
    throw std::invalid_argument("helstrom_binary: need a binary ensemble");
  Matrix gamma = eta0 * projector(states.state(0)) - eta1 * projector(states.state(1));
  Eigen::SelfAdjointEigenSolver<Matrix> es(gamma);
  Matrix p0 = Matrix::Zero(2, 2);
  Matrix p1 = Matrix::Zero(2, 2);
  const double null_tol = 1e-13;
  for (int k = 0; k < 2; ++k) {
    double g = es.eigenvalues()(k);
    Matrix pk = projector(es.eigenvectors().col(k));
    if (g > null_tol) p0 += pk;
    else if (g < -null_tol) p1 += pk;
    else if (eta0 >= eta1) p0 += pk;
    else p1 += pk;
  }
  Povm povm;
  povm.dim = 2;
  povm.id = "helstrom";
  povm.effects = {{EffectLabel::identify(0), p0}, {EffectLabel::identify(1), p1}};
  return povm;
}

enum class BinaryUaRegime { ThreeOutcome, DropDetect0, DropDetect1 };

/// Regime of the optimal binary unambiguous measurement given the prior ratio.
/// Three outcomes while c^2 <= eta0/eta1 <= 1/c^2 (boundaries included; at the
/// boundary the third effect has weight zero), otherwise detection of the
/// low-prior state is dropped entirely.
inline BinaryUaRegime classify_binary_ua(double eta0, double eta1, double s) {
  double c2 = s * s;
  auto ge = [](double x, double y) {
    return x >= y - kClassifyTol * std::max({1.0, std::abs(x), std::abs(y)});
  };
  // compare eta0 >= c^2 eta1 and eta1 >= c^2 eta0 without forming ratios
  if (ge(eta0, c2 * eta1) && ge(eta1, c2 * eta0)) return BinaryUaRegime::ThreeOutcome;
  if (eta0 < c2 * eta1) return BinaryUaRegime::DropDetect0;
  return BinaryUaRegime::DropDetect1;
}

/// Optimal unambiguous (zero-error) measurement for two pure states with
/// overlap magnitude s: identification effects are weighted projectors onto
/// the complements of the opposite state, with conditional failure rates
/// q_0 = s sqrt(eta1/eta0) and q_1 = s sqrt(eta0/eta1) in the three-outcome
/// regime, saturating q_0 q_1 = s^2.
inline Povm binary_unambiguous(double eta0, double eta1, const CanonicalStates& states,
                               std::optional<BinaryUaRegime> forced_regime = std::nullopt) {
  if (states.r != 2)
    throw std::invalid_argument("binary_unambiguous: need a binary ensemble");
  double s = states.c.magnitude();
  if (s >= 1.0 - 1e-12)
    throw std::invalid_argument("binary_unambiguous: states are indistinguishable");
  BinaryUaRegime regime = forced_regime ? *forced_regime : classify_binary_ua(eta0, eta1, s);

  Vector perp0 = perp2(states.state(0));  // detects psi_1
  Vector perp1 = perp2(states.state(1));  // detects psi_0
  double overlap2 = 1.0 - s * s;          // |<perp_j|psi_i>|^2, i != j

  Povm povm;
  povm.dim = 2;
  if (regime == BinaryUaRegime::DropDetect0) {
    povm.id = "ua2-drop0";
    Matrix f1 = projector(perp0);
    povm.effects = {{EffectLabel::identify(1), f1},
                    {EffectLabel::inconclusive(), Matrix::Identity(2, 2) - f1}};
    return povm;
  }
  if (regime == BinaryUaRegime::DropDetect1) {
    povm.id = "ua2-drop1";
    Matrix f0 = projector(perp1);
    povm.effects = {{EffectLabel::identify(0), f0},
                    {EffectLabel::inconclusive(), Matrix::Identity(2, 2) - f0}};
    return povm;
  }

  auto cond_failure = [s](double mine, double other) {
    if (mine > 0.0) return std::min(1.0, s * std::sqrt(other / mine));
    return s == 0.0 ? 0.0 : 1.0;
  };
  double q0 = cond_failure(eta0, eta1);
  double q1 = cond_failure(eta1, eta0);
  Matrix f0 = ((1.0 - q0) / overlap2) * projector(perp1);
  Matrix f1 = ((1.0 - q1) / overlap2) * projector(perp0);
  Matrix fi = Matrix::Identity(2, 2) - f0 - f1;
  povm.id = "ua2";
  povm.effects = {{EffectLabel::identify(0), f0},
                  {EffectLabel::identify(1), f1},
                  {EffectLabel::inconclusive(), fi}};
  return povm;
}

/// Unnormalized dual states |phi_k> = U^k |phi_0>, |phi_0> = sum_k
/// (3 lambda_k)^{-1/2} |k>, satisfying <phi_i|psi_j> = delta_ij.
inline std::vector<Vector> dual_states(const CanonicalStates& states) {
  if (states.r != 3)
    throw std::invalid_argument("dual_states: need a three-state ensemble");
  Vector phi(3);
  for (int k = 0; k < 3; ++k) {
    double lam = states.eigenvalues[k];
    if (lam <= kPsdTol)
      throw std::invalid_argument("dual_states: zero Gram eigenvalue, duals do not exist");
    phi(k) = Complex(1.0 / std::sqrt(3.0 * lam), 0.0);
  }
  std::vector<Vector> duals;
  duals.reserve(3);
  for (int j = 0; j < 3; ++j) {
    duals.push_back(phi);
    phi = states.unitary * phi;
  }
  return duals;
}

/// Optimal equal-prior unambiguous measurement for three symmetric states:
/// F_k = lambda_min |phi_k><phi_k| identifies psi_k with success probability
/// lambda_min per state, the rest is inconclusive.
inline Povm three_state_unambiguous(const CanonicalStates& states) {
  auto duals = dual_states(states);  // throws on zero eigenvalues
  double p = std::min({states.eigenvalues[0], states.eigenvalues[1], states.eigenvalues[2]});
  Povm povm;
  povm.dim = 3;
  povm.id = "ua3";
  Matrix sum = Matrix::Zero(3, 3);
  for (int k = 0; k < 3; ++k) {
    Matrix fk = p * projector(duals[k]);
    sum += fk;
    povm.effects.push_back({EffectLabel::identify(k), fk});
  }
  povm.effects.push_back({EffectLabel::inconclusive(), Matrix::Identity(3, 3) - sum});
  return povm;
}

/// State-exclusion measurement for the c = -1/2 trine.  The Gram matrix has a
/// zero eigenvalue, the states span a two-dimensional subspace, and
/// E_k = (2/3) |psi_k^perp><psi_k^perp| on that span always rules out one
/// state: outcome k never occurs when the true state is psi_k.
inline Povm exclusion_povm(const CanonicalStates& states) {
  if (states.r != 3 || std::abs(states.c.value - Complex(-0.5, 0.0)) > kPsdTol)
    throw std::invalid_argument("exclusion_povm: defined only for c = -1/2");
  auto span = states.span_states();
  if (span[0].size() != 2)
    throw std::invalid_argument("exclusion_povm: unexpected span dimension");
  Povm povm;
  povm.dim = 2;
  povm.id = "excl3";
  for (int k = 0; k < 3; ++k)
    povm.effects.push_back({EffectLabel::exclude(k), (2.0 / 3.0) * projector(perp2(span[k]))});
  return povm;
}

/// Natural-index to ordered-eigenbasis permutation for real c in (-1/2, 0):
/// the spectrum is lambda = (1-2|c|, 1+|c|, 1+|c|), and the ordered basis
/// lists the degenerate pair first, i.e. ordered slot m is natural slot
/// perm[m] with perm = {1, 2, 0}.
inline constexpr std::array<int, 3> identify_exclude_permutation() { return {1, 2, 0}; }

/// Identify-or-exclude measurement for three symmetric states with real
/// overlap c in (-1/2, 0): three identification effects
/// F_k = (1-2|c|) |phi_k><phi_k| plus three exclusion effects built from the
/// difference vector of the two degenerate eigenbasis slots,
/// E_k = (|c|/(1+|c|)) |chi_k><chi_k| with |chi_0> = |1> - |2| (natural
/// indexing) and |chi_k> = U^k |chi_0>.  Each state is identified with
/// probability 1-2|c| and excluded (by one of the other two outcomes) with
/// probability 2|c|; there is no inconclusive outcome.
inline Povm identify_exclude_povm(const CanonicalStates& states) {
  if (states.r != 3)
    throw std::invalid_argument("identify_exclude_povm: need a three-state ensemble");
  if (!states.c.is_real())
    throw std::invalid_argument("identify_exclude_povm: overlap must be real");
  double c = states.c.value.real();
  if (c <= -0.5 + kPsdTol || c >= -kClassifyTol)
    throw std::invalid_argument("identify_exclude_povm: overlap outside (-1/2, 0)");
  double a = -c;

  auto duals = dual_states(states);
  double p = 1.0 - 2.0 * a;  // lambda_min, natural slot 0
  Vector chi(3);
  chi << Complex(0.0), Complex(1.0), Complex(-1.0);
  double w = a / (1.0 + a);

  Povm povm;
  povm.dim = 3;
  povm.id = "idex3";
  for (int k = 0; k < 3; ++k)
    povm.effects.push_back({EffectLabel::identify(k), p * projector(duals[k])});
  for (int k = 0; k < 3; ++k) {
    povm.effects.push_back({EffectLabel::exclude(k), w * projector(chi)});
    chi = states.unitary * chi;
  }
  return povm;
}

/// Outcome distribution p(l | psi_i) = <psi_i| E_l |psi_i>.  A POVM living on
/// a strict subspace of the canonical embedding (exclusion_povm) is evaluated
/// against the span-restricted states.
inline std::vector<double> born_outcome_distribution(const Povm& povm, int true_index,
                                                     const CanonicalStates& states) {
  if (true_index < 0 || true_index >= states.r)
    throw std::invalid_argument("born_outcome_distribution: bad state index");
  Vector psi;
  if (povm.dim == states.r) {
    psi = states.state(true_index);
  } else {
    auto span = states.span_states();
    if (static_cast<int>(span[0].size()) != povm.dim)
      throw std::invalid_argument("born_outcome_distribution: dimension mismatch");
    psi = span[true_index];
  }
  std::vector<double> probs;
  probs.reserve(povm.effects.size());
  double sum = 0.0;
  for (const auto& e : povm.effects) {
    double p = born_probability(e.matrix, psi);
    probs.push_back(p);
    sum += p;
  }
  if (std::abs(sum - 1.0) > kCompletenessTol)
    throw std::runtime_error("born_outcome_distribution: probabilities do not sum to 1");
  return probs;
}

inline nlohmann::json to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j)
      row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

inline nlohmann::json to_json(const Povm& povm) {
  nlohmann::json effects = nlohmann::json::array();
  for (const auto& e : povm.effects)
    effects.push_back({{"label", e.label.str()}, {"matrix", to_json(e.matrix)}});
  return {{"dimension", povm.dim}, {"id", povm.id}, {"effects", effects}};
}

}  // namespace seqdisc
