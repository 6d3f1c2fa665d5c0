#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "seqdisc/povm.hpp"

namespace seqdisc {

using Rational = boost::multiprecision::cpp_rational;

/// Parse "p/q" or a bare integer as an exact rational; anything else
/// (decimals, polar forms) returns nullopt and the caller stays in doubles.
inline std::optional<Rational> parse_rational(const std::string& text) {
  auto is_int = [](const std::string& t) {
    if (t.empty()) return false;
    size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
    if (i == t.size()) return false;
    for (; i < t.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
    return true;
  };
  auto slash = text.find('/');
  if (slash == std::string::npos) {
    if (!is_int(text)) return std::nullopt;
    return Rational(boost::multiprecision::cpp_int(text));
  }
  std::string num = text.substr(0, slash);
  std::string den = text.substr(slash + 1);
  if (!is_int(num) || !is_int(den)) return std::nullopt;
  boost::multiprecision::cpp_int q(den);
  if (q == 0) throw std::invalid_argument("parse_rational: zero denominator");
  return Rational(boost::multiprecision::cpp_int(num), q);
}

/// Exact inputs for binary zero-error regime decisions.  Only comparisons are
/// done exactly; the measurement matrices themselves stay in doubles.
struct ExactBinaryParams {
  Rational eta0;
  Rational eta1;
  Rational c;  // overlap magnitude as a rational
};

/// Tracks the exact prior ratio eta0/eta1 along the inconclusive path of a
/// binary zero-error chain, so regime boundaries like eta0/eta1 = c^{2k}
/// classify without floating-point ambiguity.
class ExactRatioTracker {
 public:
  explicit ExactRatioTracker(const ExactBinaryParams& p)
      : ratio_(p.eta1 == 0 ? Rational(0) : Rational(p.eta0 / p.eta1)),
        eta1_zero_(p.eta1 == 0) {}

  BinaryUaRegime classify(const Rational& c) const {
    Rational c2 = c * c;
    if (eta1_zero_) return BinaryUaRegime::DropDetect1;
    if (ratio_ >= c2 && (ratio_ == 0 ? c2 == 0 : Rational(1) / ratio_ >= c2))
      return BinaryUaRegime::ThreeOutcome;
    return ratio_ < c2 ? BinaryUaRegime::DropDetect0 : BinaryUaRegime::DropDetect1;
  }

  /// Ratio update after an inconclusive outcome in the given regime.
  void advance(const Rational& c, BinaryUaRegime regime) {
    Rational c2 = c * c;
    switch (regime) {
      case BinaryUaRegime::ThreeOutcome:
        ratio_ = 1;  // posteriors equalize exactly: eta0 q0 = eta1 q1
        break;
      case BinaryUaRegime::DropDetect0:
        if (c2 == 0) throw std::logic_error("ExactRatioTracker: drop regime with c = 0");
        ratio_ /= c2;
        break;
      case BinaryUaRegime::DropDetect1:
        ratio_ *= c2;
        break;
    }
  }

  const Rational& ratio() const { return ratio_; }

 private:
  Rational ratio_;
  bool eta1_zero_ = false;
};

/// Exact version of compute_k0: smallest k >= 0 with
/// eta0 / (eta1 c^{2k}) >= c^2.
inline int compute_k0_exact(const ExactBinaryParams& p, int max_steps = 1000000) {
  if (p.c <= 0 || p.c >= 1)
    throw std::invalid_argument("compute_k0_exact: need 0 < c < 1");
  if (p.eta0 <= 0 || p.eta1 <= 0)
    throw std::invalid_argument("compute_k0_exact: need positive priors");
  Rational ratio = p.eta0 / p.eta1;
  Rational c2 = p.c * p.c;
  for (int k = 0; k <= max_steps; ++k) {
    if (ratio >= c2) return k;
    ratio /= c2;
  }
  throw std::runtime_error("compute_k0_exact: did not converge");
}

}  // namespace seqdisc
