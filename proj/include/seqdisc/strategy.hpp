#pragma once

#include <atomic>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <thread>
#include <vector>

#include "seqdisc/bounds.hpp"
#include "seqdisc/ensemble.hpp"
#include "seqdisc/povm.hpp"

namespace seqdisc {

/// Per-step knobs of the local strategy family: the weight on the three
/// identification effects and the weight on the three exclusion effects.
struct StrategyParams {
  double f_weight = 0.0;
  double e_weight = 0.0;
};

struct OnlineOptimum {
  double success = 0.0;
  std::vector<StrategyParams> steps;  // chronological, steps[0] is the first copy
  std::int64_t evaluations = 0;
};

/// The one-parameter-per-outcome-type family of local measurements for three
/// symmetric states: identification effects f * |dual_j><dual_j| plus
/// exclusion effects e * |chi_j><chi_j| with chi_0 orthogonal to psi_0 and
/// supported on the two dominant eigenvector slots.  Summing either family
/// over j gives a diagonal operator, so feasibility of the completing
/// inconclusive effect reduces to its diagonal.
class TrineStrategyFamily {
 public:
  explicit TrineStrategyFamily(Overlap c) : states_(canonical_states(c, 3)) {
    const auto& lam = states_.eigenvalues;
    std::vector<int> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return lam[x] > lam[y]; });
    slot_a_ = order[0];
    slot_b_ = order[1];
    slot_m_ = order[2];

    Matrix id = Matrix::Identity(3, 3);
    sum_identify_ = Matrix::Zero(3, 3);
    identify_factor_ = 0.0;
    has_identify_ = lam[slot_m_] > 1e-12;
    if (has_identify_) {
      auto duals = dual_states(states_);
      for (const auto& d : duals) sum_identify_ += projector(d);
      identify_factor_ = born_probability(projector(duals[0]), states_.state(0));
    }

    Vector chi0 = Vector::Zero(3);
    chi0(slot_a_) = states_.amplitudes(slot_b_);
    chi0(slot_b_) = -states_.amplitudes(slot_a_);
    sum_exclude_ = Matrix::Zero(3, 3);
    exclude_factor_ = 0.0;
    Vector chi = chi0;
    for (int j = 0; j < 3; ++j) {
      sum_exclude_ += projector(chi);
      exclude_factor_ += born_probability(projector(chi), states_.state(0));
      chi = states_.unitary * chi;
    }

    for (const Matrix* m : {&sum_identify_, &sum_exclude_})
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          if (i != j && std::abs((*m)(i, j)) > 1e-12)
            throw std::logic_error("TrineStrategyFamily: effect sum is not diagonal");
    (void)id;
  }

  const CanonicalStates& states() const { return states_; }
  bool has_identify() const { return has_identify_; }

  /// Probability of an identification outcome at weight f (true state drawn
  /// uniformly; equal for every true state by symmetry).
  double identify_prob(double f) const { return f * identify_factor_; }

  /// Probability of an exclusion outcome at weight e.
  double exclude_prob(double e) const { return e * exclude_factor_; }

  /// Whether 1 - f * sum_j F_j - e * sum_j E_j is positive semidefinite.
  bool feasible(double f, double e) const {
    for (int k = 0; k < 3; ++k) {
      double diag =
          1.0 - f * sum_identify_(k, k).real() - e * sum_exclude_(k, k).real();
      if (diag < -kPsdTol) return false;
    }
    return true;
  }

  /// Largest feasible identification weight (exclusion off), by bisection.
  double max_f() const {
    if (!has_identify_) return 0.0;
    return bisect([this](double f) { return feasible(f, 0.0); });
  }

  /// Largest feasible exclusion weight at a given identification weight.
  double max_e(double f) const {
    if (!feasible(f, 0.0)) return 0.0;
    return bisect([this, f](double e) { return feasible(f, e); });
  }

 private:
  template <typename Pred>
  static double bisect(Pred ok) {
    double lo = 0.0, hi = 4.0;
    if (ok(hi)) return hi;
    while (hi - lo > 1e-10) {
      double mid = 0.5 * (lo + hi);
      if (ok(mid)) lo = mid;
      else hi = mid;
    }
    return lo;
  }

  CanonicalStates states_;
  int slot_a_ = 0, slot_b_ = 1, slot_m_ = 2;
  bool has_identify_ = false;
  Matrix sum_identify_, sum_exclude_;
  double identify_factor_ = 0.0, exclude_factor_ = 0.0;
};

namespace detail {

struct StepObjective {
  const TrineStrategyFamily& family;
  double continue_value;  // V(m-1)
  double exclude_value;   // expected success of the surviving binary chain

  double operator()(double f, double u, std::int64_t& evals) const {
    evals += 1;
    double e = u * family.max_e(f);
    double pid = family.identify_prob(f);
    double pex = family.exclude_prob(e);
    double pinc = 1.0 - pid - pex;
    return pid + pex * exclude_value + pinc * continue_value;
  }
};

}  // namespace detail

/// Best success probability over the local strategy family for n copies of
/// the uniform three-state ensemble, by backward induction over the number of
/// copies left.  Each stage is solved on a (f, u) grid, u in [0,1] scaling
/// the largest exclusion weight still feasible at f, then polished by
/// coordinate descent from the best `restarts` grid points.
inline OnlineOptimum optimize_online(Overlap c, int n, int restarts = 3) {
  if (n < 1) throw std::invalid_argument("optimize_online: n must be >= 1");
  TrineStrategyFamily family(c);
  double s = c.magnitude();

  auto binary_value = [s](int copies) {
    return copies >= 1 ? 1.0 - std::pow(s, copies) : 0.0;
  };

  OnlineOptimum out;
  std::vector<double> value(n + 1, 0.0);
  std::vector<StrategyParams> stage(n + 1);
  const int grid = 50;
  double f_cap = family.max_f();

  for (int m = 1; m <= n; ++m) {
    detail::StepObjective obj{family, value[m - 1], binary_value(m - 1)};

    struct Candidate {
      double score, f, u;
    };
    std::vector<Candidate> top;
    auto offer = [&](double score, double f, double u) {
      top.push_back({score, f, u});
      std::sort(top.begin(), top.end(),
                [](const Candidate& x, const Candidate& y) { return x.score > y.score; });
      if (static_cast<int>(top.size()) > restarts) top.pop_back();
    };

    for (int i = 0; i < grid; ++i) {
      double f = (f_cap > 0.0) ? f_cap * i / (grid - 1) : 0.0;
      for (int j = 0; j < grid; ++j) {
        double u = static_cast<double>(j) / (grid - 1);
        offer(obj(f, u, out.evaluations), f, u);
      }
      if (f_cap <= 0.0) break;
    }

    Candidate best = top.front();
    for (Candidate cand : top) {
      double df = std::max(f_cap / grid, 1e-6);
      double du = 1.0 / grid;
      double score = cand.score;
      while (df > 1e-8 || du > 1e-8) {
        bool moved = false;
        for (double fs : {cand.f - df, cand.f + df}) {
          double f = std::clamp(fs, 0.0, f_cap);
          double trial = obj(f, cand.u, out.evaluations);
          if (trial > score) {
            score = trial;
            cand.f = f;
            moved = true;
          }
        }
        for (double us : {cand.u - du, cand.u + du}) {
          double u = std::clamp(us, 0.0, 1.0);
          double trial = obj(cand.f, u, out.evaluations);
          if (trial > score) {
            score = trial;
            cand.u = u;
            moved = true;
          }
        }
        if (!moved) {
          df *= 0.5;
          du *= 0.5;
        }
      }
      if (score > best.score) best = {score, cand.f, cand.u};
    }

    value[m] = best.score;
    stage[m] = {best.f, best.u * family.max_e(best.f)};
  }

  out.success = value[n];
  out.steps.reserve(n);
  for (int k = 0; k < n; ++k) out.steps.push_back(stage[n - k]);
  return out;
}

struct ScanPoint {
  Complex c;
  double s = 0.0;
  double theta = 0.0;
  int n = 0;
  bool physical = false;
  double online = 0.0;
  double global = 0.0;
  double gap = 0.0;
  std::int64_t evaluations = 0;
};

inline int scan_thread_count() {
  if (const char* env = std::getenv("SEQDISC_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Compare the online optimum against the collective bound over a polar grid
/// of overlaps: s_i = s_max * (i+1)/s_steps, theta_j = 2 pi j / theta_steps.
/// Points outside the physical region are kept in the output but carry no
/// strategy values.  Work is distributed over scan_thread_count() threads;
/// every thread writes only its own slots, so the result is deterministic.
inline std::vector<ScanPoint> scan_plane(int s_steps, int theta_steps, int n,
                                         double s_max = 1.0) {
  if (s_steps < 1 || theta_steps < 1)
    throw std::invalid_argument("scan_plane: grid must have at least one point per axis");
  if (n < 1) throw std::invalid_argument("scan_plane: n must be >= 1");
  if (!(s_max > 0.0) || s_max > 1.0)
    throw std::invalid_argument("scan_plane: s_max must lie in (0, 1]");

  std::vector<ScanPoint> points(static_cast<size_t>(s_steps) * theta_steps);
  for (int i = 0; i < s_steps; ++i) {
    double s = s_max * (i + 1) / s_steps;
    for (int j = 0; j < theta_steps; ++j) {
      double theta = 2.0 * std::numbers::pi * j / theta_steps;
      ScanPoint& pt = points[static_cast<size_t>(i) * theta_steps + j];
      pt.c = std::polar(s, theta);
      pt.s = s;
      pt.theta = theta;
      pt.n = n;
    }
  }

  std::atomic<size_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      size_t idx = cursor.fetch_add(1);
      if (idx >= points.size()) return;
      ScanPoint& pt = points[idx];
      Overlap c(pt.c);
      pt.physical = is_physical(c, 3);
      if (!pt.physical) continue;
      OnlineOptimum opt = optimize_online(c, pt.n);
      pt.online = opt.success;
      pt.evaluations = opt.evaluations;
      pt.global = symmetric_zero_error_Q(c, 3, pt.n).success;
      pt.gap = pt.global - pt.online;
    }
  };

  int threads = std::min<int>(scan_thread_count(), static_cast<int>(points.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return points;
}

inline void write_scan_csv(std::ostream& os, const std::vector<ScanPoint>& points) {
  os << "re_c,im_c,s,theta,n,online,global,gap,physical\n";
  os << std::setprecision(12);
  for (const auto& pt : points) {
    os << pt.c.real() << ',' << pt.c.imag() << ',' << pt.s << ',' << pt.theta << ','
       << pt.n << ',';
    if (pt.physical) os << pt.online << ',' << pt.global << ',' << pt.gap << ",1\n";
    else os << ",,,0\n";
  }
}

}  // namespace seqdisc
