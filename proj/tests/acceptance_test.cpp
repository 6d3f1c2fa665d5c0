// Acceptance gate: one line per criterion, PASS/FAIL, with wall times.
// Exits nonzero if any criterion fails.  Tolerances are pinned here and
// intentionally not configurable.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "seqdisc/online.hpp"
#include "seqdisc/strategy.hpp"

using namespace seqdisc;

namespace {

constexpr double kFormulaTol = 1e-12;   // closed-form equivalences
constexpr double kCertTol = 1e-10;      // biorthogonality certificates
constexpr double kZeroCertTol = 1e-12;  // zero-error misfire bound
constexpr double kGridOracleTol = 2e-3; // brute-force grid resolution
constexpr double kLineGapTol = 1e-6;    // gap on the distinguished rays
constexpr double kInteriorGapMin = 1e-4;
constexpr double kFrozenTol = 1e-6;     // regression tolerance on frozen gaps
constexpr double kSigmaLimit = 3.0;

struct Check {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
  void expect(bool cond, const std::string& why) {
    if (!cond) fail(why);
  }
  void within(double got, double want, double tol, const std::string& what) {
    if (std::abs(got - want) > tol)
      fail(what + ": got " + std::to_string(got) + ", want " + std::to_string(want));
  }
};

double minerror_formula(double eta0, double eta1, double c, int n) {
  return 0.5 * (1.0 + std::sqrt(1.0 - 4.0 * eta0 * eta1 * std::pow(c, 2 * n)));
}

// ---- 1. binary minimum-error equivalence -------------------------------

Check criterion_minerror() {
  Check chk;
  std::mt19937 gen(101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200 && chk.ok; ++trial) {
    double eta0 = 0.02 + 0.96 * unit(gen);
    double c = 0.01 + 0.98 * unit(gen);
    int n = 1 + static_cast<int>(unit(gen) * 10);
    auto ens = SymmetricEnsemble(2, Overlap(c), {eta0, 1.0 - eta0});
    ChainSpec spec{Task::MinError, ens, {}, std::nullopt};
    chk.within(exact_chain_success(spec, n), minerror_formula(eta0, 1.0 - eta0, c, n),
               kFormulaTol, "chain vs closed form");

    // posterior-product invariant along two sampled outcome paths
    for (int path = 0; path < 2 && chk.ok; ++path) {
      Belief belief{{eta0, 1.0 - eta0}, 0};
      for (int k = 0; k < n && chk.ok; ++k) {
        StepMeasurement m = next_measurement(belief, spec, spec.ensemble.c);
        std::vector<std::vector<double>> rows(2);
        for (int i = 0; i < 2; ++i)
          rows[i] = born_outcome_distribution(m.povm, i, m.states);
        double p0 = belief.priors[0] * rows[0][0] + belief.priors[1] * rows[1][0];
        int outcome = (unit(gen) < p0) ? 0 : 1;
        double before = belief.priors[0] * belief.priors[1];
        belief = bayes_update(belief, rows, outcome);
        chk.within(belief.priors[0] * belief.priors[1], before * c * c, kFormulaTol,
                   "posterior product step");
      }
    }
  }
  if (chk.ok) chk.detail = "200 configs, 400 outcome paths";
  return chk;
}

// ---- 2. binary zero-error equivalence ----------------------------------

Check criterion_zeroerror_binary() {
  Check chk;
  std::mt19937 gen(202);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200 && chk.ok; ++trial) {
    double eta0, c;
    int n;
    bool forced_transition = trial >= 140;
    if (forced_transition) {
      // start deep in the two-outcome range with a known transition index
      c = 0.3 + 0.6 * unit(gen);
      int k0 = 1 + static_cast<int>(unit(gen) * 6);
      double ratio = std::pow(c, 2 * k0 + 1);
      eta0 = ratio / (1.0 + ratio);
      n = k0 + 1 + static_cast<int>(unit(gen) * 3);
      if (compute_k0(eta0, 1.0 - eta0, c) != k0) {
        chk.fail("transition index construction went wrong");
        break;
      }
      // walk the inconclusive path: drop regime before k0, three-outcome at k0
      auto ens = SymmetricEnsemble(2, Overlap(c), {eta0, 1.0 - eta0});
      ChainSpec spec{Task::ZeroError, ens, {}, std::nullopt};
      Belief belief{{eta0, 1.0 - eta0}, 0};
      for (int k = 0; k <= k0 && chk.ok; ++k) {
        StepMeasurement m = next_measurement(belief, spec, spec.ensemble.c);
        bool three = m.regime && *m.regime == BinaryUaRegime::ThreeOutcome;
        chk.expect(three == (k == k0), "regime switch at the wrong step");
        std::vector<std::vector<double>> rows(2);
        for (int i = 0; i < 2; ++i)
          rows[i] = born_outcome_distribution(m.povm, i, m.states);
        int inconclusive = -1;
        for (size_t l = 0; l < m.povm.effects.size(); ++l)
          if (m.povm.effects[l].label.kind == OutcomeKind::Inconclusive)
            inconclusive = static_cast<int>(l);
        belief = bayes_update(belief, rows, inconclusive);
      }
    } else {
      eta0 = 0.02 + 0.96 * unit(gen);
      c = 0.05 + 0.9 * unit(gen);
      n = 1 + static_cast<int>(unit(gen) * 10);
    }
    auto ens = SymmetricEnsemble(2, Overlap(c), {eta0, 1.0 - eta0});
    ChainSpec spec{Task::ZeroError, ens, {}, std::nullopt};
    chk.within(exact_failure_probability(spec, n),
               binary_zero_error_Q(eta0, 1.0 - eta0, Overlap(c), n).inconclusive,
               kFormulaTol, "chain vs closed form");
  }
  if (chk.ok) chk.detail = "200 configs incl. 60 verified transition starts";
  return chk;
}

// ---- 3. brute-force grid oracle ----------------------------------------

Check criterion_grid_oracle() {
  Check chk;
  std::mt19937 gen(303);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int steps = 1000;
  for (int trial = 0; trial < 50 && chk.ok; ++trial) {
    double eta0 = 0.05 + 0.9 * unit(gen);
    double eta1 = 1.0 - eta0;
    double c = 0.05 + 0.9 * unit(gen);
    double t = c * c;
    double best = 0.0;
    for (int i = 0; i <= steps; ++i) {
      double q0 = t + (1.0 - t) * i / steps;
      double q1 = t / q0;
      if (q1 > 1.0) continue;
      best = std::max(best, eta0 * (1.0 - q0) + eta1 * (1.0 - q1));
    }
    chk.within(binary_zero_error_Q(eta0, eta1, Overlap(c), 1).success, best,
               kGridOracleTol, "closed form vs grid maximum");
  }
  if (chk.ok) chk.detail = "50 configs, 1000-point grid";
  return chk;
}

// ---- 4. three states, positive overlap ---------------------------------

Check criterion_three_positive() {
  Check chk;
  for (int ci = 1; ci <= 9 && chk.ok; ++ci) {
    double c = 0.1 * ci;
    auto ens = SymmetricEnsemble::uniform(3, Overlap(c));
    ChainSpec spec{Task::ZeroError, ens, {}, std::nullopt};
    for (int n = 1; n <= 12 && chk.ok; ++n) {
      double chain = exact_failure_probability(spec, n);
      chk.within(chain, std::pow(c, n), kFormulaTol, "chain vs geometric law");
      chk.within(chain, symmetric_zero_error_Q(Overlap(c), 3, n).inconclusive,
                 kFormulaTol, "chain vs collective bound");
    }
    auto states = canonical_states(Overlap(c), 3);
    auto duals = dual_states(states);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Complex ip = duals[i].adjoint() * states.state(j);
        Complex expect = (i == j) ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
        chk.expect(std::abs(ip - expect) < kCertTol, "dual-state certificate");
      }
  }
  if (chk.ok) chk.detail = "c in {0.1..0.9}, n up to 12";
  return chk;
}

// ---- 5. three states, negative overlap ---------------------------------

Check criterion_three_negative() {
  Check chk;
  for (double c : {-0.05, -0.15, -0.25, -0.35, -0.45}) {
    auto ens = SymmetricEnsemble::uniform(3, Overlap(c));
    ChainSpec spec{Task::ZeroError, ens, {}, std::nullopt};
    double a = std::abs(c);
    for (int n = 1; n <= 8 && chk.ok; ++n) {
      double global = symmetric_zero_error_Q(Overlap(c), 3, n).inconclusive;
      double parity = (n % 2 == 1) ? 2.0 * std::pow(a, n) : std::pow(a, n);
      chk.within(global, parity, kFormulaTol, "collective bound parity law");
      double chain = exact_failure_probability(spec, n);
      chk.within(chain, 2.0 * std::pow(a, n), kFormulaTol, "chain failure law");
      if (n % 2 == 1) chk.within(chain, global, kFormulaTol, "odd-n optimality");
      else chk.expect(chain > global, "even-n gap must stay open");
    }
  }
  auto edge = SymmetricEnsemble::uniform(3, Overlap(-0.5));
  ChainSpec spec{Task::ZeroError, edge, {}, std::nullopt};
  for (int n = 1; n <= 11 && chk.ok; ++n)
    chk.within(exact_failure_probability(spec, n), std::pow(0.5, n - 1), kFormulaTol,
               "boundary chain law");
  for (int k = 1; k <= 5 && chk.ok; ++k) {
    double even = symmetric_zero_error_Q(Overlap(-0.5), 3, 2 * k).inconclusive;
    double odd = symmetric_zero_error_Q(Overlap(-0.5), 3, 2 * k + 1).inconclusive;
    chk.within(even, std::pow(4.0, -k), kFormulaTol, "boundary even bound");
    chk.within(odd, even, kFormulaTol, "extra copy is useless at the boundary");
  }
  if (chk.ok) chk.detail = "5 overlaps + boundary, n up to 11";
  return chk;
}

// ---- 6. complex-plane scan ---------------------------------------------

struct FrozenGap {
  int i, j;
  double gap;
};

// regression values recorded from the first run of this scan
const FrozenGap kFrozenGaps[] = {
    {14, 2, 0.000655778832},  {14, 5, 0.009668783631},  {14, 7, 0.024807248409},
    {14, 15, 0.009668783631}, {14, 22, 0.000655778832}, {14, 25, 0.009668783631},
    {14, 27, 0.024807248409}, {14, 32, 0.035490280732}, {14, 35, 0.009668783631},
    {14, 37, 0.002183014508}, {14, 42, 0.000655778832}, {14, 45, 0.009668783631},
    {14, 47, 0.024807248409}, {14, 55, 0.009668783631}, {29, 5, 0.038675134570},
    {29, 15, 0.038675134570}, {29, 25, 0.038675134570}, {29, 35, 0.038675134570},
    {29, 45, 0.038675134570}, {29, 55, 0.038675134570},
};

Check criterion_scan() {
  Check chk;
  auto scan2 = scan_plane(60, 60, 2);
  auto scan3 = scan_plane(60, 60, 3);
  auto at = [](const std::vector<ScanPoint>& pts, int i, int j) -> const ScanPoint& {
    return pts[static_cast<size_t>(i) * 60 + j];
  };
  for (int i = 0; i < 60 && chk.ok; ++i) {
    for (int j : {0, 20, 40}) {  // rays with a positive effective overlap
      for (const auto* scan : {&scan2, &scan3}) {
        const auto& pt = at(*scan, i, j);
        if (pt.physical)
          chk.expect(std::abs(pt.gap) < kLineGapTol, "gap on a solid ray");
      }
    }
    for (int j : {10, 30, 50}) {  // rays with a negative effective overlap, odd n
      const auto& pt = at(scan3, i, j);
      if (pt.physical) chk.expect(std::abs(pt.gap) < kLineGapTol, "gap on a dashed ray");
    }
  }
  int spots = 0;
  for (const auto& frozen : kFrozenGaps) {
    const auto& pt = at(scan2, frozen.i, frozen.j);
    chk.expect(pt.physical, "spot check left the physical region");
    chk.expect(pt.gap > kInteriorGapMin, "interior gap too small");
    chk.within(pt.gap, frozen.gap, kFrozenTol, "frozen interior gap");
    spots += 1;
  }
  if (chk.ok)
    chk.detail = "60x60 grid at n=2,3; " + std::to_string(spots) + " interior spots";
  return chk;
}

// ---- 7. Monte Carlo consistency ----------------------------------------

Check criterion_monte_carlo() {
  Check chk;
  struct Config {
    Task task;
    int r;
    double eta0;
    double c;
    int n;
  };
  std::vector<Config> configs{
      {Task::MinError, 2, 0.3, 0.6, 3},  {Task::MinError, 2, 0.5, 0.9, 2},
      {Task::MinError, 2, 0.1, 0.2, 4},  {Task::MinError, 2, 0.8, 0.5, 1},
      {Task::ZeroError, 2, 0.5, 0.5, 3}, {Task::ZeroError, 2, 0.05, 0.6, 2},
      {Task::ZeroError, 2, 0.95, 0.6, 2}, {Task::ZeroError, 2, 0.05, 0.6, 5},
      {Task::ZeroError, 2, 0.3, 0.9, 4}, {Task::ZeroError, 2, 0.5, 0.05, 2},
      {Task::ZeroError, 3, 0, 0.2, 3},   {Task::ZeroError, 3, 0, 0.5, 4},
      {Task::ZeroError, 3, 0, 0.8, 2},   {Task::ZeroError, 3, 0, -0.1, 3},
      {Task::ZeroError, 3, 0, -0.3, 4},  {Task::ZeroError, 3, 0, -0.45, 2},
      {Task::ZeroError, 3, 0, -0.5, 3},  {Task::ZeroError, 3, 0, -0.5, 4},
  };
  std::uint64_t seed = 3001;
  int runs = 0;
  for (const auto& cfg : configs) {
    ChainSpec spec{cfg.task,
                   cfg.r == 2 ? SymmetricEnsemble(2, Overlap(cfg.c), {cfg.eta0, 1 - cfg.eta0})
                              : SymmetricEnsemble::uniform(3, Overlap(cfg.c)),
                   {},
                   std::nullopt};
    auto res = simulate(spec, cfg.n, 100000, seed++);
    chk.expect(std::abs(res.z) <= kSigmaLimit, "simulation drifted beyond 3 sigma");
    if (cfg.task == Task::ZeroError)
      chk.expect(res.misidentified == 0, "zero-error run misidentified a state");
    runs += 1;
  }
  // per-copy overlap lists, binary and three-state
  ChainSpec noniid2{Task::ZeroError, SymmetricEnsemble(2, Overlap(0.5), {0.3, 0.7}),
                    {Overlap(0.5), Overlap(0.8)}, std::nullopt};
  auto r2 = simulate(noniid2, 2, 100000, seed++);
  chk.expect(std::abs(r2.z) <= kSigmaLimit && r2.misidentified == 0,
             "product-source binary run failed");
  ChainSpec noniid3{Task::ZeroError, SymmetricEnsemble::uniform(3, Overlap(-0.3)),
                    {Overlap(-0.3), Overlap(0.4)}, std::nullopt};
  auto r3 = simulate(noniid3, 2, 100000, seed++);
  chk.expect(std::abs(r3.z) <= kSigmaLimit && r3.misidentified == 0,
             "product-source three-state run failed");
  runs += 2;
  if (chk.ok) chk.detail = std::to_string(runs) + " configs x 1e5 trials";
  return chk;
}

// ---- 8. POVM validity suite --------------------------------------------

Check criterion_povm_validity() {
  Check chk;
  std::mt19937 gen(808);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int built = 0;
  while (built < 1000 && chk.ok) {
    double pick = unit(gen);
    try {
      if (pick < 0.4) {
        double eta0 = 0.02 + 0.96 * unit(gen);
        double c = 0.98 * unit(gen);
        auto states = canonical_states(Overlap(c), 2);
        Povm povm = binary_unambiguous(eta0, 1.0 - eta0, states);
        povm.validate();
        for (const auto& e : povm.effects)
          if (e.label.kind == OutcomeKind::Identify)
            chk.expect(born_probability(e.matrix, states.state(1 - e.label.index)) <
                           kZeroCertTol,
                       "binary zero-error certificate");
      } else if (pick < 0.6) {
        double eta0 = 0.02 + 0.96 * unit(gen);
        auto states = canonical_states(Overlap(unit(gen)), 2);
        helstrom_binary(eta0, 1.0 - eta0, states).validate();
      } else if (pick < 0.8) {
        Overlap c(std::polar(unit(gen), 2.0 * std::numbers::pi * unit(gen)));
        if (!is_physical(c, 3)) continue;
        auto states = canonical_states(c, 3);
        Povm povm = three_state_unambiguous(states);
        povm.validate();
        for (int i = 0; i < 3; ++i) {
          auto dist = born_outcome_distribution(povm, i, states);
          for (size_t l = 0; l < povm.effects.size(); ++l)
            if (povm.effects[l].label.kind == OutcomeKind::Identify &&
                povm.effects[l].label.index != i)
              chk.expect(dist[l] < kZeroCertTol, "symmetric zero-error certificate");
        }
      } else if (pick < 0.95) {
        double c = -0.49 * unit(gen) - 0.005;
        auto states = canonical_states(Overlap(c), 3);
        Povm povm = identify_exclude_povm(states);
        povm.validate();
        for (int i = 0; i < 3; ++i) {
          auto dist = born_outcome_distribution(povm, i, states);
          for (size_t l = 0; l < povm.effects.size(); ++l) {
            const auto& label = povm.effects[l].label;
            if (label.kind == OutcomeKind::Identify && label.index != i)
              chk.expect(dist[l] < kZeroCertTol, "identify certificate");
            if (label.kind == OutcomeKind::Exclude && label.index == i)
              chk.expect(dist[l] < kZeroCertTol, "exclude certificate");
          }
        }
      } else {
        auto states = canonical_states(Overlap(-0.5), 3);
        Povm povm = exclusion_povm(states);
        povm.validate();
        auto dist = born_outcome_distribution(povm, 0, states);
        chk.expect(dist[0] < kZeroCertTol, "exclusion certificate");
      }
    } catch (const std::exception& e) {
      chk.fail(std::string("construction threw: ") + e.what());
    }
    built += 1;
  }
  if (chk.ok) chk.detail = std::to_string(built) + " randomized constructions";
  return chk;
}

// ---- 9. product sources --------------------------------------------------

Check criterion_noniid() {
  Check chk;
  std::mt19937 gen(909);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100 && chk.ok; ++trial) {
    double eta0 = 0.05 + 0.9 * unit(gen);
    int len = 1 + static_cast<int>(unit(gen) * 6);
    std::vector<Overlap> overlaps;
    double product = 1.0;
    for (int k = 0; k < len; ++k) {
      double c = 0.05 + 0.9 * unit(gen);
      overlaps.emplace_back(c);
      product *= c;
    }
    auto ens = SymmetricEnsemble(2, overlaps[0], {eta0, 1.0 - eta0});
    auto res = run_noniid(Task::ZeroError, ens, overlaps);
    chk.within(res.failure,
               binary_zero_error_Q(eta0, 1.0 - eta0, Overlap(product), 1).inconclusive,
               kFormulaTol, "binary product source");
    chk.expect(!res.optimality_flagged, "binary list must not be flagged");
  }
  for (int trial = 0; trial < 50 && chk.ok; ++trial) {
    int len = 1 + static_cast<int>(unit(gen) * 5);
    std::vector<Overlap> overlaps;
    double product = 1.0;
    for (int k = 0; k < len; ++k) {
      double c = 0.05 + 0.85 * unit(gen);
      overlaps.emplace_back(c);
      product *= c;
    }
    auto ens = SymmetricEnsemble::uniform(3, overlaps[0]);
    auto res = run_noniid(Task::ZeroError, ens, overlaps);
    chk.within(res.failure, product, kFormulaTol, "three-state product source");
    chk.within(res.failure, symmetric_zero_error_Q(Overlap(product), 3, 1).inconclusive,
               kFormulaTol, "three-state product vs collective");
    chk.expect(!res.optimality_flagged, "all-positive list must not be flagged");
  }
  if (chk.ok) chk.detail = "100 binary + 50 three-state lists";
  return chk;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Check()> run;
  };
  std::vector<Criterion> criteria{
      {"binary minimum-error chain equals the collective bound", criterion_minerror},
      {"binary zero-error chain equals the collective bound", criterion_zeroerror_binary},
      {"closed-form optimum matches the brute-force grid", criterion_grid_oracle},
      {"three-state positive-overlap chain and certificates", criterion_three_positive},
      {"three-state negative-overlap parity laws", criterion_three_negative},
      {"complex-plane scan gap structure", criterion_scan},
      {"Monte Carlo consistency and the zero-misidentification gate",
       criterion_monte_carlo},
      {"POVM validity property suite", criterion_povm_validity},
      {"product sources reach the product-overlap bound", criterion_noniid},
  };

  int failures = 0;
  for (size_t k = 0; k < criteria.size(); ++k) {
    auto start = std::chrono::steady_clock::now();
    Check chk;
    try {
      chk = criteria[k].run();
    } catch (const std::exception& e) {
      chk.fail(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                      .count();
    std::printf("[%s] %zu. %s (%s) %.2fs\n", chk.ok ? "PASS" : "FAIL", k + 1,
                criteria[k].name, chk.detail.c_str(), secs);
    if (!chk.ok) failures += 1;
  }
  std::printf("acceptance: %zu/%zu criteria passed\n", criteria.size() - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
