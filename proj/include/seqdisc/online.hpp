#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqdisc/bounds.hpp"
#include "seqdisc/ensemble.hpp"
#include "seqdisc/povm.hpp"
#include "seqdisc/rational.hpp"
#include "seqdisc/rng.hpp"

namespace seqdisc {

enum class Task { MinError, ZeroError };

/// Posterior over the hypotheses after `step` measurements.
struct Belief {
  std::vector<double> priors;
  int step = 0;

  static constexpr double kAliveTol = 1e-15;

  std::vector<int> alive() const {
    std::vector<int> idx;
    for (size_t i = 0; i < priors.size(); ++i)
      if (priors[i] > kAliveTol) idx.push_back(static_cast<int>(i));
    return idx;
  }
};

/// Everything needed to run a measurement chain.  step_overlaps is empty for
/// i.i.d. copies (the ensemble overlap repeats); otherwise entry k is the
/// overlap of copy k.  The optional exact parameters switch regime
/// classification to exact rational comparisons.
struct ChainSpec {
  Task task = Task::ZeroError;
  SymmetricEnsemble ensemble;
  std::vector<Overlap> step_overlaps;
  std::optional<ExactBinaryParams> exact;

  Overlap overlap_at(int k) const {
    if (step_overlaps.empty()) return ensemble.c;
    if (k < 0 || k >= static_cast<int>(step_overlaps.size()))
      throw std::out_of_range("ChainSpec: no overlap for this step");
    return step_overlaps[k];
  }
};

/// Bayes rule: posterior_i proportional to prior_i * p(outcome | psi_i).
/// `outcome_probs` holds one row per hypothesis, one column per outcome.
inline Belief bayes_update(const Belief& belief,
                           const std::vector<std::vector<double>>& outcome_probs,
                           int outcome) {
  if (outcome_probs.size() != belief.priors.size())
    throw std::invalid_argument("bayes_update: row count != hypothesis count");
  Belief next;
  next.step = belief.step + 1;
  next.priors.resize(belief.priors.size());
  double total = 0.0;
  for (size_t i = 0; i < belief.priors.size(); ++i) {
    if (outcome < 0 || outcome >= static_cast<int>(outcome_probs[i].size()))
      throw std::invalid_argument("bayes_update: outcome index out of range");
    next.priors[i] = belief.priors[i] * outcome_probs[i][outcome];
    total += next.priors[i];
  }
  if (total <= 0.0)
    throw std::invalid_argument("bayes_update: observed outcome has zero probability");
  for (double& p : next.priors) p /= total;
  return next;
}

/// A scheduled measurement: the POVM (labels carry original hypothesis
/// indices), the state family it acts on, and the map from family slots back
/// to hypothesis indices.
struct StepMeasurement {
  Povm povm;
  CanonicalStates states;
  std::vector<int> hyp_map;
  std::optional<BinaryUaRegime> regime;  // set for binary zero-error steps
};

/// The local measurement the online protocol applies given the current
/// belief.  Depends only on the belief and the local overlap, never on the
/// horizon or on the earlier outcome record.
inline StepMeasurement next_measurement(const Belief& belief, const ChainSpec& spec,
                                        Overlap local_c,
                                        std::optional<BinaryUaRegime> forced_regime = std::nullopt) {
  StepMeasurement m;

  if (spec.task == Task::MinError) {
    if (spec.ensemble.r != 2)
      throw std::invalid_argument("next_measurement: minimum-error chains are binary only");
    m.states = canonical_states(Overlap(local_c.magnitude()), 2);
    m.povm = helstrom_binary(belief.priors[0], belief.priors[1], m.states);
    m.hyp_map = {0, 1};
    return m;
  }

  if (spec.ensemble.r == 2) {
    // the detector constructions only need the states, so any strictly
    // positive pair of priors is workable, however lopsided
    if (belief.priors[0] <= 0.0 || belief.priors[1] <= 0.0) {
      int winner = belief.priors[0] > belief.priors[1] ? 0 : 1;
      m.states = canonical_states(Overlap(local_c.magnitude()), 2);
      m.povm.dim = 2;
      m.povm.id = "identify";
      m.povm.effects.push_back(
          {EffectLabel{OutcomeKind::Identify, winner}, Matrix::Identity(2, 2)});
      m.hyp_map = {0, 1};
      return m;
    }
    m.states = canonical_states(Overlap(local_c.magnitude()), 2);
    m.povm = binary_unambiguous(belief.priors[0], belief.priors[1], m.states, forced_regime);
    m.regime = forced_regime
                   ? *forced_regime
                   : classify_binary_ua(belief.priors[0], belief.priors[1],
                                        local_c.magnitude());
    m.hyp_map = {0, 1};
    return m;
  }

  auto alive = belief.alive();
  if (alive.size() < 2)
    throw std::logic_error("next_measurement: fewer than two live hypotheses");

  if (alive.size() == 2) {
    double wa = belief.priors[alive[0]];
    double wb = belief.priors[alive[1]];
    double eta0 = wa / (wa + wb);
    double eta1 = wb / (wa + wb);
    m.states = canonical_states(Overlap(local_c.magnitude()), 2);
    m.povm = binary_unambiguous(eta0, eta1, m.states, forced_regime);
    m.regime = forced_regime ? *forced_regime
                             : classify_binary_ua(eta0, eta1, local_c.magnitude());
    m.hyp_map = alive;
    for (auto& e : m.povm.effects)
      if (e.label.kind == OutcomeKind::Identify) e.label.index = alive[e.label.index];
    return m;
  }

  // three live hypotheses: the symmetric protocol, defined for uniform
  // beliefs and real overlaps
  if (spec.ensemble.r != 3)
    throw std::logic_error("next_measurement: three live hypotheses in a binary chain");
  for (int i : alive)
    if (std::abs(belief.priors[i] - 1.0 / 3.0) > 1e-9)
      throw std::invalid_argument("next_measurement: three-state step needs a uniform belief");
  if (!local_c.is_real())
    throw std::invalid_argument("next_measurement: three-state protocol needs a real overlap");
  double c = local_c.value.real();
  m.states = canonical_states(local_c, 3);
  m.hyp_map = {0, 1, 2};
  if (std::abs(c + 0.5) <= kPsdTol) m.povm = exclusion_povm(m.states);
  else if (c < -kClassifyTol) m.povm = identify_exclude_povm(m.states);
  else m.povm = three_state_unambiguous(m.states);
  return m;
}

namespace detail {

/// Born rows for every live hypothesis, indexed by original hypothesis.
inline std::vector<std::vector<double>> outcome_matrix(const StepMeasurement& m,
                                                       size_t hypotheses) {
  std::vector<std::vector<double>> rows(hypotheses,
                                        std::vector<double>(m.povm.effects.size(), 0.0));
  for (size_t slot = 0; slot < m.hyp_map.size(); ++slot)
    rows[m.hyp_map[slot]] = born_outcome_distribution(m.povm, static_cast<int>(slot), m.states);
  return rows;
}

inline Belief belief_from_weights(const std::vector<double>& w, int step) {
  Belief b;
  b.step = step;
  b.priors = w;
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : b.priors) x /= total;
  return b;
}

struct ExactState {
  std::optional<ExactRatioTracker> tracker;
  std::optional<Rational> c;
};

inline std::optional<BinaryUaRegime> exact_regime(const ExactState& ex,
                                                  const std::vector<int>& alive) {
  if (!ex.tracker || alive.size() != 2) return std::nullopt;
  return ex.tracker->classify(*ex.c);
}

/// Probability that a zero-error chain reaches the horizon with no
/// identification, by exact propagation of the joint weights
/// w_i = P(hypothesis i and chain still running).
inline double failure_mass(const ChainSpec& spec, std::vector<double> w, int step, int n,
                           ExactState ex) {
  double total = 0.0;
  for (double x : w) total += x;
  if (total <= 1e-18) return 0.0;
  if (step == n) return total;

  Belief belief = belief_from_weights(w, step);
  auto alive = belief.alive();
  StepMeasurement m =
      next_measurement(belief, spec, spec.overlap_at(step), exact_regime(ex, alive));
  auto rows = outcome_matrix(m, w.size());

  double fail = 0.0;
  for (size_t l = 0; l < m.povm.effects.size(); ++l) {
    const auto& label = m.povm.effects[l].label;
    if (label.kind == OutcomeKind::Identify) continue;  // terminal, never wrong
    std::vector<double> child(w.size(), 0.0);
    for (size_t i = 0; i < w.size(); ++i) {
      double p = w[i] * rows[i][l];
      child[i] = (p > 1e-20) ? p : 0.0;  // certificate dust
    }
    ExactState child_ex = ex;
    if (child_ex.tracker && m.regime && label.kind == OutcomeKind::Inconclusive)
      child_ex.tracker->advance(*child_ex.c, *m.regime);
    fail += failure_mass(spec, std::move(child), step + 1, n, std::move(child_ex));
  }
  return fail;
}

/// Minimum-error chains measure every copy; the verdict is the last outcome.
/// Returns the probability that the verdict names the true state.
inline double minerror_success_mass(const ChainSpec& spec, std::vector<double> w, int step,
                                    int n) {
  Belief belief = belief_from_weights(w, step);
  StepMeasurement m = next_measurement(belief, spec, spec.overlap_at(step));
  auto rows = outcome_matrix(m, w.size());
  double success = 0.0;
  for (size_t l = 0; l < m.povm.effects.size(); ++l) {
    int guess = m.povm.effects[l].label.index;
    std::vector<double> child(w.size());
    double child_total = 0.0;
    for (size_t i = 0; i < w.size(); ++i) {
      child[i] = w[i] * rows[i][l];
      child_total += child[i];
    }
    if (child_total <= 1e-18) continue;
    if (step == n - 1) success += child[guess];
    else success += minerror_success_mass(spec, std::move(child), step + 1, n);
  }
  return success;
}

inline ExactState make_exact_state(const ChainSpec& spec) {
  ExactState ex;
  if (spec.exact && spec.task == Task::ZeroError && spec.step_overlaps.empty()) {
    ex.tracker.emplace(*spec.exact);
    ex.c = spec.exact->c < 0 ? Rational(-spec.exact->c) : spec.exact->c;
  }
  return ex;
}

}  // namespace detail

/// Exact probability that the online zero-error chain ends with no
/// identification after n copies.
inline double exact_failure_probability(const ChainSpec& spec, int n) {
  if (n < 1) throw std::invalid_argument("exact_failure_probability: n must be >= 1");
  if (spec.task != Task::ZeroError)
    throw std::invalid_argument("exact_failure_probability: zero-error chains only");
  return detail::failure_mass(spec, spec.ensemble.priors, 0, n, detail::make_exact_state(spec));
}

/// Exact success probability of the online chain: identification probability
/// for zero-error chains, correct-final-guess probability for minimum-error
/// chains.
inline double exact_chain_success(const ChainSpec& spec, int n) {
  if (n < 1) throw std::invalid_argument("exact_chain_success: n must be >= 1");
  if (spec.task == Task::ZeroError) return 1.0 - exact_failure_probability(spec, n);
  return detail::minerror_success_mass(spec, spec.ensemble.priors, 0, n);
}

/// Smallest k >= 0 such that after k two-outcome steps the updated prior
/// ratio eta0 / (eta1 c^{2k}) reaches c^2, i.e. the index of the first
/// three-outcome measurement of the chain.
inline int compute_k0(double eta0, double eta1, double c, int max_steps = 1000000) {
  if (!(c > 0.0) || c >= 1.0) throw std::invalid_argument("compute_k0: need 0 < c < 1");
  if (eta0 <= 0.0 || eta1 <= 0.0) throw std::invalid_argument("compute_k0: need positive priors");
  auto ge = [](double x, double y) {
    return x >= y - kClassifyTol * std::max({1.0, std::abs(x), std::abs(y)});
  };
  double c2 = c * c;
  double bound = eta1 * c2;  // eta0 >= eta1 c^{2k+2}
  for (int k = 0; k <= max_steps; ++k) {
    if (ge(eta0, bound)) return k;
    bound *= c2;
  }
  throw std::runtime_error("compute_k0: did not converge");
}

enum class Verdict { Identified, ExcludedThenIdentified, Misidentified, Failed };

struct TraceStep {
  int step;
  std::string povm_id;
  EffectLabel outcome;
  std::vector<double> belief_after;
};

struct ProtocolTrace {
  std::uint64_t trial = 0;
  int true_state = -1;
  std::vector<TraceStep> steps;
  Verdict verdict = Verdict::Failed;
  int identified_index = -1;
};

struct SimulationOptions {
  bool collect_traces = false;
  std::int64_t max_traces = -1;  // no cap
};

struct SimulationResult {
  Task task = Task::ZeroError;
  int n = 0;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  std::int64_t identified = 0;     // correct identifications / correct final guesses
  std::int64_t misidentified = 0;  // hard error for zero-error chains
  std::int64_t failed = 0;         // zero-error: still undecided at the horizon
  double empirical_failure = 0.0;
  double exact_failure = 0.0;
  double sigma = 0.0;
  double z = 0.0;
  bool warn = false;
  std::vector<ProtocolTrace> traces;
};

/// Monte Carlo run of the online chain.  Each trial draws the true state from
/// the initial priors and samples every outcome from the Born distribution;
/// trial t consumes only RNG stream t, so results do not depend on scheduling
/// and a chain prefix is unchanged when the horizon grows.
inline SimulationResult simulate(const ChainSpec& spec, int n, std::int64_t trials,
                                 std::uint64_t seed, SimulationOptions opts = {}) {
  if (n < 1) throw std::invalid_argument("simulate: n must be >= 1");
  if (trials < 1) throw std::invalid_argument("simulate: trials must be >= 1");
  SimulationResult res;
  res.task = spec.task;
  res.n = n;
  res.trials = trials;
  res.seed = seed;

  for (std::int64_t t = 0; t < trials; ++t) {
    CounterRng rng(seed, static_cast<std::uint64_t>(t));
    // true hypothesis
    double u = rng.next_unit();
    int truth = 0;
    double acc = 0.0;
    for (size_t i = 0; i < spec.ensemble.priors.size(); ++i) {
      acc += spec.ensemble.priors[i];
      if (u < acc || i + 1 == spec.ensemble.priors.size()) {
        truth = static_cast<int>(i);
        break;
      }
    }

    ProtocolTrace trace;
    trace.trial = static_cast<std::uint64_t>(t);
    trace.true_state = truth;
    bool want_trace = opts.collect_traces &&
                      (opts.max_traces < 0 || static_cast<std::int64_t>(res.traces.size()) < opts.max_traces);

    Belief belief{spec.ensemble.priors, 0};
    detail::ExactState ex = detail::make_exact_state(spec);
    bool excluded_once = false;
    std::optional<int> verdict_index;
    Verdict verdict = Verdict::Failed;

    for (int k = 0; k < n; ++k) {
      StepMeasurement m = next_measurement(belief, spec, spec.overlap_at(k),
                                           detail::exact_regime(ex, belief.alive()));
      auto rows = detail::outcome_matrix(m, belief.priors.size());
      // sample the outcome for the true hypothesis; suppress certificate dust
      // so a zero-error outcome can never fire on its excluded state
      std::vector<double> dist = rows[truth];
      double total = 0.0;
      for (double& p : dist) {
        if (p < 1e-14) p = 0.0;
        total += p;
      }
      double draw = rng.next_unit() * total;
      int outcome = 0;
      double cum = 0.0;
      for (size_t l = 0; l < dist.size(); ++l) {
        cum += dist[l];
        if (draw < cum || l + 1 == dist.size()) {
          outcome = static_cast<int>(l);
          break;
        }
      }
      const EffectLabel& label = m.povm.effects[outcome].label;

      bool terminal = false;
      if (spec.task == Task::ZeroError && label.kind == OutcomeKind::Identify) {
        verdict_index = label.index;
        verdict = (label.index == truth)
                      ? (excluded_once ? Verdict::ExcludedThenIdentified : Verdict::Identified)
                      : Verdict::Misidentified;
        terminal = true;
        belief.priors.assign(belief.priors.size(), 0.0);
        belief.priors[label.index] = 1.0;
        belief.step += 1;
      } else {
        if (label.kind == OutcomeKind::Exclude) excluded_once = true;
        if (ex.tracker && m.regime && label.kind == OutcomeKind::Inconclusive)
          ex.tracker->advance(*ex.c, *m.regime);
        belief = bayes_update(belief, rows, outcome);
        if (spec.task == Task::MinError) verdict_index = label.index;
      }

      if (want_trace)
        trace.steps.push_back({k, m.povm.id, label, belief.priors});
      if (terminal) break;
    }

    if (spec.task == Task::MinError) {
      verdict = (verdict_index && *verdict_index == truth) ? Verdict::Identified
                                                           : Verdict::Misidentified;
    }
    switch (verdict) {
      case Verdict::Identified:
      case Verdict::ExcludedThenIdentified: res.identified += 1; break;
      case Verdict::Misidentified: res.misidentified += 1; break;
      case Verdict::Failed: res.failed += 1; break;
    }
    if (want_trace) {
      trace.verdict = verdict;
      trace.identified_index = verdict_index.value_or(-1);
      res.traces.push_back(std::move(trace));
    }
  }

  if (spec.task == Task::ZeroError) {
    res.exact_failure = exact_failure_probability(spec, n);
    res.empirical_failure = static_cast<double>(res.failed) / trials;
  } else {
    res.exact_failure = 1.0 - exact_chain_success(spec, n);
    res.empirical_failure = static_cast<double>(res.misidentified) / trials;
  }
  res.sigma = std::sqrt(std::max(res.exact_failure * (1.0 - res.exact_failure), 0.0) /
                        static_cast<double>(trials));
  if (res.sigma > 0.0) res.z = (res.empirical_failure - res.exact_failure) / res.sigma;
  else res.z = (res.empirical_failure == res.exact_failure) ? 0.0 : INFINITY;
  res.warn = std::abs(res.z) > 3.0;
  return res;
}

struct NoniidResult {
  double failure = 0.0;
  Overlap effective;
  bool optimality_flagged = false;
  std::string note;
};

/// Exact online failure for per-copy overlaps c_1..c_n.  For three-state
/// chains with mixed-sign overlaps whose product is positive the online value
/// is computed but known not to be certified optimal; the result is flagged.
inline NoniidResult run_noniid(Task task, const SymmetricEnsemble& ensemble,
                               const std::vector<Overlap>& overlaps) {
  if (overlaps.empty()) throw std::invalid_argument("run_noniid: empty overlap list");
  ChainSpec spec{task, ensemble, overlaps, std::nullopt};
  int n = static_cast<int>(overlaps.size());
  NoniidResult out;
  out.effective = effective_overlap_product(overlaps);
  out.failure = (task == Task::ZeroError) ? exact_failure_probability(spec, n)
                                          : 1.0 - exact_chain_success(spec, n);
  if (task == Task::ZeroError && ensemble.r == 3) {
    bool any_negative = false;
    for (const auto& c : overlaps)
      if (c.value.real() < -kClassifyTol) any_negative = true;
    if (any_negative && out.effective.value.real() > kClassifyTol) {
      out.optimality_flagged = true;
      out.note = "mixed-sign overlaps with positive product: online optimality not established";
    }
  }
  return out;
}

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Identified: return "identified";
    case Verdict::ExcludedThenIdentified: return "excluded-then-identified";
    case Verdict::Misidentified: return "misidentified";
    default: return "failed";
  }
}

/// One JSON object per measurement step:
/// {"trial": t, "step": k, "povm": id, "outcome": label, "belief": [...]}
inline void write_trace_jsonl(std::ostream& os, const std::vector<ProtocolTrace>& traces) {
  for (const auto& tr : traces) {
    for (const auto& st : tr.steps) {
      nlohmann::ordered_json line{{"trial", tr.trial},
                                  {"step", st.step},
                                  {"povm", st.povm_id},
                                  {"outcome", st.outcome.str()},
                                  {"belief", st.belief_after}};
      os << line.dump() << '\n';
    }
  }
}

}  // namespace seqdisc
