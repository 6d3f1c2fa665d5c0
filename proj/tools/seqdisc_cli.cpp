// Command line front end: closed-form bounds, POVM construction, exact chain
// values, Monte Carlo runs, and the strategy-gap scan.  All structured output
// carries schema_version 1 and echoes the parsed configuration, so a run can
// be reproduced from its own output.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqdisc/bounds.hpp"
#include "seqdisc/online.hpp"
#include "seqdisc/povm.hpp"
#include "seqdisc/strategy.hpp"

using json = nlohmann::ordered_json;
using namespace seqdisc;

namespace {

struct ParsedOverlap {
  Overlap value;
  std::optional<Rational> exact;  // set when the input was rational
  std::string text;
};

ParsedOverlap parse_overlap(const std::string& text) {
  ParsedOverlap out;
  out.text = text;
  auto at = text.find('@');
  if (at != std::string::npos) {
    double s = std::stod(text.substr(0, at));
    double theta = std::stod(text.substr(at + 1));
    out.value = Overlap(std::polar(s, theta));
    return out;
  }
  if (auto r = parse_rational(text)) {
    out.exact = *r;
    out.value = Overlap(r->convert_to<double>());
    return out;
  }
  out.value = Overlap(std::stod(text));
  return out;
}

struct ParsedPriors {
  std::vector<double> values;
  std::vector<Rational> exact;
  bool all_exact = true;
};

ParsedPriors parse_priors(const std::string& text) {
  ParsedPriors out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (auto r = parse_rational(item)) {
      out.exact.push_back(*r);
      out.values.push_back(r->convert_to<double>());
    } else {
      out.all_exact = false;
      out.values.push_back(std::stod(item));
    }
  }
  if (out.values.empty()) throw std::invalid_argument("priors: empty list");
  return out;
}

json overlap_json(const ParsedOverlap& c) {
  return json{{"text", c.text},
              {"re", c.value.value.real()},
              {"im", c.value.value.imag()},
              {"exact", c.exact.has_value()}};
}

void emit(const json& doc, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  std::ofstream os(out_path);
  if (!os) throw std::invalid_argument("cannot open output file: " + out_path);
  os << doc.dump(2) << '\n';
}

void emit_text(const std::string& body, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream os(out_path);
  if (!os) throw std::invalid_argument("cannot open output file: " + out_path);
  os << body;
}

Task parse_task(const std::string& name) {
  if (name == "minerror") return Task::MinError;
  if (name == "zeroerror") return Task::ZeroError;
  throw std::invalid_argument("task must be minerror or zeroerror");
}

SymmetricEnsemble make_ensemble(int r, const ParsedOverlap& c, const ParsedPriors& priors) {
  if (priors.values.empty()) return SymmetricEnsemble::uniform(r, c.value);
  return SymmetricEnsemble(r, c.value, priors.values);
}

std::optional<ExactBinaryParams> exact_params(Task task, int r, const ParsedOverlap& c,
                                              const ParsedPriors& priors) {
  if (task != Task::ZeroError || r != 2 || !c.exact) return std::nullopt;
  Rational e0, e1;
  if (priors.values.empty()) {
    e0 = Rational(1, 2);
    e1 = Rational(1, 2);
  } else if (priors.all_exact && priors.exact.size() == 2) {
    e0 = priors.exact[0];
    e1 = priors.exact[1];
  } else {
    return std::nullopt;
  }
  return ExactBinaryParams{e0, e1, *c.exact};
}

int cmd_bounds(Task task, int r, const ParsedOverlap& c, const ParsedPriors& priors, int n,
               const std::string& out_path) {
  SymmetricEnsemble ens = make_ensemble(r, c, priors);
  DiscriminationBound b;
  if (r == 2) {
    b = (task == Task::MinError)
            ? helstrom_success_n(ens.priors[0], ens.priors[1], c.value, n)
            : binary_zero_error_Q(ens.priors[0], ens.priors[1], c.value, n);
  } else {
    if (task == Task::MinError)
      throw std::invalid_argument("bounds: minimum-error bounds are binary only");
    b = symmetric_zero_error_Q(c.value, 3, n);
  }
  Overlap effective(std::pow(c.value.value, n));
  json doc{{"schema_version", 1},
           {"command", "bounds"},
           {"config",
            {{"task", task == Task::MinError ? "minerror" : "zeroerror"},
             {"r", r},
             {"c", overlap_json(c)},
             {"priors", ens.priors},
             {"n", n}}},
           {"result",
            {{"success", b.success},
             {"inconclusive", b.inconclusive},
             {"regime", regime_name(b.regime)},
             {"priors_swapped", b.priors_swapped},
             {"eigenvalues", symmetric_eigenvalues(c.value, r)},
             {"effective_eigenvalues", symmetric_eigenvalues(effective, r)}}}};
  emit(doc, out_path);
  return 0;
}

int cmd_povm(Task task, int r, const ParsedOverlap& c, const ParsedPriors& priors,
             const std::string& out_path) {
  SymmetricEnsemble ens = make_ensemble(r, c, priors);
  ChainSpec spec{task, ens, {}, std::nullopt};
  Belief belief{ens.priors, 0};
  StepMeasurement m = next_measurement(belief, spec, c.value);
  m.povm.validate();
  json doc{{"schema_version", 1},
           {"command", "povm"},
           {"config",
            {{"task", task == Task::MinError ? "minerror" : "zeroerror"},
             {"r", r},
             {"c", overlap_json(c)},
             {"priors", ens.priors}}},
           {"result", {{"povm", to_json(m.povm)}, {"validated", true}}}};
  emit(doc, out_path);
  return 0;
}

int cmd_chain(Task task, int r, const ParsedOverlap& c, const ParsedPriors& priors, int n,
              const std::string& overlaps_text, const std::string& out_path) {
  SymmetricEnsemble ens = make_ensemble(r, c, priors);

  json config{{"task", task == Task::MinError ? "minerror" : "zeroerror"},
              {"r", r},
              {"c", overlap_json(c)},
              {"priors", ens.priors},
              {"n", n}};
  json result;

  if (!overlaps_text.empty()) {
    std::vector<Overlap> overlaps;
    json echoes = json::array();
    std::stringstream ss(overlaps_text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      ParsedOverlap po = parse_overlap(item);
      overlaps.push_back(po.value);
      echoes.push_back(overlap_json(po));
    }
    config["overlaps"] = echoes;
    config["n"] = static_cast<int>(overlaps.size());
    NoniidResult nr = run_noniid(task, ens, overlaps);
    result["failure"] = nr.failure;
    result["success"] = 1.0 - nr.failure;
    result["effective_overlap"] = json{{"re", nr.effective.value.real()},
                                       {"im", nr.effective.value.imag()}};
    result["optimality_flagged"] = nr.optimality_flagged;
    if (nr.optimality_flagged) result["note"] = nr.note;
  } else {
    auto exact = exact_params(task, r, c, priors);
    ChainSpec spec{task, ens, {}, exact};
    double success = exact_chain_success(spec, n);
    result["exact_success"] = success;
    result["exact_failure"] = 1.0 - success;
    result["exact_mode"] = exact.has_value();

    double global;
    if (r == 2) {
      global = (task == Task::MinError)
                   ? helstrom_success_n(ens.priors[0], ens.priors[1], c.value, n).success
                   : 1.0 - binary_zero_error_Q(ens.priors[0], ens.priors[1], c.value, n)
                               .inconclusive;
    } else {
      if (task == Task::MinError)
        throw std::invalid_argument("chain: minimum-error chains are binary only");
      global = symmetric_zero_error_Q(c.value, 3, n).success;
    }
    result["global_success"] = global;
    result["gap"] = global - success;

    if (task == Task::ZeroError && r == 2 && c.value.is_real() &&
        c.value.value.real() > 0.0 && c.value.value.real() < 1.0) {
      if (exact) result["k0"] = compute_k0_exact(*exact);
      else
        result["k0"] = compute_k0(ens.priors[0], ens.priors[1], c.value.value.real());
    } else {
      result["k0"] = nullptr;
    }
  }

  json doc{{"schema_version", 1}, {"command", "chain"}, {"config", config},
           {"result", result}};
  emit(doc, out_path);
  return 0;
}

int cmd_simulate(Task task, int r, const ParsedOverlap& c, const ParsedPriors& priors, int n,
                 std::int64_t trials, std::uint64_t seed, const std::string& trace_path,
                 std::int64_t max_traces, const std::string& out_path) {
  SymmetricEnsemble ens = make_ensemble(r, c, priors);
  auto exact = exact_params(task, r, c, priors);
  ChainSpec spec{task, ens, {}, exact};
  SimulationOptions opts;
  opts.collect_traces = !trace_path.empty();
  opts.max_traces = max_traces;
  SimulationResult res = simulate(spec, n, trials, seed, opts);

  if (!trace_path.empty()) {
    std::ofstream os(trace_path);
    if (!os) throw std::invalid_argument("cannot open trace file: " + trace_path);
    write_trace_jsonl(os, res.traces);
  }

  json doc{{"schema_version", 1},
           {"command", "simulate"},
           {"config",
            {{"task", task == Task::MinError ? "minerror" : "zeroerror"},
             {"r", r},
             {"c", overlap_json(c)},
             {"priors", ens.priors},
             {"n", n},
             {"trials", trials},
             {"seed", seed}}},
           {"result",
            {{"identified", res.identified},
             {"misidentified", res.misidentified},
             {"failed", res.failed},
             {"empirical_failure", res.empirical_failure},
             {"exact_failure", res.exact_failure},
             {"sigma", res.sigma},
             {"z", res.z},
             {"warn", res.warn}}}};
  emit(doc, out_path);

  if (task == Task::ZeroError && res.misidentified > 0) {
    std::cerr << "simulate: zero-error run misidentified " << res.misidentified
              << " trial(s)\n";
    return 1;
  }
  return 0;
}

int cmd_scan(int s_steps, int theta_steps, int n, double s_max, const std::string& format,
             const std::string& out_path) {
  auto points = scan_plane(s_steps, theta_steps, n, s_max);
  if (format == "csv") {
    std::ostringstream body;
    write_scan_csv(body, points);
    emit_text(body.str(), out_path);
    return 0;
  }
  json rows = json::array();
  for (const auto& pt : points) {
    json row{{"re_c", pt.c.real()}, {"im_c", pt.c.imag()}, {"s", pt.s},
             {"theta", pt.theta},  {"n", pt.n},            {"physical", pt.physical}};
    if (pt.physical) {
      row["online"] = pt.online;
      row["global"] = pt.global;
      row["gap"] = pt.gap;
    }
    rows.push_back(row);
  }
  json doc{{"schema_version", 1},
           {"command", "scan"},
           {"config",
            {{"s_steps", s_steps},
             {"theta_steps", theta_steps},
             {"n", n},
             {"s_max", s_max}}},
           {"result", rows}};
  emit(doc, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sequential discrimination of symmetric pure states"};
  app.require_subcommand(1);

  std::string task_name = "zeroerror";
  int r = 2;
  std::string c_text;
  std::string priors_text;
  int n = 1;
  std::string out_path;

  auto add_common = [&](CLI::App* cmd, bool with_n) {
    cmd->add_option("--task", task_name, "minerror or zeroerror")
        ->check(CLI::IsMember({"minerror", "zeroerror"}));
    cmd->add_option("--r", r, "number of states (2 or 3)")->check(CLI::IsMember({2, 3}));
    cmd->add_option("--c", c_text, "overlap: decimal, p/q, or s@theta")->required();
    cmd->add_option("--priors", priors_text, "comma separated priors (default uniform)");
    if (with_n) cmd->add_option("--n", n, "number of copies")->check(CLI::PositiveNumber);
    cmd->add_option("--out", out_path, "write output to a file instead of stdout");
  };

  auto* bounds_cmd = app.add_subcommand("bounds", "closed-form success and failure bounds");
  add_common(bounds_cmd, true);

  auto* povm_cmd = app.add_subcommand("povm", "first measurement of the online protocol");
  add_common(povm_cmd, false);

  auto* chain_cmd = app.add_subcommand("chain", "exact values of the online chain");
  add_common(chain_cmd, true);
  std::string overlaps_text;
  chain_cmd->add_option("--overlaps", overlaps_text,
                        "comma separated per-copy overlaps (overrides --n)");

  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo run of the online chain");
  add_common(sim_cmd, true);
  std::int64_t trials = 10000;
  std::uint64_t seed = 1;
  std::string trace_path;
  std::int64_t max_traces = -1;
  sim_cmd->add_option("--trials", trials, "number of trials")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", seed, "RNG seed");
  sim_cmd->add_option("--trace", trace_path, "write per-step JSONL traces to this file");
  sim_cmd->add_option("--max-traces", max_traces, "cap the number of traced trials");

  auto* scan_cmd = app.add_subcommand("scan", "online vs collective gap over the overlap plane");
  int s_steps = 60, theta_steps = 60;
  double s_max = 1.0;
  std::string format = "csv";
  scan_cmd->add_option("--s-steps", s_steps, "radial grid points");
  scan_cmd->add_option("--theta-steps", theta_steps, "angular grid points");
  scan_cmd->add_option("--n", n, "number of copies")->check(CLI::PositiveNumber);
  scan_cmd->add_option("--s-max", s_max, "largest overlap magnitude");
  scan_cmd->add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  scan_cmd->add_option("--out", out_path, "write output to a file instead of stdout");

  try {
    app.parse(argc, argv);
    Task task = parse_task(task_name);
    if (*scan_cmd) return cmd_scan(s_steps, theta_steps, n, s_max, format, out_path);

    ParsedOverlap c = parse_overlap(c_text);
    ParsedPriors priors;
    if (!priors_text.empty()) {
      priors = parse_priors(priors_text);
      r = static_cast<int>(priors.values.size());
    }
    if (*bounds_cmd) return cmd_bounds(task, r, c, priors, n, out_path);
    if (*povm_cmd) return cmd_povm(task, r, c, priors, out_path);
    if (*chain_cmd) return cmd_chain(task, r, c, priors, n, overlaps_text, out_path);
    if (*sim_cmd)
      return cmd_simulate(task, r, c, priors, n, trials, seed, trace_path, max_traces,
                          out_path);
    return 2;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
