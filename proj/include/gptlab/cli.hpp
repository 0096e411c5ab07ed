#pragma once

// Command-line front end. Kept in the header tree so the test suite can drive
// it in-process; tools/gptlab.cpp is a thin main().

#include "gptlab/dependency_calculus.hpp"
#include "gptlab/subroutine.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace gptlab::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitCheckFailed = 2;

inline constexpr int kMaxInterferenceN = 8;
inline constexpr int kMaxParityN = 12;
inline constexpr int kMaxSamples = 100000;

struct RunConfig {
  std::string command;
  double tol = kDefaultTol;
  std::uint64_t seed = kDefaultSeed;
  int samples = 200;
  int N = 0, k = 2, n = 1;
  std::string in, out;
  std::string format = "json";
  std::string theory = "quantum";
  double p = 2.0 / 3.0;  // subroutine: per-run success probability
  int q = 3;             // subroutine: target 1 - 2^-q
  int bits = 0;          // subroutine: amplify to 1 - 2^-bits (0 = no amplification)
};

/// Thread count from GPTLAB_THREADS (default 1). Results never depend on it,
/// so it is not part of the recorded config.
inline int threads_from_env() {
  const char* v = std::getenv("GPTLAB_THREADS");
  if (!v || !*v) return 1;
  int t = 0;
  const auto [ptr, ec] = std::from_chars(v, v + std::char_traits<char>::length(v), t);
  if (ec != std::errc() || *ptr != '\0' || t < 1) throw Error("GPTLAB_THREADS must be a positive integer");
  return std::min(t, 64);
}

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j{{"command", c.command}, {"tol", c.tol}, {"seed", c.seed}, {"format", c.format}};
  if (c.command == "interference") {
    j["theory"] = c.theory;
    j["N"] = c.N;
    j["samples"] = c.samples;
  } else if (c.command == "parity") {
    j["N"] = c.N;
    j["k"] = c.k;
  } else if (c.command == "useless-check") {
    j["in"] = c.in;
    j["n"] = c.n;
    j["k"] = c.k;
    j["samples"] = c.samples;
  } else if (c.command == "subroutine") {
    j["p"] = c.p;
    j["q"] = c.q;
    j["bits"] = c.bits;
  } else if (c.command == "oracle-check") {
    j["in"] = c.in;
  }
  return j;
}

struct CommandResult {
  nlohmann::json report;
  std::string csv;  // filled by commands that support CSV
  bool pass = false;
};

// Shortest round-trip form, independent of the locale.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

inline nlohmann::json read_json_file(const std::string& path) {
  require(!path.empty(), "--in is required");
  std::ifstream f(path);
  require(f.good(), "cannot open input file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON: " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Commands

/// Rows (N, k, residual, I_2, I_3) for N = 2..N_max and k = 1..N. The Sorkin
/// columns are one random (state, effect) pair per N.
inline CommandResult cmd_interference(const RunConfig& c) {
  require(c.theory == "classical" || c.theory == "quantum", "--theory must be classical or quantum");
  require(c.N >= 2 && c.N <= kMaxInterferenceN,
          "--N must be in [2, " + std::to_string(kMaxInterferenceN) + "] for interference");
  const bool quantum = c.theory == "quantum";
  const int level = quantum ? 2 : 1;
  CommandResult res;
  res.pass = true;
  nlohmann::json rows = nlohmann::json::array();
  std::ostringstream csv;
  csv << "N,k,residual,I2,I3\n";
  for (int n = 2; n <= c.N; ++n) {
    const System sys = quantum ? System::quantum(n) : System::classical(n);
    const ProjectorFamily fam(SlitStructure::basis(sys, n));
    Rng rng(derive_seed(c.seed, std::uint64_t(n)));
    StateVec s = StateVec::maximally_mixed(sys);
    EffectVec e = EffectVec::unit(sys);
    if (quantum) {
      s = StateVec::from_ket(sys, haar_ket(n, rng));
      const CVector v = haar_ket(n, rng);
      e = EffectVec::from_operator(sys, v * v.adjoint());
    } else {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      Vector sv(n), ev(n);
      for (int i = 0; i < n; ++i) sv(i) = u(rng);
      for (int i = 0; i < n; ++i) ev(i) = u(rng);
      s = StateVec(sys, sv / sv.sum());
      e = EffectVec(sys, ev);
    }
    const double i2 = sorkin_functional(fam, s, e, make_subset({0, 1}));
    std::optional<double> i3;
    if (n >= 3) i3 = sorkin_functional(fam, s, e, make_subset({0, 1, 2}));
    if (!quantum && i2 != 0.0) res.pass = false;
    if (i3 && std::abs(*i3) >= c.tol) res.pass = false;
    for (int k = 1; k <= n; ++k) {
      const double r = coherence_identity_residual(fam, k);
      if ((k >= level) != (r < c.tol)) res.pass = false;
      rows.push_back({{"N", n}, {"k", k}, {"residual", r}, {"I2", i2},
                      {"I3", i3 ? nlohmann::json(*i3) : nlohmann::json(nullptr)}});
      csv << n << ',' << k << ',' << format_double(r) << ',' << format_double(i2) << ','
          << (i3 ? format_double(*i3) : std::string()) << '\n';
    }
  }
  res.report = {{"check", "interference"}, {"theory", c.theory}, {"expected_order", level}, {"rows", rows},
                {"pass", res.pass}};
  res.csv = csv.str();
  return res;
}

inline CommandResult cmd_parity(const RunConfig& c) {
  require(c.N >= 1 && c.N <= kMaxParityN, "--N must be in [1, " + std::to_string(kMaxParityN) + "] for parity");
  require(c.k >= 1 && c.k <= kMaxParityN, "--k must be in [1, " + std::to_string(kMaxParityN) + "]");
  const LearningProblem p = parity_problem(c.N);
  CommandResult res;
  const int frontier = classical_useless_level(p);
  const auto [useless_q, min_q] = useless_bound(frontier, c.k);
  res.pass = frontier == c.N - 1;
  nlohmann::json j{{"check", "parity"},
                   {"N", c.N},
                   {"k", c.k},
                   {"classical_useless_max", frontier},
                   {"useless_queries", useless_q},
                   {"min_queries", min_q}};
  if (c.k == 2) {
    const ParityAlgorithm pa = deutsch_parity_algorithm(c.N);
    const auto success = success_probabilities(p, run_algorithm(p, pa.oracles, pa.algorithm), pa.algorithm);
    const double worst = *std::min_element(success.begin(), success.end());
    j["quantum_alg_queries"] = pa.algorithm.queries();
    j["success"] = worst;
    res.pass = res.pass && std::abs(worst - 1.0) < c.tol && pa.algorithm.queries() == min_q;
  } else {
    j["quantum_alg_queries"] = nullptr;
    j["success"] = nullptr;
  }
  nlohmann::json symbolic = nlohmann::json::array();
  const UselessnessPremise premise = UselessnessPremise::verify(p, frontier);
  for (int n = 1; n <= min_q; ++n) {
    if (c.k * n <= frontier) {
      const FormalVerdict v = formal_posterior_check(premise, c.k, n);
      symbolic.push_back({{"n", n}, {"premise", true}, {"verdict", v.valid() ? "proof-valid" : "proof-invalid"}});
      res.pass = res.pass && v.valid();
    } else {
      const FormalVerdict v = formal_factorization_check(p, c.k, n);
      symbolic.push_back({{"n", n},
                          {"premise", false},
                          {"verdict", "precondition-fails"},
                          {"factorization", v.valid() ? "holds" : "fails"}});
    }
  }
  j["symbolic"] = symbolic;
  j["pass"] = res.pass;
  res.report = std::move(j);
  return res;
}

inline CommandResult cmd_useless_check(const RunConfig& c) {
  require(c.n >= 1, "--n must be at least 1");
  require(c.k >= 1, "--k must be at least 1");
  require(c.samples >= 0 && c.samples <= kMaxSamples, "--samples out of range");
  const LearningProblem p = learning_problem_from_json(read_json_file(c.in));
  CommandResult res;
  const ClassicalUselessResult classical = classical_useless(p, c.k * c.n);
  nlohmann::json j{{"check", "useless-check"},
                   {"problem", {{"inputs", p.input_count()}, {"functions", p.function_count()},
                                {"classes", p.classes()}}},
                   {"n", c.n},
                   {"k", c.k},
                   {"classical", to_json(classical, p)}};
  bool symbolic_ok = false;
  try {
    const FormalVerdict v = formal_posterior_check(p, c.k, c.n);
    symbolic_ok = v.valid();
    j["symbolic"] = to_json(v, p);
  } catch (const Error& e) {
    nlohmann::json s = to_json(formal_factorization_check(p, c.k, c.n), p);
    s["verdict"] = "premise-failed";
    s["reason"] = e.what();
    j["symbolic"] = std::move(s);
  }
  bool sampled_ok = true;
  if (c.k == 2) {
    SampleOptions opt;
    opt.threads = threads_from_env();
    const SampleReport r = generalized_useless_sample(p, build_oracles(p), c.n, c.samples, c.seed, opt);
    sampled_ok = r.pass();
    j["quantum"] = to_json(r);
  } else {
    j["quantum"] = nullptr;
  }
  res.pass = classical.useless && symbolic_ok && sampled_ok;
  j["pass"] = res.pass;
  res.report = std::move(j);
  return res;
}

inline CommandResult cmd_subroutine(const RunConfig& c) {
  require(c.p > 0.5 && c.p <= 1.0, "--p must be in (1/2, 1]");
  require(c.q >= 0 && c.q <= 30, "--q must be in [0, 30]");
  require(c.bits >= 0 && c.bits <= 30, "--bits must be in [0, 30]");
  ToyAlgorithm alg = biased_algorithm({0, 1}, c.p, 1);
  if (c.bits > 0) alg = amplify(alg, repetitions_for(c.p, 1.0 - std::ldexp(1.0, -c.bits)));
  const SubroutineReport rep = verify_subroutine_bound(alg, c.q, SubroutineRoute::automatic, Config{c.tol, c.seed});
  CommandResult res;
  res.pass = rep.pass;
  res.report = to_json(rep);
  res.report["p"] = c.p;
  res.report["bit_flip_identity"] = check_bit_flip_identity();
  return res;
}

inline CommandResult cmd_oracle_check(const RunConfig& c) {
  const Config cfg{c.tol, c.seed};
  const OracleSystem os = oracle_system_from_json(read_json_file(c.in), cfg);
  const LocalityReport r = check_locality(os, cfg);
  CommandResult res;
  res.pass = r.ok();
  res.report = to_json(r, os);
  res.report["check"] = "oracle-locality";
  res.report["pass"] = res.pass;
  return res;
}

// ---------------------------------------------------------------------------
// Entry point

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Generalised query experiments: interference order, parity, uselessness, subroutines"};
  app.require_subcommand(1);
  auto common = [&](CLI::App* s) {
    s->add_option("--tol", c.tol, "numerical tolerance")->check(CLI::PositiveNumber);
    s->add_option("--seed", c.seed, "master seed");
    s->add_option("--out", c.out, "write the report here instead of stdout");
    s->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };
  CLI::App* inter = app.add_subcommand("interference", "coherence-identity residuals and Sorkin samples");
  common(inter);
  inter->add_option("--theory", c.theory, "classical or quantum")->check(CLI::IsMember({"classical", "quantum"}));
  inter->add_option("--N", c.N, "largest slit count")->required();
  inter->add_option("--samples", c.samples, "recorded for provenance");
  CLI::App* parity = app.add_subcommand("parity", "parity frontier, quantum algorithm and symbolic verdicts");
  common(parity);
  parity->add_option("--N", c.N, "number of inputs")->required();
  parity->add_option("--k", c.k, "interference order");
  CLI::App* useless = app.add_subcommand("useless-check", "classical, symbolic and sampled uselessness of a problem");
  common(useless);
  useless->add_option("--in", c.in, "learning problem JSON")->required();
  useless->add_option("--n", c.n, "generalised query count");
  useless->add_option("--k", c.k, "interference order");
  useless->add_option("--samples", c.samples, "random algorithms to sample (k = 2)");
  CLI::App* sub = app.add_subcommand("subroutine", "oracle built from a bounded-error toy algorithm");
  common(sub);
  sub->add_option("--p", c.p, "per-run success probability");
  sub->add_option("--q", c.q, "required oracle fidelity 1 - 2^-q");
  sub->add_option("--bits", c.bits, "amplify to 1 - 2^-bits first (0: no amplification)");
  CLI::App* oracle = app.add_subcommand("oracle-check", "locality of a phase-oracle family");
  common(oracle);
  oracle->add_option("--in", c.in, "oracle system JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitUsage;
  }
  c.command = app.get_subcommands().front()->get_name();

  CommandResult res;
  try {
    if (c.format == "csv" && c.command != "interference") throw Error("--format csv is only available for interference");
    if (c.command == "interference") res = cmd_interference(c);
    else if (c.command == "parity") res = cmd_parity(c);
    else if (c.command == "useless-check") res = cmd_useless_check(c);
    else if (c.command == "subroutine") res = cmd_subroutine(c);
    else res = cmd_oracle_check(c);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  std::string text;
  if (c.format == "csv") {
    text = res.csv;
  } else {
    res.report["config"] = to_json(c);
    text = res.report.dump(2) + "\n";
  }
  if (c.out.empty()) {
    out << text;
  } else {
    std::ofstream f(c.out, std::ios::binary);
    if (!f) {
      err << "error: cannot write '" << c.out << "'\n";
      return kExitUsage;
    }
    f << text;
  }
  return res.pass ? kExitPass : kExitCheckFailed;
}

}  // namespace gptlab::cli
