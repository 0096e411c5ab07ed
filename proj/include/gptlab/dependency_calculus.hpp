#pragma once

#include "gptlab/query_lab.hpp"

#include "json.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gptlab {

/// Bookkeeping of which inputs each term of rho_f may depend on after m
/// generalised queries in a theory of order k. The coefficients Q_T(y) stay
/// opaque; only their dependency sets T are tracked.
struct FormalState {
  int inputs = 0;
  int k = 1;
  int queries_done = 0;
  std::vector<Subset> terms;  // sorted, distinct dependency sets
  bool saturated = false;     // k m exceeds |X|, so sets are capped at X
  bool padded = false;        // sets with |I| < k stand in for padded ones

  /// Symbol name for the coefficient family of term T.
  std::string symbol(Subset t) const { return "Q" + std::to_string(queries_done) + subset_to_string(t); }
};

inline FormalState formal_initial(int inputs, int k) {
  require(inputs >= 1 && inputs <= kMaxSubsetN, "formal state: input count out of range");
  require(k >= 1, "formal state: k must be at least 1");
  return {inputs, k, 0, {Subset(0)}, false, false};
}

/// One query: every T becomes all T | I with |I| <= k.
inline FormalState formal_query(const FormalState& s) {
  const Subset full = full_subset(s.inputs);
  std::vector<Subset> small;
  for (Subset i = 0; i <= full; ++i)
    if (subset_size(i) <= s.k) small.push_back(i);
  std::vector<char> reach(std::size_t(full) + 1, 0);
  FormalState out = s;
  out.queries_done = s.queries_done + 1;
  out.padded = s.padded || s.k > 1;
  out.saturated = s.k * out.queries_done > s.inputs;
  for (Subset t : s.terms)
    for (Subset i : small) reach[t | i] = 1;
  out.terms.clear();
  for (Subset t = 0; t <= full; ++t)
    if (reach[t]) out.terms.push_back(t);
  return out;
}

/// "n classical queries are useless", checked once at construction.
class UselessnessPremise {
 public:
  static UselessnessPremise verify(LearningProblem problem, int n_classical) {
    require(n_classical >= 0, "premise: negative query count");
    if (n_classical > 0) {
      const ClassicalUselessResult r = classical_useless(problem, n_classical);
      require(r.useless, "premise fails: " + std::to_string(n_classical) +
                             " classical queries are not useless for this problem");
    }
    return UselessnessPremise(std::move(problem), n_classical);
  }
  const LearningProblem& problem() const { return problem_; }
  int n_classical() const { return n_; }

 private:
  UselessnessPremise(LearningProblem p, int n) : problem_(std::move(p)), n_(n) {}
  LearningProblem problem_;
  int n_;
};

struct FactorizationCounterexample {
  Subset t = 0;
  Subset y = 0;  // bit x set iff y_x = 1, for x in T
  int cls = 0;
  Rational joint, product;
};

struct FormalVerdict {
  int k = 1, n = 0, premise_n = 0;
  long long identities_checked = 0;
  int dependency_sets = 0;
  bool saturated = false;
  std::optional<FactorizationCounterexample> counterexample;
  std::vector<std::string> trace;  // first identities, for inspection
  bool valid() const { return !counterexample.has_value(); }
};

/// For every dependency set T reachable after n queries of order k, every
/// pattern y and every class j: mu(C_j and f|_T = y) = mu(C_j) mu(f|_T = y).
/// No premise is assumed; formal_posterior_check adds it.
inline FormalVerdict formal_factorization_check(const LearningProblem& p, int k, int n, std::size_t trace_limit = 32) {
  require(n >= 0, "formal check: negative query count");
  FormalState state = formal_initial(p.input_count(), k);
  for (int q = 0; q < n; ++q) state = formal_query(state);

  FormalVerdict v;
  v.k = k;
  v.n = n;
  v.dependency_sets = int(state.terms.size());
  v.saturated = state.saturated;
  const int nj = p.class_count();
  detail::with_weights(p, [&](const auto& weight, const auto& cls, const auto& total) {
    const Rational scale = detail::as_rational(total);
    for (Subset t : state.terms) {
      // Patterns no function realizes have both sides zero.
      v.identities_checked += (std::int64_t(1) << subset_size(t)) * nj;
      detail::for_each_pattern(p, t, weight, [&](Subset y, const auto* row) {
        for (int j = 0; j < nj; ++j) {
          const bool holds = detail::factorizes(row[1 + j], row[0], cls[j], total);
          if (holds && v.trace.size() >= trace_limit) continue;
          const Rational joint = detail::as_rational(row[1 + j]) / scale;
          const Rational product = p.class_prior(j) * detail::as_rational(row[0]) / scale;
          if (v.trace.size() < trace_limit)
            v.trace.push_back("T=" + subset_to_string(t) + " y=" + std::to_string(y) + " j=" + p.classes()[j] + ": " +
                              to_string(joint) + " = " + to_string(product));
          if (!holds && !v.counterexample) v.counterexample = {t, y, j, joint, product};
        }
      });
    }
  });
  return v;
}

/// The theorem's substitution step under its premise. Requires k n <= the
/// premise's classical query count.
inline FormalVerdict formal_posterior_check(const UselessnessPremise& premise, int k, int n) {
  require(k >= 1, "formal_posterior_check: k must be at least 1");
  require(n >= 0, "formal_posterior_check: negative query count");
  require(k * n <= premise.n_classical(), "formal_posterior_check: k n = " + std::to_string(k * n) +
                                              " exceeds the premise's " + std::to_string(premise.n_classical()) +
                                              " useless classical queries");
  FormalVerdict v = formal_factorization_check(premise.problem(), k, n);
  v.premise_n = premise.n_classical();
  return v;
}

/// Convenience: builds the premise with k n classical queries (throws if it
/// does not hold) and runs the check.
inline FormalVerdict formal_posterior_check(const LearningProblem& p, int k, int n) {
  return formal_posterior_check(UselessnessPremise::verify(p, k * n), k, n);
}

inline nlohmann::json to_json(const FormalVerdict& v, const LearningProblem& p) {
  nlohmann::json j{{"theorem", "useless-queries"},
                   {"k", v.k},
                   {"n", v.n},
                   {"premise_n", v.premise_n},
                   {"identities_checked", v.identities_checked},
                   {"dependency_sets", v.dependency_sets},
                   {"verdict", v.valid() ? "proof-valid" : "proof-invalid"}};
  if (v.counterexample) {
    const auto& c = *v.counterexample;
    std::vector<std::string> t;
    std::vector<int> y;
    for (int x = 0; x < p.input_count(); ++x)
      if ((c.t >> x) & 1u) {
        t.push_back(p.inputs()[x]);
        y.push_back(int((c.y >> x) & 1u));
      }
    j["counterexample"] = {{"T", t},
                           {"y", y},
                           {"class", p.classes()[c.cls]},
                           {"joint", to_string(c.joint)},
                           {"product", to_string(c.product)}};
  } else {
    j["counterexample"] = nullptr;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Cross-validation against sampled quantum algorithms (k = 2)

/// True when p is the uniform parity problem on its inputs.
inline bool is_parity_problem(const LearningProblem& p) {
  const int n = p.input_count();
  if (p.function_count() != (1 << n) || p.class_count() != 2) return false;
  auto parity = [&](int f) {
    int out = 0;
    for (int v : p.function(f).values) out ^= v;
    return out;
  };
  int even_class = -1;
  for (int f = 0; f < p.function_count() && even_class < 0; ++f)
    if (parity(f) == 0) even_class = p.class_of(f);
  for (int f = 0; f < p.function_count(); ++f) {
    if (p.function(f).weight != p.function(0).weight) return false;
    if ((p.class_of(f) == even_class) != (parity(f) == 0)) return false;
  }
  return true;
}

struct CrossValidation {
  int n = 0;
  std::string symbolic;  // proof-valid, proof-invalid or precondition-fails
  std::string symbolic_reason;
  SampleReport sampled;
  std::optional<double> explicit_deviation;  // repeated-Deutsch algorithm, parity only
  bool information_gain() const {
    return !sampled.pass() || (explicit_deviation && *explicit_deviation > sampled.tolerance);
  }
  /// symbolic validity implies the sampled deviation is below tolerance, and
  /// any observed information gain rules symbolic validity out.
  bool agree() const {
    if (symbolic == "proof-valid") return sampled.pass() && !information_gain();
    return true;
  }
};

inline CrossValidation cross_validate_with_quantum(const LearningProblem& p, int n, int samples, std::uint64_t seed,
                                                   const SampleOptions& opt = {}) {
  CrossValidation out;
  out.n = n;
  try {
    const FormalVerdict v = formal_posterior_check(p, 2, n);
    out.symbolic = v.valid() ? "proof-valid" : "proof-invalid";
  } catch (const Error& e) {
    out.symbolic = "precondition-fails";
    out.symbolic_reason = e.what();
  }
  out.sampled = generalized_useless_sample(p, build_oracles(p), n, samples, seed, opt);
  if (is_parity_problem(p) && (p.input_count() + 1) / 2 <= n) {
    const ParityAlgorithm pa = deutsch_parity_algorithm(p.input_count());
    const LearningProblem parity = parity_problem(p.input_count());
    out.explicit_deviation = posterior(parity, run_algorithm(parity, pa.oracles, pa.algorithm),
                                       pa.algorithm.measurement)
                                 .max_deviation;
  }
  return out;
}

inline nlohmann::json to_json(const CrossValidation& c) {
  nlohmann::json j{{"check", "cross-validate"},
                   {"n", c.n},
                   {"symbolic", c.symbolic},
                   {"sampled", to_json(c.sampled)},
                   {"information_gain", c.information_gain()},
                   {"agree", c.agree()}};
  if (!c.symbolic_reason.empty()) j["symbolic_reason"] = c.symbolic_reason;
  j["explicit_deviation"] = c.explicit_deviation ? nlohmann::json(*c.explicit_deviation) : nlohmann::json(nullptr);
  return j;
}

}  // namespace gptlab
