#include "qpcp/verifier.hpp"

#include <cmath>

namespace qpcp {

namespace {

/// Number of segment-(i−1) amplitudes a local check reads for this gate.
std::uint64_t amplitudes_per_check(const Gate& gate) {
  if (std::holds_alternative<SingleQubitGate>(gate)) return 2;
  if (std::holds_alternative<TwoQubitGate>(gate)) return 4;
  return 1;
}

struct BudgetExceeded {};

}  // namespace

double default_eps_check(int n, int b) { return (n + 4) * std::ldexp(1.0, -b / 2 + 3); }

std::uint64_t default_repetitions(int m) {
  if (m <= 0) return 1;
  // ⌈40 / (1/(10m))²⌉ = 4000 m²
  return 4000ULL * static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(m);
}

VerifierConfig default_verifier_config(const Circuit& circuit, int b, Seed128 seed) {
  VerifierConfig config;
  config.repetitions = default_repetitions(circuit.m());
  config.eps_check = default_eps_check(circuit.n, b);
  config.seed = seed;
  return config;
}

std::string to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::None: return "None";
    case RejectReason::InitialStateMismatch: return "InitialStateMismatch";
    case RejectReason::FinalProbabilityLow: return "FinalProbabilityLow";
    case RejectReason::PropagationMismatch: return "PropagationMismatch";
    case RejectReason::BudgetExceeded: return "BudgetExceeded";
  }
  return "None";
}

RejectReason reject_reason_from_string(const std::string& name) {
  for (auto r : {RejectReason::None, RejectReason::InitialStateMismatch, RejectReason::FinalProbabilityLow,
                 RejectReason::PropagationMismatch, RejectReason::BudgetExceeded})
    if (to_string(r) == name) return r;
  throw std::invalid_argument("unknown reject reason '" + name + "'");
}

nlohmann::json verdict_to_json(const Verdict& v) {
  nlohmann::json out;
  out["outcome"] = v.accepted() ? "acc" : "rej";
  out["reason"] = v.accepted() ? nlohmann::json(nullptr) : nlohmann::json(to_string(v.reason));
  if (v.reason == RejectReason::PropagationMismatch) {
    out["gate_index"] = v.gate_index;
    out["discrepancy"] = v.discrepancy;
  } else if (v.reason == RejectReason::InitialStateMismatch || v.reason == RejectReason::FinalProbabilityLow) {
    out["discrepancy"] = v.discrepancy;
  }
  out["proof_queries"] = v.stats.proof_queries;
  out["oracle_queries"] = v.stats.oracle_queries;
  out["random_bits"] = v.stats.random_bits;
  out["seed"] = to_hex(v.seed);
  return out;
}

QueryCounts accepting_run_counts(const Circuit& circuit, std::uint64_t t, int b) {
  const auto n = static_cast<std::uint64_t>(circuit.n);
  QueryCounts c;
  c.proof = (n + 1) + static_cast<std::uint64_t>(circuit.acceptance.length);
  for (const Gate& g : circuit.gates) {
    c.proof += t * ((2 * n + 1) + amplitudes_per_check(g) * (n + 1));
    if (std::holds_alternative<OracleGate>(g)) c.oracle += t;
  }
  c.random_bits = t * static_cast<std::uint64_t>(circuit.m()) * n * static_cast<std::uint64_t>(b + 1);
  return c;
}

QueryCounts worst_case_counts(int n, int m, int prefix_length, std::uint64_t t, int b) {
  const auto un = static_cast<std::uint64_t>(n);
  const auto um = static_cast<std::uint64_t>(m);
  return {(un + 1) + static_cast<std::uint64_t>(prefix_length) + um * t * (6 * un + 5), um * t,
          um * t * un * static_cast<std::uint64_t>(b + 1)};
}

Complex compute_amplitude(ProofAccess& access, int segment, Basis x) {
  const int n = access.qubits();
  const int b = access.frac_bits();
  long double weight = 1.0L;
  for (int k = 0; k < n; ++k) {
    const long double p1 = decode_probability(access.read_prob(segment, k, prefix_of(x, n, k)), b);
    weight *= bit_at(x, n, k) ? p1 : 1.0L - p1;
  }
  const auto a = decode_phase(access.read_phase(segment, x), b) * std::sqrt(weight);
  return {static_cast<double>(a.real()), static_cast<double>(a.imag())};
}

Basis sample_input(ProofAccess& access, int segment, CoinSource& coins) {
  const int n = access.qubits();
  const int b = access.frac_bits();
  const u128 one = u128{1} << b;
  Basis w = 0;
  for (int k = 0; k < n; ++k) {
    u128 raw = access.read_prob(segment, k, w);
    if (raw > one) raw = one;
    // Pr[u < 2·raw] = raw / 2^b for u uniform on b+1 bits
    const u128 u = coins.bits(static_cast<unsigned>(b + 1));
    w = (w << 1) | (u < 2 * raw ? 1U : 0U);
  }
  return w;
}

Complex local_check_amplitude(ProofAccess& access, const OracleTable& oracles, int segment, Basis x,
                              const Gate& gate, bool meter) {
  const int n = access.qubits();
  const int prev = segment - 1;
  if (prev < 0) throw std::invalid_argument("local checks start at segment 1");
  return std::visit(
      [&](const auto& g) -> Complex {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, SingleQubitGate>) {
          const int xq = bit_at(x, n, g.qubit);
          const Complex a_x = compute_amplitude(access, prev, x);
          const Complex a_flip = compute_amplitude(access, prev, flip_bit(x, n, g.qubit));
          return g.matrix(xq, xq) * a_x + g.matrix(xq, 1 - xq) * a_flip;
        } else if constexpr (std::is_same_v<T, TwoQubitGate>) {
          const int row = 2 * bit_at(x, n, g.q) + bit_at(x, n, g.s);
          const Basis xq = flip_bit(x, n, g.q);
          const Basis xs = flip_bit(x, n, g.s);
          const Basis xqs = flip_bit(xq, n, g.s);
          const Complex a_x = compute_amplitude(access, prev, x);
          const Complex a_q = compute_amplitude(access, prev, xq);
          const Complex a_s = compute_amplitude(access, prev, xs);
          const Complex a_qs = compute_amplitude(access, prev, xqs);
          return g.matrix(row, row) * a_x + g.matrix(row, row ^ 2) * a_q + g.matrix(row, row ^ 1) * a_s +
                 g.matrix(row, row ^ 3) * a_qs;
        } else {
          const auto it = oracles.find(g.oracle_id);
          if (it == oracles.end() || !it->second) throw std::invalid_argument("unknown oracle id '" + g.oracle_id + "'");
          const Complex a_x = compute_amplitude(access, prev, x);
          const bool fx = meter ? it->second->query(x) : it->second->value(x);
          return fx ? -a_x : a_x;
        }
      },
      gate);
}

Verdict verify(ProofAccess& access, const Circuit& circuit, const VerifierConfig& config) {
  circuit.validate();
  if (access.qubits() != circuit.n || access.gates() != circuit.m())
    throw std::invalid_argument("proof dimensions do not match the circuit");
  if (config.repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
  if (!(config.eps_check > 0.0)) throw std::invalid_argument("eps_check must be positive");

  const int n = circuit.n;
  const int m = circuit.m();
  const int b = access.frac_bits();
  const double eps = config.eps_check;
  const std::uint64_t bits_per_sample = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(b + 1);

  CoinSource coins(config.seed);
  const std::uint64_t start_queries = access.query_count();
  const std::uint64_t proof_budget = config.budget.max_proof_queries;
  access.set_query_limit(proof_budget == kUnlimited ? kUnlimited : start_queries + proof_budget);

  Verdict v;
  v.seed = config.seed;
  std::uint64_t oracle_queries = 0;
  double max_discrepancy = 0.0;

  auto finish = [&](Outcome outcome, RejectReason reason) {
    v.outcome = outcome;
    v.reason = reason;
    v.stats.proof_queries = access.query_count() - start_queries;
    v.stats.oracle_queries = oracle_queries;
    v.stats.random_bits = coins.consumed();
    v.stats.max_discrepancy = max_discrepancy;
    access.set_query_limit(kUnlimited);
    return v;
  };

  auto final_probability_check = [&]() {
    const AcceptancePredicate& pred = circuit.acceptance;
    long double prob = 1.0L;
    for (int k = 0; k < pred.length; ++k) {
      const Basis w = prefix_of(pred.prefix, pred.length, k);
      const long double p1 = decode_probability(access.read_prob(m, k, w), b);
      prob *= bit_at(pred.prefix, pred.length, k) ? p1 : 1.0L - p1;
    }
    v.discrepancy = static_cast<double>(prob);
    return static_cast<double>(prob) >= pred.threshold - eps;
  };

  try {
    // Step 1: the initial segment must encode |0^n⟩.
    const Complex a0 = compute_amplitude(access, 0, 0);
    if (std::abs(a0 - Complex(1.0, 0.0)) > eps) {
      v.discrepancy = std::abs(a0 - Complex(1.0, 0.0));
      return finish(Outcome::Reject, RejectReason::InitialStateMismatch);
    }
    if (m == 0 && !final_probability_check()) return finish(Outcome::Reject, RejectReason::FinalProbabilityLow);

    for (int i = 1; i <= m; ++i) {
      // Step 2a
      if (i == m && !final_probability_check()) return finish(Outcome::Reject, RejectReason::FinalProbabilityLow);
      const Gate& gate = circuit.gates[static_cast<std::size_t>(i - 1)];
      const bool is_oracle = std::holds_alternative<OracleGate>(gate);
      // Step 2b
      for (std::uint64_t rep = 0; rep < config.repetitions; ++rep) {
        if (coins.consumed() + bits_per_sample > config.budget.max_random_bits) throw BudgetExceeded{};
        if (is_oracle && oracle_queries + 1 > config.budget.max_oracle_queries) throw BudgetExceeded{};
        const Basis x = sample_input(access, i, coins);
        const Complex alpha = compute_amplitude(access, i, x);
        const Complex eta = local_check_amplitude(access, circuit.oracles, i, x, gate, config.meter_oracle);
        if (is_oracle) ++oracle_queries;
        const double d = std::abs(eta - alpha);
        if (d > max_discrepancy) max_discrepancy = d;
        if (d >= eps) {
          v.gate_index = i;
          v.x = x;
          v.discrepancy = d;
          return finish(Outcome::Reject, RejectReason::PropagationMismatch);
        }
      }
    }
  } catch (const QueryLimitExceeded&) {
    return finish(Outcome::Reject, RejectReason::BudgetExceeded);
  } catch (const BudgetExceeded&) {
    return finish(Outcome::Reject, RejectReason::BudgetExceeded);
  }
  v.discrepancy = 0.0;
  return finish(Outcome::Accept, RejectReason::None);
}

}  // namespace qpcp
