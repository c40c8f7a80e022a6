#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include <json.hpp>

#include "qpcp/proof.hpp"
#include "qpcp/quantum_core.hpp"
#include "qpcp/random.hpp"

namespace qpcp {

inline constexpr std::uint64_t kUnlimited = std::numeric_limits<std::uint64_t>::max();

struct QueryBudget {
  std::uint64_t max_proof_queries = kUnlimited;
  std::uint64_t max_oracle_queries = kUnlimited;
  std::uint64_t max_random_bits = kUnlimited;
};

struct VerifierConfig {
  std::uint64_t repetitions = 1;  // t, samples per gate
  double eps_check = 1e-9;
  Seed128 seed;
  QueryBudget budget;
  bool record_trace = true;
  /// Provers replaying the verifier read the oracle unmetered.
  bool meter_oracle = true;
};

/// (n+4)·2^{-b/2+3}: above the honest rounding error of ≤ n+4 entry reads.
double default_eps_check(int n, int b);
/// ⌈40/δ²⌉ with δ = 1/(10m).
std::uint64_t default_repetitions(int m);
VerifierConfig default_verifier_config(const Circuit& circuit, int b, Seed128 seed = {});

enum class Outcome { Accept, Reject };

enum class RejectReason { None, InitialStateMismatch, FinalProbabilityLow, PropagationMismatch, BudgetExceeded };

std::string to_string(RejectReason reason);
RejectReason reject_reason_from_string(const std::string& name);

struct VerifierStats {
  std::uint64_t proof_queries = 0;
  std::uint64_t oracle_queries = 0;
  std::uint64_t random_bits = 0;
  /// Largest |η − α̃| seen across all local checks of the run.
  double max_discrepancy = 0.0;
};

struct Verdict {
  Outcome outcome = Outcome::Reject;
  RejectReason reason = RejectReason::None;
  int gate_index = 0;  // PropagationMismatch only
  Basis x = 0;
  double discrepancy = 0.0;
  VerifierStats stats;
  Seed128 seed;

  bool accepted() const { return outcome == Outcome::Accept; }
};

/// {outcome, reason, gate_index?, discrepancy?, proof_queries, oracle_queries, random_bits, seed}
nlohmann::json verdict_to_json(const Verdict& verdict);

struct QueryCounts {
  std::uint64_t proof = 0;
  std::uint64_t oracle = 0;
  std::uint64_t random_bits = 0;
  friend bool operator==(const QueryCounts&, const QueryCounts&) = default;
};

/// Exact counters of an accepting run:
///   proof  = (n+1) + ℓ + t·Σ_i [(2n+1) + c_i(n+1)],  c_i ∈ {2, 4, 1}
///   oracle = t·(number of oracle gates)
///   bits   = t·m·n·(b+1)
QueryCounts accepting_run_counts(const Circuit& circuit, std::uint64_t t, int b);

/// Circuit-independent bounds: (n+1) + ℓ + m·t·(6n+5), m·t, m·t·n·(b+1).
QueryCounts worst_case_counts(int n, int m, int prefix_length, std::uint64_t t, int b);

/// Algorithm 1: γ_{i,x}·√(∏_k p̂_{i,x_k|x_<k}); n probability reads then one
/// phase read.
Complex compute_amplitude(ProofAccess& access, int segment, Basis x);

/// Algorithm 2: walks the prefix tree with one exact Bernoulli per level,
/// drawing b+1 coins and comparing against 2·raw.
Basis sample_input(ProofAccess& access, int segment, CoinSource& coins);

/// Algorithm 3: ⟨x|G_i|φ_{i−1}⟩ from 1, 2 or 4 amplitudes of segment i−1.
/// Oracle gates make exactly one oracle query (metered unless `meter` is
/// false).
Complex local_check_amplitude(ProofAccess& access, const OracleTable& oracles, int segment, Basis x,
                              const Gate& gate, bool meter = true);

/// Algorithm 4.
Verdict verify(ProofAccess& access, const Circuit& circuit, const VerifierConfig& config);

// ---------------------------------------------------------------------------

struct EstimatorResult {
  Complex gamma_hat;
  std::uint64_t k = 0;
};

/// (1/k) Σ φ_{X_j}/ψ_{X_j} over X_j ~ |ψ|², with the ratio taken as 0
/// wherever ψ_{X_j} = 0.
template <typename Sampler, typename AmpPsi, typename AmpPhi>
EstimatorResult estimate_inner_product(Sampler&& sample_psi, AmpPsi&& amp_psi, AmpPhi&& amp_phi, std::uint64_t k,
                                       CoinSource& coins) {
  if (k == 0) throw std::invalid_argument("estimator needs at least one sample");
  Complex sum = 0.0;
  for (std::uint64_t j = 0; j < k; ++j) {
    const Basis x = sample_psi(coins);
    const Complex psi = amp_psi(x);
    if (psi != Complex(0.0, 0.0)) sum += amp_phi(x) / psi;
  }
  return {sum / static_cast<double>(k), k};
}

}  // namespace qpcp
