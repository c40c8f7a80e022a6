#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpcp/proof.hpp"
#include "qpcp/verifier.hpp"

namespace qpcp::mip {

/// Prover 1 sees only the verifier's coin seed R and answers with a sequence
/// of entries.
class FirstProver {
 public:
  virtual ~FirstProver() = default;
  virtual std::vector<Entry> answer(const Seed128& coins) = 0;
};

/// Prover 2 sees only one flat proof location.
class SecondProver {
 public:
  virtual ~SecondProver() = default;
  virtual Entry answer(std::uint64_t location) = 0;
};

struct MipConfig {
  std::uint64_t rounds = 1;
  VerifierConfig pcp;
};

enum class RejectStage { None, Simulation, Consistency };
std::string to_string(RejectStage stage);

struct Transcript {
  Seed128 coins;                            // R
  std::vector<Entry> answers;               // a_1..a_q from prover 1
  std::vector<std::uint64_t> locations;     // i_1..i_q from the simulation
  std::optional<std::uint64_t> challenge;   // j, 0-based
  std::optional<std::uint64_t> challenged_location;  // i_j
  std::optional<Entry> second_answer;       // b
  bool accepted = false;
  RejectStage stage = RejectStage::None;
  Verdict simulation;
  std::string detail;
  std::uint64_t communication_bits = 0;
  std::uint64_t random_bits = 0;
};

struct ProtocolResult {
  bool accepted = false;
  std::uint64_t rounds_run = 0;
  std::vector<Transcript> transcripts;
  std::uint64_t communication_bits = 0;
  std::uint64_t oracle_queries = 0;
  std::uint64_t random_bits = 0;
};

/// Width of one entry on the wire: a phase pair, 2·⌈(b+3)/8⌉ bytes.
int entry_width_bits(int b);

/// q_π: proof queries of an accepting PCP run, which every accepting run
/// makes exactly.
std::uint64_t answer_length(const Circuit& circuit, const VerifierConfig& pcp, int b);

/// |R| + q_π·w + ⌈log2 N_π⌉ + w
std::uint64_t round_communication_bits(std::uint64_t q_pi, std::uint64_t proof_length, int b);

/// Steps 1–7 of the two-round protocol.
Transcript run_round(const Circuit& circuit, FirstProver& p1, SecondProver& p2, const MipConfig& config, int b,
                     CoinSource& coins);

/// `config.rounds` sequential rounds with fresh coins; accepts iff all do.
/// Stops at the first rejecting round.
ProtocolResult run_protocol(const Circuit& circuit, FirstProver& p1, SecondProver& p2, const MipConfig& config, int b,
                            CoinSource& coins);

/// π′: prover 2's answer at every location.
PcpProof extract_proof(SecondProver& p2, int n, int m, int b);

struct SimulationResult {
  Verdict verdict;
  bool completed = false;  // false when the answers ran out or were malformed
  std::vector<Entry> answers;
  std::vector<std::uint64_t> locations;
  std::string detail;
};

/// Step 3 alone: the PCP verifier on coins R, fed from prover 1's answers.
SimulationResult simulate_first_round(const Circuit& circuit, FirstProver& p1, const MipConfig& config, int b,
                                      const Seed128& coins);

struct ChallengeAnalysis {
  bool simulation_accepted = false;
  std::uint64_t challenges = 0;
  std::uint64_t caught = 0;
  /// Exact rejection probability over the uniform choice of j given R.
  double rejection_probability = 0.0;
};

ChallengeAnalysis enumerate_challenges(const Circuit& circuit, FirstProver& p1, SecondProver& p2,
                                       const MipConfig& config, int b, const Seed128& coins);

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

/// Replaces the truthful answer at 1-based read position `position`
/// (address given) with the returned entry, or keeps it on nullopt.
using AnswerOverride =
    std::function<std::optional<Entry>(std::uint64_t position, const ProofAddress& address, const Entry& truthful)>;

/// Runs the PCP verifier on R against its own proof (optionally rewriting
/// some reads) and reports what it read, padded to q_π.
class ProofBackedFirstProver final : public FirstProver {
 public:
  ProofBackedFirstProver(const PcpProof& proof, const Circuit& circuit, const VerifierConfig& pcp,
                         AnswerOverride override_answer = {});
  std::vector<Entry> answer(const Seed128& coins) override;

 private:
  const PcpProof& proof_;
  const Circuit& circuit_;
  VerifierConfig pcp_;
  AnswerOverride override_;
  std::uint64_t q_pi_;
};

class ProofBackedSecondProver final : public SecondProver {
 public:
  explicit ProofBackedSecondProver(const PcpProof& proof) : proof_(proof) {}
  Entry answer(std::uint64_t location) override { return proof_.entry(location); }

 private:
  const PcpProof& proof_;
};

class ConstantSecondProver final : public SecondProver {
 public:
  explicit ConstantSecondProver(Entry value) : value_(value) {}
  Entry answer(std::uint64_t) override { return value_; }

 private:
  Entry value_;
};

/// Deterministic pseudo-random entries keyed on the location.
class RandomSecondProver final : public SecondProver {
 public:
  RandomSecondProver(Seed128 seed, const ProofLayout& layout, int b) : seed_(seed), layout_(layout), b_(b) {}
  Entry answer(std::uint64_t location) override;

 private:
  Seed128 seed_;
  ProofLayout layout_;
  int b_;
};

/// Truthful except for the read at 1-based `position`, which gets `value`;
/// later answers stay consistent with the proof along the diverted path.
AnswerOverride deviate_at(std::uint64_t position, Entry value);

/// Lies only on the final-probability reads so that the simulated verifier
/// passes its output check.
AnswerOverride forge_acceptance(const Circuit& circuit, const VerifierConfig& pcp, int b);

std::string entry_to_hex(const Entry& e);
Entry entry_from_hex(const std::string& hex);

/// One JSON-lines record.
nlohmann::json transcript_to_json(const Transcript& t);

}  // namespace qpcp::mip
