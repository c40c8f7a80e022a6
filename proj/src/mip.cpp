#include "qpcp/mip.hpp"

#include <stdexcept>

namespace qpcp::mip {

namespace {

struct AnswersExhausted {};
struct MalformedAnswer {};

/// Feeds prover 1's answers to the simulated verifier in order.
class AnswerFeed final : public ProofSource {
 public:
  AnswerFeed(const std::vector<Entry>& answers, int b) : answers_(answers), b_(b) {}

  Entry fetch(const ProofAddress& address, std::uint64_t) override {
    if (next_ >= answers_.size()) throw AnswersExhausted{};
    const Entry& e = answers_[next_++];
    if (!entry_fits(e, address.kind, b_)) throw MalformedAnswer{};
    return e;
  }

 private:
  const std::vector<Entry>& answers_;
  int b_;
  std::size_t next_ = 0;
};

/// Proof reads with an optional per-position rewrite.
class OverridingSource final : public ProofSource {
 public:
  OverridingSource(const PcpProof& proof, const AnswerOverride& override_answer)
      : proof_(proof), override_(override_answer) {}

  Entry fetch(const ProofAddress& address, std::uint64_t) override {
    ++position_;
    const Entry truthful = proof_.entry(address);
    if (override_) {
      if (auto replaced = override_(position_, address, truthful)) return *replaced;
    }
    return truthful;
  }

 private:
  const PcpProof& proof_;
  const AnswerOverride& override_;
  std::uint64_t position_ = 0;
};

}  // namespace

std::string to_string(RejectStage stage) {
  switch (stage) {
    case RejectStage::None: return "none";
    case RejectStage::Simulation: return "Simulation";
    case RejectStage::Consistency: return "Consistency";
  }
  return "none";
}

int entry_width_bits(int b) { return 16 * phase_component_bytes(b); }

std::uint64_t answer_length(const Circuit& circuit, const VerifierConfig& pcp, int b) {
  return accepting_run_counts(circuit, pcp.repetitions, b).proof;
}

std::uint64_t round_communication_bits(std::uint64_t q_pi, std::uint64_t proof_length, int b) {
  const auto w = static_cast<std::uint64_t>(entry_width_bits(b));
  return 128 + q_pi * w + ceil_log2(proof_length) + w;
}

SimulationResult simulate_first_round(const Circuit& circuit, FirstProver& p1, const MipConfig& config, int b,
                                      const Seed128& coins) {
  const ProofLayout layout(circuit.n, circuit.m());
  const std::uint64_t q_pi = answer_length(circuit, config.pcp, b);
  SimulationResult sim;
  sim.answers = p1.answer(coins);
  if (sim.answers.size() > q_pi) sim.answers.resize(static_cast<std::size_t>(q_pi));

  AnswerFeed feed(sim.answers, b);
  ProofAccess access(feed, layout, b, /*record_trace=*/true);
  VerifierConfig pcp = config.pcp;
  pcp.seed = coins;
  pcp.record_trace = true;
  pcp.meter_oracle = true;
  try {
    sim.verdict = verify(access, circuit, pcp);
    sim.completed = true;
  } catch (const AnswersExhausted&) {
    sim.detail = "prover 1 sent fewer answers than the simulation consumed";
  } catch (const MalformedAnswer&) {
    sim.detail = "prover 1 sent an entry outside the entry alphabet";
  }
  sim.verdict.seed = coins;
  sim.locations.reserve(access.trace().size());
  for (const TraceRecord& r : access.trace()) sim.locations.push_back(r.location);
  return sim;
}

Transcript run_round(const Circuit& circuit, FirstProver& p1, SecondProver& p2, const MipConfig& config, int b,
                     CoinSource& coins) {
  const std::uint64_t bits_before = coins.consumed();
  Transcript t;
  t.coins = coins.next_seed();
  SimulationResult sim = simulate_first_round(circuit, p1, config, b, t.coins);
  t.answers = std::move(sim.answers);
  t.locations = std::move(sim.locations);
  t.simulation = sim.verdict;
  t.detail = sim.detail;
  const auto w = static_cast<std::uint64_t>(entry_width_bits(b));
  t.communication_bits = 128 + t.answers.size() * w;

  if (!sim.completed || !sim.verdict.accepted()) {
    t.stage = RejectStage::Simulation;
    t.random_bits = coins.consumed() - bits_before;
    return t;
  }
  const std::uint64_t j = coins.uniform_below(t.locations.size());
  const std::uint64_t location = t.locations[static_cast<std::size_t>(j)];
  t.challenge = j;
  t.challenged_location = location;
  t.second_answer = p2.answer(location);
  t.communication_bits += ceil_log2(ProofLayout(circuit.n, circuit.m()).size()) + w;
  t.accepted = t.answers[static_cast<std::size_t>(j)] == *t.second_answer;
  t.stage = t.accepted ? RejectStage::None : RejectStage::Consistency;
  t.random_bits = coins.consumed() - bits_before;
  return t;
}

ProtocolResult run_protocol(const Circuit& circuit, FirstProver& p1, SecondProver& p2, const MipConfig& config, int b,
                            CoinSource& coins) {
  if (config.rounds < 1) throw std::invalid_argument("protocol needs at least one round");
  ProtocolResult result;
  result.accepted = true;
  for (std::uint64_t r = 0; r < config.rounds; ++r) {
    Transcript t = run_round(circuit, p1, p2, config, b, coins);
    ++result.rounds_run;
    result.communication_bits += t.communication_bits;
    result.oracle_queries += t.simulation.stats.oracle_queries;
    result.random_bits += t.random_bits;
    const bool accepted = t.accepted;
    result.transcripts.push_back(std::move(t));
    if (!accepted) {
      result.accepted = false;
      break;
    }
  }
  return result;
}

PcpProof extract_proof(SecondProver& p2, int n, int m, int b) {
  PcpProof proof(n, m, b);
  const ProofLayout& layout = proof.layout();
  for (std::uint64_t loc = 0; loc < layout.size(); ++loc) proof.set_entry(layout.address(loc), p2.answer(loc));
  return proof;
}

ChallengeAnalysis enumerate_challenges(const Circuit& circuit, FirstProver& p1, SecondProver& p2,
                                       const MipConfig& config, int b, const Seed128& coins) {
  const SimulationResult sim = simulate_first_round(circuit, p1, config, b, coins);
  ChallengeAnalysis out;
  out.simulation_accepted = sim.completed && sim.verdict.accepted();
  out.challenges = sim.locations.size();
  if (!out.simulation_accepted) {
    out.rejection_probability = 1.0;
    return out;
  }
  for (std::size_t j = 0; j < sim.locations.size(); ++j)
    if (!(sim.answers[j] == p2.answer(sim.locations[j]))) ++out.caught;
  out.rejection_probability = static_cast<double>(out.caught) / static_cast<double>(out.challenges);
  return out;
}

// ---------------------------------------------------------------------------

ProofBackedFirstProver::ProofBackedFirstProver(const PcpProof& proof, const Circuit& circuit, const VerifierConfig& pcp,
                                               AnswerOverride override_answer)
    : proof_(proof),
      circuit_(circuit),
      pcp_(pcp),
      override_(std::move(override_answer)),
      q_pi_(answer_length(circuit, pcp, proof.frac_bits())) {}

std::vector<Entry> ProofBackedFirstProver::answer(const Seed128& coins) {
  OverridingSource source(proof_, override_);
  ProofAccess access(source, proof_.layout(), proof_.frac_bits(), /*record_trace=*/true);
  VerifierConfig pcp = pcp_;
  pcp.seed = coins;
  pcp.meter_oracle = false;
  pcp.record_trace = true;
  verify(access, circuit_, pcp);
  std::vector<Entry> out;
  out.reserve(static_cast<std::size_t>(q_pi_));
  for (const TraceRecord& r : access.trace()) out.push_back(r.value);
  out.resize(static_cast<std::size_t>(std::max<std::uint64_t>(q_pi_, out.size())));
  return out;
}

Entry RandomSecondProver::answer(std::uint64_t location) {
  const ProofAddress address = layout_.address(location);
  CounterRng rng(derive_seed(seed_, location));
  const u128 a = (static_cast<u128>(rng()) << 64) | rng();
  const u128 c = (static_cast<u128>(rng()) << 64) | rng();
  Entry e{static_cast<i128>(a), static_cast<i128>(c)};
  if (address.kind == EntryKind::Prob) e.secondary = 0;
  return truncate_entry(e, address.kind, b_);
}

AnswerOverride deviate_at(std::uint64_t position, Entry value) {
  return [position, value](std::uint64_t pos, const ProofAddress&, const Entry&) -> std::optional<Entry> {
    if (pos == position) return value;
    return std::nullopt;
  };
}

AnswerOverride forge_acceptance(const Circuit& circuit, const VerifierConfig& pcp, int b) {
  const auto n = static_cast<std::uint64_t>(circuit.n);
  const int m = circuit.m();
  // Position of the first output-check read: after step 1 and the t
  // repetitions of gates 1..m−1.
  Circuit head = circuit;
  if (m > 0) head.gates.pop_back();
  head.acceptance.length = 0;
  std::uint64_t first = m > 0 ? accepting_run_counts(head, pcp.repetitions, b).proof + 1 : n + 2;
  const AcceptancePredicate pred = circuit.acceptance;
  const u128 one = u128{1} << b;
  return [=](std::uint64_t pos, const ProofAddress& address, const Entry&) -> std::optional<Entry> {
    if (pos < first || pos >= first + static_cast<std::uint64_t>(pred.length)) return std::nullopt;
    if (address.kind != EntryKind::Prob || address.segment != static_cast<std::uint32_t>(m)) return std::nullopt;
    const bool bit = bit_at(pred.prefix, pred.length, address.length) != 0;
    return Entry{static_cast<i128>(bit ? one : u128{0}), 0};
  };
}

std::string entry_to_hex(const Entry& e) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(64, '0');
  auto put = [&](u128 v, std::size_t offset) {
    for (int k = 31; k >= 0; --k) {
      out[offset + static_cast<std::size_t>(k)] = kDigits[static_cast<unsigned>(v & 0xF)];
      v >>= 4;
    }
  };
  put(static_cast<u128>(e.primary), 0);
  put(static_cast<u128>(e.secondary), 32);
  return out;
}

Entry entry_from_hex(const std::string& hex) {
  if (hex.size() != 64) throw std::invalid_argument("entry hex must have 64 digits");
  auto get = [&](std::size_t offset) {
    u128 v = 0;
    for (std::size_t k = 0; k < 32; ++k) {
      const char c = hex[offset + k];
      unsigned d = 0;
      if (c >= '0' && c <= '9') d = static_cast<unsigned>(c - '0');
      else if (c >= 'a' && c <= 'f') d = static_cast<unsigned>(c - 'a' + 10);
      else throw std::invalid_argument("entry hex contains a non-hex character");
      v = (v << 4) | d;
    }
    return static_cast<i128>(v);
  };
  return {get(0), get(32)};
}

nlohmann::json transcript_to_json(const Transcript& t) {
  nlohmann::json answers = nlohmann::json::array();
  for (const Entry& e : t.answers) answers.push_back(entry_to_hex(e));
  nlohmann::json out;
  out["R"] = to_hex(t.coins);
  out["a"] = answers;
  out["locations"] = t.locations;
  out["j"] = t.challenge ? nlohmann::json(*t.challenge) : nlohmann::json(nullptr);
  out["i_j"] = t.challenged_location ? nlohmann::json(*t.challenged_location) : nlohmann::json(nullptr);
  out["b_answer"] = t.second_answer ? nlohmann::json(entry_to_hex(*t.second_answer)) : nlohmann::json(nullptr);
  out["verdict"] = t.accepted ? "acc" : "rej";
  out["reject_stage"] = to_string(t.stage);
  out["simulation"] = verdict_to_json(t.simulation);
  if (!t.detail.empty()) out["detail"] = t.detail;
  out["communication_bits"] = t.communication_bits;
  out["random_bits"] = t.random_bits;
  return out;
}

}  // namespace qpcp::mip
