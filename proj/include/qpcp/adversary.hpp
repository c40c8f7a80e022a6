#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qpcp/mip.hpp"
#include "qpcp/proof.hpp"
#include "qpcp/verifier.hpp"

namespace qpcp::adversary {

// ---------------------------------------------------------------------------
// Tamper strategies
// ---------------------------------------------------------------------------

struct NoTamper {};

struct EntryEdit {
  std::uint64_t location = 0;
  Entry value;
};

/// Raw edits confined to segment 0.
struct InitialStateLie {
  std::vector<EntryEdit> edits;
};

/// γ_{i,x} ← γ_{i,x}·e^{iθ}
struct PhaseCorruption {
  int segment = 0;
  Basis x = 0;
  double angle = 0.0;
};

struct ProbCorruption {
  int segment = 0;
  int length = 0;
  Basis prefix = 0;
  u128 raw = 0;
};

/// Segment i ← encoding of a state with ⟨ψ̃_i|G_i ψ̃_{i−1}⟩ = 1 − δ, built by
/// rotating G_i ψ̃_{i−1} towards a random orthogonal direction.
struct StateSubstitution {
  int segment = 1;
  double delta = 0.0;
  Seed128 seed;
};

/// Segment m ← honest encoding of a high-acceptance state (default: the
/// accepting prefix padded with zeros).
struct FinalSegmentForgery {
  std::optional<StateVector> replacement;
};

/// Prover 1 lies at its 1-based answer `position`.
struct P1Deviation {
  std::uint64_t position = 1;
  Entry value;
};

using TamperSpec =
    std::variant<NoTamper, InitialStateLie, PhaseCorruption, ProbCorruption, StateSubstitution, FinalSegmentForgery,
                 P1Deviation>;

std::string tamper_name(const TamperSpec& spec);
nlohmann::json tamper_to_json(const TamperSpec& spec);
TamperSpec tamper_from_json(const nlohmann::json& doc);

/// New proof differing from `proof` exactly as `spec` describes. P1Deviation
/// targets the MIP first prover and is rejected here.
PcpProof apply_tamper(const PcpProof& proof, const Circuit& circuit, const TamperSpec& spec);

/// |1 − ⟨ψ̃_i|G_i ψ̃_{i−1}⟩| on decoded segments, i ≥ 1.
double gate_deviation(const PcpProof& proof, const Circuit& circuit, int segment);

/// Unit vector with ⟨result|target⟩ = 1 − δ.
StateVector rotate_away(const StateVector& target, double delta, CoinSource& coins);

/// StateSubstitution(δ) applied at every gate 1..m in order.
PcpProof plant_drift(const PcpProof& proof, const Circuit& circuit, double delta, Seed128 seed);

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

struct WilsonInterval {
  double low = 0.0;
  double high = 1.0;
  double half_width() const { return (high - low) / 2.0; }
};

inline constexpr double kZ95 = 1.959963984540054;

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kZ95);

struct DetectionReport {
  std::uint64_t samples = 0;
  std::uint64_t detections = 0;
  double rate() const { return samples ? static_cast<double>(detections) / static_cast<double>(samples) : 0.0; }
  WilsonInterval interval() const { return wilson_interval(detections, samples); }
};

/// Per-sample event |η_{i,x} − α̃_{i,x}| ≥ eps over x drawn by Algorithm 2
/// from segment i.
DetectionReport measure_detection(const PcpProof& proof, const Circuit& circuit, int segment, double eps,
                                  std::uint64_t samples, Seed128 seed);

/// Upper bound on the PCP acceptance probability implied by the soundness
/// argument: 0 if step 1 or the output check fails deterministically,
/// (1 − δ*²/10)^t for the worst gate deviation δ* when the corollary
/// applies, 1 otherwise.
double pcp_acceptance_bound(const PcpProof& proof, const Circuit& circuit, std::uint64_t t, double eps);

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

enum class Protocol { Pcp, Mip };
enum class BoundKind { Completeness, PcpSoundness, MipRoundSoundness, MipRepeatedSoundness };

std::string to_string(Protocol p);
std::string to_string(BoundKind k);

struct ExperimentConfig {
  Protocol protocol = Protocol::Pcp;
  TamperSpec tamper = NoTamper{};
  std::uint64_t trials = 1;
  std::uint64_t t = 1;
  std::uint64_t rounds = 1;  // MIP repetitions per trial
  int b = kDefaultFracBits;
  std::optional<double> eps;  // default_eps_check when unset
  Seed128 seed;
  unsigned threads = 1;
};

struct ExperimentReport {
  std::string protocol;
  std::string tamper;
  std::uint64_t trials = 0;
  std::uint64_t accepts = 0;
  BoundKind bound_kind = BoundKind::Completeness;
  double bound = 1.0;
  std::optional<double> achieved_delta;
  std::vector<Seed128> seeds;
  std::map<std::string, std::uint64_t> reject_reasons;
  /// Every accepting run made exactly the closed-form number of queries.
  bool budget_consistent = true;

  double rate() const { return trials ? static_cast<double>(accepts) / static_cast<double>(trials) : 0.0; }
  WilsonInterval interval() const { return wilson_interval(accepts, trials); }
  /// Completeness: every trial accepted. Soundness: rate ≤ bound + 3 half-widths.
  bool within_bound() const;

  /// Associative and commutative on the counters; seeds are concatenated.
  void merge(const ExperimentReport& other);
};

ExperimentReport run_experiment(const Circuit& circuit, const PcpProof& honest_proof, const ExperimentConfig& config);

nlohmann::json report_to_json(const ExperimentReport& report);
std::string report_csv_header();
std::string report_csv_row(const ExperimentReport& report);

/// {protocol, circuit | instance, tamper, trials, t, b, seed, rounds?, eps?}.
/// `circuit` / `instance` may be inline objects or paths relative to `base`.
struct ExperimentSpec {
  Circuit circuit;
  ExperimentConfig config;
};
ExperimentSpec experiment_from_json(const nlohmann::json& doc, const std::filesystem::path& base);

}  // namespace qpcp::adversary
