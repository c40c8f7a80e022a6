#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qpcp/quantum_core.hpp"
#include "qpcp/random.hpp"

namespace qpcp {

inline constexpr int kMinFracBits = 16;
inline constexpr int kMaxFracBits = 125;
inline constexpr int kDefaultFracBits = 96;

// ---------------------------------------------------------------------------
// Fixed-point entries
// ---------------------------------------------------------------------------

/// Phase entry: two signed fixed-point numbers with `b` fraction bits.
struct FixedPhase {
  i128 re = 0;
  i128 im = 0;
  friend bool operator==(const FixedPhase&, const FixedPhase&) = default;
};

/// Bytes per stored probability: ⌈(b+1)/8⌉.
constexpr int prob_bytes(int b) { return (b + 1 + 7) / 8; }
/// Bytes per phase component: ⌈(b+3)/8⌉.
constexpr int phase_component_bytes(int b) { return (b + 3 + 7) / 8; }

void check_frac_bits(int b);

/// raw / 2^b with raw clamped to 2^b.
long double decode_probability(u128 raw, int b);
u128 encode_probability(long double p, int b);

/// (re, im) normalized to unit modulus; 1 when |(re, im)| < 2^{-b/2}.
std::complex<long double> decode_phase(const FixedPhase& phase, int b);
FixedPhase encode_phase(std::complex<long double> phase, int b);

// ---------------------------------------------------------------------------
// Addressing
// ---------------------------------------------------------------------------

enum class EntryKind : std::uint8_t { Prob, Phase };

/// Prob: stored p_{i,1|w} for a prefix w of `length` ∈ [0, n-1] bits.
/// Phase: γ_{i,x} for a full string x (`length` is n).
struct ProofAddress {
  std::uint32_t segment = 0;
  EntryKind kind = EntryKind::Prob;
  int length = 0;
  Basis bits = 0;

  static ProofAddress prob(std::uint32_t segment, int length, Basis prefix) {
    return {segment, EntryKind::Prob, length, prefix};
  }
  static ProofAddress phase(std::uint32_t segment, int n, Basis x) { return {segment, EntryKind::Phase, n, x}; }

  friend bool operator==(const ProofAddress&, const ProofAddress&) = default;
};

/// Segment-major flat layout. Within a segment the 2^n − 1 probabilities come
/// first (prefix length ascending, then lexicographic), then the 2^n phases.
class ProofLayout {
 public:
  ProofLayout(int n, int m);

  int qubits() const { return n_; }
  int gates() const { return m_; }
  std::uint64_t prob_entries() const { return (std::uint64_t{1} << n_) - 1; }
  std::uint64_t phase_entries() const { return std::uint64_t{1} << n_; }
  std::uint64_t segment_size() const { return prob_entries() + phase_entries(); }
  /// N_π = (m+1)(2^{n+1} − 1)
  std::uint64_t size() const { return segment_size() * static_cast<std::uint64_t>(m_ + 1); }

  bool valid(const ProofAddress& a) const;
  std::uint64_t flat_index(const ProofAddress& a) const;
  ProofAddress address(std::uint64_t flat) const;

  friend bool operator==(const ProofLayout&, const ProofLayout&) = default;

 private:
  int n_;
  int m_;
};

/// Raw entry as exchanged on the wire. Probability entries carry the raw
/// value in `primary`; phase entries carry (re, im).
struct Entry {
  i128 primary = 0;
  i128 secondary = 0;
  friend bool operator==(const Entry&, const Entry&) = default;
};

/// True when `e` is representable in the storage width of `kind`.
bool entry_fits(const Entry& e, EntryKind kind, int b);
/// Truncates `e` to the storage width of `kind` (two's complement for phases).
Entry truncate_entry(const Entry& e, EntryKind kind, int b);

// ---------------------------------------------------------------------------
// The proof object π = (γ, p)
// ---------------------------------------------------------------------------

class PcpProof {
 public:
  /// All probabilities raw 0 and all phases (0, 0), i.e. |0^n⟩ with unit
  /// phases in every segment.
  PcpProof(int n, int m, int b);

  int qubits() const { return layout_.qubits(); }
  int gates() const { return layout_.gates(); }
  int frac_bits() const { return b_; }
  const ProofLayout& layout() const { return layout_; }

  u128 prob_raw(int segment, int length, Basis prefix) const { return probs_[prob_slot(segment, length, prefix)]; }
  void set_prob_raw(int segment, int length, Basis prefix, u128 raw);

  const FixedPhase& phase(int segment, Basis x) const { return phases_[phase_slot(segment, x)]; }
  void set_phase(int segment, Basis x, const FixedPhase& phase);

  Entry entry(const ProofAddress& a) const;
  Entry entry(std::uint64_t flat) const { return entry(layout_.address(flat)); }
  /// Stores `e` truncated to the entry width.
  void set_entry(const ProofAddress& a, const Entry& e);

  /// Segment bit-equality, used by tamper locality checks.
  bool segment_equal(const PcpProof& other, int segment) const;

  friend bool operator==(const PcpProof&, const PcpProof&) = default;

 private:
  std::size_t prob_slot(int segment, int length, Basis prefix) const {
    return static_cast<std::size_t>(segment) * static_cast<std::size_t>(layout_.prob_entries()) +
           ((std::size_t{1} << length) - 1) + static_cast<std::size_t>(prefix);
  }
  std::size_t phase_slot(int segment, Basis x) const {
    return static_cast<std::size_t>(segment) * static_cast<std::size_t>(layout_.phase_entries()) +
           static_cast<std::size_t>(x);
  }

  ProofLayout layout_;
  int b_;
  std::vector<u128> probs_;
  std::vector<FixedPhase> phases_;
};

/// Truthful proof for the given computation history. Throws if any state is
/// not normalized within 1e-9 or the states disagree on n.
PcpProof build_honest_proof(const std::vector<StateVector>& states, int b);

/// Overwrites segment i with the truthful encoding of `state`.
void encode_segment(PcpProof& proof, int segment, const StateVector& state);

/// The state |φ_i⟩ described by segment i. Total: every bit pattern decodes
/// to a normalized state.
StateVector decode_state(const PcpProof& proof, int segment);

// ---------------------------------------------------------------------------
// Metered query access
// ---------------------------------------------------------------------------

struct TraceRecord {
  std::uint64_t location = 0;
  Entry value;
  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

using QueryTrace = std::vector<TraceRecord>;

/// Remote answer source (MIP simulation feeds answers through one of these).
class ProofSource {
 public:
  virtual ~ProofSource() = default;
  virtual Entry fetch(const ProofAddress& address, std::uint64_t location) = 0;
};

class QueryLimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One verifier's view of π: every read is counted and, unless disabled,
/// appended to the trace.
class ProofAccess {
 public:
  explicit ProofAccess(const PcpProof& proof, bool record_trace = true);
  ProofAccess(ProofSource& source, const ProofLayout& layout, int b, bool record_trace = true);

  Entry read(const ProofAddress& address);
  u128 read_prob(int segment, int length, Basis prefix);
  FixedPhase read_phase(int segment, Basis x);

  int qubits() const { return layout_.qubits(); }
  int gates() const { return layout_.gates(); }
  int frac_bits() const { return b_; }
  const ProofLayout& layout() const { return layout_; }

  const QueryTrace& trace() const { return trace_; }
  std::uint64_t query_count() const { return count_; }

  /// Reads beyond `limit` throw QueryLimitExceeded.
  void set_query_limit(std::uint64_t limit) { limit_ = limit; }

 private:
  const PcpProof* proof_ = nullptr;
  ProofSource* source_ = nullptr;
  ProofLayout layout_;
  int b_;
  bool record_;
  QueryTrace trace_;
  std::uint64_t count_ = 0;
  std::uint64_t limit_ = ~std::uint64_t{0};
};

}  // namespace qpcp
