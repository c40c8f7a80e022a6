#include "qpcp/proof.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <string>

namespace qpcp {

namespace {

constexpr u128 low_mask(int bits) { return bits >= 128 ? ~u128{0} : ((u128{1} << bits) - 1); }

i128 sign_extend(i128 v, int bits) {
  if (bits >= 128) return v;
  const int shift = 128 - bits;
  return static_cast<i128>(static_cast<u128>(v) << shift) >> shift;
}

bool fits_signed(i128 v, int bits) {
  if (bits >= 128) return true;
  const i128 bound = static_cast<i128>(u128{1} << (bits - 1));
  return v >= -bound && v < bound;
}

/// 2^{-b} for every admissible b; multiplying by it is exact.
long double inverse_power(int b) {
  if (b < 0 || b > kMaxFracBits) return std::ldexp(1.0L, -b);
  static const auto table = [] {
    std::array<long double, kMaxFracBits + 1> t{};
    for (int k = 0; k <= kMaxFracBits; ++k) t[static_cast<std::size_t>(k)] = std::ldexp(1.0L, -k);
    return t;
  }();
  return table[static_cast<std::size_t>(b)];
}

}  // namespace

void check_frac_bits(int b) {
  if (b < kMinFracBits || b > kMaxFracBits)
    throw std::invalid_argument("fraction bits must lie in [" + std::to_string(kMinFracBits) + ", " +
                                std::to_string(kMaxFracBits) + "]");
}

long double decode_probability(u128 raw, int b) {
  const u128 one = u128{1} << b;
  if (raw > one) raw = one;
  return static_cast<long double>(raw) * inverse_power(b);
}

u128 encode_probability(long double p, int b) {
  if (!(p > 0.0L)) return 0;
  if (p >= 1.0L) return u128{1} << b;
  return static_cast<u128>(std::round(std::ldexp(p, b)));
}

std::complex<long double> decode_phase(const FixedPhase& phase, int b) {
  const long double scale = inverse_power(b);
  const long double re = static_cast<long double>(phase.re) * scale;
  const long double im = static_cast<long double>(phase.im) * scale;
  // |(re, im)| < 2^{-b/2} compared on squares
  const long double sq = re * re + im * im;
  if (sq < scale) return {1.0L, 0.0L};
  const long double norm = std::sqrt(sq);
  return {re / norm, im / norm};
}

FixedPhase encode_phase(std::complex<long double> phase, int b) {
  return {static_cast<i128>(std::round(std::ldexp(phase.real(), b))),
          static_cast<i128>(std::round(std::ldexp(phase.imag(), b)))};
}

// ---------------------------------------------------------------------------

ProofLayout::ProofLayout(int n, int m) : n_(n), m_(m) {
  if (n < 1 || n > kMaxQubits) throw std::invalid_argument("proof qubit count out of range");
  if (m < 0) throw std::invalid_argument("proof gate count must be non-negative");
}

bool ProofLayout::valid(const ProofAddress& a) const {
  if (a.segment > static_cast<std::uint32_t>(m_)) return false;
  if (a.kind == EntryKind::Prob) return a.length >= 0 && a.length < n_ && (a.bits >> a.length) == 0;
  return a.length == n_ && (a.bits >> n_) == 0;
}

std::uint64_t ProofLayout::flat_index(const ProofAddress& a) const {
  if (!valid(a)) throw std::out_of_range("proof address out of range");
  const std::uint64_t base = segment_size() * a.segment;
  if (a.kind == EntryKind::Prob) return base + ((std::uint64_t{1} << a.length) - 1) + a.bits;
  return base + prob_entries() + a.bits;
}

ProofAddress ProofLayout::address(std::uint64_t flat) const {
  if (flat >= size()) throw std::out_of_range("proof location out of range");
  const auto segment = static_cast<std::uint32_t>(flat / segment_size());
  const std::uint64_t r = flat % segment_size();
  if (r < prob_entries()) {
    const int length = std::bit_width(r + 1) - 1;
    return ProofAddress::prob(segment, length, r + 1 - (std::uint64_t{1} << length));
  }
  return ProofAddress::phase(segment, n_, r - prob_entries());
}

bool entry_fits(const Entry& e, EntryKind kind, int b) {
  if (kind == EntryKind::Prob) {
    const int bits = 8 * prob_bytes(b);
    return e.secondary == 0 && (static_cast<u128>(e.primary) & ~low_mask(bits)) == 0;
  }
  const int bits = 8 * phase_component_bytes(b);
  return fits_signed(e.primary, bits) && fits_signed(e.secondary, bits);
}

Entry truncate_entry(const Entry& e, EntryKind kind, int b) {
  if (kind == EntryKind::Prob)
    return {static_cast<i128>(static_cast<u128>(e.primary) & low_mask(8 * prob_bytes(b))), 0};
  const int bits = 8 * phase_component_bytes(b);
  return {sign_extend(e.primary, bits), sign_extend(e.secondary, bits)};
}

// ---------------------------------------------------------------------------

PcpProof::PcpProof(int n, int m, int b)
    : layout_(n, m),
      b_(b),
      probs_(static_cast<std::size_t>(layout_.prob_entries()) * static_cast<std::size_t>(m + 1), 0),
      phases_(static_cast<std::size_t>(layout_.phase_entries()) * static_cast<std::size_t>(m + 1)) {
  check_frac_bits(b);
}

void PcpProof::set_prob_raw(int segment, int length, Basis prefix, u128 raw) {
  if (!layout_.valid(ProofAddress::prob(static_cast<std::uint32_t>(segment), length, prefix)))
    throw std::out_of_range("probability address out of range");
  probs_[prob_slot(segment, length, prefix)] = raw & low_mask(8 * prob_bytes(b_));
}

void PcpProof::set_phase(int segment, Basis x, const FixedPhase& phase) {
  if (!layout_.valid(ProofAddress::phase(static_cast<std::uint32_t>(segment), qubits(), x)))
    throw std::out_of_range("phase address out of range");
  const Entry e = truncate_entry({phase.re, phase.im}, EntryKind::Phase, b_);
  phases_[phase_slot(segment, x)] = {e.primary, e.secondary};
}

Entry PcpProof::entry(const ProofAddress& a) const {
  if (!layout_.valid(a)) throw std::out_of_range("proof address out of range");
  const int seg = static_cast<int>(a.segment);
  if (a.kind == EntryKind::Prob) return {static_cast<i128>(prob_raw(seg, a.length, a.bits)), 0};
  const FixedPhase& p = phase(seg, a.bits);
  return {p.re, p.im};
}

void PcpProof::set_entry(const ProofAddress& a, const Entry& e) {
  const Entry t = truncate_entry(e, a.kind, b_);
  const int seg = static_cast<int>(a.segment);
  if (a.kind == EntryKind::Prob) set_prob_raw(seg, a.length, a.bits, static_cast<u128>(t.primary));
  else set_phase(seg, a.bits, {t.primary, t.secondary});
}

bool PcpProof::segment_equal(const PcpProof& other, int segment) const {
  if (layout_ != other.layout_ || b_ != other.b_) return false;
  const auto np = static_cast<std::size_t>(layout_.prob_entries());
  const auto nf = static_cast<std::size_t>(layout_.phase_entries());
  const auto s = static_cast<std::size_t>(segment);
  for (std::size_t k = 0; k < np; ++k)
    if (probs_[s * np + k] != other.probs_[s * np + k]) return false;
  for (std::size_t k = 0; k < nf; ++k)
    if (!(phases_[s * nf + k] == other.phases_[s * nf + k])) return false;
  return true;
}

// ---------------------------------------------------------------------------

void encode_segment(PcpProof& proof, int segment, const StateVector& state) {
  const int n = proof.qubits();
  if (segment < 0 || segment > proof.gates()) throw std::out_of_range("segment out of range");
  if (state.size() != (Eigen::Index{1} << n)) throw std::invalid_argument("state dimension does not match the proof");
  if (std::abs(state.squaredNorm() - 1.0) > 1e-9) throw std::invalid_argument("state is not normalized");
  const int b = proof.frac_bits();

  // level[k][w] = Σ_y |α_{wy}|² over prefixes w of length k
  std::vector<std::vector<long double>> level(static_cast<std::size_t>(n) + 1);
  auto& leaves = level[static_cast<std::size_t>(n)];
  leaves.resize(static_cast<std::size_t>(state.size()));
  for (Eigen::Index x = 0; x < state.size(); ++x) {
    const long double re = state(x).real();
    const long double im = state(x).imag();
    leaves[static_cast<std::size_t>(x)] = re * re + im * im;
  }
  for (int k = n - 1; k >= 0; --k) {
    const auto& child = level[static_cast<std::size_t>(k) + 1];
    auto& here = level[static_cast<std::size_t>(k)];
    here.resize(std::size_t{1} << k);
    for (std::size_t w = 0; w < here.size(); ++w) here[w] = child[2 * w] + child[2 * w + 1];
  }
  for (int k = 0; k < n; ++k) {
    const auto& here = level[static_cast<std::size_t>(k)];
    const auto& child = level[static_cast<std::size_t>(k) + 1];
    for (std::size_t w = 0; w < here.size(); ++w) {
      const long double denom = here[w];
      const u128 raw = denom > 0.0L ? encode_probability(child[2 * w + 1] / denom, b) : 0;
      proof.set_prob_raw(segment, k, w, raw);
    }
  }
  for (Eigen::Index x = 0; x < state.size(); ++x) {
    const std::complex<long double> a(state(x).real(), state(x).imag());
    const long double mag = std::abs(a);
    const std::complex<long double> g = mag > 0.0L ? a / mag : std::complex<long double>(1.0L, 0.0L);
    proof.set_phase(segment, static_cast<Basis>(x), encode_phase(g, b));
  }
}

PcpProof build_honest_proof(const std::vector<StateVector>& states, int b) {
  if (states.empty()) throw std::invalid_argument("need at least the initial state");
  const int n = qubit_count(states.front());
  PcpProof proof(n, static_cast<int>(states.size()) - 1, b);
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].size() != states.front().size()) throw std::invalid_argument("states disagree on qubit count");
    encode_segment(proof, static_cast<int>(i), states[i]);
  }
  return proof;
}

StateVector decode_state(const PcpProof& proof, int segment) {
  if (segment < 0 || segment > proof.gates()) throw std::out_of_range("segment out of range");
  const int n = proof.qubits();
  const int b = proof.frac_bits();
  std::vector<long double> weights{1.0L};
  for (int k = 0; k < n; ++k) {
    std::vector<long double> next(weights.size() * 2);
    for (std::size_t w = 0; w < weights.size(); ++w) {
      const long double p1 = decode_probability(proof.prob_raw(segment, k, w), b);
      next[2 * w] = weights[w] * (1.0L - p1);
      next[2 * w + 1] = weights[w] * p1;
    }
    weights = std::move(next);
  }
  StateVector out(static_cast<Eigen::Index>(weights.size()));
  for (std::size_t x = 0; x < weights.size(); ++x) {
    const auto g = decode_phase(proof.phase(segment, x), b) * std::sqrt(weights[x]);
    out(static_cast<Eigen::Index>(x)) = Complex(static_cast<double>(g.real()), static_cast<double>(g.imag()));
  }
  return out;
}

// ---------------------------------------------------------------------------

ProofAccess::ProofAccess(const PcpProof& proof, bool record_trace)
    : proof_(&proof), layout_(proof.layout()), b_(proof.frac_bits()), record_(record_trace) {}

ProofAccess::ProofAccess(ProofSource& source, const ProofLayout& layout, int b, bool record_trace)
    : source_(&source), layout_(layout), b_(b), record_(record_trace) {
  check_frac_bits(b);
}

Entry ProofAccess::read(const ProofAddress& address) {
  const std::uint64_t location = layout_.flat_index(address);
  if (count_ >= limit_) throw QueryLimitExceeded("proof query budget exhausted");
  const Entry value = proof_ ? proof_->entry(address) : source_->fetch(address, location);
  ++count_;
  if (record_) trace_.push_back({location, value});
  return value;
}

u128 ProofAccess::read_prob(int segment, int length, Basis prefix) {
  return static_cast<u128>(read(ProofAddress::prob(static_cast<std::uint32_t>(segment), length, prefix)).primary);
}

FixedPhase ProofAccess::read_phase(int segment, Basis x) {
  const Entry e = read(ProofAddress::phase(static_cast<std::uint32_t>(segment), layout_.qubits(), x));
  return {e.primary, e.secondary};
}

}  // namespace qpcp
