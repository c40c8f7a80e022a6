#include "qpcp/proof_io.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

namespace qpcp {

namespace {

constexpr char kMagic[4] = {'Q', 'P', 'C', 'P'};

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  void uint(u128 v, int bytes) {
    for (int k = 0; k < bytes; ++k) {
      out_.push_back(static_cast<std::uint8_t>(v & 0xFF));
      v >>= 8;
    }
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  u128 uint(int bytes) {
    need(static_cast<std::size_t>(bytes));
    u128 v = 0;
    for (int k = bytes - 1; k >= 0; --k) v = (v << 8) | in_[pos_ + static_cast<std::size_t>(k)];
    pos_ += static_cast<std::size_t>(bytes);
    return v;
  }

  i128 sint(int bytes) {
    const u128 v = uint(bytes);
    const int shift = 128 - 8 * bytes;
    if (shift == 0) return static_cast<i128>(v);
    return static_cast<i128>(v << shift) >> shift;
  }

  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t bytes) const {
    if (in_.size() - pos_ < bytes) throw ProofFormatError("proof file truncated");
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t proof_file_size(int n, int m, int b) {
  const ProofLayout layout(n, m);
  const std::uint64_t per_segment = layout.prob_entries() * static_cast<std::uint64_t>(prob_bytes(b)) +
                                    layout.phase_entries() * 2 * static_cast<std::uint64_t>(phase_component_bytes(b));
  return kProofHeaderBytes + per_segment * static_cast<std::uint64_t>(m + 1);
}

std::vector<std::uint8_t> serialize(const PcpProof& proof) {
  const int n = proof.qubits();
  const int m = proof.gates();
  const int b = proof.frac_bits();
  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(proof_file_size(n, m, b)));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  Writer w(out);
  w.uint(kProofFormatVersion, 4);
  w.uint(static_cast<u128>(n), 2);
  w.uint(static_cast<u128>(m), 4);
  w.uint(static_cast<u128>(b), 2);
  w.uint(0, 2);
  const int pb = prob_bytes(b);
  const int fb = phase_component_bytes(b);
  const Basis dim = Basis{1} << n;
  for (int i = 0; i <= m; ++i) {
    for (int k = 0; k < n; ++k)
      for (Basis wv = 0; wv < (Basis{1} << k); ++wv) w.uint(proof.prob_raw(i, k, wv), pb);
    for (Basis x = 0; x < dim; ++x) {
      const FixedPhase& g = proof.phase(i, x);
      w.uint(static_cast<u128>(g.re), fb);
      w.uint(static_cast<u128>(g.im), fb);
    }
  }
  return out;
}

PcpProof deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kProofHeaderBytes) throw ProofFormatError("proof file truncated");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw ProofFormatError("bad magic; not a proof file");
  Reader r(bytes.subspan(4));
  const auto version = static_cast<std::uint32_t>(r.uint(4));
  if (version != kProofFormatVersion)
    throw ProofFormatError("unsupported proof format version " + std::to_string(version));
  const auto n = static_cast<int>(r.uint(2));
  const auto m64 = static_cast<std::uint64_t>(r.uint(4));
  const auto b = static_cast<int>(r.uint(2));
  const auto reserved = r.uint(2);
  if (reserved != 0) throw ProofFormatError("reserved header field is not zero");
  if (n < 1 || n > kMaxQubits) throw ProofFormatError("qubit count out of range");
  if (b < kMinFracBits || b > kMaxFracBits) throw ProofFormatError("fraction bits out of range");
  if (m64 > 0x7FFFFFFFULL) throw ProofFormatError("gate count out of range");
  const int m = static_cast<int>(m64);
  const std::uint64_t expected = proof_file_size(n, m, b);
  if (bytes.size() < expected) throw ProofFormatError("proof file truncated");
  if (bytes.size() > expected) throw ProofFormatError("trailing bytes after proof body");

  PcpProof proof(n, m, b);
  const int pb = prob_bytes(b);
  const int fb = phase_component_bytes(b);
  const Basis dim = Basis{1} << n;
  for (int i = 0; i <= m; ++i) {
    for (int k = 0; k < n; ++k)
      for (Basis wv = 0; wv < (Basis{1} << k); ++wv) proof.set_prob_raw(i, k, wv, r.uint(pb));
    for (Basis x = 0; x < dim; ++x) {
      const i128 re = r.sint(fb);
      const i128 im = r.sint(fb);
      proof.set_phase(i, x, {re, im});
    }
  }
  return proof;
}

void save_proof(const PcpProof& proof, const std::filesystem::path& path) {
  const auto bytes = serialize(proof);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

PcpProof load_proof(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace qpcp
