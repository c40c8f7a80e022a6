#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "qpcp/proof.hpp"

namespace qpcp {

/// Little-endian layout:
///   "QPCP" | u32 version = 1 | u16 n | u32 m | u16 b | u16 reserved = 0
///   then per segment: probabilities, ⌈(b+1)/8⌉ bytes each, unsigned;
///   phases, re then im, ⌈(b+3)/8⌉ bytes each, two's complement.
inline constexpr std::uint32_t kProofFormatVersion = 1;
inline constexpr std::size_t kProofHeaderBytes = 18;

class ProofFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t proof_file_size(int n, int m, int b);

std::vector<std::uint8_t> serialize(const PcpProof& proof);
PcpProof deserialize(std::span<const std::uint8_t> bytes);

void save_proof(const PcpProof& proof, const std::filesystem::path& path);
PcpProof load_proof(const std::filesystem::path& path);

}  // namespace qpcp
