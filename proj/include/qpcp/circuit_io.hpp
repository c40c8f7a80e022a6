#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpcp/quantum_core.hpp"

namespace qpcp {

/// Truth table of 2^n bits, x ascending, packed MSB-first into hex nibbles:
/// the first digit holds f(0..3) with f(0) in its 8s place. Tables shorter
/// than four bits are zero padded on the right.
std::string encode_truth_table(const std::vector<std::uint8_t>& table);
std::vector<std::uint8_t> decode_truth_table(const std::string& hex, int n);

/// Circuit description:
///   {n, gates: [{type: "single"|"two"|"oracle", q, s?, matrix?, oracle_id?}],
///    oracles: {id: hex}, acceptance: {prefix, threshold}}
/// Matrices are row-major lists of [re, im] pairs.
Circuit circuit_from_json(const nlohmann::json& doc);
nlohmann::json circuit_to_json(const Circuit& circuit);

Circuit load_circuit(const std::filesystem::path& path);
void save_circuit(const Circuit& circuit, const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace qpcp
