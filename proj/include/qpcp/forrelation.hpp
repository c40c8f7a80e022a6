#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpcp/quantum_core.hpp"
#include "qpcp/random.hpp"

namespace qpcp::forrelation {

enum class Label { Yes, No };

inline constexpr double kYesThreshold = 0.6;
inline constexpr double kNoThreshold = 0.01;
/// Acceptance threshold on Pr[0^n] for the forrelation circuit: 0.6².
inline constexpr double kAcceptanceThreshold = 0.36;

struct Instance {
  int n = 1;
  std::shared_ptr<const BooleanOracle> f1;
  std::shared_ptr<const BooleanOracle> f2;
  double phi = 0.0;
  Label label = Label::No;
};

class GenerationFailed : public std::runtime_error {
 public:
  GenerationFailed(const std::string& what, std::uint64_t attempts) : std::runtime_error(what), attempts_(attempts) {}
  std::uint64_t attempts() const { return attempts_; }

 private:
  std::uint64_t attempts_;
};

/// In-place Walsh–Hadamard transform (unnormalized).
void walsh_hadamard(std::vector<double>& values);

/// Φ = 2^{-3n/2} Σ_{x,y} (−1)^{f1(x) + x·y + f2(y)} via one fast transform.
double forrelator(const std::vector<std::uint8_t>& f1, const std::vector<std::uint8_t>& f2);

/// H^{⊗n} · O_{f2} · H^{⊗n} · O_{f1} · H^{⊗n}, qubit by qubit (3n+2 gates),
/// accepting on prefix 0^n with threshold 0.36. Oracles are registered under
/// ids "f1" and "f2".
Circuit build_circuit(int n, std::shared_ptr<const BooleanOracle> f1, std::shared_ptr<const BooleanOracle> f2);
Circuit build_circuit(const Instance& instance);

/// Promise-respecting instance by rejection sampling. NO: independent uniform
/// f1, f2 until |Φ| ≤ 0.01. YES: uniform f1 with f2 the sign pattern of its
/// Walsh spectrum, until Φ ≥ 0.6.
Instance gen_instance(int n, Label label, CoinSource& coins, std::uint64_t max_attempts = 100000);

/// The YES construction without the rejection step.
double sign_construction_phi(int n, CoinSource& coins);

std::vector<std::uint8_t> random_truth_table(int n, CoinSource& coins);

std::string to_string(Label label);
Label label_from_string(const std::string& text);

/// {n, f1: hex, f2: hex, phi, label}
nlohmann::json instance_to_json(const Instance& instance);
Instance instance_from_json(const nlohmann::json& doc);

}  // namespace qpcp::forrelation
