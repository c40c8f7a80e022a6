#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <bit>
#include <stdexcept>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qpcp/random.hpp"

namespace qpcp {

template <typename Scalar>
using BasicStateVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

/// 2^n amplitudes, index x read with qubit 0 as the most significant bit.
using StateVector = BasicStateVector<double>;

using Complex = std::complex<double>;

/// Computational basis index x ∈ {0,1}^n.
using Basis = std::uint64_t;

inline constexpr int kMaxQubits = 24;

inline int bit_at(Basis x, int n, int qubit) {
  return static_cast<int>((x >> (n - 1 - qubit)) & 1U);
}

inline Basis flip_bit(Basis x, int n, int qubit) {
  return x ^ (Basis{1} << (n - 1 - qubit));
}

/// First `length` bits of the n-bit string x.
inline Basis prefix_of(Basis x, int n, int length) {
  return length == 0 ? 0 : x >> (n - length);
}

std::string to_bitstring(Basis x, int length);
/// Parses a string over {0,1}; throws on any other character.
Basis parse_bitstring(std::string_view bits);

/// Phase oracle O_f|x⟩ = (-1)^{f(x)}|x⟩ with a metered query path.
class BooleanOracle {
 public:
  /// `truth_table[x]` ∈ {0,1}, size must be a power of two.
  explicit BooleanOracle(std::vector<std::uint8_t> truth_table);

  BooleanOracle(const BooleanOracle&) = delete;
  BooleanOracle& operator=(const BooleanOracle&) = delete;

  int qubits() const { return n_; }
  const std::vector<std::uint8_t>& truth_table() const { return table_; }

  /// Unmetered read for simulation and honest provers.
  bool value(Basis x) const { return table_.at(x) != 0; }

  /// Verifier-side query; counts exactly once per call.
  bool query(Basis x) const {
    queries_.fetch_add(1, std::memory_order_relaxed);
    return value(x);
  }

  std::uint64_t query_count() const { return queries_.load(std::memory_order_relaxed); }
  void reset_query_count() const { queries_.store(0, std::memory_order_relaxed); }

 private:
  std::vector<std::uint8_t> table_;
  int n_ = 0;
  mutable std::atomic<std::uint64_t> queries_{0};
};

using OracleTable = std::map<std::string, std::shared_ptr<const BooleanOracle>>;

struct SingleQubitGate {
  int qubit = 0;
  Eigen::Matrix2cd matrix;
};

/// Acts on (q, s); the 4×4 matrix is indexed by 2·x_q + x_s.
struct TwoQubitGate {
  int q = 0;
  int s = 1;
  Eigen::Matrix4cd matrix;
};

struct OracleGate {
  std::string oracle_id;
};

using Gate = std::variant<SingleQubitGate, TwoQubitGate, OracleGate>;

/// Accept when the measured string starts with `prefix` with probability at
/// least `threshold`.
struct AcceptancePredicate {
  int length = 1;
  Basis prefix = 0;
  double threshold = 2.0 / 3.0;
};

struct Circuit {
  int n = 1;
  std::vector<Gate> gates;
  OracleTable oracles;
  AcceptancePredicate acceptance;

  int m() const { return static_cast<int>(gates.size()); }

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

namespace gates {

Eigen::Matrix2cd hadamard();
Eigen::Matrix2cd t_gate();
Eigen::Matrix2cd pauli_x();
Eigen::Matrix4cd cnot();
Eigen::Matrix2cd random_unitary2(CoinSource& coins);
Eigen::Matrix4cd random_unitary4(CoinSource& coins);

Gate single(int qubit, const Eigen::Matrix2cd& u);
Gate two(int q, int s, const Eigen::Matrix4cd& u);
Gate oracle(std::string id);

}  // namespace gates

/// max |(U†U − I)_{jk}|
template <typename Derived>
double unitarity_defect(const Eigen::MatrixBase<Derived>& u) {
  using Plain = typename Derived::PlainObject;
  return (u.adjoint() * u - Plain::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

inline constexpr double kUnitarityTolerance = 1e-12;

int qubit_count(const StateVector& state);
StateVector basis_state(int n, Basis x);

/// G|ψ⟩. Oracle gates read truth tables through the unmetered path.
StateVector apply_gate(const StateVector& state, const Gate& gate, const OracleTable& oracles);

/// [ψ_0 = |0^n⟩, ψ_1, …, ψ_m].
std::vector<StateVector> simulate(const Circuit& circuit);

/// ⟨u|v⟩, conjugate-linear in u.
template <typename DerivedU, typename DerivedV>
auto inner_product(const Eigen::MatrixBase<DerivedU>& u, const Eigen::MatrixBase<DerivedV>& v) {
  if (u.size() != v.size()) throw std::invalid_argument("inner_product: dimension mismatch");
  return u.dot(v);
}

/// Σ over x extending pred.prefix of |α_x|².
template <typename Derived>
double acceptance_probability(const Eigen::MatrixBase<Derived>& state, const AcceptancePredicate& pred) {
  const auto dim = static_cast<std::uint64_t>(state.size());
  const int n = std::countr_zero(dim);
  if (pred.length < 0 || pred.length > n)
    throw std::invalid_argument("acceptance prefix longer than the register");
  const std::uint64_t block = dim >> pred.length;
  const auto start = static_cast<Eigen::Index>(pred.prefix * block);
  return static_cast<double>(state.segment(start, static_cast<Eigen::Index>(block)).squaredNorm());
}

/// Inverse-CDF sampler over |ψ_x|².
class BasisSampler {
 public:
  explicit BasisSampler(const StateVector& state);
  Basis operator()(CoinSource& coins) const;

 private:
  std::vector<double> cumulative_;
};

/// Haar-like random state from complex Gaussians.
StateVector random_state(int n, CoinSource& coins);
double gaussian(CoinSource& coins);

}  // namespace qpcp
