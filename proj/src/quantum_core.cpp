#include "qpcp/quantum_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qpcp {

std::string to_bitstring(Basis x, int length) {
  std::string out(static_cast<std::size_t>(length), '0');
  for (int k = 0; k < length; ++k)
    if (bit_at(x, length, k)) out[static_cast<std::size_t>(k)] = '1';
  return out;
}

Basis parse_bitstring(std::string_view bits) {
  if (bits.size() > 63) throw std::invalid_argument("bit string too long");
  Basis x = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("bit string must contain only 0 and 1");
    x = (x << 1) | static_cast<Basis>(c - '0');
  }
  return x;
}

BooleanOracle::BooleanOracle(std::vector<std::uint8_t> truth_table) : table_(std::move(truth_table)) {
  const auto size = table_.size();
  if (size == 0 || !std::has_single_bit(size))
    throw std::invalid_argument("oracle truth table size must be a power of two");
  n_ = std::countr_zero(size);
  for (auto& v : table_) {
    if (v > 1) throw std::invalid_argument("oracle truth table entries must be 0 or 1");
  }
}

void Circuit::validate() const {
  if (n < 1 || n > kMaxQubits) throw std::invalid_argument("qubit count out of range");
  if (acceptance.length < 0 || acceptance.length > n)
    throw std::invalid_argument("acceptance prefix longer than the register");
  if (acceptance.length < 64 && (acceptance.prefix >> acceptance.length) != 0)
    throw std::invalid_argument("acceptance prefix value exceeds its length");
  if (!(acceptance.threshold > 0.0 && acceptance.threshold <= 1.0))
    throw std::invalid_argument("acceptance threshold must lie in (0, 1]");
  for (std::size_t i = 0; i < gates.size(); ++i) {
    const auto where = " (gate " + std::to_string(i + 1) + ")";
    std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, SingleQubitGate>) {
            if (g.qubit < 0 || g.qubit >= n) throw std::invalid_argument("qubit index out of range" + where);
            if (unitarity_defect(g.matrix) > kUnitarityTolerance)
              throw std::invalid_argument("gate matrix is not unitary" + where);
          } else if constexpr (std::is_same_v<T, TwoQubitGate>) {
            if (g.q < 0 || g.q >= n || g.s < 0 || g.s >= n)
              throw std::invalid_argument("qubit index out of range" + where);
            if (g.q == g.s) throw std::invalid_argument("two-qubit gate needs distinct qubits" + where);
            if (unitarity_defect(g.matrix) > kUnitarityTolerance)
              throw std::invalid_argument("gate matrix is not unitary" + where);
          } else {
            const auto it = oracles.find(g.oracle_id);
            if (it == oracles.end() || !it->second)
              throw std::invalid_argument("unknown oracle id '" + g.oracle_id + "'" + where);
            if (it->second->qubits() != n)
              throw std::invalid_argument("oracle '" + g.oracle_id + "' has the wrong input length" + where);
          }
        },
        gates[i]);
  }
}

namespace gates {

Eigen::Matrix2cd hadamard() {
  const double r = std::numbers::sqrt2 / 2.0;
  Eigen::Matrix2cd h;
  h << r, r, r, -r;
  return h;
}

Eigen::Matrix2cd t_gate() {
  Eigen::Matrix2cd t;
  t << 1.0, 0.0, 0.0, std::polar(1.0, std::numbers::pi / 4.0);
  return t;
}

Eigen::Matrix2cd pauli_x() {
  Eigen::Matrix2cd x;
  x << 0.0, 1.0, 1.0, 0.0;
  return x;
}

Eigen::Matrix4cd cnot() {
  Eigen::Matrix4cd c = Eigen::Matrix4cd::Zero();
  c(0, 0) = c(1, 1) = 1.0;
  c(2, 3) = c(3, 2) = 1.0;
  return c;
}

namespace {

template <int N>
Eigen::Matrix<Complex, N, N> random_unitary(CoinSource& coins) {
  Eigen::Matrix<Complex, N, N> z;
  for (int r = 0; r < N; ++r)
    for (int c = 0; c < N; ++c) z(r, c) = Complex(gaussian(coins), gaussian(coins));
  Eigen::HouseholderQR<Eigen::Matrix<Complex, N, N>> qr(z);
  Eigen::Matrix<Complex, N, N> q = qr.householderQ();
  const Eigen::Matrix<Complex, N, N> r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (int c = 0; c < N; ++c) {
    const Complex d = r(c, c);
    if (std::abs(d) > 0) q.col(c) *= d / std::abs(d);
  }
  return q;
}

}  // namespace

Eigen::Matrix2cd random_unitary2(CoinSource& coins) { return random_unitary<2>(coins); }
Eigen::Matrix4cd random_unitary4(CoinSource& coins) { return random_unitary<4>(coins); }

Gate single(int qubit, const Eigen::Matrix2cd& u) { return SingleQubitGate{qubit, u}; }
Gate two(int q, int s, const Eigen::Matrix4cd& u) { return TwoQubitGate{q, s, u}; }
Gate oracle(std::string id) { return OracleGate{std::move(id)}; }

}  // namespace gates

int qubit_count(const StateVector& state) {
  const auto dim = static_cast<std::uint64_t>(state.size());
  if (dim == 0 || !std::has_single_bit(dim)) throw std::invalid_argument("state dimension is not a power of two");
  return std::countr_zero(dim);
}

StateVector basis_state(int n, Basis x) {
  StateVector s = StateVector::Zero(Eigen::Index{1} << n);
  s(static_cast<Eigen::Index>(x)) = 1.0;
  return s;
}

StateVector apply_gate(const StateVector& state, const Gate& gate, const OracleTable& oracles) {
  const int n = qubit_count(state);
  const auto dim = static_cast<Basis>(state.size());
  StateVector out = state;
  std::visit(
      [&](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, SingleQubitGate>) {
          if (g.qubit < 0 || g.qubit >= n) throw std::invalid_argument("qubit index out of range");
          const Basis stride = Basis{1} << (n - 1 - g.qubit);
          for (Basis x = 0; x < dim; ++x) {
            if (x & stride) continue;
            const Complex a0 = state(static_cast<Eigen::Index>(x));
            const Complex a1 = state(static_cast<Eigen::Index>(x | stride));
            out(static_cast<Eigen::Index>(x)) = g.matrix(0, 0) * a0 + g.matrix(0, 1) * a1;
            out(static_cast<Eigen::Index>(x | stride)) = g.matrix(1, 0) * a0 + g.matrix(1, 1) * a1;
          }
        } else if constexpr (std::is_same_v<T, TwoQubitGate>) {
          if (g.q < 0 || g.q >= n || g.s < 0 || g.s >= n) throw std::invalid_argument("qubit index out of range");
          if (g.q == g.s) throw std::invalid_argument("two-qubit gate needs distinct qubits");
          const Basis mq = Basis{1} << (n - 1 - g.q);
          const Basis ms = Basis{1} << (n - 1 - g.s);
          const Basis offsets[4] = {0, ms, mq, mq | ms};
          for (Basis x = 0; x < dim; ++x) {
            if (x & (mq | ms)) continue;
            Eigen::Vector4cd v;
            for (int c = 0; c < 4; ++c) v(c) = state(static_cast<Eigen::Index>(x | offsets[c]));
            const Eigen::Vector4cd w = g.matrix * v;
            for (int r = 0; r < 4; ++r) out(static_cast<Eigen::Index>(x | offsets[r])) = w(r);
          }
        } else {
          const auto it = oracles.find(g.oracle_id);
          if (it == oracles.end() || !it->second) throw std::invalid_argument("unknown oracle id '" + g.oracle_id + "'");
          const BooleanOracle& f = *it->second;
          if (f.qubits() != n) throw std::invalid_argument("oracle input length does not match the state");
          for (Basis x = 0; x < dim; ++x)
            if (f.value(x)) out(static_cast<Eigen::Index>(x)) = -out(static_cast<Eigen::Index>(x));
        }
      },
      gate);
  return out;
}

std::vector<StateVector> simulate(const Circuit& circuit) {
  circuit.validate();
  std::vector<StateVector> states;
  states.reserve(circuit.gates.size() + 1);
  states.push_back(basis_state(circuit.n, 0));
  for (const Gate& g : circuit.gates) states.push_back(apply_gate(states.back(), g, circuit.oracles));
  return states;
}

BasisSampler::BasisSampler(const StateVector& state) {
  cumulative_.resize(static_cast<std::size_t>(state.size()));
  double acc = 0.0;
  for (Eigen::Index x = 0; x < state.size(); ++x) {
    acc += std::norm(state(x));
    cumulative_[static_cast<std::size_t>(x)] = acc;
  }
}

Basis BasisSampler::operator()(CoinSource& coins) const {
  const double u = coins.uniform01() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  // skip zero-weight cells that share the boundary value
  auto idx = static_cast<std::size_t>(it - cumulative_.begin());
  while (idx > 0 && cumulative_[idx] == cumulative_[idx - 1]) --idx;
  return static_cast<Basis>(idx);
}

double gaussian(CoinSource& coins) {
  double u1 = coins.uniform01();
  while (u1 <= 0.0) u1 = coins.uniform01();
  const double u2 = coins.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

StateVector random_state(int n, CoinSource& coins) {
  StateVector s(Eigen::Index{1} << n);
  for (Eigen::Index x = 0; x < s.size(); ++x) s(x) = Complex(gaussian(coins), gaussian(coins));
  s.normalize();
  return s;
}

}  // namespace qpcp
