#include "qpcp/circuit_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qpcp {

namespace {

using nlohmann::json;

template <int N>
Eigen::Matrix<Complex, N, N> matrix_from_json(const json& m) {
  if (!m.is_array() || m.size() != static_cast<std::size_t>(N * N))
    throw std::invalid_argument("gate matrix must list " + std::to_string(N * N) + " [re, im] entries");
  Eigen::Matrix<Complex, N, N> out;
  for (int r = 0; r < N; ++r) {
    for (int c = 0; c < N; ++c) {
      const json& e = m.at(static_cast<std::size_t>(r * N + c));
      if (e.is_number()) {
        out(r, c) = Complex(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2) {
        out(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        throw std::invalid_argument("matrix entries must be [re, im] pairs");
      }
    }
  }
  return out;
}

template <typename M>
json matrix_to_json(const M& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back({m(r, c).real(), m(r, c).imag()});
  return out;
}

}  // namespace

std::string encode_truth_table(const std::vector<std::uint8_t>& table) {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t digits = (table.size() + 3) / 4;
  std::string out(digits, '0');
  for (std::size_t d = 0; d < digits; ++d) {
    unsigned nibble = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const std::size_t x = 4 * d + k;
      nibble = (nibble << 1) | (x < table.size() && table[x] ? 1U : 0U);
    }
    out[d] = kDigits[nibble];
  }
  return out;
}

std::vector<std::uint8_t> decode_truth_table(const std::string& hex, int n) {
  if (n < 1 || n > kMaxQubits) throw std::invalid_argument("truth table qubit count out of range");
  const std::size_t size = std::size_t{1} << n;
  const std::size_t digits = (size + 3) / 4;
  if (hex.size() != digits)
    throw std::invalid_argument("truth table for n=" + std::to_string(n) + " needs " + std::to_string(digits) +
                                " hex digits, got " + std::to_string(hex.size()));
  std::vector<std::uint8_t> table(size, 0);
  for (std::size_t d = 0; d < digits; ++d) {
    const char c = hex[d];
    unsigned nibble = 0;
    if (c >= '0' && c <= '9') nibble = static_cast<unsigned>(c - '0');
    else if (c >= 'a' && c <= 'f') nibble = static_cast<unsigned>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') nibble = static_cast<unsigned>(c - 'A' + 10);
    else throw std::invalid_argument("truth table contains a non-hex character");
    for (std::size_t k = 0; k < 4; ++k) {
      const std::size_t x = 4 * d + k;
      const bool bit = (nibble >> (3 - k)) & 1U;
      if (x < size) table[x] = bit ? 1 : 0;
      else if (bit) throw std::invalid_argument("truth table padding bits must be zero");
    }
  }
  return table;
}

Circuit circuit_from_json(const json& doc) {
  Circuit c;
  c.n = doc.at("n").get<int>();
  if (c.n < 1 || c.n > kMaxQubits) throw std::invalid_argument("qubit count out of range");
  if (doc.contains("oracles")) {
    for (const auto& [id, hex] : doc.at("oracles").items())
      c.oracles.emplace(id, std::make_shared<BooleanOracle>(decode_truth_table(hex.get<std::string>(), c.n)));
  }
  for (const json& g : doc.at("gates")) {
    const auto type = g.at("type").get<std::string>();
    if (type == "single") {
      c.gates.push_back(SingleQubitGate{g.at("q").get<int>(), matrix_from_json<2>(g.at("matrix"))});
    } else if (type == "two") {
      c.gates.push_back(TwoQubitGate{g.at("q").get<int>(), g.at("s").get<int>(), matrix_from_json<4>(g.at("matrix"))});
    } else if (type == "oracle") {
      c.gates.push_back(OracleGate{g.at("oracle_id").get<std::string>()});
    } else {
      throw std::invalid_argument("unknown gate type '" + type + "'");
    }
  }
  if (doc.contains("acceptance")) {
    const json& a = doc.at("acceptance");
    const auto prefix = a.at("prefix").get<std::string>();
    c.acceptance.length = static_cast<int>(prefix.size());
    c.acceptance.prefix = parse_bitstring(prefix);
    c.acceptance.threshold = a.at("threshold").get<double>();
  }
  c.validate();
  return c;
}

json circuit_to_json(const Circuit& circuit) {
  json gates_json = json::array();
  for (const Gate& gate : circuit.gates) {
    std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, SingleQubitGate>) {
            gates_json.push_back({{"type", "single"}, {"q", g.qubit}, {"matrix", matrix_to_json(g.matrix)}});
          } else if constexpr (std::is_same_v<T, TwoQubitGate>) {
            gates_json.push_back({{"type", "two"}, {"q", g.q}, {"s", g.s}, {"matrix", matrix_to_json(g.matrix)}});
          } else {
            gates_json.push_back({{"type", "oracle"}, {"oracle_id", g.oracle_id}});
          }
        },
        gate);
  }
  json oracles = json::object();
  for (const auto& [id, f] : circuit.oracles) oracles[id] = encode_truth_table(f->truth_table());
  return {{"n", circuit.n},
          {"gates", gates_json},
          {"oracles", oracles},
          {"acceptance",
           {{"prefix", to_bitstring(circuit.acceptance.prefix, circuit.acceptance.length)},
            {"threshold", circuit.acceptance.threshold}}}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Circuit load_circuit(const std::filesystem::path& path) { return circuit_from_json(read_json_file(path)); }

void save_circuit(const Circuit& circuit, const std::filesystem::path& path) {
  write_text_file(path, circuit_to_json(circuit).dump(2) + "\n");
}

}  // namespace qpcp
