#include "qpcp/forrelation.hpp"

#include <bit>
#include <cmath>

#include "qpcp/circuit_io.hpp"

namespace qpcp::forrelation {

void walsh_hadamard(std::vector<double>& values) {
  const std::size_t size = values.size();
  if (!std::has_single_bit(size)) throw std::invalid_argument("transform length must be a power of two");
  for (std::size_t half = 1; half < size; half <<= 1) {
    for (std::size_t block = 0; block < size; block += 2 * half) {
      for (std::size_t k = block; k < block + half; ++k) {
        const double a = values[k];
        const double b = values[k + half];
        values[k] = a + b;
        values[k + half] = a - b;
      }
    }
  }
}

namespace {

std::vector<double> signs(const std::vector<std::uint8_t>& f) {
  std::vector<double> out(f.size());
  for (std::size_t x = 0; x < f.size(); ++x) out[x] = f[x] ? -1.0 : 1.0;
  return out;
}

}  // namespace

double forrelator(const std::vector<std::uint8_t>& f1, const std::vector<std::uint8_t>& f2) {
  if (f1.size() != f2.size()) throw std::invalid_argument("forrelator: truth tables differ in size");
  if (f1.empty() || !std::has_single_bit(f1.size())) throw std::invalid_argument("forrelator: size must be 2^n");
  const int n = std::countr_zero(f1.size());
  std::vector<double> spectrum = signs(f2);
  walsh_hadamard(spectrum);
  const std::vector<double> s1 = signs(f1);
  double sum = 0.0;
  for (std::size_t x = 0; x < s1.size(); ++x) sum += s1[x] * spectrum[x];
  return sum * std::pow(2.0, -1.5 * n);
}

Circuit build_circuit(int n, std::shared_ptr<const BooleanOracle> f1, std::shared_ptr<const BooleanOracle> f2) {
  if (n < 1) throw std::invalid_argument("forrelation circuit needs n >= 1");
  Circuit c;
  c.n = n;
  c.oracles.emplace("f1", std::move(f1));
  c.oracles.emplace("f2", std::move(f2));
  const auto h = gates::hadamard();
  auto layer = [&] {
    for (int q = 0; q < n; ++q) c.gates.push_back(gates::single(q, h));
  };
  layer();
  c.gates.push_back(gates::oracle("f1"));
  layer();
  c.gates.push_back(gates::oracle("f2"));
  layer();
  c.acceptance = {n, 0, kAcceptanceThreshold};
  c.validate();
  return c;
}

Circuit build_circuit(const Instance& instance) { return build_circuit(instance.n, instance.f1, instance.f2); }

std::vector<std::uint8_t> random_truth_table(int n, CoinSource& coins) {
  std::vector<std::uint8_t> table(std::size_t{1} << n);
  for (auto& v : table) v = static_cast<std::uint8_t>(coins.bits(1));
  return table;
}

namespace {

std::vector<std::uint8_t> sign_partner(const std::vector<std::uint8_t>& f1) {
  std::vector<double> spectrum = signs(f1);
  walsh_hadamard(spectrum);
  std::vector<std::uint8_t> f2(f1.size());
  for (std::size_t y = 0; y < f1.size(); ++y) f2[y] = spectrum[y] < 0.0 ? 1 : 0;
  return f2;
}

}  // namespace

double sign_construction_phi(int n, CoinSource& coins) {
  const auto f1 = random_truth_table(n, coins);
  return forrelator(f1, sign_partner(f1));
}

Instance gen_instance(int n, Label label, CoinSource& coins, std::uint64_t max_attempts) {
  if (n < 1 || n > kMaxQubits) throw std::invalid_argument("instance size out of range");
  if (label == Label::Yes && n < 2) throw std::invalid_argument("YES instances need n >= 2");
  for (std::uint64_t attempt = 1; attempt <= max_attempts; ++attempt) {
    auto f1 = random_truth_table(n, coins);
    auto f2 = label == Label::Yes ? sign_partner(f1) : random_truth_table(n, coins);
    const double phi = forrelator(f1, f2);
    const bool ok = label == Label::Yes ? phi >= kYesThreshold : std::abs(phi) <= kNoThreshold;
    if (ok) {
      return {n, std::make_shared<BooleanOracle>(std::move(f1)), std::make_shared<BooleanOracle>(std::move(f2)), phi,
              label};
    }
  }
  throw GenerationFailed("no " + to_string(label) + " instance found in " + std::to_string(max_attempts) + " attempts",
                         max_attempts);
}

std::string to_string(Label label) { return label == Label::Yes ? "yes" : "no"; }

Label label_from_string(const std::string& text) {
  if (text == "yes" || text == "YES") return Label::Yes;
  if (text == "no" || text == "NO") return Label::No;
  throw std::invalid_argument("label must be yes or no");
}

nlohmann::json instance_to_json(const Instance& instance) {
  return {{"n", instance.n},
          {"f1", encode_truth_table(instance.f1->truth_table())},
          {"f2", encode_truth_table(instance.f2->truth_table())},
          {"phi", instance.phi},
          {"label", to_string(instance.label)}};
}

Instance instance_from_json(const nlohmann::json& doc) {
  Instance inst;
  inst.n = doc.at("n").get<int>();
  auto f1 = decode_truth_table(doc.at("f1").get<std::string>(), inst.n);
  auto f2 = decode_truth_table(doc.at("f2").get<std::string>(), inst.n);
  inst.phi = forrelator(f1, f2);
  inst.f1 = std::make_shared<BooleanOracle>(std::move(f1));
  inst.f2 = std::make_shared<BooleanOracle>(std::move(f2));
  inst.label = label_from_string(doc.at("label").get<std::string>());
  const bool holds = inst.label == Label::Yes ? inst.phi >= kYesThreshold : std::abs(inst.phi) <= kNoThreshold;
  if (!holds) throw std::invalid_argument("instance violates the promise for its label");
  return inst;
}

}  // namespace qpcp::forrelation
