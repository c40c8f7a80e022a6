#include "qpcp/adversary.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "qpcp/circuit_io.hpp"
#include "qpcp/forrelation.hpp"

namespace qpcp::adversary {

namespace {

using nlohmann::json;

std::string u128_to_hex(u128 v) {
  if (v == 0) return "0";
  std::string out;
  while (v) {
    out.push_back("0123456789abcdef"[static_cast<unsigned>(v & 0xF)]);
    v >>= 4;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

u128 u128_from_hex(std::string_view hex) {
  if (hex.starts_with("0x")) hex.remove_prefix(2);
  if (hex.empty() || hex.size() > 32) throw std::invalid_argument("raw value must have 1 to 32 hex digits");
  u128 v = 0;
  for (char c : hex) {
    unsigned d = 0;
    if (c >= '0' && c <= '9') d = static_cast<unsigned>(c - '0');
    else if (c >= 'a' && c <= 'f') d = static_cast<unsigned>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') d = static_cast<unsigned>(c - 'A' + 10);
    else throw std::invalid_argument("raw value contains a non-hex character");
    v = (v << 4) | d;
  }
  return v;
}

const Gate& gate_at(const Circuit& circuit, int segment) {
  if (segment < 1 || segment > circuit.m()) throw std::out_of_range("gate segment out of range");
  return circuit.gates[static_cast<std::size_t>(segment - 1)];
}

/// Runs fn(k) for k in [0, count) on up to `threads` workers.
template <typename Fn>
void parallel_for(std::uint64_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::uint64_t>(count, 256))));
  if (threads == 1) {
    for (std::uint64_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::uint64_t k = next++; k < count; k = next++) fn(k);
    });
  }
}

}  // namespace

std::string tamper_name(const TamperSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NoTamper>) return "none";
        else if constexpr (std::is_same_v<T, InitialStateLie>) return "initial_state_lie";
        else if constexpr (std::is_same_v<T, PhaseCorruption>) return "phase_corruption";
        else if constexpr (std::is_same_v<T, ProbCorruption>) return "prob_corruption";
        else if constexpr (std::is_same_v<T, StateSubstitution>) return "state_substitution";
        else if constexpr (std::is_same_v<T, FinalSegmentForgery>) return "final_segment_forgery";
        else return "p1_deviation";
      },
      spec);
}

json tamper_to_json(const TamperSpec& spec) {
  json out{{"kind", tamper_name(spec)}};
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, InitialStateLie>) {
          json edits = json::array();
          for (const auto& e : s.edits) edits.push_back({{"location", e.location}, {"value", mip::entry_to_hex(e.value)}});
          out["edits"] = edits;
        } else if constexpr (std::is_same_v<T, PhaseCorruption>) {
          out["segment"] = s.segment;
          out["x"] = s.x;
          out["angle"] = s.angle;
        } else if constexpr (std::is_same_v<T, ProbCorruption>) {
          out["segment"] = s.segment;
          out["prefix"] = to_bitstring(s.prefix, s.length);
          out["raw"] = u128_to_hex(s.raw);
        } else if constexpr (std::is_same_v<T, StateSubstitution>) {
          out["segment"] = s.segment;
          out["delta"] = s.delta;
          out["seed"] = to_hex(s.seed);
        } else if constexpr (std::is_same_v<T, FinalSegmentForgery>) {
          if (s.replacement) {
            json amps = json::array();
            for (Eigen::Index x = 0; x < s.replacement->size(); ++x)
              amps.push_back({(*s.replacement)(x).real(), (*s.replacement)(x).imag()});
            out["state"] = amps;
          }
        } else if constexpr (std::is_same_v<T, P1Deviation>) {
          out["position"] = s.position;
          out["value"] = mip::entry_to_hex(s.value);
        }
      },
      spec);
  return out;
}

TamperSpec tamper_from_json(const json& doc) {
  const auto kind = doc.at("kind").get<std::string>();
  if (kind == "none") return NoTamper{};
  if (kind == "initial_state_lie") {
    InitialStateLie lie;
    for (const json& e : doc.at("edits"))
      lie.edits.push_back({e.at("location").get<std::uint64_t>(), mip::entry_from_hex(e.at("value").get<std::string>())});
    return lie;
  }
  if (kind == "phase_corruption") {
    const json& x = doc.at("x");
    const Basis xv = x.is_string() ? parse_bitstring(x.get<std::string>()) : x.get<Basis>();
    return PhaseCorruption{doc.at("segment").get<int>(), xv, doc.at("angle").get<double>()};
  }
  if (kind == "prob_corruption") {
    const auto prefix = doc.at("prefix").get<std::string>();
    return ProbCorruption{doc.at("segment").get<int>(), static_cast<int>(prefix.size()), parse_bitstring(prefix),
                          u128_from_hex(doc.at("raw").get<std::string>())};
  }
  if (kind == "state_substitution") {
    StateSubstitution s{doc.at("segment").get<int>(), doc.at("delta").get<double>(), {}};
    if (doc.contains("seed")) s.seed = parse_seed(doc.at("seed").get<std::string>());
    return s;
  }
  if (kind == "final_segment_forgery") {
    FinalSegmentForgery f;
    if (doc.contains("state")) {
      const json& amps = doc.at("state");
      StateVector s(static_cast<Eigen::Index>(amps.size()));
      for (std::size_t x = 0; x < amps.size(); ++x)
        s(static_cast<Eigen::Index>(x)) = Complex(amps[x].at(0).get<double>(), amps[x].at(1).get<double>());
      f.replacement = s;
    }
    return f;
  }
  if (kind == "p1_deviation")
    return P1Deviation{doc.at("position").get<std::uint64_t>(), mip::entry_from_hex(doc.at("value").get<std::string>())};
  throw std::invalid_argument("unknown tamper kind '" + kind + "'");
}

StateVector rotate_away(const StateVector& target, double delta, CoinSource& coins) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in [0, 1]");
  if (delta == 0.0) return target;
  const int n = qubit_count(target);
  if (n == 0) throw std::invalid_argument("cannot rotate a one-dimensional state");
  StateVector r = random_state(n, coins);
  r -= target * target.dot(r);
  r.normalize();
  const double c = 1.0 - delta;
  return c * target + std::sqrt(1.0 - c * c) * r;
}

double gate_deviation(const PcpProof& proof, const Circuit& circuit, int segment) {
  const Gate& g = gate_at(circuit, segment);
  const StateVector previous = decode_state(proof, segment - 1);
  const StateVector current = decode_state(proof, segment);
  const StateVector propagated = apply_gate(previous, g, circuit.oracles);
  return std::abs(Complex(1.0, 0.0) - inner_product(current, propagated));
}

PcpProof apply_tamper(const PcpProof& proof, const Circuit& circuit, const TamperSpec& spec) {
  if (proof.qubits() != circuit.n || proof.gates() != circuit.m())
    throw std::invalid_argument("proof dimensions do not match the circuit");
  PcpProof out = proof;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, InitialStateLie>) {
          for (const auto& e : s.edits) {
            const ProofAddress a = out.layout().address(e.location);
            if (a.segment != 0) throw std::invalid_argument("initial-state edits must target segment 0");
            out.set_entry(a, e.value);
          }
        } else if constexpr (std::is_same_v<T, PhaseCorruption>) {
          if (s.segment < 0 || s.segment > out.gates() || (s.x >> out.qubits()) != 0)
            throw std::out_of_range("phase corruption address out of range");
          if (s.angle == 0.0) return;
          const auto g = decode_phase(out.phase(s.segment, s.x), out.frac_bits()) *
                         std::polar(1.0L, static_cast<long double>(s.angle));
          out.set_phase(s.segment, s.x, encode_phase(g, out.frac_bits()));
        } else if constexpr (std::is_same_v<T, ProbCorruption>) {
          out.set_prob_raw(s.segment, s.length, s.prefix, s.raw);
        } else if constexpr (std::is_same_v<T, StateSubstitution>) {
          const Gate& g = gate_at(circuit, s.segment);
          const StateVector target = apply_gate(decode_state(out, s.segment - 1), g, circuit.oracles);
          CoinSource coins(s.seed);
          encode_segment(out, s.segment, rotate_away(target, s.delta, coins));
        } else if constexpr (std::is_same_v<T, FinalSegmentForgery>) {
          const int n = out.qubits();
          const AcceptancePredicate& pred = circuit.acceptance;
          const StateVector replacement =
              s.replacement ? *s.replacement : basis_state(n, pred.prefix << (n - pred.length));
          encode_segment(out, out.gates(), replacement);
        } else if constexpr (std::is_same_v<T, P1Deviation>) {
          throw std::invalid_argument("P1Deviation tampers with the MIP first prover, not the proof");
        }
      },
      spec);
  return out;
}

PcpProof plant_drift(const PcpProof& proof, const Circuit& circuit, double delta, Seed128 seed) {
  PcpProof out = proof;
  for (int i = 1; i <= circuit.m(); ++i)
    out = apply_tamper(out, circuit, StateSubstitution{i, delta, derive_seed(seed, static_cast<std::uint64_t>(i))});
  return out;
}

// ---------------------------------------------------------------------------

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {successes == 0 ? 0.0 : std::max(0.0, centre - half),
          successes == trials ? 1.0 : std::min(1.0, centre + half)};
}

DetectionReport measure_detection(const PcpProof& proof, const Circuit& circuit, int segment, double eps,
                                  std::uint64_t samples, Seed128 seed) {
  const Gate& g = gate_at(circuit, segment);
  ProofAccess access(proof, /*record_trace=*/false);
  CoinSource coins(seed);
  DetectionReport report;
  for (std::uint64_t k = 0; k < samples; ++k) {
    const Basis x = sample_input(access, segment, coins);
    const Complex alpha = compute_amplitude(access, segment, x);
    const Complex eta = local_check_amplitude(access, circuit.oracles, segment, x, g, /*meter=*/false);
    if (std::abs(eta - alpha) >= eps) ++report.detections;
  }
  report.samples = samples;
  return report;
}

double pcp_acceptance_bound(const PcpProof& proof, const Circuit& circuit, std::uint64_t t, double eps) {
  const StateVector initial = decode_state(proof, 0);
  if (std::abs(initial(0) - Complex(1.0, 0.0)) > eps) return 0.0;
  const StateVector final_state = decode_state(proof, circuit.m());
  if (acceptance_probability(final_state, circuit.acceptance) < circuit.acceptance.threshold - eps) return 0.0;
  double worst = 0.0;
  for (int i = 1; i <= circuit.m(); ++i) worst = std::max(worst, gate_deviation(proof, circuit, i));
  // The per-sample floor δ²/10 needs δ > 2^{-n}; it is only meaningful
  // against our finite tolerance when δ is far above it.
  if (worst <= std::ldexp(1.0, -circuit.n) || worst <= 1e3 * eps) return 1.0;
  const double delta = std::min(worst, 1.0);
  return std::pow(1.0 - delta * delta / 10.0, static_cast<double>(t));
}

// ---------------------------------------------------------------------------

std::string to_string(Protocol p) { return p == Protocol::Pcp ? "pcp" : "mip"; }

std::string to_string(BoundKind k) {
  switch (k) {
    case BoundKind::Completeness: return "completeness";
    case BoundKind::PcpSoundness: return "pcp_soundness";
    case BoundKind::MipRoundSoundness: return "mip_round_soundness";
    case BoundKind::MipRepeatedSoundness: return "mip_repeated_soundness";
  }
  return "completeness";
}

bool ExperimentReport::within_bound() const {
  if (bound_kind == BoundKind::Completeness) return accepts == trials;
  return rate() <= bound + 3.0 * interval().half_width();
}

void ExperimentReport::merge(const ExperimentReport& other) {
  trials += other.trials;
  accepts += other.accepts;
  seeds.insert(seeds.end(), other.seeds.begin(), other.seeds.end());
  for (const auto& [k, v] : other.reject_reasons) reject_reasons[k] += v;
  budget_consistent = budget_consistent && other.budget_consistent;
}

ExperimentReport run_experiment(const Circuit& circuit, const PcpProof& honest_proof, const ExperimentConfig& config) {
  if (config.trials < 1) throw std::invalid_argument("experiment needs at least one trial");
  circuit.validate();
  const int b = honest_proof.frac_bits();
  const bool first_prover_lie = std::holds_alternative<P1Deviation>(config.tamper);
  const PcpProof proof = first_prover_lie ? honest_proof : apply_tamper(honest_proof, circuit, config.tamper);

  VerifierConfig pcp;
  pcp.repetitions = config.t;
  pcp.eps_check = config.eps.value_or(default_eps_check(circuit.n, b));
  pcp.record_trace = false;
  const QueryCounts expected = accepting_run_counts(circuit, config.t, b);
  const bool honest = std::holds_alternative<NoTamper>(config.tamper);

  ExperimentReport report;
  report.protocol = to_string(config.protocol);
  report.tamper = tamper_name(config.tamper);
  if (const auto* s = std::get_if<StateSubstitution>(&config.tamper))
    report.achieved_delta = gate_deviation(proof, circuit, s->segment);

  const double s_bound = honest ? 1.0 : pcp_acceptance_bound(proof, circuit, config.t, pcp.eps_check);
  if (honest) {
    report.bound_kind = BoundKind::Completeness;
    report.bound = 1.0;
  } else if (config.protocol == Protocol::Pcp) {
    report.bound_kind = BoundKind::PcpSoundness;
    report.bound = s_bound;
  } else {
    const double q = static_cast<double>(mip::answer_length(circuit, pcp, b));
    const double per_round = 1.0 - (1.0 - s_bound) / q;
    report.bound_kind = config.rounds == 1 ? BoundKind::MipRoundSoundness : BoundKind::MipRepeatedSoundness;
    report.bound = std::pow(per_round, static_cast<double>(config.rounds));
  }

  struct TrialResult {
    bool accepted = false;
    bool counts_ok = true;
    std::string reason;
  };
  std::vector<TrialResult> results(static_cast<std::size_t>(config.trials));
  report.seeds.resize(static_cast<std::size_t>(config.trials));
  for (std::uint64_t k = 0; k < config.trials; ++k) report.seeds[k] = derive_seed(config.seed, k);

  parallel_for(config.trials, config.threads, [&](std::uint64_t k) {
    TrialResult& r = results[static_cast<std::size_t>(k)];
    const Seed128 seed = report.seeds[static_cast<std::size_t>(k)];
    if (config.protocol == Protocol::Pcp) {
      ProofAccess access(proof, /*record_trace=*/false);
      VerifierConfig cfg = pcp;
      cfg.seed = seed;
      const Verdict v = verify(access, circuit, cfg);
      r.accepted = v.accepted();
      r.reason = to_string(v.reason);
      if (r.accepted)
        r.counts_ok = QueryCounts{v.stats.proof_queries, v.stats.oracle_queries, v.stats.random_bits} == expected;
    } else {
      mip::AnswerOverride lie;
      if (const auto* d = std::get_if<P1Deviation>(&config.tamper)) lie = mip::deviate_at(d->position, d->value);
      mip::ProofBackedFirstProver p1(proof, circuit, pcp, lie);
      mip::ProofBackedSecondProver p2(proof);
      mip::MipConfig mc{config.rounds, pcp};
      CoinSource coins(seed);
      const mip::ProtocolResult res = mip::run_protocol(circuit, p1, p2, mc, b, coins);
      r.accepted = res.accepted;
      if (!res.accepted) r.reason = mip::to_string(res.transcripts.back().stage);
      for (const auto& t : res.transcripts) {
        if (!t.simulation.accepted()) continue;
        const QueryCounts got{t.simulation.stats.proof_queries, t.simulation.stats.oracle_queries,
                              t.simulation.stats.random_bits};
        r.counts_ok = r.counts_ok && got == expected;
      }
    }
  });

  for (const TrialResult& r : results) {
    ++report.trials;
    if (r.accepted) ++report.accepts;
    else ++report.reject_reasons[r.reason];
    report.budget_consistent = report.budget_consistent && r.counts_ok;
  }
  return report;
}

json report_to_json(const ExperimentReport& r) {
  const WilsonInterval ci = r.interval();
  json seeds = json::array();
  for (const Seed128& s : r.seeds) seeds.push_back(to_hex(s));
  json out{{"protocol", r.protocol},
           {"tamper", r.tamper},
           {"trials", r.trials},
           {"accepts", r.accepts},
           {"accept_rate", r.rate()},
           {"wilson_low", ci.low},
           {"wilson_high", ci.high},
           {"bound_kind", to_string(r.bound_kind)},
           {"bound", r.bound},
           {"within_bound", r.within_bound()},
           {"budget_consistent", r.budget_consistent},
           {"reject_reasons", r.reject_reasons},
           {"seeds", seeds}};
  out["achieved_delta"] = r.achieved_delta ? json(*r.achieved_delta) : json(nullptr);
  return out;
}

std::string report_csv_header() {
  return "protocol,tamper,trials,accepts,accept_rate,wilson_low,wilson_high,bound_kind,bound,achieved_delta,"
         "within_bound,budget_consistent";
}

std::string report_csv_row(const ExperimentReport& r) {
  const WilsonInterval ci = r.interval();
  std::ostringstream os;
  os.precision(17);
  os << r.protocol << ',' << r.tamper << ',' << r.trials << ',' << r.accepts << ',' << r.rate() << ',' << ci.low
     << ',' << ci.high << ',' << to_string(r.bound_kind) << ',' << r.bound << ',';
  if (r.achieved_delta) os << *r.achieved_delta;
  os << ',' << (r.within_bound() ? "true" : "false") << ',' << (r.budget_consistent ? "true" : "false");
  return os.str();
}

ExperimentSpec experiment_from_json(const json& doc, const std::filesystem::path& base) {
  ExperimentSpec spec;
  auto load = [&](const json& ref) -> json {
    if (ref.is_string()) {
      std::filesystem::path p = ref.get<std::string>();
      if (p.is_relative()) p = base / p;
      return read_json_file(p);
    }
    return ref;
  };
  if (doc.contains("circuit")) {
    spec.circuit = circuit_from_json(load(doc.at("circuit")));
  } else if (doc.contains("instance")) {
    spec.circuit = forrelation::build_circuit(forrelation::instance_from_json(load(doc.at("instance"))));
  } else {
    throw std::invalid_argument("experiment config needs a circuit or an instance");
  }
  ExperimentConfig& c = spec.config;
  const auto protocol = doc.value("protocol", std::string("pcp"));
  if (protocol == "pcp" || protocol == "PCP") c.protocol = Protocol::Pcp;
  else if (protocol == "mip" || protocol == "MIP") c.protocol = Protocol::Mip;
  else throw std::invalid_argument("protocol must be pcp or mip");
  c.tamper = doc.contains("tamper") ? tamper_from_json(doc.at("tamper")) : TamperSpec{NoTamper{}};
  c.trials = doc.at("trials").get<std::uint64_t>();
  c.t = doc.at("t").get<std::uint64_t>();
  c.b = doc.value("b", kDefaultFracBits);
  c.rounds = doc.value("rounds", std::uint64_t{1});
  if (doc.contains("eps")) c.eps = doc.at("eps").get<double>();
  c.seed = parse_seed(doc.value("seed", std::string("0")));
  check_frac_bits(c.b);
  if (c.trials < 1 || c.t < 1 || c.rounds < 1) throw std::invalid_argument("trials, t and rounds must be positive");
  if (std::holds_alternative<P1Deviation>(c.tamper) && c.protocol != Protocol::Mip)
    throw std::invalid_argument("p1_deviation needs protocol mip");
  return spec;
}

}  // namespace qpcp::adversary
