#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "qpcp/adversary.hpp"
#include "qpcp/circuit_io.hpp"
#include "qpcp/forrelation.hpp"
#include "qpcp/mip.hpp"
#include "qpcp/proof_io.hpp"
#include "qpcp/verifier.hpp"

namespace {

using nlohmann::json;
using namespace qpcp;

constexpr int kExitAccept = 0;
constexpr int kExitReject = 1;
constexpr int kExitError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string seed = "0";
  unsigned threads = 1;
  std::string log_level = "warn";
  bool human = false;
};

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

void emit(const json& doc) { std::cout << doc.dump() << '\n'; }

Seed128 seed_of(const Globals& g) {
  try {
    return parse_seed(g.seed);
  } catch (const std::exception& e) {
    throw UsageError(std::string("--seed: ") + e.what());
  }
}

std::vector<StateVector> history(const Circuit& circuit) {
  circuit.validate();
  return simulate(circuit);
}

int cmd_simulate(const Globals& g, const std::string& circuit_path) {
  const Circuit circuit = load_circuit(circuit_path);
  const auto states = history(circuit);
  const double p = acceptance_probability(states.back(), circuit.acceptance);
  if (g.human) {
    std::printf("n=%d m=%d prefix=%s threshold=%.6f\n", circuit.n, circuit.m(),
                to_bitstring(circuit.acceptance.prefix, circuit.acceptance.length).c_str(),
                circuit.acceptance.threshold);
    std::printf("acceptance probability %.15f\n", p);
  } else {
    emit({{"acceptance_probability", p},
          {"threshold", circuit.acceptance.threshold},
          {"accepting", p >= circuit.acceptance.threshold}});
  }
  return kExitAccept;
}

int cmd_prove(const Globals& g, const std::string& circuit_path, const std::string& out, int b,
              std::uint64_t max_bytes) {
  check_frac_bits(b);
  const Circuit circuit = load_circuit(circuit_path);
  circuit.validate();
  const std::uint64_t bytes = proof_file_size(circuit.n, circuit.m(), b);
  if (bytes > max_bytes)
    throw UsageError("proof would take " + std::to_string(bytes) + " bytes, above the cap of " +
                     std::to_string(max_bytes));
  spdlog::info("building proof: n={} m={} b={} ({} bytes)", circuit.n, circuit.m(), b, bytes);
  const PcpProof proof = build_honest_proof(simulate(circuit), b);
  save_proof(proof, out);
  if (g.human)
    std::printf("wrote %s (%llu bytes, %llu entries)\n", out.c_str(), static_cast<unsigned long long>(bytes),
                static_cast<unsigned long long>(proof.layout().size()));
  else
    emit({{"path", out}, {"bytes", bytes}, {"entries", proof.layout().size()}, {"n", circuit.n},
          {"m", circuit.m()}, {"b", b}});
  return kExitAccept;
}

int cmd_verify(const Globals& g, const std::string& circuit_path, const std::string& proof_path,
               std::optional<std::uint64_t> t, std::optional<double> eps) {
  const Circuit circuit = load_circuit(circuit_path);
  circuit.validate();
  const PcpProof proof = load_proof(proof_path);
  if (proof.qubits() != circuit.n || proof.gates() != circuit.m())
    throw UsageError("proof dimensions do not match the circuit");
  VerifierConfig cfg = default_verifier_config(circuit, proof.frac_bits(), seed_of(g));
  if (t) cfg.repetitions = *t;
  if (eps) cfg.eps_check = *eps;
  cfg.record_trace = false;
  if (cfg.repetitions < 1) throw UsageError("--t must be positive");
  spdlog::info("verifying with t={} eps={}", cfg.repetitions, cfg.eps_check);
  ProofAccess access(proof, false);
  const Verdict v = verify(access, circuit, cfg);
  if (g.human) {
    std::printf("%s", v.accepted() ? "accept\n" : "reject\n");
    if (!v.accepted()) std::printf("reason %s\n", to_string(v.reason).c_str());
    std::printf("proof queries %llu, oracle queries %llu, random bits %llu\n",
                static_cast<unsigned long long>(v.stats.proof_queries),
                static_cast<unsigned long long>(v.stats.oracle_queries),
                static_cast<unsigned long long>(v.stats.random_bits));
  } else {
    emit(verdict_to_json(v));
  }
  return v.accepted() ? kExitAccept : kExitReject;
}

int cmd_mip(const Globals& g, const std::string& circuit_path, std::uint64_t rounds,
            const std::optional<std::string>& tamper_path, std::uint64_t pcp_t, int b,
            const std::optional<std::string>& out) {
  check_frac_bits(b);
  if (rounds < 1 || pcp_t < 1) throw UsageError("--rounds and --pcp-t must be positive");
  const Circuit circuit = load_circuit(circuit_path);
  const PcpProof honest = build_honest_proof(history(circuit), b);
  adversary::TamperSpec tamper = adversary::NoTamper{};
  if (tamper_path) tamper = adversary::tamper_from_json(read_json_file(*tamper_path));

  mip::AnswerOverride lie;
  std::optional<PcpProof> tampered;
  if (const auto* d = std::get_if<adversary::P1Deviation>(&tamper)) lie = mip::deviate_at(d->position, d->value);
  else tampered = adversary::apply_tamper(honest, circuit, tamper);
  const PcpProof& proof = tampered ? *tampered : honest;

  mip::MipConfig cfg;
  cfg.rounds = rounds;
  cfg.pcp.repetitions = pcp_t;
  cfg.pcp.eps_check = default_eps_check(circuit.n, b);
  cfg.pcp.record_trace = false;
  mip::ProofBackedFirstProver p1(proof, circuit, cfg.pcp, lie);
  mip::ProofBackedSecondProver p2(proof);
  CoinSource coins(seed_of(g));
  const mip::ProtocolResult res = mip::run_protocol(circuit, p1, p2, cfg, b, coins);

  std::ostringstream lines;
  for (const auto& t : res.transcripts) lines << mip::transcript_to_json(t).dump() << '\n';
  const json summary{{"accepted", res.accepted},
                     {"rounds_run", res.rounds_run},
                     {"rounds", rounds},
                     {"q_pi", mip::answer_length(circuit, cfg.pcp, b)},
                     {"communication_bits", res.communication_bits},
                     {"oracle_queries", res.oracle_queries},
                     {"random_bits", res.random_bits},
                     {"tamper", adversary::tamper_name(tamper)}};
  if (out) {
    write_text_file(*out, lines.str());
    if (g.human)
      std::printf("%s after %llu of %llu rounds\n", res.accepted ? "accept" : "reject",
                  static_cast<unsigned long long>(res.rounds_run), static_cast<unsigned long long>(rounds));
    else
      emit(summary);
  } else {
    std::cout << lines.str();
  }
  return res.accepted ? kExitAccept : kExitReject;
}

int cmd_forrelation_gen(const Globals& g, int n, const std::string& label, const std::string& out) {
  if (n < 1 || n > kMaxQubits) throw UsageError("--n out of range");
  forrelation::Label l;
  try {
    l = forrelation::label_from_string(label);
  } catch (const std::exception& e) {
    throw UsageError(std::string("--label: ") + e.what());
  }
  CoinSource coins(seed_of(g));
  const forrelation::Instance inst = forrelation::gen_instance(n, l, coins);
  write_text_file(out, forrelation::instance_to_json(inst).dump(2) + "\n");
  if (g.human) std::printf("%s instance, n=%d, phi=%.12f\n", label.c_str(), n, inst.phi);
  else emit({{"path", out}, {"n", n}, {"label", forrelation::to_string(inst.label)}, {"phi", inst.phi}});
  return kExitAccept;
}

int cmd_forrelation_circuit(const Globals& g, const std::string& inst_path, const std::string& out) {
  const forrelation::Instance inst = forrelation::instance_from_json(read_json_file(inst_path));
  const Circuit circuit = forrelation::build_circuit(inst);
  save_circuit(circuit, out);
  if (g.human) std::printf("wrote %s: n=%d, %d gates\n", out.c_str(), circuit.n, circuit.m());
  else emit({{"path", out}, {"n", circuit.n}, {"m", circuit.m()}});
  return kExitAccept;
}

int cmd_experiment(const Globals& g, const std::string& config_path, const std::optional<std::string>& out) {
  const std::filesystem::path path(config_path);
  const json doc = read_json_file(path);
  adversary::ExperimentSpec spec = adversary::experiment_from_json(doc, path.parent_path());
  if (!doc.contains("seed")) spec.config.seed = seed_of(g);
  spec.config.threads = doc.value("threads", g.threads);
  const PcpProof honest = build_honest_proof(history(spec.circuit), spec.config.b);
  const adversary::ExperimentReport report = adversary::run_experiment(spec.circuit, honest, spec.config);
  const std::string csv = adversary::report_csv_header() + "\n" + adversary::report_csv_row(report) + "\n";
  if (out) write_text_file(*out, csv);
  if (g.human) {
    const auto ci = report.interval();
    std::printf("%s/%s: %llu of %llu accepted (rate %.6f, 95%% CI [%.6f, %.6f]); %s bound %.6g %s\n",
                report.protocol.c_str(), report.tamper.c_str(), static_cast<unsigned long long>(report.accepts),
                static_cast<unsigned long long>(report.trials), report.rate(), ci.low, ci.high,
                adversary::to_string(report.bound_kind).c_str(), report.bound,
                report.within_bound() ? "respected" : "VIOLATED");
  } else if (out) {
    json summary = adversary::report_to_json(report);
    summary.erase("seeds");
    emit(summary);
  } else {
    std::cout << csv;
  }
  return kExitAccept;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exponential-size PCP and two-prover protocol for quantum circuits"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "128-bit seed in hex")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads for experiment trials")->check(CLI::PositiveNumber);
  app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error|off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));
  app.add_flag("--human", g.human, "human-readable output");

  std::string circuit_path, proof_path, out, inst_path, config_path, label;
  std::optional<std::string> opt_out, tamper_path;
  int bits = kDefaultFracBits;
  int n = 0;
  std::uint64_t max_bytes = std::uint64_t{4} << 30;
  std::optional<std::uint64_t> t;
  std::optional<double> eps;
  std::uint64_t rounds = 1, pcp_t = 1;

  auto* simulate_cmd = app.add_subcommand("simulate", "print the final acceptance probability");
  simulate_cmd->add_option("circuit", circuit_path)->required();

  auto* prove_cmd = app.add_subcommand("prove", "write the honest proof");
  prove_cmd->add_option("circuit", circuit_path)->required();
  prove_cmd->add_option("-o,--output", out)->required();
  prove_cmd->add_option("--bits", bits, "fraction bits b");
  prove_cmd->add_option("--max-bytes", max_bytes, "refuse proofs larger than this");

  auto* verify_cmd = app.add_subcommand("verify", "run the PCP verifier; exit 0 on accept, 1 on reject");
  verify_cmd->add_option("circuit", circuit_path)->required();
  verify_cmd->add_option("proof", proof_path)->required();
  verify_cmd->add_option("--t", t, "samples per gate");
  verify_cmd->add_option("--eps", eps, "local check tolerance");

  auto* mip_cmd = app.add_subcommand("mip", "run the two-prover protocol; transcripts as JSON lines");
  mip_cmd->add_option("circuit", circuit_path)->required();
  mip_cmd->add_option("--rounds", rounds, "sequential repetitions");
  mip_cmd->add_option("--tamper", tamper_path, "tamper spec JSON");
  mip_cmd->add_option("--pcp-t", pcp_t, "samples per gate in the simulated verifier");
  mip_cmd->add_option("--bits", bits, "fraction bits b");
  mip_cmd->add_option("-o,--output", opt_out, "transcript file");

  auto* forr_cmd = app.add_subcommand("forrelation", "forrelation instances");
  forr_cmd->require_subcommand(1);
  auto* gen_cmd = forr_cmd->add_subcommand("gen", "sample a promise instance");
  gen_cmd->add_option("--n", n)->required();
  gen_cmd->add_option("--label", label)->required();
  gen_cmd->add_option("-o,--output", out)->required();
  auto* circ_cmd = forr_cmd->add_subcommand("circuit", "emit the circuit of an instance");
  circ_cmd->add_option("instance", inst_path)->required();
  circ_cmd->add_option("-o,--output", out)->required();

  auto* exp_cmd = app.add_subcommand("experiment", "run a seeded experiment and write a CSV report");
  exp_cmd->add_option("config", config_path)->required();
  exp_cmd->add_option("-o,--output", opt_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return kExitError;
  }

  auto logger = spdlog::stderr_color_mt("qpcp");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(g.log_level));

  try {
    if (*simulate_cmd) return cmd_simulate(g, circuit_path);
    if (*prove_cmd) return cmd_prove(g, circuit_path, out, bits, max_bytes);
    if (*verify_cmd) return cmd_verify(g, circuit_path, proof_path, t, eps);
    if (*mip_cmd) return cmd_mip(g, circuit_path, rounds, tamper_path, pcp_t, bits, opt_out);
    if (*gen_cmd) return cmd_forrelation_gen(g, n, label, out);
    if (*circ_cmd) return cmd_forrelation_circuit(g, inst_path, out);
    if (*exp_cmd) return cmd_experiment(g, config_path, opt_out);
  } catch (const UsageError& e) {
    print_error("usage", e.what());
  } catch (const ProofFormatError& e) {
    print_error("proof_format", e.what());
  } catch (const forrelation::GenerationFailed& e) {
    print_error("generation_failed", e.what());
  } catch (const nlohmann::json::exception& e) {
    print_error("json", e.what());
  } catch (const std::exception& e) {
    print_error("invalid", e.what());
  }
  return kExitError;
}
