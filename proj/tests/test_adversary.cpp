#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qpcp/adversary.hpp"
#include "qpcp/forrelation.hpp"
#include "test_support.hpp"

namespace qpcp::adversary {
namespace {

struct History {
  Circuit circuit;
  std::vector<StateVector> states;
  PcpProof proof;
};

History make(const Circuit& c, int b = 96) {
  auto states = simulate(c);
  PcpProof proof = build_honest_proof(states, b);
  return {c, std::move(states), std::move(proof)};
}

/// |1 − ⟨ψ̃_i|G_i ψ̃_{i−1}⟩| through the Kronecker-product oracle.
double deviation_oracle(const PcpProof& proof, const Circuit& c, int i) {
  const StateVector prev = decode_state(proof, i - 1);
  const StateVector propagated = oracle::apply(prev, c.gates[static_cast<std::size_t>(i - 1)], c.oracles);
  return std::abs(Complex(1.0) - oracle::inner(decode_state(proof, i), propagated));
}

Verdict run_verify(const PcpProof& proof, const Circuit& c, std::uint64_t t, Seed128 seed) {
  VerifierConfig cfg = default_verifier_config(c, proof.frac_bits(), seed);
  cfg.repetitions = t;
  cfg.record_trace = false;
  ProofAccess access(proof, false);
  return verify(access, c, cfg);
}

TEST(ApplyTamper, NullTamperIsIdentity) {
  CoinSource coins(Seed128{0, 71});
  const History h = make(testing::random_circuit(3, 6, coins));
  EXPECT_TRUE(apply_tamper(h.proof, h.circuit, NoTamper{}) == h.proof);
  EXPECT_TRUE(apply_tamper(h.proof, h.circuit, InitialStateLie{}) == h.proof);
  EXPECT_TRUE(apply_tamper(h.proof, h.circuit, PhaseCorruption{2, 1, 0.0}) == h.proof);
}

TEST(ApplyTamper, OnlyNamedSegmentsChange) {
  CoinSource coins(Seed128{0, 72});
  const History h = make(testing::random_circuit(3, 6, coins));
  const int m = h.circuit.m();
  const std::vector<std::pair<TamperSpec, int>> cases{
      {PhaseCorruption{2, 5, 1.0}, 2},
      {ProbCorruption{4, 1, 1, 12345}, 4},
      {StateSubstitution{3, 0.2, Seed128{1, 1}}, 3},
      {FinalSegmentForgery{}, m},
      {InitialStateLie{{EntryEdit{2, Entry{7, 0}}}}, 0},
  };
  for (const auto& [spec, segment] : cases) {
    const PcpProof t = apply_tamper(h.proof, h.circuit, spec);
    EXPECT_FALSE(t.segment_equal(h.proof, segment)) << tamper_name(spec);
    for (int seg = 0; seg <= m; ++seg)
      if (seg != segment) EXPECT_TRUE(t.segment_equal(h.proof, seg)) << tamper_name(spec) << " seg " << seg;
  }
}

TEST(ApplyTamper, InvalidSpecsThrow) {
  CoinSource coins(Seed128{0, 73});
  const History h = make(testing::random_circuit(2, 3, coins));
  EXPECT_THROW(apply_tamper(h.proof, h.circuit, PhaseCorruption{9, 0, 1.0}), std::out_of_range);
  EXPECT_THROW(apply_tamper(h.proof, h.circuit, StateSubstitution{0, 0.1, {}}), std::out_of_range);
  EXPECT_THROW(apply_tamper(h.proof, h.circuit, StateSubstitution{1, 1.5, {}}), std::invalid_argument);
  EXPECT_THROW(apply_tamper(h.proof, h.circuit, InitialStateLie{{EntryEdit{h.proof.layout().segment_size(), {}}}}),
               std::invalid_argument);
  EXPECT_THROW(apply_tamper(h.proof, h.circuit, P1Deviation{}), std::invalid_argument);
}

TEST(ApplyTamper, InitialPhaseFlipRejectsAtStepOne) {
  CoinSource coins(Seed128{0, 74});
  const History h = make(testing::random_circuit(3, 5, coins));
  const PcpProof t = apply_tamper(h.proof, h.circuit, PhaseCorruption{0, 0, std::numbers::pi});
  for (std::uint64_t s = 0; s < 20; ++s)
    EXPECT_EQ(run_verify(t, h.circuit, 10, Seed128{0, s}).reason, RejectReason::InitialStateMismatch);
}

TEST(StateSubstitution, ZeroDeltaKeepsFidelity) {
  CoinSource coins(Seed128{0, 75});
  const History h = make(testing::random_circuit(3, 6, coins));
  const PcpProof t = apply_tamper(h.proof, h.circuit, StateSubstitution{4, 0.0, Seed128{2, 2}});
  EXPECT_NEAR(std::abs(oracle::inner(decode_state(t, 4), h.states[4])), 1.0, 1e-12);
  for (std::uint64_t s = 0; s < 20; ++s) EXPECT_TRUE(run_verify(t, h.circuit, 20, Seed128{1, s}).accepted());
}

TEST(StateSubstitution, CalibratedDeviation) {
  CoinSource coins(Seed128{0, 76});
  const History h = make(testing::random_circuit(4, 10, coins));
  for (int i = 1; i <= 10; ++i) {
    const PcpProof t = apply_tamper(h.proof, h.circuit, StateSubstitution{i, 0.1, Seed128{3, static_cast<std::uint64_t>(i)}});
    const double d = deviation_oracle(t, h.circuit, i);
    EXPECT_GE(d, 0.099);
    EXPECT_LE(d, 0.101);
    EXPECT_NEAR(gate_deviation(t, h.circuit, i), d, 1e-9);
  }
}

TEST(RotateAway, ExactOverlap) {
  CoinSource coins(Seed128{0, 77});
  for (double delta : {0.0, 0.01, 0.3, 1.0}) {
    const StateVector target = random_state(4, coins);
    const StateVector r = rotate_away(target, delta, coins);
    EXPECT_NEAR(r.norm(), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(oracle::inner(r, target) - Complex(1.0 - delta)), 0.0, 1e-12);
  }
}

TEST(Propagation, DriftBoundAtEveryGate) {
  CoinSource coins(Seed128{0, 78});
  const double delta = 0.01;
  const History h = make(testing::random_circuit(4, 10, coins));
  const PcpProof drifted = plant_drift(h.proof, h.circuit, delta, Seed128{4, 4});
  for (int i = 1; i <= 10; ++i) {
    EXPECT_NEAR(gate_deviation(drifted, h.circuit, i), delta, 1e-6);
    const double dist = (decode_state(drifted, i) - h.states[static_cast<std::size_t>(i)]).norm();
    EXPECT_LE(dist, i * std::sqrt(2 * delta) + 1e-12);
  }
}

TEST(Detection, FinalSegmentForgeryCaughtAtLastGate) {
  CoinSource coins(Seed128{0, 79});
  const auto inst = forrelation::gen_instance(3, forrelation::Label::No, coins);
  const History h = make(forrelation::build_circuit(inst));
  const PcpProof forged = apply_tamper(h.proof, h.circuit, FinalSegmentForgery{});
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Verdict v = run_verify(forged, h.circuit, 200, Seed128{5, s});
    EXPECT_EQ(v.reason, RejectReason::PropagationMismatch);
    EXPECT_EQ(v.gate_index, h.circuit.m());
  }
}

TEST(Detection, NoInstanceRejectedUnderEveryVariant) {
  CoinSource coins(Seed128{0, 80});
  const auto inst = forrelation::gen_instance(2, forrelation::Label::No, coins);
  const History h = make(forrelation::build_circuit(inst));
  const int m = h.circuit.m();
  std::vector<PcpProof> variants{h.proof};
  variants.push_back(apply_tamper(h.proof, h.circuit, FinalSegmentForgery{}));
  StateVector uniform = StateVector::Constant(4, Complex(0.5));
  variants.push_back(apply_tamper(h.proof, h.circuit, FinalSegmentForgery{uniform}));
  // Root probability of the last segment forced to "first bit is 0".
  variants.push_back(apply_tamper(h.proof, h.circuit, ProbCorruption{m, 0, 0, 0}));
  PcpProof both = apply_tamper(h.proof, h.circuit, ProbCorruption{m, 0, 0, 0});
  both = apply_tamper(both, h.circuit, ProbCorruption{m, 1, 0, 0});
  variants.push_back(both);
  for (std::uint64_t k = 0; k < 3; ++k)
    variants.push_back(apply_tamper(h.proof, h.circuit, StateSubstitution{m, 0.3 + 0.2 * k, Seed128{6, k}}));
  variants.push_back(plant_drift(h.proof, h.circuit, 0.05, Seed128{7, 7}));
  variants.push_back(apply_tamper(h.proof, h.circuit, PhaseCorruption{m, 0, 2.0}));
  variants.push_back(apply_tamper(plant_drift(h.proof, h.circuit, 0.2, Seed128{8, 8}), h.circuit, FinalSegmentForgery{}));
  ASSERT_EQ(variants.size(), 11U);
  for (std::size_t v = 0; v < variants.size(); ++v) {
    int accepted = 0;
    for (std::uint64_t s = 0; s < 1000; ++s)
      if (run_verify(variants[v], h.circuit, 30, Seed128{9, s}).accepted()) ++accepted;
    EXPECT_LE(accepted, 1) << "variant " << v;
  }
}

TEST(Detection, PerSampleRateAboveFloor) {
  CoinSource coins(Seed128{0, 81});
  const History h = make(testing::random_circuit(5, 6, coins));
  for (double delta : {0.05, 0.1, 0.3}) {
    const PcpProof t = apply_tamper(h.proof, h.circuit, StateSubstitution{3, delta, Seed128{10, 1}});
    const DetectionReport r =
        measure_detection(t, h.circuit, 3, default_eps_check(5, 96), 20000, Seed128{11, 1});
    EXPECT_GE(r.interval().high, delta * delta / 10) << delta;
  }
}

TEST(Wilson, KnownValues) {
  const WilsonInterval w = wilson_interval(0, 100);
  EXPECT_EQ(w.low, 0.0);
  EXPECT_NEAR(w.high, 0.037, 1e-3);
  const WilsonInterval h = wilson_interval(50, 100);
  EXPECT_NEAR(h.low, 0.4038, 1e-4);
  EXPECT_NEAR(h.high, 0.5962, 1e-4);
  const WilsonInterval all = wilson_interval(10, 10);
  EXPECT_EQ(all.high, 1.0);
}

TEST(Bound, AcceptanceBoundCases) {
  CoinSource coins(Seed128{0, 82});
  const History h = make(testing::random_circuit(4, 6, coins));
  const double eps = default_eps_check(4, 96);
  EXPECT_EQ(pcp_acceptance_bound(h.proof, h.circuit, 100, eps), 1.0);
  const PcpProof flipped = apply_tamper(h.proof, h.circuit, PhaseCorruption{0, 0, std::numbers::pi});
  EXPECT_EQ(pcp_acceptance_bound(flipped, h.circuit, 100, eps), 0.0);
  const PcpProof sub = apply_tamper(h.proof, h.circuit, StateSubstitution{2, 0.1, Seed128{1, 2}});
  EXPECT_NEAR(pcp_acceptance_bound(sub, h.circuit, 4000, eps), std::pow(1 - 0.001, 4000), 1e-5);
  // Below 2^{-n} the floor does not apply.
  const PcpProof small = apply_tamper(h.proof, h.circuit, StateSubstitution{2, 0.05, Seed128{1, 2}});
  EXPECT_EQ(pcp_acceptance_bound(small, h.circuit, 4000, eps), 1.0);
}

TEST(Experiment, HonestCompleteness) {
  CoinSource coins(Seed128{0, 83});
  const History h = make(testing::random_circuit(3, 5, coins));
  ExperimentConfig cfg;
  cfg.trials = 500;
  cfg.t = 5;
  cfg.seed = Seed128{12, 0};
  const ExperimentReport r = run_experiment(h.circuit, h.proof, cfg);
  EXPECT_EQ(r.accepts, 500U);
  EXPECT_TRUE(r.budget_consistent);
  EXPECT_TRUE(r.within_bound());
  EXPECT_EQ(r.bound_kind, BoundKind::Completeness);
  EXPECT_EQ(r.seeds.size(), 500U);
}

TEST(Experiment, ReproducibleAndThreadIndependent) {
  CoinSource coins(Seed128{0, 84});
  const History h = make(testing::random_circuit(3, 5, coins));
  ExperimentConfig cfg;
  cfg.trials = 200;
  cfg.t = 50;
  cfg.tamper = StateSubstitution{2, 0.05, Seed128{1, 3}};
  cfg.seed = Seed128{13, 0};
  const auto one = report_to_json(run_experiment(h.circuit, h.proof, cfg));
  cfg.threads = 4;
  const auto four = report_to_json(run_experiment(h.circuit, h.proof, cfg));
  EXPECT_EQ(one, four);
}

TEST(Experiment, SoundnessWithinBound) {
  CoinSource coins(Seed128{0, 85});
  const History h = make(testing::random_circuit(4, 4, coins));
  ExperimentConfig cfg;
  cfg.trials = 300;
  cfg.t = 400;
  cfg.tamper = StateSubstitution{2, 0.1, Seed128{1, 4}};
  cfg.seed = Seed128{14, 0};
  const ExperimentReport r = run_experiment(h.circuit, h.proof, cfg);
  EXPECT_EQ(r.bound_kind, BoundKind::PcpSoundness);
  EXPECT_TRUE(r.within_bound());
  ASSERT_TRUE(r.achieved_delta.has_value());
  EXPECT_NEAR(*r.achieved_delta, 0.1, 1e-3);
}

TEST(Experiment, MipFirstLieWithinRoundBound) {
  Circuit c;
  c.n = 2;
  c.gates = {gates::single(0, gates::hadamard()), gates::two(0, 1, gates::cnot())};
  c.acceptance = {1, 0, 0.5};
  const History h = make(c);
  ExperimentConfig cfg;
  cfg.protocol = Protocol::Mip;
  cfg.trials = 300;
  cfg.t = 1;
  cfg.tamper = P1Deviation{3, Entry{i128{2} << 96, 0}};
  cfg.seed = Seed128{15, 0};
  const ExperimentReport r = run_experiment(h.circuit, h.proof, cfg);
  EXPECT_EQ(r.bound_kind, BoundKind::MipRoundSoundness);
  EXPECT_LT(r.accepts, 300U);
  EXPECT_TRUE(r.budget_consistent);
}

TEST(Report, MergeIsAssociativeAndCommutative) {
  auto rep = [](std::uint64_t trials, std::uint64_t accepts, std::uint64_t rejects) {
    ExperimentReport r;
    r.trials = trials;
    r.accepts = accepts;
    if (rejects) r.reject_reasons["PropagationMismatch"] = rejects;
    return r;
  };
  ExperimentReport a = rep(10, 4, 6), b = rep(5, 5, 0), c = rep(7, 0, 7);
  ExperimentReport left = a;
  left.merge(b);
  left.merge(c);
  ExperimentReport bc = b;
  bc.merge(c);
  ExperimentReport right = a;
  right.merge(bc);
  ExperimentReport swapped = c;
  swapped.merge(a);
  swapped.merge(b);
  for (const auto* r : {&right, &swapped}) {
    EXPECT_EQ(left.trials, r->trials);
    EXPECT_EQ(left.accepts, r->accepts);
    EXPECT_EQ(left.reject_reasons, r->reject_reasons);
  }
}

TEST(Serialization, TamperJsonRoundTrip) {
  const std::vector<TamperSpec> specs{NoTamper{},
                                      InitialStateLie{{EntryEdit{3, Entry{-1, 2}}}},
                                      PhaseCorruption{2, 5, 0.5},
                                      ProbCorruption{1, 2, 3, 77},
                                      StateSubstitution{4, 0.1, Seed128{9, 9}},
                                      FinalSegmentForgery{},
                                      P1Deviation{3, Entry{5, 6}}};
  for (const auto& spec : specs) {
    const auto j = tamper_to_json(spec);
    EXPECT_EQ(tamper_to_json(tamper_from_json(nlohmann::json::parse(j.dump()))), j);
  }
  EXPECT_THROW(tamper_from_json(nlohmann::json{{"kind", "bogus"}}), std::invalid_argument);
}

TEST(Serialization, ExperimentConfigParsing) {
  const nlohmann::json doc = nlohmann::json::parse(R"({
    "protocol": "pcp",
    "circuit": {"n": 1, "gates": [{"type": "single", "q": 0, "matrix": [1, 0, 0, 1]}],
                "acceptance": {"prefix": "0", "threshold": 0.5}},
    "tamper": {"kind": "state_substitution", "segment": 1, "delta": 0.1, "seed": "ab"},
    "trials": 10, "t": 20, "b": 64, "seed": "ff"})");
  const ExperimentSpec spec = experiment_from_json(doc, ".");
  EXPECT_EQ(spec.circuit.n, 1);
  EXPECT_EQ(spec.config.trials, 10U);
  EXPECT_EQ(spec.config.b, 64);
  EXPECT_EQ(spec.config.seed, (Seed128{0, 255}));
  EXPECT_EQ(tamper_name(spec.config.tamper), "state_substitution");
  nlohmann::json bad = doc;
  bad["trials"] = 0;
  EXPECT_THROW(experiment_from_json(bad, "."), std::invalid_argument);
}

TEST(Report, CsvColumns) {
  ExperimentReport r;
  r.protocol = "pcp";
  r.tamper = "none";
  r.trials = 4;
  r.accepts = 4;
  const std::string header = report_csv_header();
  EXPECT_EQ(header.substr(0, 24), "protocol,tamper,trials,a");
  const std::string row = report_csv_row(r);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(header.begin(), header.end(), ','));
}

}  // namespace
}  // namespace qpcp::adversary
